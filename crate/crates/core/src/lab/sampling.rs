//! Seeded random profiles and the maximizer-set comparison with MNW.

use num_bigint::BigInt;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::LabError;
use crate::model::Profile;
use crate::scalar::Rational;
use crate::solver::{maximizers, mnw_maximizers, MaximizerSet};
use crate::welfare::WelfareExpr;

/// Draws per profile before giving up.
const MAX_RETRIES: usize = 10_000;

/// Some allocation gives every agent positive utility, i.e. agents can be
/// matched to distinct goods they value.
pub fn admits_positive_allocation(profile: &Profile) -> bool {
    let (n, m) = (profile.n(), profile.m());
    if m < n {
        return false;
    }
    // Kuhn's augmenting paths.
    let mut owner: Vec<Option<usize>> = vec![None; m];
    fn augment(
        profile: &Profile,
        agent: usize,
        seen: &mut [bool],
        owner: &mut [Option<usize>],
    ) -> bool {
        for g in 0..profile.m() {
            if seen[g] || *profile.utility(agent, g) <= Rational::from_integer(BigInt::ZERO) {
                continue;
            }
            seen[g] = true;
            if owner[g].is_none_or(|other| augment(profile, other, seen, owner)) {
                owner[g] = Some(agent);
                return true;
            }
        }
        false
    }
    (0..n).all(|agent| augment(profile, agent, &mut vec![false; m], &mut owner))
}

/// Integer utilities drawn uniformly from `0..=max_utility`.
pub fn random_profile<R: Rng>(
    rng: &mut R,
    n: usize,
    m: usize,
    max_utility: u32,
) -> Result<Profile, LabError> {
    let rows = (0..n)
        .map(|_| {
            (0..m)
                .map(|_| Rational::from_integer(BigInt::from(rng.random_range(0..=max_utility))))
                .collect()
        })
        .collect();
    Ok(Profile::from_rows(rows)?)
}

/// Rejection-samples [`random_profile`] until it admits an all-positive
/// allocation.
pub fn random_positive_profile<R: Rng>(
    rng: &mut R,
    n: usize,
    m: usize,
    max_utility: u32,
) -> Result<Profile, LabError> {
    for _ in 0..MAX_RETRIES {
        let profile = random_profile(rng, n, m, max_utility)?;
        if admits_positive_allocation(&profile) {
            return Ok(profile);
        }
    }
    Err(LabError::SamplingExhausted(MAX_RETRIES))
}

#[derive(Debug, Clone, PartialEq)]
#[allow(clippy::large_enum_variant)] // returned once per run
pub enum EquivalenceOutcome {
    Pass {
        trials: usize,
    },
    Witness {
        trial: usize,
        profile: Profile,
        welfare_set: MaximizerSet<Rational>,
        mnw_set: MaximizerSet<Rational>,
    },
}

/// Checks that `f` and MNW select the same allocations on random profiles
/// with utilities in `0..=10`.
pub fn equivalence_with_mnw(
    f: &WelfareExpr,
    trials: usize,
    seed: u64,
    n: usize,
    m: usize,
) -> Result<EquivalenceOutcome, LabError> {
    if n < 2 || m < n {
        return Err(LabError::InvalidArgument(format!(
            "need n >= 2 and m >= n for an all-positive allocation, got n = {n}, m = {m}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for trial in 0..trials {
        let profile = random_positive_profile(&mut rng, n, m, 10)?;
        let welfare_set = maximizers(&profile, f)?;
        let mnw_set = mnw_maximizers(&profile)?;
        if !welfare_set.same_allocations(&mnw_set) {
            return Ok(EquivalenceOutcome::Witness {
                trial,
                profile,
                welfare_set,
                mnw_set,
            });
        }
    }
    Ok(EquivalenceOutcome::Pass { trials })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::int;

    fn profile(rows: Vec<Vec<i64>>) -> Profile {
        Profile::from_rows(
            rows.into_iter()
                .map(|r| r.into_iter().map(int).collect())
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn matching_detects_positive_allocations() {
        assert!(admits_positive_allocation(&profile(vec![
            vec![1, 1, 0],
            vec![1, 0, 0],
            vec![0, 0, 3]
        ])));
        assert!(!admits_positive_allocation(&profile(vec![
            vec![1, 0, 0],
            vec![1, 0, 0],
            vec![0, 0, 3]
        ])));
        assert!(!admits_positive_allocation(&profile(vec![
            vec![1],
            vec![1]
        ])));
        // Needs an augmenting path: agent 1 must give up good 1.
        assert!(admits_positive_allocation(&profile(vec![
            vec![1, 1],
            vec![1, 0]
        ])));
    }

    #[test]
    fn sampling_is_seeded() {
        let draw = |seed| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            random_positive_profile(&mut rng, 3, 5, 10).unwrap()
        };
        assert_eq!(draw(11), draw(11));
        assert!(admits_positive_allocation(&draw(12)));
    }

    #[test]
    fn equivalence_examples() {
        let cube = WelfareExpr::nash_power(&int(3));
        assert_eq!(
            equivalence_with_mnw(&cube, 50, 1, 2, 5).unwrap(),
            EquivalenceOutcome::Pass { trials: 50 }
        );
        assert!(matches!(
            equivalence_with_mnw(&WelfareExpr::utilitarian(), 200, 1, 2, 4).unwrap(),
            EquivalenceOutcome::Witness { .. }
        ));
        assert!(equivalence_with_mnw(&cube, 1, 1, 3, 2).is_err());
    }
}
