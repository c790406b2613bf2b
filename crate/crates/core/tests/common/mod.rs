//! Independent brute-force reference implementations. Nothing here calls
//! the solver, the enumerator or the EF1 checker of the crate under test.
#![allow(dead_code)]

use num_bigint::BigInt;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use welfarist_core::{Profile, Rational};

pub fn int(v: i64) -> Rational {
    Rational::from_integer(BigInt::from(v))
}

pub fn ints(v: &[i64]) -> Vec<Rational> {
    v.iter().map(|&x| int(x)).collect()
}

pub fn profile(rows: &[&[i64]]) -> Profile {
    Profile::from_rows(rows.iter().map(|r| ints(r)).collect()).unwrap()
}

/// Every owner assignment, by recursion rather than an odometer.
pub fn all_owner_vectors(n: usize, m: usize) -> Vec<Vec<usize>> {
    if m == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for rest in all_owner_vectors(n, m - 1) {
        for agent in 0..n {
            let mut v = rest.clone();
            v.push(agent);
            out.push(v);
        }
    }
    out
}

pub fn bundles_of(owners: &[usize], n: usize) -> Vec<Vec<usize>> {
    let mut bundles = vec![Vec::new(); n];
    for (g, &a) in owners.iter().enumerate() {
        bundles[a].push(g);
    }
    bundles
}

pub fn value(profile: &Profile, agent: usize, bundle: &[usize]) -> Rational {
    bundle
        .iter()
        .fold(Rational::zero(), |acc, &g| acc + profile.utility(agent, g))
}

pub fn utilities(profile: &Profile, bundles: &[Vec<usize>]) -> Vec<Rational> {
    (0..profile.n())
        .map(|i| value(profile, i, &bundles[i]))
        .collect()
}

/// EF1 by expanding the quantifiers: for all i, j, bundle j is empty or
/// there exists a good whose removal kills the envy.
pub fn ef1_oracle(profile: &Profile, bundles: &[Vec<usize>]) -> bool {
    let n = profile.n();
    (0..n).all(|i| {
        (0..n).all(|j| {
            i == j
                || bundles[j].is_empty()
                || bundles[j].iter().any(|&removed| {
                    let rest: Vec<usize> = bundles[j]
                        .iter()
                        .copied()
                        .filter(|&g| g != removed)
                        .collect();
                    value(profile, i, &bundles[i]) >= value(profile, i, &rest)
                })
        })
    })
}

/// All owner vectors maximizing `objective`, which must be exactly ordered.
pub fn argmax_oracle<T: PartialOrd + Clone>(
    profile: &Profile,
    objective: impl Fn(&[Rational]) -> T,
) -> Vec<Vec<Vec<usize>>> {
    let (n, m) = (profile.n(), profile.m());
    let scored: Vec<(T, Vec<Vec<usize>>)> = all_owner_vectors(n, m)
        .into_iter()
        .map(|o| {
            let b = bundles_of(&o, n);
            (objective(&utilities(profile, &b)), b)
        })
        .collect();
    let best = scored
        .iter()
        .map(|(v, _)| v.clone())
        .reduce(|a, b| if b > a { b } else { a })
        .unwrap();
    let mut out: Vec<_> = scored
        .into_iter()
        .filter(|(v, _)| *v == best)
        .map(|(_, b)| b)
        .collect();
    out.sort();
    out
}

pub fn product(u: &[Rational]) -> Rational {
    u.iter().fold(Rational::one(), |a, b| a * b)
}

pub fn sum(u: &[Rational]) -> Rational {
    u.iter().fold(Rational::zero(), |a, b| a + b)
}

/// Degenerate-case MNW order: (number of positive agents, their product).
pub fn mnw_oracle_key(u: &[Rational]) -> (usize, Rational) {
    let positive: Vec<Rational> = u
        .iter()
        .filter(|v| **v > Rational::zero())
        .cloned()
        .collect();
    (positive.len(), product(&positive))
}

/// Positive allocation exists iff some owner vector gives everyone > 0.
pub fn admits_positive_oracle(profile: &Profile) -> bool {
    let n = profile.n();
    all_owner_vectors(n, profile.m()).iter().any(|o| {
        utilities(profile, &bundles_of(o, n))
            .iter()
            .all(|v| *v > Rational::zero())
    })
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_rows(rng: &mut ChaCha8Rng, n: usize, m: usize, max: i64) -> Profile {
    Profile::from_rows(
        (0..n)
            .map(|_| (0..m).map(|_| int(rng.random_range(0..=max))).collect())
            .collect(),
    )
    .unwrap()
}

pub fn random_owners(rng: &mut ChaCha8Rng, n: usize, m: usize) -> Vec<usize> {
    (0..m).map(|_| rng.random_range(0..n)).collect()
}
