//! Envy and envy-freeness up to one good (EF1).
//!
//! Agent `i` is EF1 towards `j` when `A_j` is empty or some good `g` in
//! `A_j` satisfies `u_i(A_i) >= u_i(A_j \ {g})`. Removing the good `i`
//! values most is the best shot, so one comparison per ordered pair
//! decides it.

use std::fmt;

use crate::model::{Allocation, ModelError, Profile};
use crate::scalar::Utility;

/// Why agent `envious` is not EF1 towards agent `envied`.
#[derive(Debug, Clone, PartialEq)]
pub struct Ef1Violation<U> {
    pub envious: usize,
    pub envied: usize,
    /// The good in `A_envied` that `envious` values most.
    pub best_removable: Option<usize>,
    /// `u_i(A_j \ {best}) - u_i(A_i)`, strictly positive.
    pub residual_envy: U,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Ef1Report<U> {
    pub holds: bool,
    pub violations: Vec<Ef1Violation<U>>,
}

impl<U: Utility> fmt::Display for Ef1Report<U> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.holds {
            return f.write_str("EF1");
        }
        f.write_str("not EF1:")?;
        for v in &self.violations {
            write!(
                f,
                " agent {} envies agent {} by {} after removing ",
                v.envious + 1,
                v.envied + 1,
                v.residual_envy.render()
            )?;
            match v.best_removable {
                Some(g) => write!(f, "g{};", g + 1)?,
                None => f.write_str("nothing;")?,
            }
        }
        Ok(())
    }
}

/// `u_i(A_j) - u_i(A_i)`; negative when `i` prefers its own bundle.
pub fn envy_amount<U: Utility>(
    profile: &Profile<U>,
    alloc: &Allocation,
    i: usize,
    j: usize,
) -> Result<U, ModelError> {
    check_shape(profile, alloc)?;
    for agent in [i, j] {
        if agent >= profile.n() {
            return Err(ModelError::AgentOutOfRange {
                index: agent,
                n: profile.n(),
            });
        }
    }
    Ok(profile.bundle_utility(i, alloc.bundle(j))? - profile.bundle_utility(i, alloc.bundle(i))?)
}

/// Checks every ordered pair and lists all violations.
pub fn is_ef1<U: Utility>(
    profile: &Profile<U>,
    alloc: &Allocation,
) -> Result<Ef1Report<U>, ModelError> {
    check_shape(profile, alloc)?;
    let n = profile.n();
    let mut violations = Vec::new();
    for i in 0..n {
        let own = profile.bundle_utility(i, alloc.bundle(i))?;
        let row = profile.row(i);
        for j in (0..n).filter(|&j| j != i) {
            let theirs = alloc.bundle(j);
            let Some(&best) = theirs
                .iter()
                .reduce(|a, b| if row[*b] > row[*a] { b } else { a })
            else {
                continue;
            };
            let remaining = profile.bundle_utility(i, theirs)? - row[best].clone();
            if remaining > own {
                violations.push(Ef1Violation {
                    envious: i,
                    envied: j,
                    best_removable: Some(best),
                    residual_envy: remaining - own.clone(),
                });
            }
        }
    }
    Ok(Ef1Report {
        holds: violations.is_empty(),
        violations,
    })
}

fn check_shape<U: Utility>(profile: &Profile<U>, alloc: &Allocation) -> Result<(), ModelError> {
    if alloc.n() != profile.n() || alloc.num_goods() != profile.m() {
        return Err(ModelError::NotAPartition(format!(
            "allocation has {} bundles over {} goods; profile has {} agents and {} goods",
            alloc.n(),
            alloc.num_goods(),
            profile.n(),
            profile.m()
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{int, ratio, Rational};

    fn profile(rows: Vec<Vec<Rational>>) -> Profile<Rational> {
        Profile::from_rows(rows).unwrap()
    }

    fn gadget() -> Profile<Rational> {
        profile(vec![
            vec![int(1), int(1), ratio(1, 2)],
            vec![int(2), int(2), int(0)],
        ])
    }

    #[test]
    fn envy_amounts() {
        let p = profile(vec![vec![int(2), int(1)], vec![int(1), int(2)]]);
        let a = Allocation::new(vec![vec![0], vec![1]], 2).unwrap();
        assert_eq!(envy_amount(&p, &a, 0, 0).unwrap(), int(0));
        assert_eq!(envy_amount(&p, &a, 0, 1).unwrap(), int(-1));

        let b = Allocation::new(vec![vec![2], vec![0, 1]], 3).unwrap();
        assert_eq!(envy_amount(&gadget(), &b, 0, 1).unwrap(), ratio(3, 2));
        assert!(envy_amount(&gadget(), &b, 0, 2).is_err());
    }

    #[test]
    fn zero_valuer_is_never_envious() {
        let p = profile(vec![vec![int(3), int(1)], vec![int(0), int(0)]]);
        let a = Allocation::new(vec![vec![0, 1], vec![]], 2).unwrap();
        assert!(is_ef1(&p, &a).unwrap().holds);
    }

    #[test]
    fn two_goods_to_one_agent_violates() {
        let p = profile(vec![vec![int(1), int(1)], vec![int(1), int(1)]]);
        let a = Allocation::new(vec![vec![0, 1], vec![]], 2).unwrap();
        let report = is_ef1(&p, &a).unwrap();
        assert!(!report.holds);
        assert_eq!(report.violations.len(), 1);
        let v = &report.violations[0];
        assert_eq!((v.envious, v.envied), (1, 0));
        assert_eq!(v.residual_envy, int(1));
    }

    #[test]
    fn utilitarian_gadget_maximizer_is_not_ef1() {
        let a = Allocation::new(vec![vec![2], vec![0, 1]], 3).unwrap();
        let report = is_ef1(&gadget(), &a).unwrap();
        assert!(!report.holds);
        assert_eq!(report.violations.len(), 1);
        let v = &report.violations[0];
        assert_eq!((v.envious, v.envied), (0, 1));
        assert_eq!(v.residual_envy, ratio(1, 2));
        assert!(report.to_string().contains("agent 1 envies agent 2 by 1/2"));
    }

    #[test]
    fn mismatched_allocation_is_an_error() {
        let a = Allocation::new(vec![vec![0], vec![1]], 2).unwrap();
        assert!(is_ef1(&gadget(), &a).is_err());
    }
}
