//! Exact welfarist optimisation.
//!
//! [`maximizers`] enumerates every allocation and returns the full set of
//! welfare maximizers, which is what "can be chosen by the rule" ranges
//! over. [`mnw_maximizers`] does the same for maximum Nash welfare with the
//! lexicographic tie-break of [`MnwKey`]. [`solve_one`] returns a single
//! optimum, optionally by branch and bound.

mod branch_bound;

use std::cmp::Ordering;
use std::collections::BTreeSet;
use std::fmt;

use rayon::prelude::*;
use thiserror::Error;

use crate::model::{
    advance_owners, enumerate_allocations, Allocation, AllocationSpace, ModelError, Profile,
    UtilityVector, DEFAULT_ENUMERATION_CAP,
};
use crate::scalar::Utility;
use crate::welfare::{mnw_key, Backend, ExtendedValue, MnwKey, WelfareError, WelfareExpr};

pub use branch_bound::branch_and_bound;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SolverError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Welfare(#[from] WelfareError),
    #[error("branch and bound supports sum(u), prod(u) and sum(log(u)), not {0}")]
    UnsupportedFamily(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Strategy {
    Brute,
    BranchBound,
}

/// Enumeration limits.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SolveOptions {
    /// Refuse search spaces with more than this many allocations.
    pub cap: u64,
    /// Number of index ranges the enumeration is split into. The result
    /// does not depend on it.
    pub partitions: usize,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            cap: DEFAULT_ENUMERATION_CAP,
            partitions: rayon::current_num_threads(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Maximizer<U> {
    pub allocation: Allocation,
    pub utilities: UtilityVector<U>,
}

/// Every allocation attaining the optimal welfare.
#[derive(Debug, Clone, PartialEq)]
pub struct MaximizerSet<U> {
    /// Optimal welfare. For [`mnw_maximizers`] this is the plain product.
    pub welfare_value: ExtendedValue,
    /// Optimal lexicographic key, for [`mnw_maximizers`] only.
    pub mnw_key: Option<MnwKey<U>>,
    /// Maximizers in enumeration order.
    pub members: Vec<Maximizer<U>>,
    /// Every allocation was examined.
    pub exhaustive: bool,
    pub backend: Backend,
    /// Some member ties the optimum only within the float tolerance.
    pub ties_within_tolerance: bool,
}

impl<U: Utility> MaximizerSet<U> {
    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn allocations(&self) -> impl Iterator<Item = &Allocation> {
        self.members.iter().map(|m| &m.allocation)
    }

    pub fn allocation_set(&self) -> BTreeSet<Allocation> {
        self.allocations().cloned().collect()
    }

    pub fn contains(&self, alloc: &Allocation) -> bool {
        self.allocations().any(|a| a == alloc)
    }

    /// Same allocations, irrespective of order and values.
    pub fn same_allocations<V: Utility>(&self, other: &MaximizerSet<V>) -> bool {
        self.allocation_set() == other.allocation_set()
    }
}

impl<U: Utility> fmt::Display for MaximizerSet<U> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "welfare {}", self.welfare_value)?;
        if let Some(key) = &self.mnw_key {
            write!(f, ", key {key}")?;
        }
        writeln!(
            f,
            ", {} maximizer(s) [{}]",
            self.members.len(),
            self.backend
        )?;
        for m in &self.members {
            writeln!(f, "  {} utilities {}", m.allocation, m.utilities)?;
        }
        Ok(())
    }
}

/// A welfare objective for the enumerator.
trait Objective<U>: Sync {
    type Value: Clone + Send;

    fn value(&self, utilities: &[U]) -> Result<Self::Value, SolverError>;

    /// Tolerant three-way comparison; the flag marks a tolerance tie.
    fn compare(&self, a: &Self::Value, b: &Self::Value) -> (Ordering, bool);

    /// Untolerated order, used to pick the representative optimum.
    fn strictly_greater(&self, a: &Self::Value, b: &Self::Value) -> bool;
}

struct Welfarist<'a>(&'a WelfareExpr);

impl<U: Utility> Objective<U> for Welfarist<'_> {
    type Value = ExtendedValue;

    fn value(&self, utilities: &[U]) -> Result<ExtendedValue, SolverError> {
        Ok(self.0.evaluate(utilities)?)
    }

    fn compare(&self, a: &ExtendedValue, b: &ExtendedValue) -> (Ordering, bool) {
        a.compare(b)
    }

    fn strictly_greater(&self, a: &ExtendedValue, b: &ExtendedValue) -> bool {
        a.compare_strict(b) == Ordering::Greater
    }
}

struct MaxNash;

impl<U: Utility> Objective<U> for MaxNash {
    type Value = MnwKey<U>;

    fn value(&self, utilities: &[U]) -> Result<MnwKey<U>, SolverError> {
        Ok(mnw_key(utilities))
    }

    fn compare(&self, a: &MnwKey<U>, b: &MnwKey<U>) -> (Ordering, bool) {
        (a.partial_cmp(b).unwrap_or(Ordering::Equal), false)
    }

    fn strictly_greater(&self, a: &MnwKey<U>, b: &MnwKey<U>) -> bool {
        a > b
    }
}

/// Best members of one index range.
struct Partial<V> {
    best: Option<V>,
    members: Vec<(u64, V)>,
}

impl<V: Clone> Partial<V> {
    fn new() -> Self {
        Self {
            best: None,
            members: Vec::new(),
        }
    }

    fn offer<U, O: Objective<U, Value = V>>(&mut self, objective: &O, index: u64, value: V) {
        let Some(best) = &self.best else {
            self.best = Some(value.clone());
            self.members.push((index, value));
            return;
        };
        match objective.compare(&value, best).0 {
            Ordering::Less => {}
            Ordering::Equal => {
                let raise = objective.strictly_greater(&value, best);
                self.members.push((index, value.clone()));
                if raise {
                    self.best = Some(value);
                    self.prune(objective);
                }
            }
            Ordering::Greater => {
                self.best = Some(value.clone());
                self.prune(objective);
                self.members.push((index, value));
            }
        }
    }

    fn prune<U, O: Objective<U, Value = V>>(&mut self, objective: &O) {
        if let Some(best) = &self.best {
            self.members
                .retain(|(_, v)| objective.compare(v, best).0 != Ordering::Less);
        }
    }
}

fn scan_range<U: Utility, O: Objective<U>>(
    profile: &Profile<U>,
    space: &AllocationSpace,
    range: std::ops::Range<u64>,
    objective: &O,
) -> Result<Partial<O::Value>, SolverError> {
    let mut partial = Partial::new();
    if range.is_empty() {
        return Ok(partial);
    }
    let n = profile.n();
    let mut owners = space.owners_at(range.start);
    let mut utilities = profile.utilities_of_owners(&owners);
    let mut changed = Vec::with_capacity(profile.m());
    for index in range.clone() {
        partial.offer(objective, index, objective.value(&utilities)?);
        if index + 1 == range.end {
            break;
        }
        advance_owners(&mut owners, n, &mut changed);
        if U::EXACT {
            for &(g, old, new) in &changed {
                utilities[old] = utilities[old].clone() - profile.utility(old, g).clone();
                utilities[new] = utilities[new].clone() + profile.utility(new, g).clone();
            }
        } else {
            utilities = profile.utilities_of_owners(&owners);
        }
    }
    Ok(partial)
}

/// Best value, every `(index, value)` tying with it, and whether a tie was
/// decided by tolerance.
type Best<V> = (V, Vec<(u64, V)>, bool);

fn enumerate_best<U: Utility, O: Objective<U>>(
    profile: &Profile<U>,
    objective: &O,
    options: &SolveOptions,
) -> Result<Best<O::Value>, SolverError> {
    let space = enumerate_allocations(profile.n(), profile.m(), options.cap)?;
    let partials = space
        .partition(options.partitions)
        .into_par_iter()
        .map(|range| scan_range(profile, &space, range, objective))
        .collect::<Result<Vec<_>, _>>()?;
    let mut merged = Partial::new();
    for partial in partials {
        for (index, value) in partial.members {
            merged.offer(objective, index, value);
        }
    }
    merged.prune(objective);
    merged.members.sort_by_key(|(index, _)| *index);
    let best = merged.best.expect("the allocation space is never empty");
    let tolerant = merged
        .members
        .iter()
        .any(|(_, v)| objective.compare(v, &best).1);
    Ok((best, merged.members, tolerant))
}

fn members<U: Utility>(
    profile: &Profile<U>,
    space: &AllocationSpace,
    found: &[(u64, impl Sized)],
) -> Result<Vec<Maximizer<U>>, SolverError> {
    found
        .iter()
        .map(|(index, _)| {
            let allocation = space.get(*index);
            let utilities = profile.utility_vector(&allocation)?;
            Ok(Maximizer {
                allocation,
                utilities,
            })
        })
        .collect()
}

/// All welfare maximizers of `f`, with the default cap.
pub fn maximizers<U: Utility>(
    profile: &Profile<U>,
    f: &WelfareExpr,
) -> Result<MaximizerSet<U>, SolverError> {
    maximizers_with(profile, f, &SolveOptions::default())
}

pub fn maximizers_with<U: Utility>(
    profile: &Profile<U>,
    f: &WelfareExpr,
    options: &SolveOptions,
) -> Result<MaximizerSet<U>, SolverError> {
    let (best, found, tolerant) = enumerate_best(profile, &Welfarist(f), options)?;
    let space = enumerate_allocations(profile.n(), profile.m(), options.cap)?;
    Ok(MaximizerSet {
        welfare_value: best,
        mnw_key: None,
        members: members(profile, &space, &found)?,
        exhaustive: true,
        backend: f.backend(),
        ties_within_tolerance: tolerant,
    })
}

/// Maximum Nash welfare maximizers: most agents with positive utility
/// first, then the largest product over those agents.
pub fn mnw_maximizers<U: Utility>(profile: &Profile<U>) -> Result<MaximizerSet<U>, SolverError> {
    mnw_maximizers_with(profile, &SolveOptions::default())
}

pub fn mnw_maximizers_with<U: Utility>(
    profile: &Profile<U>,
    options: &SolveOptions,
) -> Result<MaximizerSet<U>, SolverError> {
    let (best, found, _) = enumerate_best(profile, &MaxNash, options)?;
    let space = enumerate_allocations(profile.n(), profile.m(), options.cap)?;
    let product = if best.positive_count == profile.n() {
        best.positive_product.to_rational()
    } else {
        num_traits::Zero::zero()
    };
    Ok(MaximizerSet {
        welfare_value: ExtendedValue::exact(product),
        mnw_key: Some(best),
        members: members(profile, &space, &found)?,
        exhaustive: true,
        backend: if U::EXACT {
            Backend::Exact
        } else {
            Backend::Double
        },
        ties_within_tolerance: false,
    })
}

/// One optimal allocation. Deterministic for a fixed good order.
pub fn solve_one<U: Utility>(
    profile: &Profile<U>,
    f: &WelfareExpr,
    strategy: Strategy,
) -> Result<Allocation, SolverError> {
    match strategy {
        Strategy::Brute => Ok(maximizers(profile, f)?
            .members
            .into_iter()
            .next()
            .expect("maximizer sets are nonempty")
            .allocation),
        Strategy::BranchBound => {
            let family = f
                .family()
                .ok_or_else(|| SolverError::UnsupportedFamily(f.to_string()))?;
            Ok(branch_and_bound(profile, family))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{int, ratio, Rational};

    fn profile(rows: Vec<Vec<i64>>) -> Profile<Rational> {
        Profile::from_rows(
            rows.into_iter()
                .map(|r| r.into_iter().map(int).collect())
                .collect(),
        )
        .unwrap()
    }

    fn alloc(bundles: Vec<Vec<usize>>, m: usize) -> Allocation {
        Allocation::new(bundles, m).unwrap()
    }

    #[test]
    fn no_goods_single_empty_allocation() {
        let p = profile(vec![vec![], vec![]]);
        for f in [
            WelfareExpr::nash(),
            WelfareExpr::utilitarian(),
            WelfareExpr::log_nash(),
        ] {
            let set = maximizers(&p, &f).unwrap();
            assert_eq!(set.len(), 1);
            assert_eq!(set.members[0].allocation, alloc(vec![vec![], vec![]], 0));
        }
    }

    #[test]
    fn nash_unique_maximizer() {
        let p = profile(vec![vec![2, 1], vec![1, 2]]);
        let set = maximizers(&p, &WelfareExpr::nash()).unwrap();
        assert_eq!(
            set.allocation_set(),
            BTreeSet::from([alloc(vec![vec![0], vec![1]], 2)])
        );
        assert_eq!(set.welfare_value, ExtendedValue::exact(int(4)));
        assert!(set.exhaustive);
    }

    #[test]
    fn utilitarian_gadget_maximizer() {
        let p = Profile::from_rows(vec![
            vec![int(1), int(1), ratio(1, 2)],
            vec![int(2), int(2), int(0)],
        ])
        .unwrap();
        let set = maximizers(&p, &WelfareExpr::utilitarian()).unwrap();
        assert_eq!(set.len(), 1);
        assert_eq!(
            set.members[0].allocation,
            alloc(vec![vec![2], vec![0, 1]], 3)
        );
        assert_eq!(set.welfare_value, ExtendedValue::exact(ratio(9, 2)));
    }

    #[test]
    fn mnw_examples() {
        let degenerate = profile(vec![vec![1], vec![0]]);
        let set = mnw_maximizers(&degenerate).unwrap();
        assert_eq!(
            set.allocation_set(),
            BTreeSet::from([alloc(vec![vec![0], vec![]], 1)])
        );
        assert_eq!(set.mnw_key.as_ref().unwrap().positive_count, 1);

        let set = mnw_maximizers(&profile(vec![vec![2, 1], vec![1, 2]])).unwrap();
        assert_eq!(
            set.allocation_set(),
            BTreeSet::from([alloc(vec![vec![0], vec![1]], 2)])
        );
        assert_eq!(set.welfare_value, ExtendedValue::exact(int(4)));

        let set = mnw_maximizers(&profile(vec![vec![1, 1], vec![1, 1]])).unwrap();
        assert_eq!(
            set.allocation_set(),
            BTreeSet::from([
                alloc(vec![vec![0], vec![1]], 2),
                alloc(vec![vec![1], vec![0]], 2)
            ])
        );
        assert_eq!(set.welfare_value, ExtendedValue::exact(int(1)));
    }

    #[test]
    fn partitioning_does_not_change_the_answer() {
        let p = profile(vec![
            vec![3, 1, 4, 1, 5],
            vec![9, 2, 6, 5, 3],
            vec![5, 8, 9, 7, 9],
        ]);
        let f = WelfareExpr::log_nash();
        let one = maximizers_with(
            &p,
            &f,
            &SolveOptions {
                partitions: 1,
                ..Default::default()
            },
        )
        .unwrap();
        for partitions in [2, 5, 17, 1000] {
            let other = maximizers_with(
                &p,
                &f,
                &SolveOptions {
                    partitions,
                    ..Default::default()
                },
            )
            .unwrap();
            assert_eq!(one, other);
        }
    }

    #[test]
    fn float_profiles_use_the_same_solver() {
        let p: Profile<f64> = Profile::from_rows(vec![vec![2.0, 1.0], vec![1.0, 2.0]]).unwrap();
        let set = mnw_maximizers(&p).unwrap();
        assert_eq!(
            set.allocation_set(),
            BTreeSet::from([alloc(vec![vec![0], vec![1]], 2)])
        );
        let exact = maximizers(&p, &WelfareExpr::nash()).unwrap();
        assert!(exact.same_allocations(&set));
        let single = p.map_utilities(|&u| u as f32);
        assert!(mnw_maximizers(&single).unwrap().same_allocations(&set));
    }

    #[test]
    fn cap_is_enforced() {
        let p = profile(vec![vec![1; 10], vec![1; 10]]);
        let options = SolveOptions {
            cap: 1000,
            ..Default::default()
        };
        assert!(matches!(
            maximizers_with(&p, &WelfareExpr::nash(), &options),
            Err(SolverError::Model(ModelError::Capacity { .. }))
        ));
    }

    #[test]
    fn solve_one_strategies() {
        let p = profile(vec![vec![1; 12], vec![1; 12]]);
        let f = WelfareExpr::utilitarian();
        let a = solve_one(&p, &f, Strategy::BranchBound).unwrap();
        assert_eq!(
            f.evaluate(&p.utility_vector(&a).unwrap()).unwrap(),
            ExtendedValue::exact(int(12))
        );
        let q = profile(vec![vec![2, 1], vec![1, 2]]);
        let brute = solve_one(&q, &WelfareExpr::nash(), Strategy::Brute).unwrap();
        assert!(maximizers(&q, &WelfareExpr::nash())
            .unwrap()
            .contains(&brute));
        assert!(matches!(
            solve_one(&q, &WelfareExpr::egalitarian(), Strategy::BranchBound),
            Err(SolverError::UnsupportedFamily(_))
        ));
    }
}
