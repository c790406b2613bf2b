//! Depth-first branch and bound over good assignments.
//!
//! Goods are assigned in index order, each to agents `0..n` in turn. A
//! subtree is cut when its optimistic bound cannot strictly beat the
//! incumbent, so the first optimum met in that order is returned.
//!
//! Bounds: for `sum(u)` every remaining good goes to its highest valuer;
//! for `prod(u)` and `sum(log(u))` each agent is granted all remaining goods
//! and the product of those utilities is the bound. Since `log` is
//! increasing and `log 0 = -inf`, the log objective shares the product's
//! argmax and is searched as a product.

use crate::model::{Allocation, Profile};
use crate::scalar::Utility;
use crate::welfare::Family;

struct Search<'a, U> {
    profile: &'a Profile<U>,
    family: Family,
    owners: Vec<usize>,
    current: Vec<U>,
    /// `remaining[i][g]`: agent `i`'s value for goods `g..m`.
    remaining: Vec<Vec<U>>,
    /// `best_remaining[g]`: sum over goods `g..m` of the highest valuation.
    best_remaining: Vec<U>,
    incumbent: Option<(U, Vec<usize>)>,
}

impl<U: Utility> Search<'_, U> {
    fn objective(&self, utilities: &[U]) -> U {
        match self.family {
            Family::Utilitarian => utilities.iter().cloned().fold(U::zero(), |a, b| a + b),
            Family::Nash | Family::LogNash => {
                utilities.iter().cloned().fold(U::one(), |a, b| a * b)
            }
        }
    }

    fn bound(&self, next_good: usize) -> U {
        match self.family {
            Family::Utilitarian => {
                self.objective(&self.current) + self.best_remaining[next_good].clone()
            }
            Family::Nash | Family::LogNash => self
                .current
                .iter()
                .zip(&self.remaining)
                .map(|(u, rest)| u.clone() + rest[next_good].clone())
                .fold(U::one(), |a, b| a * b),
        }
    }

    fn visit(&mut self, good: usize) {
        let m = self.profile.m();
        if good == m {
            let value = self.objective(&self.current);
            let improves = match &self.incumbent {
                None => true,
                Some((best, _)) => value > *best,
            };
            if improves {
                self.incumbent = Some((value, self.owners.clone()));
            }
            return;
        }
        if let Some((best, _)) = &self.incumbent {
            if self.bound(good) <= *best {
                return;
            }
        }
        for agent in 0..self.profile.n() {
            let u = self.profile.utility(agent, good).clone();
            self.owners[good] = agent;
            self.current[agent] = self.current[agent].clone() + u.clone();
            self.visit(good + 1);
            self.current[agent] = self.current[agent].clone() - u;
        }
    }
}

/// An optimal allocation for one of the supported families.
pub fn branch_and_bound<U: Utility>(profile: &Profile<U>, family: Family) -> Allocation {
    let (n, m) = (profile.n(), profile.m());
    let remaining: Vec<Vec<U>> = (0..n)
        .map(|i| {
            let mut suffix = vec![U::zero(); m + 1];
            for g in (0..m).rev() {
                suffix[g] = suffix[g + 1].clone() + profile.utility(i, g).clone();
            }
            suffix
        })
        .collect();
    let mut best_remaining = vec![U::zero(); m + 1];
    for g in (0..m).rev() {
        let top = (0..n)
            .map(|i| profile.utility(i, g).clone())
            .reduce(|a, b| if b > a { b } else { a })
            .unwrap_or_else(U::zero);
        best_remaining[g] = best_remaining[g + 1].clone() + top;
    }
    let mut search = Search {
        profile,
        family,
        owners: vec![0; m],
        current: vec![U::zero(); n],
        remaining,
        best_remaining,
        incumbent: None,
    };
    search.visit(0);
    let (_, owners) = search.incumbent.expect("at least one leaf is visited");
    Allocation::from_owners(&owners, n).expect("owners are agent indices")
}
