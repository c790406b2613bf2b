//! Profiles, allocations and utility vectors.
//!
//! Agents and goods are addressed by zero-based index; names only matter at
//! the document boundary (see [`document`]).

mod document;
mod enumerate;

use std::collections::HashSet;
use std::fmt;
use std::ops::Deref;

use thiserror::Error;

use crate::scalar::{Rational, Utility};

pub use document::{
    parse_allocation, parse_profile, serialize_allocation, serialize_profile, DocumentError,
};
pub(crate) use enumerate::advance_owners;
pub use enumerate::{
    enumerate_allocations, AllocationIter, AllocationSpace, DEFAULT_ENUMERATION_CAP,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("a profile needs at least 2 agents, got {0}")]
    TooFewAgents(usize),
    #[error("agent index {index} out of range for {n} agents")]
    AgentOutOfRange { index: usize, n: usize },
    #[error("good index {index} out of range for {m} goods")]
    GoodOutOfRange { index: usize, m: usize },
    #[error("utility matrix shape mismatch: {0}")]
    DimensionMismatch(String),
    #[error("negative utility {value} for agent {agent}, good {good}")]
    NegativeUtility {
        agent: usize,
        good: usize,
        value: String,
    },
    #[error("duplicate {kind} name {name:?}")]
    DuplicateName { kind: &'static str, name: String },
    #[error("not an ordered partition: {0}")]
    NotAPartition(String),
    #[error("enumeration of {requested} allocations exceeds the cap of {cap}")]
    Capacity { requested: u128, cap: u64 },
}

/// Agents, goods and an additive utility matrix (`utilities[i][g] = u_i(g)`).
#[derive(Debug, Clone, PartialEq)]
pub struct Profile<U = Rational> {
    agent_names: Vec<String>,
    good_names: Vec<String>,
    utilities: Vec<Vec<U>>,
}

impl<U: Utility> Profile<U> {
    pub fn new(
        agent_names: Vec<String>,
        good_names: Vec<String>,
        utilities: Vec<Vec<U>>,
    ) -> Result<Self, ModelError> {
        let n = agent_names.len();
        let m = good_names.len();
        if n < 2 {
            return Err(ModelError::TooFewAgents(n));
        }
        check_distinct("agent", &agent_names)?;
        check_distinct("good", &good_names)?;
        if utilities.len() != n {
            return Err(ModelError::DimensionMismatch(format!(
                "{} utility rows for {n} agents",
                utilities.len()
            )));
        }
        for (agent, row) in utilities.iter().enumerate() {
            if row.len() != m {
                return Err(ModelError::DimensionMismatch(format!(
                    "row {agent} has {} entries for {m} goods",
                    row.len()
                )));
            }
            if let Some(good) = row.iter().position(Utility::is_negative_value) {
                return Err(ModelError::NegativeUtility {
                    agent,
                    good,
                    value: row[good].render(),
                });
            }
        }
        Ok(Self {
            agent_names,
            good_names,
            utilities,
        })
    }

    /// Builds a profile with default names `a1..an` and `g1..gm`.
    pub fn from_rows(utilities: Vec<Vec<U>>) -> Result<Self, ModelError> {
        let n = utilities.len();
        let m = utilities.first().map_or(0, Vec::len);
        Self::new(default_names("a", n), default_names("g", m), utilities)
    }

    pub fn n(&self) -> usize {
        self.agent_names.len()
    }

    pub fn m(&self) -> usize {
        self.good_names.len()
    }

    pub fn agent_names(&self) -> &[String] {
        &self.agent_names
    }

    pub fn good_names(&self) -> &[String] {
        &self.good_names
    }

    pub fn utilities(&self) -> &[Vec<U>] {
        &self.utilities
    }

    pub fn row(&self, agent: usize) -> &[U] {
        &self.utilities[agent]
    }

    /// `u_agent(good)`. Panics on out-of-range indices.
    pub fn utility(&self, agent: usize, good: usize) -> &U {
        &self.utilities[agent][good]
    }

    /// Additive utility of `agent` for `bundle`.
    pub fn bundle_utility(&self, agent: usize, bundle: &[usize]) -> Result<U, ModelError> {
        let row = self
            .utilities
            .get(agent)
            .ok_or(ModelError::AgentOutOfRange {
                index: agent,
                n: self.n(),
            })?;
        bundle.iter().try_fold(U::zero(), |acc, &g| {
            row.get(g)
                .map(|u| acc + u.clone())
                .ok_or(ModelError::GoodOutOfRange {
                    index: g,
                    m: self.m(),
                })
        })
    }

    /// `(u_1(A_1), ..., u_n(A_n))`.
    pub fn utility_vector(&self, alloc: &Allocation) -> Result<UtilityVector<U>, ModelError> {
        if alloc.n() != self.n() {
            return Err(ModelError::NotAPartition(format!(
                "{} bundles for {} agents",
                alloc.n(),
                self.n()
            )));
        }
        if alloc.num_goods() != self.m() {
            return Err(ModelError::NotAPartition(format!(
                "allocation covers {} goods, profile has {}",
                alloc.num_goods(),
                self.m()
            )));
        }
        alloc
            .bundles()
            .iter()
            .enumerate()
            .map(|(i, b)| self.bundle_utility(i, b))
            .collect::<Result<Vec<_>, _>>()
            .map(UtilityVector)
    }

    /// Utility vector for an owner assignment (`owners[g]` holds good `g`).
    pub(crate) fn utilities_of_owners(&self, owners: &[usize]) -> Vec<U> {
        let mut values = vec![U::zero(); self.n()];
        for (g, &owner) in owners.iter().enumerate() {
            values[owner] = values[owner].clone() + self.utilities[owner][g].clone();
        }
        values
    }

    /// Same profile with every utility converted to another scalar type.
    pub fn map_utilities<V: Utility>(&self, f: impl Fn(&U) -> V) -> Profile<V> {
        Profile {
            agent_names: self.agent_names.clone(),
            good_names: self.good_names.clone(),
            utilities: self
                .utilities
                .iter()
                .map(|row| row.iter().map(&f).collect())
                .collect(),
        }
    }

    /// Same profile with one agent's utility row replaced.
    pub fn with_row(&self, agent: usize, row: Vec<U>) -> Result<Self, ModelError> {
        let mut utilities = self.utilities.clone();
        *utilities
            .get_mut(agent)
            .ok_or(ModelError::AgentOutOfRange {
                index: agent,
                n: self.n(),
            })? = row;
        Self::new(self.agent_names.clone(), self.good_names.clone(), utilities)
    }
}

fn default_names(prefix: &str, count: usize) -> Vec<String> {
    (1..=count).map(|i| format!("{prefix}{i}")).collect()
}

fn check_distinct(kind: &'static str, names: &[String]) -> Result<(), ModelError> {
    let mut seen = HashSet::with_capacity(names.len());
    for name in names {
        if !seen.insert(name.as_str()) {
            return Err(ModelError::DuplicateName {
                kind,
                name: name.clone(),
            });
        }
    }
    Ok(())
}

/// An ordered partition of the goods `0..m` into one bundle per agent.
///
/// Bundles are kept sorted, so two allocations are equal iff they hand out
/// the same goods to the same agents.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Allocation {
    bundles: Vec<Vec<usize>>,
}

impl Allocation {
    /// Validates that `bundles` partition `0..m`. Empty bundles are fine.
    pub fn new(mut bundles: Vec<Vec<usize>>, m: usize) -> Result<Self, ModelError> {
        let mut seen = vec![false; m];
        for bundle in &mut bundles {
            bundle.sort_unstable();
            for &g in bundle.iter() {
                match seen.get_mut(g) {
                    None => return Err(ModelError::GoodOutOfRange { index: g, m }),
                    Some(true) => {
                        return Err(ModelError::NotAPartition(format!(
                            "good {g} appears in more than one bundle"
                        )))
                    }
                    Some(slot) => *slot = true,
                }
            }
        }
        if let Some(g) = seen.iter().position(|s| !s) {
            return Err(ModelError::NotAPartition(format!("good {g} is unassigned")));
        }
        Ok(Self { bundles })
    }

    /// Builds the allocation where good `g` goes to agent `owners[g]`.
    pub fn from_owners(owners: &[usize], n: usize) -> Result<Self, ModelError> {
        let mut bundles = vec![Vec::new(); n];
        for (g, &owner) in owners.iter().enumerate() {
            bundles
                .get_mut(owner)
                .ok_or(ModelError::AgentOutOfRange { index: owner, n })?
                .push(g);
        }
        Ok(Self { bundles })
    }

    pub fn n(&self) -> usize {
        self.bundles.len()
    }

    pub fn num_goods(&self) -> usize {
        self.bundles.iter().map(Vec::len).sum()
    }

    pub fn bundles(&self) -> &[Vec<usize>] {
        &self.bundles
    }

    pub fn bundle(&self, agent: usize) -> &[usize] {
        &self.bundles[agent]
    }

    /// `owners()[g]` is the agent holding good `g`.
    pub fn owners(&self) -> Vec<usize> {
        let mut owners = vec![0; self.num_goods()];
        for (agent, bundle) in self.bundles.iter().enumerate() {
            for &g in bundle {
                owners[g] = agent;
            }
        }
        owners
    }

    /// Renders bundles with the profile's good names, e.g. `({g3}, {g1, g2})`.
    pub fn display_with<U: Utility>(&self, profile: &Profile<U>) -> String {
        let parts: Vec<String> = self
            .bundles
            .iter()
            .map(|b| {
                let names: Vec<&str> = b
                    .iter()
                    .map(|&g| profile.good_names()[g].as_str())
                    .collect();
                format!("{{{}}}", names.join(", "))
            })
            .collect();
        format!("({})", parts.join(", "))
    }
}

impl fmt::Display for Allocation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .bundles
            .iter()
            .map(|b| {
                let names: Vec<String> = b.iter().map(|g| format!("g{}", g + 1)).collect();
                format!("{{{}}}", names.join(", "))
            })
            .collect();
        write!(f, "({})", parts.join(", "))
    }
}

/// `values[i] = u_i(A_i)`.
#[derive(Debug, Clone, PartialEq)]
pub struct UtilityVector<U = Rational>(pub Vec<U>);

impl<U: Utility> UtilityVector<U> {
    pub fn into_inner(self) -> Vec<U> {
        self.0
    }

    pub fn to_rationals(&self) -> Vec<Rational> {
        self.0.iter().map(Utility::to_rational).collect()
    }
}

impl<U> Deref for UtilityVector<U> {
    type Target = [U];

    fn deref(&self) -> &[U] {
        &self.0
    }
}

impl<U: Utility> fmt::Display for UtilityVector<U> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(Utility::render).collect();
        write!(f, "({})", parts.join(", "))
    }
}
