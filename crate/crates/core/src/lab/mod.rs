//! Probes and counterexamples for the maximum Nash welfare characterization.
//!
//! A continuous, strictly increasing welfare function guarantees an EF1
//! maximizer on every profile only if it factors through the product of
//! utilities. This module tests the ingredients of that statement on
//! concrete welfare functions:
//!
//! * [`probe_exchange`] / [`scan_exchange`] check the exchange identity
//!   `f(.., (k+1)x_1, .., k x_i, ..) = f(.., k x_1, .., (k+1)x_i, ..)`;
//! * [`probe_constant_curve`] compares `f` at two points of the hyperbola
//!   `x_1 * x_i = z`;
//! * [`product_dependence_check`] samples equal-product pairs;
//! * the [`gadget`] submodule turns a failed exchange probe into a profile
//!   whose welfare maximizers are all not EF1.
//!
//! Scans and samples are evidence, not proofs: a pass means no witness was
//! found at the points tried.

pub mod gadget;
mod report;
pub mod sampling;

use std::cmp::Ordering;
use std::fmt;

use num_bigint::BigInt;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::model::ModelError;
use crate::scalar::{format_rational_list, Rational};
use crate::solver::SolverError;
use crate::welfare::{Backend, ComparisonResult, ExtendedValue, WelfareError, WelfareExpr};

pub use gadget::{
    build_gadget, check_gadget_pigeonhole, find_epsilon, refute_ef1_existence, refute_from_probe,
    EpsilonSearch, GadgetReport, GadgetSpec, PigeonholeOutcome, MAX_HALVINGS,
};
pub use sampling::{
    admits_positive_allocation, equivalence_with_mnw, random_positive_profile, random_profile,
    EquivalenceOutcome,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LabError {
    #[error(transparent)]
    Welfare(#[from] WelfareError),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("invalid probe point: {0}")]
    InvalidPoint(String),
    #[error("invalid gadget: {0}")]
    InvalidSpec(String),
    #[error("the exchange identity holds at this point ({0}); there is nothing to refute")]
    ExchangeHolds(String),
    #[error("no epsilon found after {0} halvings")]
    EpsilonNotFound(u32),
    #[error("swapping coordinates 1 and {0} did not reverse the exchange inequality")]
    DirectionNotNormalized(usize),
    #[error("no profile with an all-positive allocation after {0} draws")]
    SamplingExhausted(usize),
    #[error("{0}")]
    InvalidArgument(String),
}

/// A point `x > 0`, a multiplier `k >= 1` and an agent `i != 0`
/// (zero-based, so `i` ranges over `1..n`).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProbePoint {
    x: Vec<Rational>,
    k: u32,
    i: usize,
}

impl ProbePoint {
    pub fn new(x: Vec<Rational>, k: u32, i: usize) -> Result<Self, LabError> {
        if x.len() < 2 {
            return Err(LabError::InvalidPoint(format!(
                "need at least 2 coordinates, got {}",
                x.len()
            )));
        }
        if let Some(bad) = x
            .iter()
            .position(|v| *v <= Rational::from_integer(BigInt::ZERO))
        {
            return Err(LabError::InvalidPoint(format!(
                "coordinate {} is not positive",
                bad + 1
            )));
        }
        if k == 0 {
            return Err(LabError::InvalidPoint("k must be at least 1".into()));
        }
        if i == 0 || i >= x.len() {
            return Err(LabError::InvalidPoint(format!(
                "agent index {} must be between 2 and {}",
                i + 1,
                x.len()
            )));
        }
        Ok(Self { x, k, i })
    }

    pub fn x(&self) -> &[Rational] {
        &self.x
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    /// Zero-based index of the second agent.
    pub fn i(&self) -> usize {
        self.i
    }

    pub fn n(&self) -> usize {
        self.x.len()
    }

    /// Same point with coordinates `0` and `i` exchanged.
    pub fn swapped(&self) -> Self {
        let mut x = self.x.clone();
        x.swap(0, self.i);
        Self { x, ..self.clone() }
    }

    /// The two sides of the exchange identity, each shifted down by `shift`
    /// in the first coordinate.
    pub(crate) fn sides(&self, shift: &Rational) -> (Vec<Rational>, Vec<Rational>) {
        let k = Rational::from_integer(BigInt::from(self.k));
        let k1 = k.clone() + Rational::from_integer(BigInt::from(1));
        let mut left = self.x.clone();
        let mut right = self.x.clone();
        left[0] = &self.x[0] * &k1 - shift;
        left[self.i] = &self.x[self.i] * &k;
        right[0] = &self.x[0] * &k - shift;
        right[self.i] = &self.x[self.i] * &k1;
        (left, right)
    }
}

impl fmt::Display for ProbePoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "x={} k={} i={}",
            format_rational_list(&self.x),
            self.k,
            self.i + 1
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProbeVerdict {
    Equal,
    LeftLess,
    LeftGreater,
}

impl fmt::Display for ProbeVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ProbeVerdict::Equal => "EQUAL",
            ProbeVerdict::LeftLess => "LEFT_LESS",
            ProbeVerdict::LeftGreater => "LEFT_GREATER",
        })
    }
}

/// `left = f((k+1)x_1, .., k x_i, ..)`, `right = f(k x_1, .., (k+1) x_i, ..)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbeOutcome {
    pub verdict: ProbeVerdict,
    pub left: ExtendedValue,
    pub right: ExtendedValue,
    pub point: ProbePoint,
    pub backend: Backend,
    pub tie_within_tolerance: bool,
}

impl fmt::Display for ProbeOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} at {}: left {} vs right {} [{}{}]",
            self.verdict,
            self.point,
            self.left,
            self.right,
            self.backend,
            if self.tie_within_tolerance {
                ", tie within tolerance"
            } else {
                ""
            }
        )
    }
}

fn verdict_of(ordering: Ordering) -> ProbeVerdict {
    match ordering {
        Ordering::Less => ProbeVerdict::LeftLess,
        Ordering::Equal => ProbeVerdict::Equal,
        Ordering::Greater => ProbeVerdict::LeftGreater,
    }
}

pub fn probe_exchange(f: &WelfareExpr, point: &ProbePoint) -> Result<ProbeOutcome, LabError> {
    let (left, right) = point.sides(&Rational::from_integer(BigInt::ZERO));
    let cmp = f.compare(&left, &right)?;
    Ok(ProbeOutcome {
        verdict: verdict_of(cmp.ordering),
        left: cmp.left,
        right: cmp.right,
        point: point.clone(),
        backend: cmp.backend,
        tie_within_tolerance: cmp.tie_within_tolerance,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub enum ScanOutcome {
    /// No point broke the identity.
    Pass { checked: usize },
    /// First failing point in scan order.
    Fail(ProbeOutcome),
}

/// Probes every point with coordinates from `grid` (first coordinate most
/// significant), every `k` in `1..=k_max` and every `i` in `1..n`, and
/// stops at the first non-equal outcome.
pub fn scan_exchange(
    f: &WelfareExpr,
    n: usize,
    grid: &[Rational],
    k_max: u32,
) -> Result<ScanOutcome, LabError> {
    if grid.is_empty()
        || grid
            .iter()
            .any(|g| *g <= Rational::from_integer(BigInt::ZERO))
    {
        return Err(LabError::InvalidArgument(
            "grid must be nonempty and positive".into(),
        ));
    }
    if n < 2 || k_max == 0 {
        return Err(LabError::InvalidArgument(
            "need n >= 2 and k_max >= 1".into(),
        ));
    }
    let mut digits = vec![0usize; n];
    let mut checked = 0;
    loop {
        let x: Vec<Rational> = digits.iter().map(|&d| grid[d].clone()).collect();
        for k in 1..=k_max {
            for i in 1..n {
                let outcome = probe_exchange(f, &ProbePoint::new(x.clone(), k, i)?)?;
                checked += 1;
                if outcome.verdict != ProbeVerdict::Equal {
                    return Ok(ScanOutcome::Fail(outcome));
                }
            }
        }
        // Odometer with the last coordinate fastest.
        let mut pos = n;
        loop {
            if pos == 0 {
                return Ok(ScanOutcome::Pass { checked });
            }
            pos -= 1;
            digits[pos] += 1;
            if digits[pos] < grid.len() {
                break;
            }
            digits[pos] = 0;
        }
    }
}

/// Compares `f` at `(x, .., z/x, ..)` and `(y, .., z/y, ..)`, where the
/// second entry sits at zero-based index `i` and `fixed` fills the other
/// coordinates in order.
pub fn probe_constant_curve(
    f: &WelfareExpr,
    i: usize,
    fixed: &[Rational],
    z: &Rational,
    x: &Rational,
    y: &Rational,
) -> Result<ComparisonResult, LabError> {
    let zero = Rational::from_integer(BigInt::ZERO);
    let n = fixed.len() + 2;
    if i == 0 || i >= n {
        return Err(LabError::InvalidPoint(format!(
            "agent index {} out of 2..={n}",
            i + 1
        )));
    }
    if [z, x, y].into_iter().chain(fixed).any(|v| *v <= zero) {
        return Err(LabError::InvalidPoint("all inputs must be positive".into()));
    }
    let build = |first: &Rational| {
        let mut rest = fixed.iter().cloned();
        (0..n)
            .map(|j| match j {
                0 => first.clone(),
                j if j == i => z / first,
                _ => rest.next().expect("fixed covers the other coordinates"),
            })
            .collect::<Vec<_>>()
    };
    Ok(f.compare(&build(x), &build(y))?)
}

#[derive(Debug, Clone, PartialEq)]
pub enum ProductCheck {
    Pass {
        trials: usize,
    },
    /// `x` and `y` have the same product but different welfare.
    Witness {
        x: Vec<Rational>,
        y: Vec<Rational>,
        comparison: ComparisonResult,
    },
}

fn random_positive(rng: &mut ChaCha8Rng, max_numer: i64, max_denom: i64) -> Rational {
    Rational::new(
        BigInt::from(rng.random_range(1..=max_numer)),
        BigInt::from(rng.random_range(1..=max_denom)),
    )
}

/// Samples pairs with exactly equal products and looks for a pair on
/// which `f` differs beyond the comparison tolerance.
pub fn product_dependence_check(
    f: &WelfareExpr,
    n: usize,
    trials: usize,
    seed: u64,
) -> Result<ProductCheck, LabError> {
    if n < 2 || trials == 0 {
        return Err(LabError::InvalidArgument(
            "need n >= 2 and trials >= 1".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..trials {
        let x: Vec<Rational> = (0..n).map(|_| random_positive(&mut rng, 12, 6)).collect();
        let mut y = x.clone();
        for _ in 0..rng.random_range(1..=n) {
            let a = rng.random_range(0..n);
            let b = (a + rng.random_range(1..n)) % n;
            let r = random_positive(&mut rng, 9, 9);
            y[a] = &y[a] * &r;
            y[b] = &y[b] / &r;
        }
        debug_assert_eq!(
            x.iter().product::<Rational>(),
            y.iter().product::<Rational>()
        );
        let comparison = f.compare(&x, &y)?;
        if comparison.ordering != Ordering::Equal {
            return Ok(ProductCheck::Witness { x, y, comparison });
        }
    }
    Ok(ProductCheck::Pass { trials })
}
