//! The `kn + 1` good counterexample profile.
//!
//! Given a point where the exchange identity fails with the left side
//! smaller, pick `ε` so that shaving `ε` off agent 1's coordinate keeps the
//! strict inequality. The profile below then forces every maximizer to
//! hand the extra good `g_m` to agent 1 and to split the other `kn` goods
//! `k` per agent, which leaves agent `i` envious beyond one good.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::BigInt;

use super::{probe_exchange, LabError, ProbeOutcome, ProbePoint, ProbeVerdict};
use crate::fairness::{is_ef1, Ef1Report};
use crate::model::{enumerate_allocations, Allocation, Profile, DEFAULT_ENUMERATION_CAP};
use crate::scalar::{format_rational, format_rational_list, Rational};
use crate::solver::{maximizers, MaximizerSet};
use crate::welfare::WelfareExpr;

/// Halving budget for the ε search.
pub const MAX_HALVINGS: u32 = 64;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GadgetSpec {
    x: Vec<Rational>,
    k: u32,
    i: usize,
    epsilon: Rational,
    swapped: bool,
}

fn zero() -> Rational {
    Rational::from_integer(BigInt::ZERO)
}

impl GadgetSpec {
    /// `x` is already direction-normalized; `i` is zero-based.
    pub fn new(
        x: Vec<Rational>,
        k: u32,
        i: usize,
        epsilon: Rational,
        swapped: bool,
    ) -> Result<Self, LabError> {
        if epsilon <= zero() {
            return Err(LabError::InvalidSpec("epsilon must be positive".into()));
        }
        Self::diagnostic(x, k, i, epsilon, swapped)
    }

    /// Like [`GadgetSpec::new`] but also accepts `ε = 0`, which is useful to
    /// see why a positive `ε` is needed.
    pub fn diagnostic(
        x: Vec<Rational>,
        k: u32,
        i: usize,
        epsilon: Rational,
        swapped: bool,
    ) -> Result<Self, LabError> {
        let point = ProbePoint::new(x, k, i).map_err(|e| LabError::InvalidSpec(e.to_string()))?;
        if epsilon < zero() || epsilon >= point.x[0] {
            return Err(LabError::InvalidSpec(format!(
                "epsilon {} must lie in [0, {})",
                format_rational(&epsilon),
                format_rational(&point.x[0])
            )));
        }
        Ok(Self {
            x: point.x,
            k,
            i,
            epsilon,
            swapped,
        })
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

    pub fn epsilon(&self) -> &Rational {
        &self.epsilon
    }

    pub fn swapped(&self) -> bool {
        self.swapped
    }

    pub fn n(&self) -> usize {
        self.x.len()
    }

    pub fn num_goods(&self) -> usize {
        self.k as usize * self.x.len() + 1
    }
}

impl fmt::Display for GadgetSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "x={} k={} i={} epsilon={} swapped={}",
            format_rational_list(&self.x),
            self.k,
            self.i + 1,
            format_rational(&self.epsilon),
            self.swapped
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpsilonSearch {
    pub epsilon: Rational,
    pub swapped: bool,
    /// The point the gadget is built from (after any swap).
    pub point: ProbePoint,
    /// The probe at the caller's original point.
    pub probe: ProbeOutcome,
    pub halvings: u32,
}

impl EpsilonSearch {
    pub fn spec(&self) -> GadgetSpec {
        GadgetSpec::new(
            self.point.x.clone(),
            self.point.k,
            self.point.i,
            self.epsilon.clone(),
            self.swapped,
        )
        .expect("search only returns epsilon in (0, x_1)")
    }
}

/// Finds `ε = x_1 / 2^t` with
/// `f((k+1)x_1 - ε, .., k x_i, ..) < f(k x_1 - ε, .., (k+1) x_i, ..)`.
pub fn find_epsilon(f: &WelfareExpr, p: &ProbePoint) -> Result<EpsilonSearch, LabError> {
    let probe = probe_exchange(f, p)?;
    let (point, swapped) = match probe.verdict {
        ProbeVerdict::Equal => return Err(LabError::ExchangeHolds(probe.to_string())),
        ProbeVerdict::LeftLess => (p.clone(), false),
        ProbeVerdict::LeftGreater => {
            let q = p.swapped();
            if probe_exchange(f, &q)?.verdict != ProbeVerdict::LeftLess {
                return Err(LabError::DirectionNotNormalized(p.i + 1));
            }
            (q, true)
        }
    };
    let two = Rational::from_integer(BigInt::from(2));
    let mut epsilon = point.x[0].clone();
    for t in 1..=MAX_HALVINGS {
        epsilon /= &two;
        let (left, right) = point.sides(&epsilon);
        if f.compare(&left, &right)?.ordering == Ordering::Less {
            return Ok(EpsilonSearch {
                epsilon,
                swapped,
                point,
                probe,
                halvings: t,
            });
        }
    }
    Err(LabError::EpsilonNotFound(MAX_HALVINGS))
}

pub fn build_gadget(spec: &GadgetSpec, n: usize) -> Result<Profile, LabError> {
    if n != spec.n() {
        return Err(LabError::InvalidSpec(format!(
            "gadget point has {} coordinates but n = {n}",
            spec.n()
        )));
    }
    let k = Rational::from_integer(BigInt::from(spec.k));
    let shared = spec.num_goods() - 1;
    let rows = (0..n)
        .map(|j| {
            let per_good = if j == 0 || j == spec.i {
                spec.x[j].clone()
            } else {
                &spec.x[j] / &k
            };
            let last = if j == 0 {
                &spec.x[0] - &spec.epsilon
            } else {
                zero()
            };
            let mut row = vec![per_good; shared];
            row.push(last);
            row
        })
        .collect();
    Ok(Profile::from_rows(rows)?)
}

#[derive(Debug, Clone, PartialEq)]
pub struct GadgetReport {
    pub spec: GadgetSpec,
    pub profile: Profile,
    pub maximizer_set: MaximizerSet<Rational>,
    /// One audit per member of `maximizer_set`, in the same order.
    pub ef1_flags: Vec<Ef1Report<Rational>>,
    pub refuted: bool,
    /// The probe that seeded the gadget, when it came from a search.
    pub probe: Option<ProbeOutcome>,
    pub welfare: String,
}

pub fn refute_ef1_existence(
    f: &WelfareExpr,
    spec: &GadgetSpec,
    n: usize,
) -> Result<GadgetReport, LabError> {
    let profile = build_gadget(spec, n)?;
    let maximizer_set = maximizers(&profile, f)?;
    let ef1_flags = maximizer_set
        .allocations()
        .map(|a| is_ef1(&profile, a))
        .collect::<Result<Vec<_>, _>>()?;
    let refuted = !ef1_flags.is_empty() && ef1_flags.iter().all(|r| !r.holds);
    Ok(GadgetReport {
        spec: spec.clone(),
        profile,
        maximizer_set,
        ef1_flags,
        refuted,
        probe: None,
        welfare: f.to_string(),
    })
}

/// The whole pipeline: probe, search `ε`, build and audit.
pub fn refute_from_probe(f: &WelfareExpr, p: &ProbePoint) -> Result<GadgetReport, LabError> {
    let search = find_epsilon(f, p)?;
    let mut report = refute_ef1_existence(f, &search.spec(), p.n())?;
    report.probe = Some(search.probe);
    Ok(report)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PigeonholeOutcome {
    Pass {
        allocations: u64,
        ef1_allocations: u64,
    },
    /// An EF1 allocation where some agent does not get exactly `k` shared goods.
    Witness(Allocation),
}

/// Every EF1 allocation of the gadget gives each agent exactly `k` of the
/// first `kn` goods.
pub fn check_gadget_pigeonhole(spec: &GadgetSpec, n: usize) -> Result<PigeonholeOutcome, LabError> {
    let profile = build_gadget(spec, n)?;
    let shared = spec.num_goods() - 1;
    let space = enumerate_allocations(n, profile.m(), DEFAULT_ENUMERATION_CAP)?;
    let mut ef1_allocations = 0;
    for alloc in space.iter() {
        if !is_ef1(&profile, &alloc)?.holds {
            continue;
        }
        ef1_allocations += 1;
        let balanced = alloc
            .bundles()
            .iter()
            .all(|b| b.iter().filter(|&&g| g < shared).count() == spec.k as usize);
        if !balanced {
            return Ok(PigeonholeOutcome::Witness(alloc));
        }
    }
    Ok(PigeonholeOutcome::Pass {
        allocations: space.len(),
        ef1_allocations,
    })
}
