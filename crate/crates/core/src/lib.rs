//! Welfarist allocation of indivisible goods.
//!
//! The crate covers the whole pipeline: additive [`model`] profiles,
//! symbolic [`welfare`] functions, the EF1 test in [`fairness`], exact
//! maximizer-set [`solver`]s, and the [`lab`], which probes welfare
//! functions for the product structure that maximum Nash welfare has and
//! builds counterexample profiles for the ones that lack it.
//!
//! Most types are generic over the utility scalar; the aliases below fix
//! the common instantiations.

pub mod fairness;
pub mod lab;
pub mod model;
pub mod scalar;
pub mod solver;
pub mod welfare;

pub use scalar::{Rational, Utility};
pub use welfare::{parse_welfare, ExtendedValue, MnwKey, WelfareExpr};

/// Exact profile with rational utilities.
pub type Profile = model::Profile<Rational>;
/// Profile with `f64` utilities.
pub type FloatProfile = model::Profile<f64>;
pub type UtilityVector = model::UtilityVector<Rational>;
pub type FloatUtilityVector = model::UtilityVector<f64>;
/// Single-precision profile, for memory-bound experiments.
pub type F32Profile = model::Profile<f32>;
pub type Ef1Report = fairness::Ef1Report<Rational>;
pub type MaximizerSet = solver::MaximizerSet<Rational>;

pub use model::Allocation;
