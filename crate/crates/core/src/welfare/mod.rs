//! Welfare functions over utility vectors.
//!
//! A [`WelfareExpr`] is a parsed expression with a single aggregation level
//! (`sum`, `prod`, `min`, `max` over an elementwise expression in `u`).
//! Evaluation happens in the extended reals `[-inf, inf)`: `log(0)` is
//! `-inf` and absorbs through sums and positive scalings.

mod backend;
mod expr;

use std::cmp::Ordering;
use std::fmt;

use num_traits::Zero;
use thiserror::Error;

use crate::scalar::{is_integer, Rational, Utility};

pub use backend::{
    Backend, Extended, ExtendedValue, HpFloat, Number, WelfareScalar, FLOAT_TOLERANCE_LOG2,
    HP_PRECISION,
};
pub use expr::{Aggregator, BinOp, Func, Node};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum WelfareError {
    #[error("syntax error at {position}: {message}")]
    Syntax { position: usize, message: String },
    #[error("structural error at {position}: {message}")]
    Structure { position: usize, message: String },
    #[error("domain error: {0}")]
    Domain(String),
    #[error("division by zero")]
    DivisionByZero,
    #[error("welfare functions take at least 2 coordinates, got {0}")]
    Arity(usize),
    #[error("utility vectors of different lengths: {0} and {1}")]
    LengthMismatch(usize, usize),
    #[error("negative utility {0} passed to a welfare function")]
    NegativeInput(String),
    #[error("{0} cannot be evaluated with {1} arithmetic")]
    Backend(String, Backend),
}

/// The few families with a dedicated branch-and-bound bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    /// `sum(u)`
    Utilitarian,
    /// `prod(u)`
    Nash,
    /// `sum(log(u))`
    LogNash,
}

/// A parsed welfare function.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct WelfareExpr {
    root: Node,
    rational_closed: bool,
}

pub fn parse_welfare(text: &str) -> Result<WelfareExpr, WelfareError> {
    WelfareExpr::parse(text)
}

impl WelfareExpr {
    pub fn parse(text: &str) -> Result<Self, WelfareError> {
        Ok(Self::from_root(expr::parse(text)?))
    }

    fn from_root(root: Node) -> Self {
        let rational_closed = root.is_rational_closed();
        Self {
            root,
            rational_closed,
        }
    }

    fn builtin(text: &str) -> Self {
        Self::parse(text).expect("built-in welfare expressions parse")
    }

    /// `prod(u)`
    pub fn nash() -> Self {
        Self::builtin("prod(u)")
    }

    /// `sum(log(u))`
    pub fn log_nash() -> Self {
        Self::builtin("sum(log(u))")
    }

    /// `sum(u)`
    pub fn utilitarian() -> Self {
        Self::builtin("sum(u)")
    }

    /// `min(u)`
    pub fn egalitarian() -> Self {
        Self::builtin("min(u)")
    }

    /// `sum(u^p)`
    pub fn power_sum(p: &Rational) -> Self {
        Self::from_root(Node::Aggregate(
            Aggregator::Sum,
            Box::new(Node::Pow(Box::new(Node::Var), p.clone())),
        ))
    }

    /// `prod(u)^p`, a strictly increasing transform of the product for `p > 0`.
    pub fn nash_power(p: &Rational) -> Self {
        Self::from_root(Node::Pow(
            Box::new(Node::Aggregate(Aggregator::Prod, Box::new(Node::Var))),
            p.clone(),
        ))
    }

    pub fn root(&self) -> &Node {
        &self.root
    }

    pub fn is_rational_closed(&self) -> bool {
        self.rational_closed
    }

    /// Arithmetic used by [`WelfareExpr::evaluate`].
    pub fn backend(&self) -> Backend {
        if self.rational_closed {
            Backend::Exact
        } else {
            Backend::HighPrecision
        }
    }

    pub fn family(&self) -> Option<Family> {
        match &self.root {
            Node::Aggregate(Aggregator::Sum, inner) if **inner == Node::Var => {
                Some(Family::Utilitarian)
            }
            Node::Aggregate(Aggregator::Prod, inner) if **inner == Node::Var => Some(Family::Nash),
            Node::Aggregate(Aggregator::Sum, inner)
                if **inner == Node::Call(Func::Log, Box::new(Node::Var)) =>
            {
                Some(Family::LogNash)
            }
            _ => None,
        }
    }

    /// Evaluates on the automatically selected backend.
    pub fn evaluate<U: Utility>(&self, x: &[U]) -> Result<ExtendedValue, WelfareError> {
        if self.rational_closed {
            self.evaluate_in::<Rational, U>(x).map(Into::into)
        } else {
            self.evaluate_in::<HpFloat, U>(x).map(Into::into)
        }
    }

    /// Evaluates with an explicitly chosen backend.
    pub fn evaluate_in<S: WelfareScalar, U: Utility>(
        &self,
        x: &[U],
    ) -> Result<Extended<S>, WelfareError> {
        if x.len() < 2 {
            return Err(WelfareError::Arity(x.len()));
        }
        if let Some(bad) = x.iter().find(|v| v.is_negative_value()) {
            return Err(WelfareError::NegativeInput(bad.render()));
        }
        let coords: Vec<S> = x
            .iter()
            .map(|v| S::from_rational(&v.to_rational()))
            .collect();
        eval(&self.root, None, &coords)
    }

    /// Three-way comparison of `f(x)` and `f(y)`.
    pub fn compare<U: Utility>(&self, x: &[U], y: &[U]) -> Result<ComparisonResult, WelfareError> {
        if x.len() != y.len() {
            return Err(WelfareError::LengthMismatch(x.len(), y.len()));
        }
        let left = self.evaluate(x)?;
        let right = self.evaluate(y)?;
        Ok(ComparisonResult::new(left, right, self.backend()))
    }
}

impl fmt::Display for WelfareExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.root)
    }
}

impl std::str::FromStr for WelfareExpr {
    type Err = WelfareError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::parse(s)
    }
}

pub fn evaluate<U: Utility>(f: &WelfareExpr, x: &[U]) -> Result<ExtendedValue, WelfareError> {
    f.evaluate(x)
}

pub fn compare<U: Utility>(
    f: &WelfareExpr,
    x: &[U],
    y: &[U],
) -> Result<ComparisonResult, WelfareError> {
    f.compare(x, y)
}

/// Outcome of comparing two welfare values.
#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonResult {
    pub ordering: Ordering,
    pub left: ExtendedValue,
    pub right: ExtendedValue,
    pub backend: Backend,
    /// `Some(FLOAT_TOLERANCE_LOG2)` when the comparison was tolerant.
    pub tolerance_log2: Option<i32>,
    /// Set when `ordering` is `Equal` only because of the tolerance.
    pub tie_within_tolerance: bool,
}

impl ComparisonResult {
    pub fn new(left: ExtendedValue, right: ExtendedValue, backend: Backend) -> Self {
        let (ordering, tie_within_tolerance) = left.compare(&right);
        Self {
            ordering,
            left,
            right,
            backend,
            tolerance_log2: (backend != Backend::Exact).then_some(FLOAT_TOLERANCE_LOG2),
            tie_within_tolerance,
        }
    }

    pub fn verdict(&self) -> &'static str {
        match self.ordering {
            Ordering::Less => "LESS",
            Ordering::Equal => "EQUAL",
            Ordering::Greater => "GREATER",
        }
    }
}

impl fmt::Display for ComparisonResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} ({} vs {}) [{}",
            self.verdict(),
            self.left,
            self.right,
            self.backend
        )?;
        if let Some(t) = self.tolerance_log2 {
            write!(f, ", tolerance 2^{t} relative")?;
        }
        if self.tie_within_tolerance {
            f.write_str(", tie within tolerance")?;
        }
        f.write_str("]")
    }
}

/// Lexicographic key of the maximum Nash welfare rule: first the number of
/// agents with positive utility, then the product of those utilities.
#[derive(Debug, Clone, PartialEq)]
pub struct MnwKey<U = Rational> {
    pub positive_count: usize,
    pub positive_product: U,
}

impl<U: Utility> PartialOrd for MnwKey<U> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        match self.positive_count.cmp(&other.positive_count) {
            Ordering::Equal => self.positive_product.partial_cmp(&other.positive_product),
            unequal => Some(unequal),
        }
    }
}

impl<U: Utility> fmt::Display for MnwKey<U> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "({}, {})",
            self.positive_count,
            self.positive_product.render()
        )
    }
}

pub fn mnw_key<U: Utility>(x: &[U]) -> MnwKey<U> {
    x.iter().filter(|v| v.is_positive_value()).fold(
        MnwKey {
            positive_count: 0,
            positive_product: U::one(),
        },
        |key, v| MnwKey {
            positive_count: key.positive_count + 1,
            positive_product: key.positive_product * v.clone(),
        },
    )
}

type Value<S> = Extended<S>;

fn eval<S: WelfareScalar>(
    node: &Node,
    var: Option<&S>,
    coords: &[S],
) -> Result<Value<S>, WelfareError> {
    match node {
        Node::Const(c) => Ok(Extended::Finite(S::from_rational(c))),
        Node::Var => var
            .cloned()
            .map(Extended::Finite)
            .ok_or_else(|| WelfareError::Domain("'u' outside an aggregator".into())),
        Node::Neg(a) => match eval(a, var, coords)? {
            Extended::Finite(v) => Ok(Extended::Finite(-v)),
            Extended::NegInfinity => Err(WelfareError::Domain("negation of -inf".into())),
        },
        Node::Binary(op, a, b) => {
            let a = eval(a, var, coords)?;
            let b = eval(b, var, coords)?;
            binary(*op, a, b)
        }
        Node::Pow(a, p) => power(eval(a, var, coords)?, p),
        Node::Call(func, a) => {
            let a = eval(a, var, coords)?;
            match func {
                Func::Log => log(a),
                Func::Exp => exp(a),
            }
        }
        Node::Aggregate(agg, inner) => {
            let mut values = coords.iter().map(|c| eval(inner, Some(c), coords));
            let first = values.next().expect("arity checked")?;
            values.try_fold(first, |acc, v| {
                let v = v?;
                match agg {
                    Aggregator::Sum => binary(BinOp::Add, acc, v),
                    Aggregator::Prod => binary(BinOp::Mul, acc, v),
                    Aggregator::Min => Ok(if strict_less(&v, &acc) { v } else { acc }),
                    Aggregator::Max => Ok(if strict_less(&acc, &v) { v } else { acc }),
                }
            })
        }
    }
}

/// Plain (untolerated) order for min/max selection.
fn strict_less<S: WelfareScalar>(a: &Value<S>, b: &Value<S>) -> bool {
    match (a, b) {
        (Extended::NegInfinity, Extended::NegInfinity) => false,
        (Extended::NegInfinity, _) => true,
        (_, Extended::NegInfinity) => false,
        (Extended::Finite(x), Extended::Finite(y)) => x < y,
    }
}

fn finite<S: WelfareScalar>(value: S) -> Result<Value<S>, WelfareError> {
    if value.is_finite_value() {
        Ok(Extended::Finite(value))
    } else {
        Err(WelfareError::Domain(format!(
            "non-finite intermediate {value}"
        )))
    }
}

fn binary<S: WelfareScalar>(op: BinOp, a: Value<S>, b: Value<S>) -> Result<Value<S>, WelfareError> {
    use Extended::{Finite, NegInfinity};
    let positive = |v: &S| *v > S::zero();
    match (op, a, b) {
        (BinOp::Add, Finite(x), Finite(y)) => finite(x + y),
        (BinOp::Add, _, _) => Ok(NegInfinity),
        (BinOp::Sub, Finite(x), Finite(y)) => finite(x - y),
        (BinOp::Sub, NegInfinity, Finite(_)) => Ok(NegInfinity),
        (BinOp::Sub, _, NegInfinity) => Err(WelfareError::Domain("subtracting -inf".into())),
        (BinOp::Mul, Finite(x), Finite(y)) => finite(x * y),
        (BinOp::Mul, NegInfinity, Finite(c)) | (BinOp::Mul, Finite(c), NegInfinity) => {
            if positive(&c) {
                Ok(NegInfinity)
            } else {
                Err(WelfareError::Domain(format!("-inf multiplied by {c}")))
            }
        }
        (BinOp::Mul, NegInfinity, NegInfinity) => {
            Err(WelfareError::Domain("-inf multiplied by -inf".into()))
        }
        (BinOp::Div, _, Finite(y)) if y.is_zero() => Err(WelfareError::DivisionByZero),
        (BinOp::Div, Finite(x), Finite(y)) => finite(x / y),
        (BinOp::Div, NegInfinity, Finite(c)) => {
            if positive(&c) {
                Ok(NegInfinity)
            } else {
                Err(WelfareError::Domain(format!("-inf divided by {c}")))
            }
        }
        (BinOp::Div, Finite(_), NegInfinity) => Ok(Finite(S::zero())),
        (BinOp::Div, NegInfinity, NegInfinity) => {
            Err(WelfareError::Domain("-inf divided by -inf".into()))
        }
    }
}

fn power<S: WelfareScalar>(base: Value<S>, p: &Rational) -> Result<Value<S>, WelfareError> {
    let Extended::Finite(base) = base else {
        return Err(WelfareError::Domain("power of -inf".into()));
    };
    if is_integer(p) {
        let e: i32 = p
            .to_integer()
            .try_into()
            .map_err(|_| WelfareError::Domain(format!("exponent {p} too large")))?;
        if e < 0 && base.is_zero() {
            return Err(WelfareError::DivisionByZero);
        }
        return finite(base.powi(e));
    }
    if base < S::zero() {
        return Err(WelfareError::Domain(format!(
            "fractional power of negative {base}"
        )));
    }
    if base.is_zero() {
        return if *p > Rational::zero() {
            Ok(Extended::Finite(S::zero()))
        } else {
            Err(WelfareError::Domain(format!("zero raised to {p}")))
        };
    }
    let value = base
        .powf(p)
        .ok_or_else(|| WelfareError::Backend(format!("power {p}"), S::BACKEND))?;
    finite(value)
}

fn log<S: WelfareScalar>(a: Value<S>) -> Result<Value<S>, WelfareError> {
    match a {
        Extended::NegInfinity => Err(WelfareError::Domain("log of -inf".into())),
        Extended::Finite(v) if v.is_zero() => Ok(Extended::NegInfinity),
        Extended::Finite(v) if v < S::zero() => Err(WelfareError::Domain(format!("log of {v}"))),
        Extended::Finite(v) => {
            if v.is_one() {
                return Ok(Extended::Finite(S::zero()));
            }
            let value = v
                .ln()
                .ok_or_else(|| WelfareError::Backend("log".into(), S::BACKEND))?;
            finite(value)
        }
    }
}

fn exp<S: WelfareScalar>(a: Value<S>) -> Result<Value<S>, WelfareError> {
    match a {
        Extended::NegInfinity => Ok(Extended::Finite(S::zero())),
        Extended::Finite(v) => {
            let value = v
                .exp()
                .ok_or_else(|| WelfareError::Backend("exp".into(), S::BACKEND))?;
            finite(value)
        }
    }
}
