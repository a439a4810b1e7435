//! Scalar contexts: float with tolerances, or exact rational arithmetic.
//!
//! Every algebraic predicate in this crate is a zero test. In float mode a
//! residual is compared against `tolerance * max(1, scale)` where `scale` is
//! the Frobenius norm of the defining matrix; in exact mode the comparison is
//! literal equality with zero and the tolerance is never consulted.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{FromPrimitive, NumRef, ToPrimitive, Zero};
use std::fmt;
use std::ops::Neg;

use crate::error::Error;

/// Exact scalar used by the rational context.
pub type Exact = BigRational;

/// Arithmetic required of the entries of [`crate::mat::Mat`].
pub trait Scalar: NumRef + Neg<Output = Self> + Clone + PartialEq + fmt::Debug + 'static {
    /// True for the exact-rational instance; zero tests are literal there.
    const EXACT: bool;

    fn from_int(v: i64) -> Self;
    fn from_ratio(num: i64, den: i64) -> Self;
    /// Accept a float literal. The exact context only admits integral values;
    /// other rationals must be written as `"p/q"` strings.
    fn try_from_f64(v: f64) -> Result<Self, Error>;
    fn to_f64(&self) -> f64;
    fn try_to_rational(&self) -> Option<Exact>;
    fn is_exact_zero(&self) -> bool;
    fn entry_is_finite(&self) -> bool;

    fn half(&self) -> Self {
        self.clone() / Self::from_int(2)
    }
}

impl Scalar for f64 {
    const EXACT: bool = false;

    fn from_int(v: i64) -> Self {
        v as f64
    }
    fn from_ratio(num: i64, den: i64) -> Self {
        num as f64 / den as f64
    }
    fn try_from_f64(v: f64) -> Result<Self, Error> {
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::invalid_input("non-finite entry in input matrix"))
        }
    }
    fn to_f64(&self) -> f64 {
        *self
    }
    fn try_to_rational(&self) -> Option<Exact> {
        None
    }
    fn is_exact_zero(&self) -> bool {
        *self == 0.0
    }
    fn entry_is_finite(&self) -> bool {
        self.is_finite()
    }
}

impl Scalar for Exact {
    const EXACT: bool = true;

    fn from_int(v: i64) -> Self {
        BigRational::from_integer(BigInt::from(v))
    }
    fn from_ratio(num: i64, den: i64) -> Self {
        BigRational::new(BigInt::from(num), BigInt::from(den))
    }
    fn try_from_f64(v: f64) -> Result<Self, Error> {
        if !v.is_finite() {
            return Err(Error::invalid_input("non-finite entry in input matrix"));
        }
        if v.fract() != 0.0 {
            return Err(Error::invalid_input(format!(
                "exact mode rejects the non-integral float literal {v}; write it as a \"p/q\" string"
            )));
        }
        BigRational::from_f64(v)
            .ok_or_else(|| Error::invalid_input(format!("cannot represent {v} exactly")))
    }
    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }
    fn try_to_rational(&self) -> Option<Exact> {
        Some(self.clone())
    }
    fn is_exact_zero(&self) -> bool {
        self.is_zero()
    }
    fn entry_is_finite(&self) -> bool {
        true
    }
}

/// Parse a scalar from the JSON-facing form: either a number or `"p/q"`.
pub fn parse_entry<S: Scalar>(text: &str) -> Result<S, Error> {
    let t = text.trim();
    if let Some((p, q)) = t.split_once('/') {
        let num: i64 = p
            .trim()
            .parse()
            .map_err(|_| Error::invalid_input(format!("bad rational numerator in '{t}'")))?;
        let den: i64 = q
            .trim()
            .parse()
            .map_err(|_| Error::invalid_input(format!("bad rational denominator in '{t}'")))?;
        if den == 0 {
            return Err(Error::invalid_input(format!("zero denominator in '{t}'")));
        }
        Ok(S::from_ratio(num, den))
    } else if let Ok(v) = t.parse::<i64>() {
        Ok(S::from_int(v))
    } else {
        let v: f64 = t
            .parse()
            .map_err(|_| Error::invalid_input(format!("cannot parse scalar '{t}'")))?;
        S::try_from_f64(v)
    }
}

/// Arithmetic mode of a computation.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    ExactRational,
    Float,
}

impl Mode {
    pub fn name(&self) -> &'static str {
        match self {
            Mode::ExactRational => "exact",
            Mode::Float => "float",
        }
    }
}

/// Mode plus the float tolerance (unused in exact mode).
#[derive(Clone, Copy, Debug)]
pub struct ScalarContext {
    pub mode: Mode,
    pub tolerance: f64,
}

pub const DEFAULT_TOLERANCE: f64 = 1e-9;

impl ScalarContext {
    pub fn float(tolerance: f64) -> Result<Self, Error> {
        if !tolerance.is_finite() || tolerance <= 0.0 {
            return Err(Error::invalid_input(format!(
                "tolerance must be positive in float mode, got {tolerance}"
            )));
        }
        Ok(ScalarContext { mode: Mode::Float, tolerance })
    }

    pub fn exact() -> Self {
        ScalarContext { mode: Mode::ExactRational, tolerance: DEFAULT_TOLERANCE }
    }

    pub fn for_scalar<S: Scalar>(tolerance: f64) -> Result<Self, Error> {
        if S::EXACT {
            Ok(Self::exact())
        } else {
            Self::float(tolerance)
        }
    }
}

impl Default for ScalarContext {
    fn default() -> Self {
        ScalarContext { mode: Mode::Float, tolerance: DEFAULT_TOLERANCE }
    }
}

/// Zero test with the scale adjustment `tol * max(1, scale)`.
///
/// `scale` is fixed per algebra as the Frobenius norm of L, so the homogeneous
/// conditions of the calculus do not spuriously fail on large inputs.
#[derive(Clone, Copy, Debug)]
pub struct ZeroTest {
    pub tol: f64,
    pub scale: f64,
}

impl ZeroTest {
    pub fn new(tol: f64, scale: f64) -> Self {
        ZeroTest { tol, scale }
    }

    pub fn threshold(&self) -> f64 {
        self.tol * self.scale.max(1.0)
    }

    pub fn with_tol(&self, tol: f64) -> Self {
        ZeroTest { tol, scale: self.scale }
    }

    pub fn scalar_is_zero<S: Scalar>(&self, v: &S) -> bool {
        if S::EXACT {
            v.is_exact_zero()
        } else {
            v.to_f64().abs() <= self.threshold()
        }
    }

    pub fn slice_is_zero<S: Scalar>(&self, v: &[S]) -> bool {
        if S::EXACT {
            v.iter().all(Scalar::is_exact_zero)
        } else {
            crate::mat::vec_norm_f64(v) <= self.threshold()
        }
    }
}
