//! Dual-mode scalars.
//!
//! Every computation in the workbench is generic over [`Scalar`], which is
//! implemented by [`Rational`] (exact, arbitrary precision, never rounds) and
//! by `f64` (binary floating point compared with a global relative tolerance).

use std::cmp::Ordering;
use std::fmt::{Debug, Display};
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::sync::atomic::{AtomicU64, Ordering as AtomicOrdering};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Arbitrary-precision rational number used in exact mode.
pub type Rational = BigRational;

/// Default float tolerance ε_f.
pub const DEFAULT_FLOAT_TOLERANCE: f64 = 1e-9;

static FLOAT_TOLERANCE_BITS: AtomicU64 = AtomicU64::new(0x3E11_2E0B_E826_D695); // 1e-9

/// Returns the global float-mode tolerance ε_f.
pub fn float_tolerance() -> f64 {
    f64::from_bits(FLOAT_TOLERANCE_BITS.load(AtomicOrdering::Relaxed))
}

/// Sets the global float-mode tolerance. Intended to be called once at
/// start-up (e.g. from a `--tolerance` flag) before any computation runs.
pub fn set_float_tolerance(eps: f64) {
    assert!(eps.is_finite() && eps > 0.0, "tolerance must be positive");
    FLOAT_TOLERANCE_BITS.store(eps.to_bits(), AtomicOrdering::Relaxed);
}

/// Arithmetic mode of a scalar type.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Mode {
    Exact,
    Float,
}

impl Display for Mode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Mode::Exact => f.write_str("exact"),
            Mode::Float => f.write_str("float"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ScalarError {
    #[error("exact mode cannot represent irrational-derived value {0}")]
    Irrational(f64),
    #[error("invalid numeric literal `{0}`")]
    Literal(String),
    #[error("non-finite value {0}")]
    NonFinite(f64),
}

/// A field element usable by the LP engine and every algebraic routine.
///
/// Comparisons that end in `_tol` are exact in exact mode and use the
/// relative tolerance `ε_f · (1 + max(|a|, |b|))` in float mode.
pub trait Scalar:
    Clone
    + Debug
    + Display
    + PartialEq
    + PartialOrd
    + Send
    + Sync
    + 'static
    + Zero
    + One
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    const MODE: Mode;

    fn from_i64(v: i64) -> Self;

    /// `num / den`; panics on a zero denominator.
    fn from_ratio(num: i64, den: i64) -> Self;

    /// Converts a float that came from irrational data (e.g. `cos(π/4)`).
    /// Exact mode refuses it.
    fn from_real(v: f64) -> Result<Self, ScalarError>;

    /// Parses `p`, `-p`, or `p/q`; float mode additionally accepts decimal
    /// literals.
    fn parse_literal(s: &str) -> Result<Self, ScalarError>;

    fn to_f64(&self) -> f64;

    fn abs(&self) -> Self;

    /// `self -= a * b`, the inner update of every elimination step.
    fn sub_mul_assign(&mut self, a: &Self, b: &Self);

    /// `self += a * b`.
    fn add_mul_assign(&mut self, a: &Self, b: &Self);

    fn is_zero_tol(&self) -> bool;

    fn approx_eq(&self, other: &Self) -> bool;

    fn tol_cmp(&self, other: &Self) -> Ordering {
        if self.approx_eq(other) {
            Ordering::Equal
        } else if self < other {
            Ordering::Less
        } else {
            Ordering::Greater
        }
    }

    /// Strictly positive beyond tolerance.
    fn is_pos_tol(&self) -> bool {
        !self.is_zero_tol() && *self > Self::zero()
    }

    /// Strictly negative beyond tolerance.
    fn is_neg_tol(&self) -> bool {
        !self.is_zero_tol() && *self < Self::zero()
    }

    /// `self <= other` up to tolerance.
    fn le_tol(&self, other: &Self) -> bool {
        self.tol_cmp(other) != Ordering::Greater
    }

    /// `self >= other` up to tolerance.
    fn ge_tol(&self, other: &Self) -> bool {
        self.tol_cmp(other) != Ordering::Less
    }

    fn max_of(a: Self, b: Self) -> Self {
        if b > a {
            b
        } else {
            a
        }
    }

    fn half() -> Self {
        Self::from_ratio(1, 2)
    }
}

impl Scalar for Rational {
    const MODE: Mode = Mode::Exact;

    fn from_i64(v: i64) -> Self {
        BigRational::from_integer(BigInt::from(v))
    }

    fn from_ratio(num: i64, den: i64) -> Self {
        assert!(den != 0, "zero denominator");
        BigRational::new(BigInt::from(num), BigInt::from(den))
    }

    fn from_real(v: f64) -> Result<Self, ScalarError> {
        Err(ScalarError::Irrational(v))
    }

    fn parse_literal(s: &str) -> Result<Self, ScalarError> {
        let s = s.trim();
        let bad = || ScalarError::Literal(s.to_string());
        let (num, den) = match s.split_once('/') {
            Some((n, d)) => (n.trim(), d.trim()),
            None => (s, "1"),
        };
        let num: BigInt = num.parse().map_err(|_| bad())?;
        let den: BigInt = den.parse().map_err(|_| bad())?;
        if den.is_zero() {
            return Err(bad());
        }
        Ok(BigRational::new(num, den))
    }

    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }

    fn abs(&self) -> Self {
        Signed::abs(self)
    }

    fn sub_mul_assign(&mut self, a: &Self, b: &Self) {
        if a.is_zero() || b.is_zero() {
            return;
        }
        *self -= a * b;
    }

    fn add_mul_assign(&mut self, a: &Self, b: &Self) {
        if a.is_zero() || b.is_zero() {
            return;
        }
        *self += a * b;
    }

    fn is_zero_tol(&self) -> bool {
        self.is_zero()
    }

    fn approx_eq(&self, other: &Self) -> bool {
        self == other
    }
}

impl Scalar for f64 {
    const MODE: Mode = Mode::Float;

    fn from_i64(v: i64) -> Self {
        v as f64
    }

    fn from_ratio(num: i64, den: i64) -> Self {
        assert!(den != 0, "zero denominator");
        num as f64 / den as f64
    }

    fn from_real(v: f64) -> Result<Self, ScalarError> {
        if v.is_finite() {
            Ok(v)
        } else {
            Err(ScalarError::NonFinite(v))
        }
    }

    fn parse_literal(s: &str) -> Result<Self, ScalarError> {
        let s = s.trim();
        let bad = || ScalarError::Literal(s.to_string());
        let v = match s.split_once('/') {
            Some((n, d)) => {
                let n: f64 = n.trim().parse().map_err(|_| bad())?;
                let d: f64 = d.trim().parse().map_err(|_| bad())?;
                n / d
            }
            None => s.parse().map_err(|_| bad())?,
        };
        if v.is_finite() {
            Ok(v)
        } else {
            Err(bad())
        }
    }

    fn to_f64(&self) -> f64 {
        *self
    }

    fn abs(&self) -> Self {
        f64::abs(*self)
    }

    fn sub_mul_assign(&mut self, a: &Self, b: &Self) {
        *self -= a * b;
    }

    fn add_mul_assign(&mut self, a: &Self, b: &Self) {
        *self += a * b;
    }

    fn is_zero_tol(&self) -> bool {
        f64::abs(*self) <= float_tolerance()
    }

    fn approx_eq(&self, other: &Self) -> bool {
        let scale = 1.0 + f64::abs(*self).max(f64::abs(*other));
        f64::abs(self - other) <= float_tolerance() * scale
    }
}
