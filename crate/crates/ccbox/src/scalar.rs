//! Exact-or-approximate scalar arithmetic.
//!
//! Probabilities and correlators are [`Scalar`]s: either exact big
//! rationals or double-precision values carrying an explicit error bound.
//! Arithmetic between exact values stays exact; any operation touching an
//! approximate value yields an approximate result with a conservatively
//! propagated bound. Comparisons on approximate values refuse to decide
//! when the two operands are within their combined bounds of each other —
//! callers receive [`Error::AmbiguousBoundary`] instead of a guess.

use std::cmp::Ordering;
use std::fmt;

use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Exact rational number.
pub type Rat = BigRational;

/// Build an exact rational from an integer pair. Panics if `q == 0`.
pub fn rat(p: i64, q: i64) -> Rat {
    Rat::new(p.into(), q.into())
}

/// Rounding slack for double-precision operations.
const F64_SLACK: f64 = f64::EPSILON;

/// A number that is either exact or carries an explicit error bound.
#[derive(Clone, Debug)]
pub enum Scalar {
    /// Exact rational value.
    Exact(Rat),
    /// `value` is within `tol` of the intended real number; `tol > 0`.
    Approx { value: f64, tol: f64 },
}

impl Scalar {
    /// Exact zero.
    pub fn zero() -> Self {
        Scalar::Exact(Rat::zero())
    }

    /// Exact one.
    pub fn one() -> Self {
        Scalar::Exact(Rat::one())
    }

    /// Exact integer.
    pub fn from_int(i: i64) -> Self {
        Scalar::Exact(Rat::from_integer(i.into()))
    }

    /// Exact ratio `p/q`. Panics if `q == 0`.
    pub fn ratio(p: i64, q: i64) -> Self {
        Scalar::Exact(rat(p, q))
    }

    /// Exact value from a rational.
    pub fn from_rat(r: Rat) -> Self {
        Scalar::Exact(r)
    }

    /// Approximate value with an explicit error bound.
    ///
    /// Errors if `value` is not finite or `tol` is not strictly positive.
    pub fn approx(value: f64, tol: f64) -> Result<Self> {
        if !value.is_finite() {
            return Err(Error::BadParameter(format!(
                "approximate scalar must be finite, got {value}"
            )));
        }
        if !(tol > 0.0) || !tol.is_finite() {
            return Err(Error::BadParameter(format!(
                "approximate tolerance must be finite and positive, got {tol}"
            )));
        }
        Ok(Scalar::Approx { value, tol })
    }

    /// True for exact values.
    pub fn is_exact(&self) -> bool {
        matches!(self, Scalar::Exact(_))
    }

    /// Error bound: zero for exact values.
    pub fn tol(&self) -> f64 {
        match self {
            Scalar::Exact(_) => 0.0,
            Scalar::Approx { tol, .. } => *tol,
        }
    }

    /// Double-precision view of the value.
    pub fn to_f64(&self) -> f64 {
        match self {
            Scalar::Exact(r) => r.to_f64().unwrap_or(f64::NAN),
            Scalar::Approx { value, .. } => *value,
        }
    }

    /// Exact rational view: exact values are returned as-is; approximate
    /// values are converted to the exact rational their double represents.
    pub fn rationalize(&self) -> Rat {
        match self {
            Scalar::Exact(r) => r.clone(),
            Scalar::Approx { value, .. } => {
                Rat::from_float(*value).expect("finite by construction")
            }
        }
    }

    /// `(value, bound)` view used by comparisons: exact values get a
    /// bound covering only their conversion to double.
    pub(crate) fn value_tol(&self) -> (f64, f64) {
        match self {
            Scalar::Exact(r) => {
                let v = r.to_f64().unwrap_or(f64::NAN);
                (v, v.abs() * F64_SLACK)
            }
            Scalar::Approx { value, tol } => (*value, *tol),
        }
    }

    /// Semantic comparison. Exact pairs compare exactly; pairs involving
    /// an approximate value refuse to decide within the combined bound.
    pub fn try_cmp(&self, other: &Scalar) -> Result<Ordering> {
        match (self, other) {
            (Scalar::Exact(a), Scalar::Exact(b)) => Ok(a.cmp(b)),
            _ => {
                let (va, ta) = self.value_tol();
                let (vb, tb) = other.value_tol();
                let margin = ta + tb;
                let diff = va - vb;
                if diff.abs() <= margin {
                    Err(Error::AmbiguousBoundary(format!(
                        "values {va} and {vb} are within combined bound {margin:e}"
                    )))
                } else if diff > 0.0 {
                    Ok(Ordering::Greater)
                } else {
                    Ok(Ordering::Less)
                }
            }
        }
    }

    /// One-sided validation check: is the value at least `bound`, giving
    /// approximate values the benefit of their error bound?
    pub fn ge_with_slack(&self, bound: &Rat) -> bool {
        match self {
            Scalar::Exact(r) => r >= bound,
            Scalar::Approx { value, tol } => {
                let b = bound.to_f64().unwrap_or(f64::NAN);
                *value >= b - *tol - F64_SLACK * (b.abs() + 1.0)
            }
        }
    }

    /// One-sided validation check: does the value equal `bound` within its
    /// own error bound? Exact values must match exactly.
    pub fn eq_with_slack(&self, bound: &Rat) -> bool {
        match self {
            Scalar::Exact(r) => r == bound,
            Scalar::Approx { value, tol } => {
                let b = bound.to_f64().unwrap_or(f64::NAN);
                (*value - b).abs() <= *tol + F64_SLACK * (b.abs() + 1.0)
            }
        }
    }

    /// Two-sided consistency check: could the two values denote the same
    /// real number? Exact pairs must match exactly; pairs involving an
    /// approximate value match within their combined bounds.
    pub fn consistent_with(&self, other: &Scalar) -> bool {
        match (self, other) {
            (Scalar::Exact(a), Scalar::Exact(b)) => a == b,
            _ => {
                let (va, ta) = self.value_tol();
                let (vb, tb) = other.value_tol();
                (va - vb).abs() <= ta + tb + F64_SLACK * (va.abs() + vb.abs() + 1.0)
            }
        }
    }

    /// Absolute value.
    pub fn abs(&self) -> Scalar {
        match self {
            Scalar::Exact(r) => Scalar::Exact(r.abs()),
            Scalar::Approx { value, tol } => Scalar::Approx {
                value: value.abs(),
                tol: *tol,
            },
        }
    }

    /// Negation.
    pub fn neg(&self) -> Scalar {
        match self {
            Scalar::Exact(r) => Scalar::Exact(-r.clone()),
            Scalar::Approx { value, tol } => Scalar::Approx {
                value: -value,
                tol: *tol,
            },
        }
    }

    /// Addition with bound propagation.
    pub fn add(&self, other: &Scalar) -> Scalar {
        match (self, other) {
            (Scalar::Exact(a), Scalar::Exact(b)) => Scalar::Exact(a + b),
            _ => {
                let (va, ta) = self.value_tol();
                let (vb, tb) = other.value_tol();
                let value = va + vb;
                Scalar::Approx {
                    value,
                    tol: ta + tb + F64_SLACK * value.abs(),
                }
            }
        }
    }

    /// Subtraction with bound propagation.
    pub fn sub(&self, other: &Scalar) -> Scalar {
        self.add(&other.neg())
    }

    /// Multiplication with bound propagation.
    pub fn mul(&self, other: &Scalar) -> Scalar {
        match (self, other) {
            (Scalar::Exact(a), Scalar::Exact(b)) => Scalar::Exact(a * b),
            _ => {
                let (va, ta) = self.value_tol();
                let (vb, tb) = other.value_tol();
                let value = va * vb;
                Scalar::Approx {
                    value,
                    tol: va.abs() * tb + vb.abs() * ta + ta * tb + F64_SLACK * value.abs(),
                }
            }
        }
    }

    /// Division with bound propagation. Errors on division by exact zero
    /// or by an approximate value whose bound admits zero.
    pub fn div(&self, other: &Scalar) -> Result<Scalar> {
        match (self, other) {
            (Scalar::Exact(a), Scalar::Exact(b)) => {
                if b.is_zero() {
                    Err(Error::BadParameter("division by zero".into()))
                } else {
                    Ok(Scalar::Exact(a / b))
                }
            }
            _ => {
                let (va, ta) = self.value_tol();
                let (vb, tb) = other.value_tol();
                if vb.abs() <= tb {
                    return Err(Error::AmbiguousBoundary(format!(
                        "division by {vb} with error bound {tb:e} admits zero"
                    )));
                }
                let value = va / vb;
                // |a/b - a'/b'| <= (|a| tb + |b| ta) / (|b| (|b| - tb))
                let denom = vb.abs() * (vb.abs() - tb);
                Ok(Scalar::Approx {
                    value,
                    tol: (va.abs() * tb + vb.abs() * ta) / denom + F64_SLACK * value.abs(),
                })
            }
        }
    }

    /// Sum of a sequence of scalars.
    pub fn sum<'a>(values: impl IntoIterator<Item = &'a Scalar>) -> Scalar {
        values
            .into_iter()
            .fold(Scalar::zero(), |acc, v| acc.add(v))
    }

    /// Test helper: are the double views within `within` of each other?
    pub fn close_to(&self, other: &Scalar, within: f64) -> bool {
        (self.to_f64() - other.to_f64()).abs() <= within
    }
}

/// Structural equality: exact values compare as rationals, approximate
/// values compare bitwise on both fields. An exact and an approximate
/// value are never structurally equal. This is the round-trip identity
/// used by serialization tests, not a semantic comparison.
impl PartialEq for Scalar {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (Scalar::Exact(a), Scalar::Exact(b)) => a == b,
            (
                Scalar::Approx { value: va, tol: ta },
                Scalar::Approx { value: vb, tol: tb },
            ) => va.to_bits() == vb.to_bits() && ta.to_bits() == tb.to_bits(),
            _ => false,
        }
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scalar::Exact(r) => write!(f, "{}/{}", r.numer(), r.denom()),
            Scalar::Approx { value, .. } => write!(f, "{value}"),
        }
    }
}
