//! Real values carrying certified absolute error bounds.
//!
//! `ApproxValue { value, err }` asserts that the number being represented
//! lies in `[value - err, value + err]`.  All combinators widen the bound
//! enough to cover both the interval arithmetic and the floating-point
//! rounding of the operation, so a chain of operations stays certified.

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_rational::BigRational;
use num_traits::{Float, FromPrimitive, Signed, ToPrimitive};
use serde::{Deserialize, Serialize};

/// Floating-point carrier for approximate values (`f64`, `f32`).
pub trait Scalar: Float + FromPrimitive + fmt::Debug + fmt::Display + 'static {}

impl<T: Float + FromPrimitive + fmt::Debug + fmt::Display + 'static> Scalar for T {}

/// A real number together with a certified absolute error bound.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ApproxValue<S> {
    pub value: S,
    pub err: S,
}

impl<S: Scalar> ApproxValue<S> {
    pub fn new(value: S, err: S) -> Self {
        assert!(err >= S::zero() && err.is_finite(), "error bound must be finite and nonnegative");
        ApproxValue { value, err }
    }

    /// A value known exactly (in particular, exactly representable).
    pub fn exact(value: S) -> Self {
        ApproxValue { value, err: S::zero() }
    }

    pub fn zero() -> Self {
        Self::exact(S::zero())
    }

    pub fn one() -> Self {
        Self::exact(S::one())
    }

    /// Rounds an exact rational into the scalar, certifying the rounding.
    pub fn from_rational(r: &BigRational) -> Self {
        let v64 = r.to_f64().expect("rational out of floating range");
        let value = S::from_f64(v64).expect("scalar must convert from f64");
        let eps64 = S::from_f64(f64::EPSILON).expect("scalar must convert from f64");
        let two = S::one() + S::one();
        let err = value.abs() * two * (eps64 + S::epsilon());
        ApproxValue { value, err }
    }

    /// Covers the rounding of `value` and of the bound arithmetic itself.
    fn widen(err: S, value: S) -> S {
        let eps = S::epsilon();
        (err + value.abs() * eps) * (S::one() + eps + eps)
    }

    pub fn add(self, rhs: Self) -> Self {
        let value = self.value + rhs.value;
        ApproxValue { value, err: Self::widen(self.err + rhs.err, value) }
    }

    pub fn sub(self, rhs: Self) -> Self {
        self.add(rhs.neg())
    }

    pub fn neg(self) -> Self {
        ApproxValue { value: -self.value, err: self.err }
    }

    pub fn mul(self, rhs: Self) -> Self {
        let value = self.value * rhs.value;
        let err =
            self.value.abs() * rhs.err + rhs.value.abs() * self.err + self.err * rhs.err;
        ApproxValue { value, err: Self::widen(err, value) }
    }

    /// Quotient; the divisor interval must not contain zero.
    pub fn div(self, rhs: Self) -> Self {
        let denom_low = rhs.value.abs() - rhs.err;
        assert!(
            denom_low > S::zero(),
            "divisor interval [{} ± {}] contains zero",
            rhs.value,
            rhs.err
        );
        let value = self.value / rhs.value;
        let err = (self.err + value.abs() * rhs.err) / denom_low;
        ApproxValue { value, err: Self::widen(err, value) }
    }

    pub fn recip(self) -> Self {
        Self::one().div(self)
    }

    pub fn mul_rational(self, r: &BigRational) -> Self {
        self.mul(Self::from_rational(r))
    }

    pub fn abs(self) -> Self {
        ApproxValue { value: self.value.abs(), err: self.err }
    }

    pub fn upper(self) -> S {
        self.value + self.err
    }

    pub fn lower(self) -> S {
        self.value - self.err
    }

    /// Whether the certified interval contains the exact rational `r`.
    pub fn contains_rational(&self, r: &BigRational) -> bool {
        let v = BigRational::from_float(self.value.to_f64().expect("finite value"))
            .expect("finite value");
        let e = BigRational::from_float(self.err.to_f64().expect("finite error"))
            .expect("finite error");
        (r - v).abs() <= e
    }
}

impl<S: Scalar> Add for ApproxValue<S> {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        ApproxValue::add(self, rhs)
    }
}

impl<S: Scalar> Sub for ApproxValue<S> {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        ApproxValue::sub(self, rhs)
    }
}

impl<S: Scalar> Mul for ApproxValue<S> {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        ApproxValue::mul(self, rhs)
    }
}

impl<S: Scalar> Div for ApproxValue<S> {
    type Output = Self;
    fn div(self, rhs: Self) -> Self {
        ApproxValue::div(self, rhs)
    }
}

impl<S: Scalar> Neg for ApproxValue<S> {
    type Output = Self;
    fn neg(self) -> Self {
        ApproxValue::neg(self)
    }
}

impl<S: Scalar> fmt::Display for ApproxValue<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} ± {}", self.value, self.err)
    }
}
