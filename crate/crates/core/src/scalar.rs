//! Scalar abstractions.
//!
//! Tree bookkeeping (`dyadic`, `extremize`) only needs field arithmetic and an
//! order, so it runs over [`Scalar`], which includes exact rationals. The closed
//! form needs powers and logarithms and runs over [`Real`] (f32/f64).

use std::fmt::Debug;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Float, FromPrimitive, Num, ToPrimitive};

/// Ordered field element usable for tree aggregates: f32, f64 or `BigRational`.
pub trait Scalar:
    Num + Clone + PartialOrd + Debug + FromPrimitive + ToPrimitive + Send + Sync + 'static
{
    /// Whether arithmetic on this type is exact.
    const EXACT: bool;

    /// Converts an `f64` literal. Exact types receive the exact binary value.
    fn lit(v: f64) -> Self {
        Self::from_f64(v).expect("finite literal")
    }

    fn from_count(n: u64) -> Self {
        Self::from_u64(n).expect("integer fits the scalar type")
    }

    fn as_f64(&self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    fn abs_val(&self) -> Self {
        if *self < Self::zero() {
            Self::zero() - self.clone()
        } else {
            self.clone()
        }
    }
}

impl Scalar for f32 {
    const EXACT: bool = false;
}

impl Scalar for f64 {
    const EXACT: bool = false;
}

impl Scalar for BigRational {
    const EXACT: bool = true;
}

/// Floating point scalar for the closed-form Bellman function.
pub trait Real: Scalar + Float {}

impl Real for f32 {}
impl Real for f64 {}

/// Builds an exact rational `num/den`.
pub fn ratio(num: i64, den: i64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

pub(crate) fn max_of<T: Scalar>(a: T, b: T) -> T {
    if b > a {
        b
    } else {
        a
    }
}

pub(crate) fn min_of<T: Scalar>(a: T, b: T) -> T {
    if b < a {
        b
    } else {
        a
    }
}

/// `|a − b| ≤ tol · max(1, |b|)`.
pub(crate) fn close<T: Scalar>(a: &T, b: &T, tol: f64) -> bool {
    let scale = max_of(T::one(), b.abs_val());
    (a.clone() - b.clone()).abs_val() <= T::lit(tol) * scale
}
