//! Weight arithmetic abstracted over exact rationals and doubles.

use core::fmt::{Debug, Display};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Num, Signed, Zero};

/// Arithmetic required of probabilities and random-variable values.
///
/// The rational instantiation decides every identity exactly; the `f64`
/// instantiation exists for interop and compares with a fixed slack.
pub trait Scalar: Num + Signed + PartialOrd + Clone + Display + Debug {
    fn from_int(n: i64) -> Self;

    /// The fraction `numer / denom`.
    fn ratio(numer: i64, denom: i64) -> Self;

    /// Slack allowed when comparing derived quantities (zero when exact).
    fn tolerance() -> Self;

    /// Stricter slack for validating that masses sum to one.
    fn mass_tolerance() -> Self;

    fn approx_eq(&self, other: &Self) -> bool {
        (self.clone() - other.clone()).abs() <= Self::tolerance()
    }

    fn approx_zero(&self) -> bool {
        self.abs() <= Self::tolerance()
    }
}

impl Scalar for BigRational {
    fn from_int(n: i64) -> Self {
        BigRational::from_integer(BigInt::from(n))
    }

    fn ratio(numer: i64, denom: i64) -> Self {
        BigRational::new(BigInt::from(numer), BigInt::from(denom))
    }

    fn tolerance() -> Self {
        BigRational::zero()
    }

    fn mass_tolerance() -> Self {
        BigRational::zero()
    }
}

impl Scalar for f64 {
    fn from_int(n: i64) -> Self {
        n as f64
    }

    fn ratio(numer: i64, denom: i64) -> Self {
        numer as f64 / denom as f64
    }

    fn tolerance() -> Self {
        1e-9
    }

    fn mass_tolerance() -> Self {
        1e-12
    }
}

/// Sum of a sequence of scalars.
pub fn total<W: Scalar>(items: impl IntoIterator<Item = W>) -> W {
    items.into_iter().fold(W::zero(), |acc, w| acc + w)
}
