//! Scalar abstraction shared by every numeric routine in the crate.

use std::fmt::{Debug, Display};
use std::iter::Sum;
use std::str::FromStr;

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};
use serde::de::DeserializeOwned;
use serde::Serialize;

/// Real floating point scalar: `f32` or `f64`.
///
/// The tolerances are expressed per precision. The `f64` values are the ones
/// the documented contracts refer to; `f32` gets proportionally looser bounds.
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + Sum
    + Debug
    + Display
    + FromStr
    + Default
    + Serialize
    + DeserializeOwned
    + Send
    + Sync
    + 'static
{
    /// Slack for exact algebraic identities (unitarity of constructed
    /// matrices, trace, Hermiticity, Kraus completeness).
    const IDENTITY_TOL: f64;
    /// Slack for caller-supplied unitaries and channels.
    const UNITARY_TOL: f64;
    /// Slack before a closed-form fidelity is considered out of [0, 1].
    const FORMULA_TOL: f64;

    /// Converts an `f64` literal into this scalar.
    #[inline]
    fn lit(x: f64) -> Self {
        // every finite f64 converts (with rounding) into f32 and f64
        Self::from_f64(x).expect("f64 literal representable")
    }

    #[inline]
    fn identity_tol() -> Self {
        Self::lit(Self::IDENTITY_TOL)
    }

    #[inline]
    fn unitary_tol() -> Self {
        Self::lit(Self::UNITARY_TOL)
    }

    #[inline]
    fn formula_tol() -> Self {
        Self::lit(Self::FORMULA_TOL)
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Real for f64 {
    const IDENTITY_TOL: f64 = 1e-12;
    const UNITARY_TOL: f64 = 1e-10;
    const FORMULA_TOL: f64 = 1e-9;
}

impl Real for f32 {
    const IDENTITY_TOL: f64 = 1e-5;
    const UNITARY_TOL: f64 = 1e-4;
    const FORMULA_TOL: f64 = 1e-4;
}

/// Compensated (Kahan–Babuška/Neumaier) summation.
///
/// Used by every quadrature loop so that results do not depend on grid size
/// drift and stay reproducible to the last few ulps.
#[derive(Clone, Copy, Debug, Default)]
pub struct KahanSum<T> {
    sum: T,
    compensation: T,
}

impl<T: Real> KahanSum<T> {
    pub fn new() -> Self {
        Self {
            sum: T::zero(),
            compensation: T::zero(),
        }
    }

    pub fn add(&mut self, x: T) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.compensation = self.compensation + ((self.sum - t) + x);
        } else {
            self.compensation = self.compensation + ((x - t) + self.sum);
        }
        self.sum = t;
    }

    pub fn total(&self) -> T {
        self.sum + self.compensation
    }
}

impl<T: Real> FromIterator<T> for KahanSum<T> {
    fn from_iter<I: IntoIterator<Item = T>>(iter: I) -> Self {
        let mut acc = Self::new();
        for x in iter {
            acc.add(x);
        }
        acc
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kahan_recovers_small_terms() {
        let mut acc = KahanSum::<f64>::new();
        acc.add(1.0);
        for _ in 0..10_000 {
            acc.add(1e-16);
        }
        acc.add(-1.0);
        assert!((acc.total() - 1e-12).abs() < 1e-24);
    }

    #[test]
    fn literal_conversion() {
        assert_eq!(<f32 as Real>::lit(0.5), 0.5f32);
        assert_eq!(<f64 as Real>::identity_tol(), 1e-12);
    }
}
