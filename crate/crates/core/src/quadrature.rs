//! Midpoint quadrature over a full period.
//!
//! Every integrand in this crate is a trigonometric polynomial in its angle
//! variables, for which the uniform midpoint rule on `[0, 2π)` is exact once
//! the node count exceeds the polynomial degree.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::scalar::{KahanSum, Real};

/// Smallest accepted node count per axis.
pub const MIN_POINTS: usize = 8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuadratureSpec {
    /// Nodes per rotation axis (θ and φ each).
    pub rotation_points: usize,
    /// Nodes for the state-angle average.
    pub xi_points: usize,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            rotation_points: 256,
            xi_points: 1024,
        }
    }
}

impl QuadratureSpec {
    pub fn new(rotation_points: usize, xi_points: usize) -> Result<Self> {
        let spec = Self {
            rotation_points,
            xi_points,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.rotation_points < MIN_POINTS {
            return Err(invalid(format!(
                "rotation quadrature needs at least {MIN_POINTS} points, got {}",
                self.rotation_points
            )));
        }
        if self.xi_points < MIN_POINTS {
            return Err(invalid(format!(
                "state-angle quadrature needs at least {MIN_POINTS} points, got {}",
                self.xi_points
            )));
        }
        Ok(())
    }
}

/// Midpoint nodes `(k + ½)·2π/n`, `k = 0..n`.
pub fn periodic_nodes<T: Real>(n: usize) -> Vec<T> {
    let step = T::TAU() / T::lit(n as f64);
    (0..n)
        .map(|k| (T::lit(k as f64) + T::lit(0.5)) * step)
        .collect()
}

/// `(1/2π) ∫₀^{2π} f` by the midpoint rule with compensated summation.
pub fn periodic_mean<T: Real, F>(n: usize, f: F) -> Result<T>
where
    F: FnMut(T) -> Result<T>,
{
    if n == 0 {
        return Err(invalid("quadrature needs at least one node"));
    }
    let mut acc = KahanSum::new();
    for v in periodic_nodes::<T>(n).into_iter().map(f) {
        acc.add(v?);
    }
    Ok(acc.total() / T::lit(n as f64))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_for_low_degree_trig_polynomials() {
        // ⟨cos²2x⟩ = 1/2, ⟨cos 4x⟩ = 0, ⟨sin⁴x⟩ = 3/8
        let m = periodic_mean(16, |x: f64| Ok((2.0 * x).cos().powi(2))).unwrap();
        assert!((m - 0.5).abs() < 1e-15);
        let m = periodic_mean(16, |x: f64| Ok((4.0 * x).cos())).unwrap();
        assert!(m.abs() < 1e-15);
        let m = periodic_mean(8, |x: f64| Ok(x.sin().powi(4))).unwrap();
        assert!((m - 0.375).abs() < 1e-15);
    }

    #[test]
    fn node_layout() {
        let nodes = periodic_nodes::<f64>(4);
        let q = std::f64::consts::FRAC_PI_4;
        assert_eq!(nodes, vec![q, 3.0 * q, 5.0 * q, 7.0 * q]);
    }

    #[test]
    fn resolution_floor() {
        assert!(QuadratureSpec::new(7, 1024).is_err());
        assert!(QuadratureSpec::new(256, 4).is_err());
        assert_eq!(
            QuadratureSpec::default(),
            QuadratureSpec::new(256, 1024).unwrap()
        );
    }

    #[test]
    fn errors_propagate() {
        let r = periodic_mean(8, |_: f64| Err(invalid("boom")));
        assert!(r.is_err());
        assert!(periodic_mean(0, |x: f64| Ok(x)).is_err());
    }
}
