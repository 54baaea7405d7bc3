//! Proptest strategies shared by unit tests.

use num_complex::Complex;
use proptest::prelude::*;

use crate::qubit::{density_from_pure, DensityMatrix, PureState};

pub fn random_state() -> impl Strategy<Value = PureState<f64>> {
    (-1.0..1.0f64, -1.0..1.0f64, -1.0..1.0f64, -1.0..1.0f64)
        .prop_filter("nonzero", |(a, b, c, d)| {
            a * a + b * b + c * c + d * d > 1e-3
        })
        .prop_map(|(a, b, c, d)| {
            PureState::normalized(Complex::new(a, b), Complex::new(c, d)).unwrap()
        })
}

/// Mixture `p|ψ⟩⟨ψ| + (1−p)|χ⟩⟨χ|`; covers the whole Bloch ball.
pub fn random_density() -> impl Strategy<Value = DensityMatrix<f64>> {
    (random_state(), random_state(), 0.0..=1.0f64).prop_map(|(a, b, p)| {
        let m =
            density_from_pure(&a).matrix().scale(p) + density_from_pure(&b).matrix().scale(1.0 - p);
        DensityMatrix::new(m).unwrap()
    })
}
