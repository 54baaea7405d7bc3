//! Fidelity of the noisy three-stage protocol.
//!
//! Two independent routes are provided and cross-checked:
//!
//! * closed-form expressions in the noise parameter and the state angle ξ,
//! * a numeric oracle that runs the protocol and measures `⟨ψ|ρ_final|ψ⟩`,
//!   averaged over both encoded bits and uniformly over the secret rotation
//!   angles `(θ, φ) ∈ [0, 2π)²`.

use serde::Serialize;

use crate::channel::{NoiseKind, QuantumChannel};
use crate::error::{invalid, precondition, Result};
use crate::protocol::{encode_bit, evolve_stages, run_protocol, Bit, ProtocolConfig};
use crate::quadrature::{periodic_mean, periodic_nodes, QuadratureSpec};
use crate::qubit::{commutator, fidelity, rotation, DensityMatrix, Mat2};
use crate::scalar::{KahanSum, Real};

/// Clamps to [0, 1] after checking the pre-clamp value is within the formula
/// tolerance of the interval.
fn clamp_unit<T: Real>(v: T, what: &str) -> Result<T> {
    let tol = T::formula_tol();
    if !(v >= -tol && v <= T::one() + tol) {
        return Err(precondition(format!(
            "{what} evaluated to {v}, outside [0, 1]"
        )));
    }
    Ok(v.max(T::zero()).min(T::one()))
}

fn f_ad<T: Real>(eta: T, xi: T) -> T {
    let c = T::lit;
    let s = (T::one() - eta).sqrt();
    let constant = -eta * (eta * eta - c(3.0) * (s + c(2.0)) * eta + c(7.0) * s + c(9.0))
        + c(4.0) * (s + c(3.0));
    let modulation = (eta - T::one()) * (eta * (eta + c(3.0) * s - c(5.0)) - c(4.0) * s + c(4.0));
    (constant - modulation * (c(4.0) * xi).cos()) / c(16.0)
}

fn f_pd<T: Real>(eta: T, xi: T) -> T {
    let c = T::lit;
    let s = (T::one() - eta).sqrt();
    let coherence = -s * eta + c(3.0) * eta + c(4.0) * s - c(4.0);
    (coherence * (c(2.0) * xi).sin().powi(2) - c(3.0) * eta + c(8.0)) / c(8.0)
}

fn f_cd<T: Real>(phi: T, xi: T) -> T {
    let c = T::lit;
    let two_xi = c(2.0) * xi;
    (c(6.0) * two_xi.cos().powi(2) * (c(2.0) * phi).cos()
        + two_xi.sin().powi(2) * (c(15.0) * phi.cos() + (c(3.0) * phi).cos())
        + c(5.0) * (c(4.0) * xi).cos()
        + c(21.0))
        / c(32.0)
}

fn f_cr<T: Real>(theta: T) -> T {
    (T::lit(3.0) * theta).cos().powi(2)
}

/// Closed-form bit- and rotation-averaged fidelity at state angle `xi`.
///
/// Collective rotation does not depend on `xi`.
pub fn closed_form_fidelity<T: Real>(kind: NoiseKind, param: T, xi: T) -> Result<T> {
    kind.validate_parameter(param)?;
    if !xi.is_finite() {
        return Err(invalid(format!("xi must be finite, got {xi}")));
    }
    let v = match kind {
        NoiseKind::Ad => f_ad(param, xi),
        NoiseKind::Pd => f_pd(param, xi),
        NoiseKind::Cd => f_cd(param, xi),
        NoiseKind::Cr => f_cr(param),
    };
    clamp_unit(v, "closed-form fidelity")
}

/// Closed-form fidelity additionally averaged over `xi ∈ [0, 2π)`.
pub fn closed_form_average_fidelity<T: Real>(kind: NoiseKind, param: T) -> Result<T> {
    kind.validate_parameter(param)?;
    let c = T::lit;
    let v = match kind {
        NoiseKind::Ad => {
            let eta = param;
            let s = (T::one() - eta).sqrt();
            (c(4.0) * (s + c(3.0))
                - eta * (eta * eta - c(3.0) * (s + c(2.0)) * eta + c(7.0) * s + c(9.0)))
                / c(16.0)
        }
        NoiseKind::Pd => {
            let eta = param;
            ((T::one() - eta).sqrt() + c(3.0)) * (c(4.0) - eta) / c(16.0)
        }
        NoiseKind::Cd => {
            let phi = param;
            (c(15.0) * phi.cos() + c(6.0) * (c(2.0) * phi).cos() + (c(3.0) * phi).cos() + c(42.0))
                / c(64.0)
        }
        NoiseKind::Cr => f_cr(param),
    };
    clamp_unit(v, "closed-form average fidelity")
}

/// Fidelity between the encoded state and Bob's final state for one choice
/// of angles and bit.
pub fn numeric_fidelity<T: Real>(
    channel: &QuantumChannel<T>,
    xi: T,
    theta: T,
    phi: T,
    bit: Bit,
) -> Result<T> {
    let config = ProtocolConfig::new(xi, theta, phi, channel.clone())?;
    let (rho, _) = run_protocol(&config, bit)?;
    fidelity(&encode_bit(bit, xi), &rho)
}

fn rotation_table<T: Real>(n: usize) -> Result<Vec<Mat2<T>>> {
    periodic_nodes::<T>(n).into_iter().map(rotation).collect()
}

fn ensure_valid<T: Real>(channel: &QuantumChannel<T>) -> Result<()> {
    channel.apply(&DensityMatrix::maximally_mixed()).map(|_| ())
}

/// Mean of the bit-averaged [`numeric_fidelity`] over the midpoint grid on
/// `(θ, φ) ∈ [0, 2π)²` with `quad.rotation_points` nodes per axis.
pub fn rotation_averaged_fidelity<T: Real>(
    channel: &QuantumChannel<T>,
    xi: T,
    quad: &QuadratureSpec,
) -> Result<T> {
    quad.validate()?;
    if !xi.is_finite() {
        return Err(invalid(format!("xi must be finite, got {xi}")));
    }
    ensure_valid(channel)?;
    let rotations = rotation_table::<T>(quad.rotation_points)?;
    let states = [Bit::Zero, Bit::One].map(|b| encode_bit(b, xi));
    let inputs = states.map(|s| *DensityMatrix::from_pure(&s).matrix());
    let stages = [channel, channel, channel];
    let half = T::lit(0.5);

    let mut acc = KahanSum::new();
    for r_alice in &rotations {
        for r_bob in &rotations {
            let mut pair = T::zero();
            for (psi, rho) in states.iter().zip(&inputs) {
                let out = evolve_stages(stages, r_alice, r_bob, rho)[3];
                pair = pair + psi.expectation(&out).re;
            }
            acc.add(pair * half);
        }
    }
    let n = T::lit((rotations.len() * rotations.len()) as f64);
    clamp_unit(acc.total() / n, "rotation-averaged fidelity")
}

/// The protocol map averaged over the rotation grid, stored as the images of
/// the four matrix units `|i⟩⟨j|`.
///
/// Fidelity is linear in the map, so evaluating this at any ξ equals
/// [`rotation_averaged_fidelity`] at the same resolution while costing one
/// grid pass for all ξ.
#[derive(Clone, Debug)]
pub struct AveragedProtocolMap<T> {
    images: [Mat2<T>; 4],
}

impl<T: Real> AveragedProtocolMap<T> {
    pub fn new(channel: &QuantumChannel<T>, quad: &QuadratureSpec) -> Result<Self> {
        quad.validate()?;
        ensure_valid(channel)?;
        let rotations = rotation_table::<T>(quad.rotation_points)?;
        let (o, z) = (T::one(), T::zero());
        let units = [
            Mat2::from_real(o, z, z, z),
            Mat2::from_real(z, o, z, z),
            Mat2::from_real(z, z, o, z),
            Mat2::from_real(z, z, z, o),
        ];
        let stages = [channel, channel, channel];
        let mut sums: [[[KahanSum<T>; 2]; 4]; 4] = Default::default();
        for r_alice in &rotations {
            for r_bob in &rotations {
                for (unit, sum) in units.iter().zip(sums.iter_mut()) {
                    let out = evolve_stages(stages, r_alice, r_bob, unit)[3];
                    for (entry, s) in out.entries().iter().zip(sum.iter_mut()) {
                        s[0].add(entry.re);
                        s[1].add(entry.im);
                    }
                }
            }
        }
        let n = T::lit((rotations.len() * rotations.len()) as f64);
        let images = sums.map(|image| {
            let e = image.map(|[re, im]| num_complex::Complex::new(re.total() / n, im.total() / n));
            Mat2::new(e[0], e[1], e[2], e[3])
        });
        Ok(Self { images })
    }

    /// Averaged map applied to `rho`.
    pub fn apply(&self, rho: &Mat2<T>) -> Mat2<T> {
        let e = rho.entries();
        let mut out = Mat2::zero();
        for (coef, image) in e.iter().zip(&self.images) {
            let [a, b, c, d] = *image.entries();
            out = out + Mat2::new(a * coef, b * coef, c * coef, d * coef);
        }
        out
    }

    /// Bit-averaged fidelity at state angle `xi`.
    pub fn fidelity(&self, xi: T) -> Result<T> {
        let mut total = T::zero();
        for bit in [Bit::Zero, Bit::One] {
            let psi = encode_bit(bit, xi);
            let out = self.apply(DensityMatrix::from_pure(&psi).matrix());
            total = total + psi.expectation(&out).re;
        }
        clamp_unit(total * T::lit(0.5), "averaged-map fidelity")
    }
}

/// What to integrate over the state angle.
#[derive(Clone, Copy, Debug)]
pub enum StateIntegrand<'a, T> {
    /// Closed-form fidelity of a noise kind at a parameter.
    ClosedForm(NoiseKind, T),
    /// Rotation-averaged numeric oracle for a channel.
    Oracle(&'a QuantumChannel<T>),
}

/// `(1/2π) ∫₀^{2π} F(ξ) dξ` with `quad.xi_points` midpoint nodes.
pub fn state_averaged_fidelity<T: Real>(
    integrand: StateIntegrand<'_, T>,
    quad: &QuadratureSpec,
) -> Result<T> {
    quad.validate()?;
    let v = match integrand {
        StateIntegrand::ClosedForm(kind, param) => {
            kind.validate_parameter(param)?;
            periodic_mean(quad.xi_points, |xi| closed_form_fidelity(kind, param, xi))?
        }
        StateIntegrand::Oracle(channel) => {
            let map = AveragedProtocolMap::new(channel, quad)?;
            periodic_mean(quad.xi_points, |xi| map.fidelity(xi))?
        }
    };
    clamp_unit(v, "state-averaged fidelity")
}

/// Amplitude-damping Kraus operator selector.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum KrausIndex {
    E0,
    E1,
}

/// Stated closed forms for the amplitude-damping commutators:
/// `(1 − √(1−η))·sin θ·σx` for `E₀` and `−√η·sin θ·σz` for `E₁`.
///
/// With `R(θ) = [[cos θ, −sin θ], [sin θ, cos θ]]` direct multiplication gives
/// the negation of both, i.e. these are `[R(θ), Eᵢ]`. They agree with
/// `[Eᵢ, R(θ)]` exactly when `η = 0` or `sin θ = 0`.
pub fn commutator_closed_form<T: Real>(which: KrausIndex, eta: T, theta: T) -> Mat2<T> {
    match which {
        KrausIndex::E0 => Mat2::sigma_x().scale((T::one() - (T::one() - eta).sqrt()) * theta.sin()),
        KrausIndex::E1 => Mat2::sigma_z().scale(-eta.sqrt() * theta.sin()),
    }
}

/// Computed commutator next to its stated closed form.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CommutatorCheck<T> {
    pub which: KrausIndex,
    pub eta: T,
    pub theta: T,
    /// `Eᵢ R(θ) − R(θ) Eᵢ`.
    pub computed: Mat2<T>,
    /// [`commutator_closed_form`].
    pub closed_form: Mat2<T>,
    /// `max |computed − closed_form|` entrywise.
    pub residual: T,
}

impl<T: Real> CommutatorCheck<T> {
    pub fn matches_closed_form(&self) -> bool {
        self.residual <= T::identity_tol()
    }
}

/// Computes `[Eᵢ, R(θ)]` for the amplitude-damping Kraus operator `Eᵢ` and
/// compares it with [`commutator_closed_form`].
pub fn commutator_defect<T: Real>(
    which: KrausIndex,
    eta: T,
    theta: T,
) -> Result<CommutatorCheck<T>> {
    let channel = QuantumChannel::amplitude_damping(eta)?;
    let r = rotation(theta)?;
    let e = match which {
        KrausIndex::E0 => channel.operators()[0],
        KrausIndex::E1 => channel.operators()[1],
    };
    let computed = commutator(&e, &r);
    let closed_form = commutator_closed_form(which, eta, theta);
    Ok(CommutatorCheck {
        which,
        eta,
        theta,
        computed,
        closed_form,
        residual: computed.max_abs_diff(&closed_form),
    })
}

/// Closed form versus oracle on a `(param, ξ)` grid.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(bound = "T: Real")]
pub struct FidelityReport<T> {
    pub kind: NoiseKind,
    pub params: Vec<T>,
    pub xis: Vec<T>,
    /// `closed_form[i][j]` at `(params[i], xis[j])`.
    pub closed_form: Vec<Vec<T>>,
    pub oracle: Vec<Vec<T>>,
    pub max_abs_deviation: T,
    /// `(param, xi)` where the deviation peaks.
    pub worst_point: (T, T),
}

impl<T: Real> FidelityReport<T> {
    /// Assembles a report from congruent value grids.
    pub fn from_grids(
        kind: NoiseKind,
        params: Vec<T>,
        xis: Vec<T>,
        closed_form: Vec<Vec<T>>,
        oracle: Vec<Vec<T>>,
    ) -> Result<Self> {
        let congruent = closed_form.len() == params.len()
            && oracle.len() == params.len()
            && closed_form
                .iter()
                .chain(&oracle)
                .all(|row| row.len() == xis.len());
        if !congruent || params.is_empty() || xis.is_empty() {
            return Err(invalid(
                "closed-form and oracle grids must be congruent and nonempty",
            ));
        }
        let mut max = T::zero();
        let mut worst = (params[0], xis[0]);
        for (i, (c_row, o_row)) in closed_form.iter().zip(&oracle).enumerate() {
            for (j, (c, o)) in c_row.iter().zip(o_row).enumerate() {
                let d = (*c - *o).abs();
                if d > max || d.is_nan() {
                    max = d;
                    worst = (params[i], xis[j]);
                }
            }
        }
        Ok(Self {
            kind,
            params,
            xis,
            closed_form,
            oracle,
            max_abs_deviation: max,
            worst_point: worst,
        })
    }

    pub fn passes(&self, tolerance: T) -> bool {
        self.max_abs_deviation <= tolerance
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    type Channel = QuantumChannel<f64>;

    fn closed_form_fidelity(kind: NoiseKind, param: f64, xi: f64) -> Result<f64> {
        super::closed_form_fidelity(kind, param, xi)
    }

    fn closed_form_average_fidelity(kind: NoiseKind, param: f64) -> Result<f64> {
        super::closed_form_average_fidelity(kind, param)
    }
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_3, FRAC_PI_4, FRAC_PI_6, PI};

    const TOL: f64 = 1e-12;

    fn quad(n: usize) -> QuadratureSpec {
        QuadratureSpec::new(n, 64).unwrap()
    }

    #[test]
    fn closed_form_examples() {
        for xi in [0.0, 0.4, 2.0] {
            assert!((closed_form_fidelity(NoiseKind::Ad, 0.0, xi).unwrap() - 1.0).abs() < TOL);
        }
        assert!((closed_form_fidelity(NoiseKind::Ad, 1.0, 0.3).unwrap() - 0.5).abs() < TOL);
        assert!((closed_form_fidelity(NoiseKind::Pd, 1.0, 0.0).unwrap() - 0.625).abs() < TOL);
        assert!((closed_form_fidelity(NoiseKind::Cd, PI, 0.0).unwrap() - 1.0).abs() < TOL);
        assert!(
            closed_form_fidelity(NoiseKind::Cd, PI, FRAC_PI_4)
                .unwrap()
                .abs()
                < TOL
        );
        assert!(
            closed_form_fidelity(NoiseKind::Cr, FRAC_PI_6, 1.0)
                .unwrap()
                .abs()
                < TOL
        );
    }

    #[test]
    fn closed_form_matches_frozen_oracle_values() {
        // Values from a separate dense-matrix simulation of the protocol,
        // bit-averaged and averaged over a 64×64 midpoint (θ, φ) grid.
        let cases = [
            (NoiseKind::Ad, 0.3, 0.3, 0.726726714203362),
            (NoiseKind::Ad, 0.7, FRAC_PI_4, 0.5390252322222431),
            (NoiseKind::Pd, 0.3, 0.0, 0.8875),
            (NoiseKind::Pd, 0.7, 0.3, 0.7338130106517008),
            (NoiseKind::Cd, 0.5, 0.3, 0.9137335706372665),
            (NoiseKind::Cd, 2.0, 0.3, 0.5767586234264767),
            (NoiseKind::Cd, PI, 0.3, 0.6811788772383368),
        ];
        for (kind, p, xi, expected) in cases {
            let v = closed_form_fidelity(kind, p, xi).unwrap();
            assert!(
                (v - expected).abs() < 1e-12,
                "{kind} {p} {xi}: {v} vs {expected}"
            );
        }
    }

    #[test]
    fn closed_form_rejects_bad_parameters() {
        assert!(closed_form_fidelity(NoiseKind::Ad, 1.5, 0.0).is_err());
        assert!(closed_form_fidelity(NoiseKind::Pd, -0.1, 0.0).is_err());
        assert!(closed_form_fidelity(NoiseKind::Cd, f64::NAN, 0.0).is_err());
        assert!(closed_form_fidelity(NoiseKind::Cr, 0.0, f64::INFINITY).is_err());
        assert!(closed_form_average_fidelity(NoiseKind::Ad, 2.0).is_err());
    }

    #[test]
    fn average_examples() {
        let pd = closed_form_average_fidelity(NoiseKind::Pd, 1.0).unwrap();
        assert!((pd - 9.0 / 16.0).abs() < TOL);
        assert!((closed_form_average_fidelity(NoiseKind::Ad, 1.0).unwrap() - 0.5).abs() < TOL);
        assert!((closed_form_average_fidelity(NoiseKind::Cd, PI).unwrap() - 0.5).abs() < TOL);
        for kind in NoiseKind::ALL {
            assert!((closed_form_average_fidelity(kind, 0.0).unwrap() - 1.0).abs() < TOL);
        }
    }

    #[test]
    fn numeric_fidelity_examples() {
        let id = Channel::identity();
        assert!((numeric_fidelity(&id, 0.3, 1.0, 2.0, Bit::One).unwrap() - 1.0).abs() < TOL);
        let cr = Channel::collective_rotation(0.4).unwrap();
        let expected = 1.2f64.cos().powi(2);
        for (xi, t, p, b) in [(0.1, 0.2, 0.3, Bit::Zero), (2.0, 5.0, 1.0, Bit::One)] {
            assert!((numeric_fidelity(&cr, xi, t, p, b).unwrap() - expected).abs() < TOL);
        }
        let ad = Channel::amplitude_damping(1.0).unwrap();
        let avg = (numeric_fidelity(&ad, 0.2, 0.9, 1.7, Bit::Zero).unwrap()
            + numeric_fidelity(&ad, 0.2, 0.9, 1.7, Bit::One).unwrap())
            / 2.0;
        assert!((avg - 0.5).abs() < TOL);
    }

    #[test]
    fn fast_average_equals_pointwise_oracle() {
        let ch = Channel::amplitude_damping(0.45).unwrap();
        let q = quad(8);
        let xi = 0.7;
        let nodes = periodic_nodes::<f64>(8);
        let mut sum = 0.0;
        for &t in &nodes {
            for &p in &nodes {
                for b in [Bit::Zero, Bit::One] {
                    sum += numeric_fidelity(&ch, xi, t, p, b).unwrap() / 2.0;
                }
            }
        }
        let pointwise = sum / 64.0;
        let fast = rotation_averaged_fidelity(&ch, xi, &q).unwrap();
        assert!((fast - pointwise).abs() < 1e-14);
    }

    #[test]
    fn rotation_average_examples() {
        let id = Channel::identity();
        assert!((rotation_averaged_fidelity(&id, 0.9, &quad(8)).unwrap() - 1.0).abs() < TOL);

        let pd = Channel::phase_damping(1.0).unwrap();
        let v = rotation_averaged_fidelity(&pd, 0.0, &quad(32)).unwrap();
        assert!((v - 0.625).abs() < 1e-9);

        let cr = Channel::collective_rotation(0.25).unwrap();
        let expected = 0.75f64.cos().powi(2);
        for n in [8, 13, 32] {
            let v = rotation_averaged_fidelity(&cr, 1.1, &quad(n)).unwrap();
            assert!((v - expected).abs() < TOL);
        }
        assert!(rotation_averaged_fidelity(
            &cr,
            1.1,
            &QuadratureSpec {
                rotation_points: 4,
                xi_points: 64
            }
        )
        .is_err());
    }

    #[test]
    fn oracle_agrees_with_closed_forms_at_coarse_resolution() {
        // the integrands are trig polynomials of low degree, so 32 nodes are already exact
        let q = quad(32);
        for (kind, params) in [
            (NoiseKind::Ad, [0.0, 0.35, 1.0]),
            (NoiseKind::Pd, [0.0, 0.6, 1.0]),
            (NoiseKind::Cd, [0.7, PI, 5.5]),
            (NoiseKind::Cr, [0.2, FRAC_PI_3, 3.0]),
        ] {
            for p in params {
                let ch = Channel::from_noise(kind, p).unwrap();
                for xi in [0.0, FRAC_PI_4, 1.0, 4.0] {
                    let oracle = rotation_averaged_fidelity(&ch, xi, &q).unwrap();
                    let closed = closed_form_fidelity(kind, p, xi).unwrap();
                    assert!((oracle - closed).abs() < 1e-10, "{kind} {p} {xi}");
                }
            }
        }
    }

    #[test]
    fn averaged_map_matches_direct_average() {
        let q = quad(16);
        for ch in [
            Channel::amplitude_damping(0.3).unwrap(),
            Channel::phase_damping(0.8).unwrap(),
            Channel::collective_dephasing(2.2).unwrap(),
        ] {
            let map = AveragedProtocolMap::new(&ch, &q).unwrap();
            for xi in [0.0, 0.5, 2.9] {
                let direct = rotation_averaged_fidelity(&ch, xi, &q).unwrap();
                assert!((map.fidelity(xi).unwrap() - direct).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn state_average_examples() {
        let q = QuadratureSpec::new(16, 1024).unwrap();
        let phi = 1.1f64;
        // ⟨cos²2ξ⟩ = ⟨sin²2ξ⟩ = 1/2 and ⟨cos 4ξ⟩ = 0 in the CD expression
        let by_moments =
            (6.0 * 0.5 * (2.0 * phi).cos() + 0.5 * (15.0 * phi.cos() + (3.0 * phi).cos()) + 21.0)
                / 32.0;
        let v =
            state_averaged_fidelity(StateIntegrand::ClosedForm(NoiseKind::Cd, phi), &q).unwrap();
        assert!((v - by_moments).abs() < 1e-9);
        assert!((v - closed_form_average_fidelity(NoiseKind::Cd, phi).unwrap()).abs() < 1e-9);

        let v =
            state_averaged_fidelity(StateIntegrand::ClosedForm(NoiseKind::Ad, 0.0f64), &q).unwrap();
        assert!((v - 1.0).abs() < TOL);
        let v =
            state_averaged_fidelity(StateIntegrand::ClosedForm(NoiseKind::Cr, 0.3f64), &q).unwrap();
        assert!((v - 0.9f64.cos().powi(2)).abs() < TOL);

        let pd = Channel::phase_damping(1.0).unwrap();
        let v = state_averaged_fidelity(StateIntegrand::Oracle(&pd), &q).unwrap();
        assert!((v - 9.0 / 16.0).abs() < 1e-9);
    }

    #[test]
    fn commutator_examples() {
        let zero = |w, e: f64, t: f64| commutator_defect(w, e, t).unwrap().computed;
        for theta in [0.0, 0.8, 2.5] {
            assert_eq!(zero(KrausIndex::E0, 0.0, theta), Mat2::zero());
        }
        for eta in [0.0, 0.4, 1.0] {
            assert_eq!(zero(KrausIndex::E0, eta, 0.0), Mat2::zero());
            assert_eq!(zero(KrausIndex::E1, eta, 0.0), Mat2::zero());
        }
        // E₀ = diag(1, 1/2), R(π/2) = [[0,-1],[1,0]]:
        // E₀R − RE₀ = [[0,-1],[1/2,0]] − [[0,-1/2],[1,0]] = −½σx
        let c = commutator_defect(KrausIndex::E0, 0.75, FRAC_PI_2).unwrap();
        assert!(c.computed.max_abs_diff(&Mat2::sigma_x().scale(-0.5)) < TOL);
        // E₁ = [[0,1],[0,0]]: E₁R − RE₁ = [[1,0],[0,0]] − [[0,0],[0,1]] = σz
        let c = commutator_defect(KrausIndex::E1, 1.0, FRAC_PI_2).unwrap();
        assert!(c.computed.max_abs_diff(&Mat2::sigma_z()) < TOL);
        assert!(commutator_defect(KrausIndex::E1, 1.2, 0.3).is_err());
    }

    #[test]
    fn stated_closed_forms_are_the_reversed_commutator() {
        for eta in [0.0, 0.3, 0.75, 1.0] {
            for theta in [-1.0, 0.0, 0.4, FRAC_PI_2, 2.9] {
                for which in [KrausIndex::E0, KrausIndex::E1] {
                    let c = commutator_defect(which, eta, theta).unwrap();
                    assert!((c.computed + c.closed_form).max_abs() < TOL);
                    let vanishes = eta == 0.0 || theta == 0.0;
                    assert_eq!(
                        c.matches_closed_form(),
                        vanishes || c.closed_form.max_abs() < TOL / 2.0
                    );
                }
            }
        }
    }

    #[test]
    fn report_tracks_worst_point() {
        let r = FidelityReport::from_grids(
            NoiseKind::Pd,
            vec![0.0f64, 1.0],
            vec![0.0, 2.0],
            vec![vec![1.0, 1.0], vec![0.5, 0.6]],
            vec![vec![1.0, 1.0], vec![0.5, 0.4]],
        )
        .unwrap();
        assert!((r.max_abs_deviation - 0.2).abs() < 1e-15);
        assert_eq!(r.worst_point, (1.0, 2.0));
        assert!(!r.passes(0.1));
        assert!(FidelityReport::<f64>::from_grids(
            NoiseKind::Pd,
            vec![0.0],
            vec![0.0],
            vec![],
            vec![]
        )
        .is_err());
    }

    #[test]
    fn periodicity_of_collective_rotation() {
        for theta in [0.0, 0.3, 1.7, -2.2] {
            let a = closed_form_fidelity(NoiseKind::Cr, theta, 0.0).unwrap();
            let b = closed_form_fidelity(NoiseKind::Cr, theta + FRAC_PI_3, 0.0).unwrap();
            assert!((a - b).abs() < TOL);
        }
    }
}
