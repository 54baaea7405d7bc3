//! Single-qubit noise channels in Kraus form.
//!
//! Amplitude damping and phase damping carry two Kraus operators each;
//! collective dephasing and collective rotation are single unitaries applied
//! identically to every pass of the qubit.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::qubit::{phase_gate, rotation, DensityMatrix, Mat2};
use crate::scalar::Real;

/// The four noise models.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NoiseKind {
    /// Amplitude damping, parameter η ∈ [0, 1].
    Ad,
    /// Phase damping, parameter η ∈ [0, 1].
    Pd,
    /// Collective dephasing, phase Φ in radians.
    Cd,
    /// Collective rotation, angle Θ in radians.
    Cr,
}

impl NoiseKind {
    pub const ALL: [NoiseKind; 4] = [NoiseKind::Ad, NoiseKind::Pd, NoiseKind::Cd, NoiseKind::Cr];

    pub fn as_str(self) -> &'static str {
        match self {
            NoiseKind::Ad => "ad",
            NoiseKind::Pd => "pd",
            NoiseKind::Cd => "cd",
            NoiseKind::Cr => "cr",
        }
    }

    /// Name of the noise parameter in serialized output.
    pub fn parameter_name(self) -> &'static str {
        match self {
            NoiseKind::Ad | NoiseKind::Pd => "eta",
            NoiseKind::Cd => "Phi",
            NoiseKind::Cr => "Theta",
        }
    }

    /// Whether the parameter is a probability (as opposed to an angle).
    pub fn is_probabilistic(self) -> bool {
        matches!(self, NoiseKind::Ad | NoiseKind::Pd)
    }

    /// Checks the parameter domain: [0, 1] for AD/PD, finite for CD/CR.
    pub fn validate_parameter<T: Real>(self, param: T) -> Result<()> {
        if self.is_probabilistic() {
            if !(param >= T::zero() && param <= T::one()) {
                return Err(invalid(format!(
                    "{} parameter {} must lie in [0, 1], got {param}",
                    self.as_str(),
                    self.parameter_name()
                )));
            }
        } else if !param.is_finite() {
            return Err(invalid(format!(
                "{} parameter {} must be finite, got {param}",
                self.as_str(),
                self.parameter_name()
            )));
        }
        Ok(())
    }
}

impl fmt::Display for NoiseKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for NoiseKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "ad" => Ok(NoiseKind::Ad),
            "pd" => Ok(NoiseKind::Pd),
            "cd" => Ok(NoiseKind::Cd),
            "cr" => Ok(NoiseKind::Cr),
            other => Err(invalid(format!(
                "unknown noise kind '{other}', expected one of ad, pd, cd, cr"
            ))),
        }
    }
}

/// Channel kind including the noiseless identity channel.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ChannelKind {
    Noise(NoiseKind),
    Identity,
}

impl ChannelKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ChannelKind::Noise(k) => k.as_str(),
            ChannelKind::Identity => "none",
        }
    }

    pub fn noise(self) -> Option<NoiseKind> {
        match self {
            ChannelKind::Noise(k) => Some(k),
            ChannelKind::Identity => None,
        }
    }
}

impl From<NoiseKind> for ChannelKind {
    fn from(k: NoiseKind) -> Self {
        ChannelKind::Noise(k)
    }
}

impl fmt::Display for ChannelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ChannelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "none" | "identity" => Ok(ChannelKind::Identity),
            other => other
                .parse::<NoiseKind>()
                .map(ChannelKind::Noise)
                .map_err(|_| {
                    invalid(format!(
                        "unknown noise kind '{other}', expected one of ad, pd, cd, cr, none"
                    ))
                }),
        }
    }
}

/// A completely positive trace-preserving map `ρ ↦ Σᵢ Eᵢ ρ Eᵢ†`.
#[derive(Clone, Debug, PartialEq)]
pub struct QuantumChannel<T> {
    kind: ChannelKind,
    operators: Vec<Mat2<T>>,
    parameter: T,
    completeness_defect: T,
}

fn completeness_defect<T: Real>(operators: &[Mat2<T>]) -> T {
    let sum = operators
        .iter()
        .fold(Mat2::zero(), |acc, e| acc + e.dagger() * *e);
    sum.max_abs_diff(&Mat2::identity())
}

impl<T: Real> QuantumChannel<T> {
    /// Builds a channel from explicit Kraus operators. Completeness is
    /// measured and recorded, not enforced; [`apply_channel`] rejects
    /// channels whose defect exceeds the unitary tolerance.
    pub fn from_kraus(kind: ChannelKind, operators: Vec<Mat2<T>>, parameter: T) -> Result<Self> {
        if operators.is_empty() {
            return Err(invalid("a channel needs at least one Kraus operator"));
        }
        if operators.iter().any(|e| !e.is_finite()) {
            return Err(invalid("Kraus operators must have finite entries"));
        }
        let completeness_defect = completeness_defect(&operators);
        Ok(Self {
            kind,
            operators,
            parameter,
            completeness_defect,
        })
    }

    fn validated(kind: ChannelKind, operators: Vec<Mat2<T>>, parameter: T) -> Self {
        let ch = Self::from_kraus(kind, operators, parameter)
            .expect("named channel constructors produce finite operators");
        debug_assert!(ch.completeness_defect <= T::identity_tol());
        ch
    }

    /// `ρ ↦ ρ`.
    pub fn identity() -> Self {
        Self::validated(ChannelKind::Identity, vec![Mat2::identity()], T::zero())
    }

    /// `E₀ = diag(1, √(1−η))`, `E₁ = [[0, √η], [0, 0]]`.
    pub fn amplitude_damping(eta: T) -> Result<Self> {
        NoiseKind::Ad.validate_parameter(eta)?;
        let z = T::zero();
        let keep = (T::one() - eta).sqrt();
        let e0 = Mat2::from_real(T::one(), z, z, keep);
        let e1 = Mat2::from_real(z, eta.sqrt(), z, z);
        Ok(Self::validated(NoiseKind::Ad.into(), vec![e0, e1], eta))
    }

    /// `E₀ = diag(1, √(1−η))`, `E₁ = diag(0, √η)`.
    pub fn phase_damping(eta: T) -> Result<Self> {
        NoiseKind::Pd.validate_parameter(eta)?;
        let z = T::zero();
        let keep = (T::one() - eta).sqrt();
        let e0 = Mat2::from_real(T::one(), z, z, keep);
        let e1 = Mat2::from_real(z, z, z, eta.sqrt());
        Ok(Self::validated(NoiseKind::Pd.into(), vec![e0, e1], eta))
    }

    /// Phase gate `diag(1, e^{iΦ})`.
    pub fn collective_dephasing(phi: T) -> Result<Self> {
        NoiseKind::Cd.validate_parameter(phi)?;
        Ok(Self::validated(
            NoiseKind::Cd.into(),
            vec![phase_gate(phi)?],
            phi,
        ))
    }

    /// Rotation `R(Θ)`.
    pub fn collective_rotation(theta: T) -> Result<Self> {
        NoiseKind::Cr.validate_parameter(theta)?;
        Ok(Self::validated(
            NoiseKind::Cr.into(),
            vec![rotation(theta)?],
            theta,
        ))
    }

    pub fn from_noise(kind: NoiseKind, param: T) -> Result<Self> {
        match kind {
            NoiseKind::Ad => Self::amplitude_damping(param),
            NoiseKind::Pd => Self::phase_damping(param),
            NoiseKind::Cd => Self::collective_dephasing(param),
            NoiseKind::Cr => Self::collective_rotation(param),
        }
    }

    /// Builds any channel kind; the parameter is ignored for the identity.
    pub fn from_kind(kind: ChannelKind, param: T) -> Result<Self> {
        match kind {
            ChannelKind::Noise(k) => Self::from_noise(k, param),
            ChannelKind::Identity => Ok(Self::identity()),
        }
    }

    /// Same kind with another parameter. Custom Kraus sets keep their operators.
    pub fn with_parameter(&self, param: T) -> Result<Self> {
        Self::from_kind(self.kind, param)
    }

    #[inline]
    pub fn kind(&self) -> ChannelKind {
        self.kind
    }

    #[inline]
    pub fn operators(&self) -> &[Mat2<T>] {
        &self.operators
    }

    #[inline]
    pub fn parameter(&self) -> T {
        self.parameter
    }

    /// `max |Σ E†E − I|` entrywise.
    #[inline]
    pub fn completeness_defect(&self) -> T {
        self.completeness_defect
    }

    /// Whether the channel is a single unitary.
    pub fn is_unitary(&self) -> bool {
        self.operators.len() == 1
    }

    fn check(&self) -> Result<()> {
        if self.completeness_defect > T::unitary_tol() {
            return Err(Error::ChannelInvalid {
                defect: self.completeness_defect.as_f64(),
            });
        }
        Ok(())
    }

    /// Kraus sum on an arbitrary operator (not necessarily a state).
    #[inline]
    pub(crate) fn apply_operator(&self, m: &Mat2<T>) -> Mat2<T> {
        match self.operators.as_slice() {
            [u] => *u * *m * u.dagger(),
            ops => ops
                .iter()
                .fold(Mat2::zero(), |acc, e| acc + *e * *m * e.dagger()),
        }
    }

    pub fn apply(&self, rho: &DensityMatrix<T>) -> Result<DensityMatrix<T>> {
        self.check()?;
        Ok(DensityMatrix::from_resymmetrized(
            self.apply_operator(rho.matrix()),
        ))
    }
}

/// `Σᵢ Eᵢ ρ Eᵢ†`.
pub fn apply_channel<T: Real>(
    channel: &QuantumChannel<T>,
    rho: &DensityMatrix<T>,
) -> Result<DensityMatrix<T>> {
    channel.apply(rho)
}
