//! Simulation and analysis of the three-stage quantum communication protocol
//! under single-qubit Markovian noise.
//!
//! All numerics are generic over [`Real`] (`f32` or `f64`). The aliases at the
//! crate root fix the scalar to `f64`, which is what the documented
//! tolerances assume; `*F32` aliases are provided for single precision.

pub mod channel;
pub mod cli;
pub mod error;
pub mod fidelity;
pub mod harness;
pub mod protocol;
pub mod quadrature;
pub mod qubit;
pub mod scalar;

#[cfg(test)]
mod testutil;

pub use channel::{apply_channel, ChannelKind, NoiseKind};
pub use error::{Error, Result};
pub use fidelity::{
    closed_form_average_fidelity, closed_form_fidelity, commutator_closed_form, commutator_defect,
    numeric_fidelity, rotation_averaged_fidelity, state_averaged_fidelity, CommutatorCheck,
    KrausIndex, StateIntegrand,
};
pub use harness::{
    export, sweep, verify_formulas, ExportFormat, ResultRow, RunManifest, SweepMode, SweepSpec,
    VerifyGrids, XiValue,
};
pub use protocol::{decode_bit, encode_bit, run_protocol, transmit_message, Bit, StagePolicy};
pub use quadrature::QuadratureSpec;
pub use qubit::{
    commutator, conjugate_by, dagger, density_from_pure, fidelity, phase_gate, rotation,
};
pub use scalar::Real;

pub type Mat2 = qubit::Mat2<f64>;
pub type PureState = qubit::PureState<f64>;
pub type DensityMatrix = qubit::DensityMatrix<f64>;
pub type QuantumChannel = channel::QuantumChannel<f64>;
pub type ProtocolConfig = protocol::ProtocolConfig<f64>;
pub type Transcript = protocol::Transcript<f64>;
pub type MessageOutcome = protocol::MessageOutcome<f64>;
pub type FidelityReport = fidelity::FidelityReport<f64>;
pub type AveragedProtocolMap = fidelity::AveragedProtocolMap<f64>;

pub type Mat2F32 = qubit::Mat2<f32>;
pub type PureStateF32 = qubit::PureState<f32>;
pub type DensityMatrixF32 = qubit::DensityMatrix<f32>;
pub type QuantumChannelF32 = channel::QuantumChannel<f32>;
pub type ProtocolConfigF32 = protocol::ProtocolConfig<f32>;
