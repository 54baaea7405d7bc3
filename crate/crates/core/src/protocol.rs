//! The three-stage protocol: Alice encrypts with `R(θ)`, Bob adds `R(φ)`,
//! Alice removes hers, Bob removes his. The qubit crosses the channel three
//! times (Alice→Bob, Bob→Alice, Alice→Bob).

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::{ChannelKind, QuantumChannel};
use crate::error::{invalid, Error, Result};
use crate::qubit::{fidelity, rotation, DensityMatrix, Mat2, PureState};
use crate::scalar::Real;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Bit {
    Zero,
    One,
}

impl Bit {
    pub fn as_u8(self) -> u8 {
        match self {
            Bit::Zero => 0,
            Bit::One => 1,
        }
    }

    pub fn flipped(self) -> Self {
        match self {
            Bit::Zero => Bit::One,
            Bit::One => Bit::Zero,
        }
    }

    /// Parses a string of `0`/`1` characters.
    pub fn parse_string(s: &str) -> Result<Vec<Bit>> {
        if s.is_empty() {
            return Err(invalid("bit string is empty"));
        }
        s.chars()
            .map(|c| match c {
                '0' => Ok(Bit::Zero),
                '1' => Ok(Bit::One),
                other => Err(invalid(format!("bit string contains '{other}'"))),
            })
            .collect()
    }

    pub fn format_bits(bits: &[Bit]) -> String {
        bits.iter()
            .map(|b| if *b == Bit::One { '1' } else { '0' })
            .collect()
    }
}

impl From<bool> for Bit {
    fn from(b: bool) -> Self {
        if b {
            Bit::One
        } else {
            Bit::Zero
        }
    }
}

impl TryFrom<u8> for Bit {
    type Error = Error;

    fn try_from(v: u8) -> Result<Self> {
        match v {
            0 => Ok(Bit::Zero),
            1 => Ok(Bit::One),
            other => Err(invalid(format!("bit must be 0 or 1, got {other}"))),
        }
    }
}

impl fmt::Display for Bit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.as_u8())
    }
}

/// How the channel parameter behaves across the three passes.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub enum StagePolicy<T> {
    /// One parameter for all three passes.
    #[default]
    FixedAcrossStages,
    /// Each pass draws `param + spread·u`, `u ~ U(−1, 1)`, from a seeded
    /// generator; AD/PD draws are clamped to [0, 1]. Sensitivity studies only.
    ResamplePerStage { seed: u64, spread: T },
}

impl<T> StagePolicy<T> {
    /// Label written into output metadata.
    pub fn label(&self) -> &'static str {
        match self {
            StagePolicy::FixedAcrossStages => "fixed-across-stages",
            StagePolicy::ResamplePerStage { .. } => {
                "resample-per-stage (independent noise per pass)"
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ProtocolConfig<T> {
    /// State angle ξ.
    pub xi: T,
    /// Alice's rotation angle θ.
    pub alice_angle: T,
    /// Bob's rotation angle φ.
    pub bob_angle: T,
    pub channel: QuantumChannel<T>,
    pub stage_policy: StagePolicy<T>,
}

impl<T: Real> ProtocolConfig<T> {
    pub fn new(xi: T, alice_angle: T, bob_angle: T, channel: QuantumChannel<T>) -> Result<Self> {
        let config = Self {
            xi,
            alice_angle,
            bob_angle,
            channel,
            stage_policy: StagePolicy::FixedAcrossStages,
        };
        config.validate()?;
        Ok(config)
    }

    pub fn with_stage_policy(mut self, policy: StagePolicy<T>) -> Result<Self> {
        self.stage_policy = policy;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("xi", self.xi),
            ("alice_angle", self.alice_angle),
            ("bob_angle", self.bob_angle),
        ] {
            if !v.is_finite() {
                return Err(invalid(format!("{name} must be finite, got {v}")));
            }
        }
        if let StagePolicy::ResamplePerStage { spread, .. } = self.stage_policy {
            if !(spread.is_finite() && spread >= T::zero()) {
                return Err(invalid(format!(
                    "resample spread must be finite and non-negative, got {spread}"
                )));
            }
        }
        Ok(())
    }

    /// Channels for the three passes of the `index`-th protocol run.
    fn stage_channels(&self, index: u64) -> Result<[QuantumChannel<T>; 3]> {
        match self.stage_policy {
            StagePolicy::FixedAcrossStages => Ok([
                self.channel.clone(),
                self.channel.clone(),
                self.channel.clone(),
            ]),
            StagePolicy::ResamplePerStage { seed, spread } => {
                if self.channel.kind() == ChannelKind::Identity {
                    return Ok([
                        self.channel.clone(),
                        self.channel.clone(),
                        self.channel.clone(),
                    ]);
                }
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(index);
                let base = self.channel.parameter();
                let probabilistic = self
                    .channel
                    .kind()
                    .noise()
                    .is_some_and(|k| k.is_probabilistic());
                let mut draw = || {
                    let u = T::lit(rng.gen_range(-1.0..1.0));
                    let p = base + spread * u;
                    let p = if probabilistic {
                        p.max(T::zero()).min(T::one())
                    } else {
                        p
                    };
                    self.channel.with_parameter(p)
                };
                Ok([draw()?, draw()?, draw()?])
            }
        }
    }
}

/// States recorded along one protocol run.
#[derive(Clone, Debug, PartialEq)]
pub struct Transcript<T> {
    /// After the first pass, after the second pass, after the third pass,
    /// and after Bob's final `R(φ)†`.
    pub stage_states: [DensityMatrix<T>; 4],
    pub bit_sent: Bit,
}

/// Bit 0 → `cos ξ|0⟩ + sin ξ|1⟩`, bit 1 → `sin ξ|0⟩ − cos ξ|1⟩`.
pub fn encode_bit<T: Real>(bit: Bit, xi: T) -> PureState<T> {
    let (s, c) = xi.sin_cos();
    match bit {
        Bit::Zero => PureState::from_real_unchecked(c, s),
        Bit::One => PureState::from_real_unchecked(s, -c),
    }
}

/// Evolves `rho` through the three noisy passes. The rotation arguments must
/// be exact rotations and the channels must already be checked.
#[inline]
pub(crate) fn evolve_stages<T: Real>(
    stages: [&QuantumChannel<T>; 3],
    r_alice: &Mat2<T>,
    r_bob: &Mat2<T>,
    rho: &Mat2<T>,
) -> [Mat2<T>; 4] {
    let alice_dag = r_alice.dagger();
    let bob_dag = r_bob.dagger();
    let s1 = stages[0].apply_operator(&(*r_alice * *rho * alice_dag));
    let s2 = stages[1].apply_operator(&(*r_bob * s1 * bob_dag));
    let s3 = stages[2].apply_operator(&(alice_dag * s2 * *r_alice));
    let out = bob_dag * s3 * *r_bob;
    [s1, s2, s3, out]
}

fn check_channels<T: Real>(stages: &[QuantumChannel<T>; 3]) -> Result<()> {
    let rho = DensityMatrix::maximally_mixed();
    for ch in stages {
        // surfaces ChannelInvalid for incomplete Kraus sets
        ch.apply(&rho)?;
    }
    Ok(())
}

fn run_indexed<T: Real>(
    config: &ProtocolConfig<T>,
    bit: Bit,
    index: u64,
) -> Result<(DensityMatrix<T>, Transcript<T>)> {
    config.validate()?;
    let stages = config.stage_channels(index)?;
    check_channels(&stages)?;
    let r_alice = rotation(config.alice_angle)?;
    let r_bob = rotation(config.bob_angle)?;
    let rho = DensityMatrix::from_pure(&encode_bit(bit, config.xi));
    let states = evolve_stages(
        [&stages[0], &stages[1], &stages[2]],
        &r_alice,
        &r_bob,
        rho.matrix(),
    );
    let stage_states = states.map(DensityMatrix::from_resymmetrized);
    Ok((
        stage_states[3],
        Transcript {
            stage_states,
            bit_sent: bit,
        },
    ))
}

/// Runs one protocol round for `bit` and returns Bob's final state together
/// with the intermediate states.
pub fn run_protocol<T: Real>(
    config: &ProtocolConfig<T>,
    bit: Bit,
) -> Result<(DensityMatrix<T>, Transcript<T>)> {
    run_indexed(config, bit, 0)
}

/// Outcome probabilities of measuring in the `{encode_bit(0, ξ), encode_bit(1, ξ)}` basis.
pub fn decode_bit<T: Real>(rho_final: &DensityMatrix<T>, xi: T) -> Result<(T, T)> {
    let p0 = fidelity(&encode_bit(Bit::Zero, xi), rho_final)?;
    let p1 = fidelity(&encode_bit(Bit::One, xi), rho_final)?;
    Ok((p0, p1))
}

#[derive(Clone, Debug, PartialEq)]
pub struct MessageOutcome<T> {
    pub decoded: Vec<Bit>,
    /// Fraction of flipped bits.
    pub qber: T,
}

/// Sends every bit through the protocol and samples Bob's measurement.
///
/// The draw for bit `i` comes from a ChaCha8 stream `i` keyed by `seed`, so
/// the result does not depend on evaluation order.
pub fn transmit_message<T: Real>(
    bits: &[Bit],
    config: &ProtocolConfig<T>,
    seed: u64,
) -> Result<MessageOutcome<T>> {
    if bits.is_empty() {
        return Err(invalid("message must contain at least one bit"));
    }
    config.validate()?;
    let tol = T::identity_tol();
    let decoded = bits
        .par_iter()
        .enumerate()
        .map(|(i, &bit)| {
            let (rho, _) = run_indexed(config, bit, i as u64)?;
            let (_, p1) = decode_bit(&rho, config.xi)?;
            // residues below tolerance are numerical noise, not outcomes
            let p1 = if p1 < tol {
                T::zero()
            } else if p1 > T::one() - tol {
                T::one()
            } else {
                p1
            };
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i as u64);
            let u = T::lit(rng.gen::<f64>());
            Ok(Bit::from(u < p1))
        })
        .collect::<Result<Vec<_>>>()?;
    let flips = bits.iter().zip(&decoded).filter(|(a, b)| a != b).count();
    let qber = T::lit(flips as f64 / bits.len() as f64);
    Ok(MessageOutcome { decoded, qber })
}
