//! Parametric noise channels and readout mitigation.
//!
//! Readout noise flips recorded bits without touching the post-measurement
//! state. Depolarizing noise is unraveled per trajectory: after a noisy gate a
//! uniformly chosen non-identity Pauli hits its targets with probability `p`.
//!
//! Channels with zero probability never consume random numbers, so the
//! all-zero [`NoiseModel`] reproduces noiseless sampling bit for bit.

use nalgebra::DVector;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gates::{apply_one_qubit, qubit_count, Layout};
use crate::linalg::StateVector;
use crate::C64;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct NoiseModel {
    /// Probability that a true 0 is recorded as 1.
    pub readout_flip_0to1: f64,
    /// Probability that a true 1 is recorded as 0.
    pub readout_flip_1to0: f64,
    /// Depolarizing probability after each single-qubit gate.
    pub depolarizing_1q: f64,
    /// Depolarizing probability after each two-qubit gate.
    pub depolarizing_2q: f64,
    /// Also depolarize the repetition-code encode CNOTs. Off by default: the
    /// encode is then ideal and only readout flips act on the code.
    #[serde(default)]
    pub noisy_encode: bool,
}

impl NoiseModel {
    pub fn noiseless() -> Self {
        Self::default()
    }

    pub fn symmetric_readout(p: f64) -> Self {
        Self {
            readout_flip_0to1: p,
            readout_flip_1to0: p,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("readout_flip_0to1", self.readout_flip_0to1),
            ("readout_flip_1to0", self.readout_flip_1to0),
            ("depolarizing_1q", self.depolarizing_1q),
            ("depolarizing_2q", self.depolarizing_2q),
        ];
        for (name, p) in fields {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::param(
                    name,
                    format!("probability must be in [0, 1], got {p}"),
                ));
            }
        }
        Ok(())
    }

    pub fn has_gate_noise(&self) -> bool {
        self.depolarizing_1q > 0.0 || self.depolarizing_2q > 0.0
    }

    pub fn has_readout_noise(&self) -> bool {
        self.readout_flip_0to1 > 0.0 || self.readout_flip_1to0 > 0.0
    }

    pub fn is_noiseless(&self) -> bool {
        !self.has_gate_noise() && !self.has_readout_noise()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MitigationScheme {
    #[default]
    None,
    /// Three-qubit repetition encode before each measurement, majority vote
    /// on the three recorded bits. Single-qubit layout only.
    RepetitionMajority,
    /// Measure both qubits each round and discard the shot on `00`/`11`.
    /// Two-qubit layout only.
    SectorPostselect,
}

impl MitigationScheme {
    pub fn name(self) -> &'static str {
        match self {
            MitigationScheme::None => "none",
            MitigationScheme::RepetitionMajority => "repetition-majority",
            MitigationScheme::SectorPostselect => "sector-postselect",
        }
    }

    pub fn check_layout(self, layout: Layout) -> Result<()> {
        match (self, layout) {
            (MitigationScheme::None, _)
            | (MitigationScheme::RepetitionMajority, Layout::SingleQubit)
            | (MitigationScheme::SectorPostselect, Layout::TwoQubit) => Ok(()),
            _ => Err(Error::IncompatibleMitigation {
                scheme: self.name(),
                layout: layout.name(),
            }),
        }
    }
}

/// Records `bit` through an asymmetric bit-flip readout channel.
pub fn apply_readout_noise<R: Rng + ?Sized>(bit: u8, model: &NoiseModel, rng: &mut R) -> u8 {
    let p = if bit == 0 {
        model.readout_flip_0to1
    } else {
        model.readout_flip_1to0
    };
    if p > 0.0 && rng.gen::<f64>() < p {
        bit ^ 1
    } else {
        bit
    }
}

pub fn majority_vote(bits: [u8; 3]) -> u8 {
    u8::from(bits.iter().filter(|&&b| b != 0).count() >= 2)
}

/// Logical error rate of a majority vote over three independent flips with
/// probability `p`: `3p² - 2p³`.
pub fn majority_residual_error(p: f64) -> f64 {
    3.0 * p * p - 2.0 * p * p * p
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SectorOutcome {
    /// Valid single-excitation record; `index` uses the two-site basis
    /// (0 = `|01>` = site 2, 1 = `|10>` = site 1).
    Accept {
        index: usize,
    },
    Reject,
}

impl SectorOutcome {
    /// Site label (1 or 2) of an accepted record.
    pub fn site(self) -> Option<usize> {
        match self {
            SectorOutcome::Accept { index } => Some(2 - index),
            SectorOutcome::Reject => None,
        }
    }
}

/// Classifies a two-bit record `[q0, q1]`.
pub fn sector_postselect(record: [u8; 2]) -> SectorOutcome {
    match record {
        [0, 1] => SectorOutcome::Accept { index: 0 },
        [1, 0] => SectorOutcome::Accept { index: 1 },
        _ => SectorOutcome::Reject,
    }
}

const PAULIS: [[[C64; 2]; 2]; 4] = {
    const O: C64 = C64::new(0.0, 0.0);
    const L: C64 = C64::new(1.0, 0.0);
    const M: C64 = C64::new(-1.0, 0.0);
    const I: C64 = C64::new(0.0, 1.0);
    const NI: C64 = C64::new(0.0, -1.0);
    [
        [[L, O], [O, L]],
        [[O, L], [L, O]],
        [[O, NI], [I, O]],
        [[L, O], [O, M]],
    ]
};

/// Draws and applies a depolarizing error on raw amplitudes. Returns the
/// Pauli indices applied (0 = I, 1 = X, 2 = Y, 3 = Z per target), or `None`
/// when no error occurred.
pub(crate) fn depolarize_in_place<R: Rng + ?Sized>(
    amps: &mut DVector<C64>,
    num_qubits: usize,
    targets: &[usize],
    p: f64,
    rng: &mut R,
) -> Option<Vec<usize>> {
    if p <= 0.0 || rng.gen::<f64>() >= p {
        return None;
    }
    let choices = (1usize << (2 * targets.len())) - 1;
    let mut label = rng.gen_range(1..=choices);
    let mut applied = vec![0; targets.len()];
    for (slot, &q) in targets.iter().enumerate().rev() {
        let pauli = label & 3;
        label >>= 2;
        applied[slot] = pauli;
        if pauli != 0 {
            apply_one_qubit(amps, num_qubits, q, &PAULIS[pauli]);
        }
    }
    Some(applied)
}

pub fn apply_depolarizing<R: Rng + ?Sized>(
    state: &StateVector,
    targets: &[usize],
    p: f64,
    rng: &mut R,
) -> Result<StateVector> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::param(
            "p",
            format!("probability must be in [0, 1], got {p}"),
        ));
    }
    let n = qubit_count(state.dim()).ok_or(Error::DimensionMismatch {
        expected: state.dim().next_power_of_two(),
        actual: state.dim(),
    })?;
    if targets.is_empty() || targets.iter().any(|&t| t >= n) {
        return Err(Error::param(
            "targets",
            format!("invalid targets {targets:?} for {n} qubit(s)"),
        ));
    }
    let mut amps = state.amplitudes().clone();
    depolarize_in_place(&mut amps, n, targets, p, rng);
    Ok(StateVector::from_trusted(amps))
}
