//! Gate-level protocol circuits.
//!
//! Each measurement round is `k` Trotter slices followed by a readout block:
//!
//! - single qubit, no mitigation: measure q0
//! - single qubit, repetition code: CNOT(q0→q1), CNOT(q0→q2), measure q0..q2,
//!   reset the ancillas
//! - two qubits: measure q0, plus q1 when sector post-selection is on
//!
//! Circuits are flat, strictly sequential operation lists.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gates::{trotter_slice, Gate, Layout, TrotterPlan};
use crate::linalg::ModelParams;
use crate::monitor::DetectionProtocol;
use crate::noise::MitigationScheme;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Op {
    Gate(Gate),
    /// Projective Z measurement; the bit is appended to the round record.
    Measure {
        qubit: usize,
    },
    /// Return an ancilla to `|0>`.
    Reset {
        qubit: usize,
    },
}

/// How the bits of one round are turned into a logical site index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Decode {
    /// The single q0 bit is the site index.
    Direct,
    /// Majority of three repetition-code bits.
    Majority,
    /// Two bits `[q0, q1]`; `00`/`11` rejects the shot.
    Sector,
}

impl Decode {
    pub fn bits_per_round(self) -> usize {
        match self {
            Decode::Direct => 1,
            Decode::Majority => 3,
            Decode::Sector => 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Circuit {
    pub num_qubits: usize,
    /// Register basis index prepared before the first gate.
    pub initial_state: usize,
    pub ops: Vec<Op>,
    pub rounds: usize,
    pub decode: Decode,
    /// Logical site index whose observation ends a shot.
    pub detect_site: usize,
    pub layout: Layout,
}

impl Circuit {
    pub fn gates(&self) -> impl Iterator<Item = &Gate> {
        self.ops.iter().filter_map(|op| match op {
            Op::Gate(g) => Some(g),
            _ => None,
        })
    }

    pub fn measurement_count(&self) -> usize {
        self.ops
            .iter()
            .filter(|op| matches!(op, Op::Measure { .. }))
            .count()
    }

    pub fn validate(&self) -> Result<()> {
        for op in &self.ops {
            let bad = match op {
                Op::Gate(g) => {
                    Gate::new(g.kind, g.angle, g.targets.clone())?;
                    g.targets.iter().copied().find(|&t| t >= self.num_qubits)
                }
                Op::Measure { qubit } | Op::Reset { qubit } => {
                    (*qubit >= self.num_qubits).then_some(*qubit)
                }
            };
            if let Some(q) = bad {
                return Err(Error::InvalidGate(format!(
                    "qubit {q} out of range for {} qubit(s)",
                    self.num_qubits
                )));
            }
        }
        if self.measurement_count() != self.rounds * self.decode.bits_per_round() {
            return Err(Error::param(
                "ops",
                "measurement count does not match rounds",
            ));
        }
        if self.initial_state >= 1 << self.num_qubits {
            return Err(Error::param("initial_state", "outside the register"));
        }
        Ok(())
    }
}

/// Builds the monitored circuit for a two-site protocol, with or without a
/// mitigation layer.
pub fn build_protocol_circuit(
    params: &ModelParams,
    plan: &TrotterPlan,
    protocol: &DetectionProtocol,
    layout: Layout,
    mitigation: MitigationScheme,
) -> Result<Circuit> {
    params.validate()?;
    mitigation.check_layout(layout)?;
    protocol.validate(2)?;
    if (plan.tau() - params.tau).abs() > crate::CONSTRUCTION_TOL * params.tau.max(1.0) {
        return Err(Error::param(
            "delta_t",
            "Trotter plan does not span one period",
        ));
    }
    let slice = trotter_slice(params, plan, layout);
    let (num_qubits, decode) = match (layout, mitigation) {
        (Layout::SingleQubit, MitigationScheme::RepetitionMajority) => (3, Decode::Majority),
        (Layout::SingleQubit, _) => (1, Decode::Direct),
        (Layout::TwoQubit, MitigationScheme::SectorPostselect) => (2, Decode::Sector),
        (Layout::TwoQubit, _) => (2, Decode::Direct),
    };
    let register_initial = match layout {
        // ancillas start in |0>, q0 is the most significant bit
        Layout::SingleQubit => protocol.initial_state << (num_qubits - 1),
        Layout::TwoQubit => layout.encode_site(protocol.initial_state),
    };

    let per_round = plan.k * slice.len() + 2 * decode.bits_per_round();
    let mut ops = Vec::with_capacity(protocol.n_measurements * per_round);
    for _ in 0..protocol.n_measurements {
        for _ in 0..plan.k {
            ops.extend(slice.iter().cloned().map(Op::Gate));
        }
        match decode {
            Decode::Direct => ops.push(Op::Measure { qubit: 0 }),
            Decode::Majority => {
                ops.push(Op::Gate(Gate::cnot(0, 1)));
                ops.push(Op::Gate(Gate::cnot(0, 2)));
                ops.extend((0..3).map(|qubit| Op::Measure { qubit }));
                ops.push(Op::Reset { qubit: 1 });
                ops.push(Op::Reset { qubit: 2 });
            }
            Decode::Sector => {
                ops.push(Op::Measure { qubit: 0 });
                ops.push(Op::Measure { qubit: 1 });
            }
        }
    }
    Ok(Circuit {
        num_qubits,
        initial_state: register_initial,
        ops,
        rounds: protocol.n_measurements,
        decode,
        detect_site: protocol.detect_state,
        layout,
    })
}

impl fmt::Display for Op {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Op::Gate(g) => {
                let qs: Vec<String> = g.targets.iter().map(|q| format!("q{q}")).collect();
                match g.angle {
                    Some(a) => write!(f, "{}({:.6}) {}", g.kind.name(), a, qs.join(",")),
                    None => write!(f, "{} {}", g.kind.name(), qs.join(",")),
                }
            }
            Op::Measure { qubit } => write!(f, "M q{qubit}"),
            Op::Reset { qubit } => write!(f, "RESET q{qubit}"),
        }
    }
}

/// Plain-text listing, one line per measurement round.
impl fmt::Display for Circuit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "# {} qubit(s), {} round(s), decode {:?}, detect site index {}",
            self.num_qubits, self.rounds, self.decode, self.detect_site
        )?;
        let width = self.num_qubits;
        writeln!(f, "init |{:0width$b}>", self.initial_state)?;
        let bits = self.decode.bits_per_round();
        let mut round = 1;
        let mut seen = 0;
        let mut line: Vec<String> = Vec::new();
        for op in &self.ops {
            if seen == bits && matches!(op, Op::Gate(_)) {
                writeln!(f, "{round:>4}: {}", line.join(" ; "))?;
                line.clear();
                seen = 0;
                round += 1;
            }
            line.push(op.to_string());
            if matches!(op, Op::Measure { .. }) {
                seen += 1;
            }
        }
        if !line.is_empty() {
            writeln!(f, "{round:>4}: {}", line.join(" ; "))?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gates::GateKind;
    use crate::monitor::DetectionMode;

    fn params() -> ModelParams {
        ModelParams::two_site(3.0, 0.0, 0.4).unwrap()
    }

    #[test]
    fn smallest_circuit() {
        let plan = TrotterPlan::new(0.4, 1).unwrap();
        let proto = DetectionProtocol::two_site(1, DetectionMode::Fdr, 1).unwrap();
        let c = build_protocol_circuit(
            &params(),
            &plan,
            &proto,
            Layout::SingleQubit,
            MitigationScheme::None,
        )
        .unwrap();
        let kinds: Vec<String> = c
            .ops
            .iter()
            .map(|op| match op {
                Op::Gate(g) => g.kind.name().to_string(),
                Op::Measure { qubit } => format!("M{qubit}"),
                Op::Reset { qubit } => format!("R{qubit}"),
            })
            .collect();
        assert_eq!(kinds, ["RX", "RZ", "M0"]);
        assert_eq!(c.initial_state, 1);
        c.validate().unwrap();
    }

    #[test]
    fn forty_measurement_layers() {
        let plan = TrotterPlan::new(0.4, 1).unwrap();
        let proto = DetectionProtocol::two_site(1, DetectionMode::Fdr, 40).unwrap();
        let c = build_protocol_circuit(
            &params(),
            &plan,
            &proto,
            Layout::SingleQubit,
            MitigationScheme::None,
        )
        .unwrap();
        assert_eq!(c.measurement_count(), 40);
        assert_eq!(c.gates().count(), 80);
    }

    #[test]
    fn repetition_code_layers() {
        let plan = TrotterPlan::new(0.4, 1).unwrap();
        let proto = DetectionProtocol::two_site(1, DetectionMode::Fdr, 2).unwrap();
        let c = build_protocol_circuit(
            &params(),
            &plan,
            &proto,
            Layout::SingleQubit,
            MitigationScheme::RepetitionMajority,
        )
        .unwrap();
        assert_eq!(c.num_qubits, 3);
        assert_eq!(c.initial_state, 0b100);
        assert_eq!(c.gates().filter(|g| g.kind == GateKind::Cnot).count(), 4);
        assert_eq!(c.measurement_count(), 6);
        assert_eq!(
            c.ops
                .iter()
                .filter(|op| matches!(op, Op::Reset { .. }))
                .count(),
            4
        );
        assert_eq!(c.decode, Decode::Majority);
        let text = c.to_string();
        assert_eq!(text.lines().filter(|l| l.contains("M q2")).count(), 2);
    }

    #[test]
    fn mitigation_must_match_layout() {
        let plan = TrotterPlan::new(0.4, 1).unwrap();
        let proto = DetectionProtocol::two_site(0, DetectionMode::Fdr, 2).unwrap();
        assert!(matches!(
            build_protocol_circuit(
                &params(),
                &plan,
                &proto,
                Layout::TwoQubit,
                MitigationScheme::RepetitionMajority
            ),
            Err(Error::IncompatibleMitigation { .. })
        ));
        assert!(build_protocol_circuit(
            &params(),
            &plan,
            &proto,
            Layout::SingleQubit,
            MitigationScheme::SectorPostselect
        )
        .is_err());
        let c = build_protocol_circuit(
            &params(),
            &plan,
            &proto,
            Layout::TwoQubit,
            MitigationScheme::SectorPostselect,
        )
        .unwrap();
        assert_eq!(c.initial_state, 0b01);
        assert_eq!(c.measurement_count(), 4);
    }

    #[test]
    fn construction_is_deterministic() {
        let p = ModelParams::two_site(-1.0, 1.0, 3.0).unwrap();
        let plan = TrotterPlan::from_delta_t(3.0, 0.1).unwrap();
        let proto = DetectionProtocol::two_site(1, DetectionMode::Fdt, 5).unwrap();
        let a = build_protocol_circuit(
            &p,
            &plan,
            &proto,
            Layout::SingleQubit,
            MitigationScheme::None,
        )
        .unwrap();
        let b = build_protocol_circuit(
            &p,
            &plan,
            &proto,
            Layout::SingleQubit,
            MitigationScheme::None,
        )
        .unwrap();
        assert_eq!(a, b);
        assert_eq!(a.gates().count(), 5 * 30 * 2);
        assert_eq!(a.to_string().lines().count(), 2 + 5);
    }

    #[test]
    fn rejects_mismatched_plan() {
        let plan = TrotterPlan::new(1.0, 2).unwrap();
        let proto = DetectionProtocol::two_site(0, DetectionMode::Fdr, 2).unwrap();
        assert!(build_protocol_circuit(
            &params(),
            &plan,
            &proto,
            Layout::SingleQubit,
            MitigationScheme::None
        )
        .is_err());
    }
}
