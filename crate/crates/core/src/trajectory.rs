//! Monte Carlo trajectories of the monitored walk.
//!
//! Each shot evolves a pure state for one period, samples a projective
//! measurement by the Born rule, collapses and renormalizes, and stops at the
//! first round whose recorded outcome is the detection state. Shots are
//! independent and use the substream `(seed, shot)`.
//!
//! Circuit sources run gate by gate when gate noise is on. Without gate noise,
//! each run of consecutive gates between measurements is fused into one
//! matrix first.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::circuit::{Circuit, Decode, Op};
use crate::error::{Error, Result};
use crate::gates::{apply_gate_in_place, sequence_unitary, Gate, GateKind};
use crate::linalg::UnitaryMatrix;
use crate::monitor::{DetectionProtocol, FirstDetectionDistribution, ShotCounts};
use crate::noise::{
    apply_readout_noise, depolarize_in_place, majority_vote, sector_postselect, MitigationScheme,
    NoiseModel, SectorOutcome,
};
use crate::rng::{shot_rng, ShotRng};
use crate::C64;

#[derive(Debug, Clone, Copy)]
pub enum EvolutionSource<'a> {
    /// One-period unitary; measurement is the projector onto the detection
    /// state.
    Exact(&'a UnitaryMatrix),
    Circuit(&'a Circuit),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SamplingConfig {
    pub shots: u64,
    pub seed: u64,
    pub noise: NoiseModel,
    pub mitigation: MitigationScheme,
}

impl SamplingConfig {
    pub fn noiseless(shots: u64, seed: u64) -> Self {
        Self {
            shots,
            seed,
            noise: NoiseModel::noiseless(),
            mitigation: MitigationScheme::None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ShotOutcome {
    Detected(usize),
    Undetected,
    /// Discarded by sector post-selection.
    Rejected,
}

impl ShotOutcome {
    fn record(self, mut counts: ShotCounts) -> ShotCounts {
        match self {
            ShotOutcome::Detected(n) => counts.detected[n - 1] += 1,
            ShotOutcome::Undetected => counts.undetected += 1,
            ShotOutcome::Rejected => counts.rejected += 1,
        }
        counts
    }
}

/// Called before the measurement of every round with the round number
/// (from 1) and the normalized register state.
pub type RoundObserver<'o> = &'o mut dyn FnMut(usize, &DVector<C64>);

enum Step {
    Fused(usize),
    Gate(Gate),
    Measure(usize),
    Reset(usize),
}

/// Circuit lowered to executable steps.
struct Program {
    steps: Vec<Step>,
    matrices: Vec<DMatrix<C64>>,
    num_qubits: usize,
}

impl Program {
    fn compile(circuit: &Circuit, fuse: bool) -> Result<Self> {
        let mut steps = Vec::with_capacity(circuit.ops.len());
        let mut runs: Vec<Vec<Gate>> = Vec::new();
        let mut matrices = Vec::new();
        let mut pending: Vec<Gate> = Vec::new();

        let mut flush = |pending: &mut Vec<Gate>, steps: &mut Vec<Step>| -> Result<()> {
            if pending.is_empty() {
                return Ok(());
            }
            // Rounds repeat the same gate runs, so only a few distinct
            // products are ever built.
            let idx = match runs.iter().position(|r| r == pending) {
                Some(i) => i,
                None => {
                    matrices.push(sequence_unitary(pending, circuit.num_qubits)?.into_inner());
                    runs.push(pending.clone());
                    runs.len() - 1
                }
            };
            steps.push(Step::Fused(idx));
            pending.clear();
            Ok(())
        };

        for op in &circuit.ops {
            match op {
                Op::Gate(g) if fuse => pending.push(g.clone()),
                Op::Gate(g) => steps.push(Step::Gate(g.clone())),
                Op::Measure { qubit } => {
                    flush(&mut pending, &mut steps)?;
                    steps.push(Step::Measure(*qubit));
                }
                Op::Reset { qubit } => {
                    flush(&mut pending, &mut steps)?;
                    steps.push(Step::Reset(*qubit));
                }
            }
        }
        flush(&mut pending, &mut steps)?;
        Ok(Self {
            steps,
            matrices,
            num_qubits: circuit.num_qubits,
        })
    }
}

#[inline]
fn qubit_mask(num_qubits: usize, qubit: usize) -> usize {
    1 << (num_qubits - 1 - qubit)
}

fn probability_of_one(amps: &DVector<C64>, mask: usize) -> f64 {
    amps.iter()
        .enumerate()
        .filter(|(i, _)| i & mask != 0)
        .map(|(_, a)| a.norm_sqr())
        .sum()
}

/// Samples a Z measurement of one qubit and collapses the state.
fn measure_qubit(
    amps: &mut DVector<C64>,
    num_qubits: usize,
    qubit: usize,
    rng: &mut ShotRng,
) -> u8 {
    let mask = qubit_mask(num_qubits, qubit);
    let p1 = probability_of_one(amps, mask).clamp(0.0, 1.0);
    let outcome = u8::from(rng.gen::<f64>() < p1);
    let keep_set = outcome == 1;
    let prob = if keep_set { p1 } else { 1.0 - p1 };
    let scale = 1.0 / prob.sqrt();
    for (i, a) in amps.iter_mut().enumerate() {
        if (i & mask != 0) == keep_set {
            *a *= scale;
        } else {
            *a = C64::new(0.0, 0.0);
        }
    }
    outcome
}

fn reset_qubit(amps: &mut DVector<C64>, num_qubits: usize, qubit: usize, rng: &mut ShotRng) {
    let mask = qubit_mask(num_qubits, qubit);
    let p1 = probability_of_one(amps, mask);
    // After a measurement the qubit is already definite; only an unmeasured
    // qubit needs a projective measurement first.
    let is_one = if p1 < 1e-14 {
        false
    } else if p1 > 1.0 - 1e-14 {
        true
    } else {
        measure_qubit(amps, num_qubits, qubit, rng) == 1
    };
    if is_one {
        for i in 0..amps.len() {
            if i & mask != 0 {
                amps.swap_rows(i, i ^ mask);
            }
        }
    }
}

fn run_circuit_shot(
    program: &Program,
    circuit: &Circuit,
    noise: &NoiseModel,
    rng: &mut ShotRng,
    mut observer: Option<RoundObserver<'_>>,
) -> ShotOutcome {
    let n = program.num_qubits;
    let dim = 1usize << n;
    let mut amps = DVector::<C64>::zeros(dim);
    amps[circuit.initial_state] = C64::new(1.0, 0.0);
    let mut scratch = DVector::<C64>::zeros(dim);
    let bits_per_round = circuit.decode.bits_per_round();
    let mut record = [0u8; 3];
    let mut filled = 0;
    let mut round = 1;

    for step in &program.steps {
        match step {
            Step::Fused(idx) => {
                scratch.gemv(
                    C64::new(1.0, 0.0),
                    &program.matrices[*idx],
                    &amps,
                    C64::new(0.0, 0.0),
                );
                std::mem::swap(&mut amps, &mut scratch);
            }
            Step::Gate(g) => {
                apply_gate_in_place(&mut amps, n, g);
                let p = match g.kind {
                    GateKind::Cnot if !noise.noisy_encode => 0.0,
                    _ if g.arity() == 1 => noise.depolarizing_1q,
                    _ => noise.depolarizing_2q,
                };
                depolarize_in_place(&mut amps, n, &g.targets, p, rng);
            }
            Step::Measure(q) => {
                if filled == 0 {
                    if let Some(obs) = observer.as_mut() {
                        obs(round, &amps);
                    }
                }
                let bit = measure_qubit(&mut amps, n, *q, rng);
                record[filled] = apply_readout_noise(bit, noise, rng);
                filled += 1;
                if filled == bits_per_round {
                    let site = match circuit.decode {
                        Decode::Direct => record[0] as usize,
                        Decode::Majority => majority_vote(record) as usize,
                        Decode::Sector => match sector_postselect([record[0], record[1]]) {
                            SectorOutcome::Accept { index } => index,
                            SectorOutcome::Reject => return ShotOutcome::Rejected,
                        },
                    };
                    if site == circuit.detect_site {
                        return ShotOutcome::Detected(round);
                    }
                    filled = 0;
                    round += 1;
                }
            }
            Step::Reset(q) => reset_qubit(&mut amps, n, *q, rng),
        }
    }
    ShotOutcome::Undetected
}

fn run_exact_shot(
    evolution: &UnitaryMatrix,
    protocol: &DetectionProtocol,
    noise: &NoiseModel,
    rng: &mut ShotRng,
    mut observer: Option<RoundObserver<'_>>,
) -> ShotOutcome {
    let dim = evolution.dim();
    let v = evolution.matrix();
    let d = protocol.detect_state;
    let mut psi = DVector::<C64>::zeros(dim);
    psi[protocol.initial_state] = C64::new(1.0, 0.0);
    let mut scratch = DVector::<C64>::zeros(dim);
    for round in 1..=protocol.n_measurements {
        scratch.gemv(C64::new(1.0, 0.0), v, &psi, C64::new(0.0, 0.0));
        std::mem::swap(&mut psi, &mut scratch);
        if let Some(obs) = observer.as_mut() {
            obs(round, &psi);
        }
        let p_detect = psi[d].norm_sqr().clamp(0.0, 1.0);
        let hit = rng.gen::<f64>() < p_detect;
        let recorded_hit = if dim == 2 {
            let true_index = if hit { d } else { 1 - d };
            apply_readout_noise(true_index as u8, noise, rng) as usize == d
        } else {
            hit
        };
        if hit {
            psi.fill(C64::new(0.0, 0.0));
            psi[d] = C64::new(1.0, 0.0);
        } else {
            psi[d] = C64::new(0.0, 0.0);
            let norm = (1.0 - p_detect).sqrt();
            psi /= C64::new(norm, 0.0);
        }
        if recorded_hit {
            return ShotOutcome::Detected(round);
        }
    }
    ShotOutcome::Undetected
}

enum Prepared<'a> {
    Exact(&'a UnitaryMatrix),
    Circuit(&'a Circuit, Program),
}

fn prepare<'a>(
    source: EvolutionSource<'a>,
    protocol: &DetectionProtocol,
    config: &SamplingConfig,
) -> Result<Prepared<'a>> {
    config.noise.validate()?;
    match source {
        EvolutionSource::Exact(u) => {
            protocol.validate(u.dim())?;
            if config.mitigation != MitigationScheme::None {
                return Err(Error::IncompatibleMitigation {
                    scheme: config.mitigation.name(),
                    layout: "exact-unitary",
                });
            }
            if config.noise.has_gate_noise() {
                return Err(Error::param("noise", "gate noise needs a circuit source"));
            }
            if config.noise.has_readout_noise() && u.dim() != 2 {
                return Err(Error::param(
                    "noise",
                    "readout noise on an exact source needs dimension 2",
                ));
            }
            Ok(Prepared::Exact(u))
        }
        EvolutionSource::Circuit(c) => {
            c.validate()?;
            protocol.validate(2)?;
            config.mitigation.check_layout(c.layout)?;
            let expected = match config.mitigation {
                MitigationScheme::None => Decode::Direct,
                MitigationScheme::RepetitionMajority => Decode::Majority,
                MitigationScheme::SectorPostselect => Decode::Sector,
            };
            if c.decode != expected {
                return Err(Error::param(
                    "mitigation",
                    "circuit was built for a different mitigation scheme",
                ));
            }
            if c.rounds != protocol.n_measurements || c.detect_site != protocol.detect_state {
                return Err(Error::param(
                    "protocol",
                    "circuit was built for a different protocol",
                ));
            }
            let program = Program::compile(c, !config.noise.has_gate_noise())?;
            Ok(Prepared::Circuit(c, program))
        }
    }
}

impl Prepared<'_> {
    fn run(
        &self,
        protocol: &DetectionProtocol,
        config: &SamplingConfig,
        shot: u64,
        observer: Option<RoundObserver<'_>>,
    ) -> ShotOutcome {
        let mut rng = shot_rng(config.seed, shot);
        match self {
            Prepared::Exact(u) => run_exact_shot(u, protocol, &config.noise, &mut rng, observer),
            Prepared::Circuit(c, program) => {
                run_circuit_shot(program, c, &config.noise, &mut rng, observer)
            }
        }
    }
}

/// Runs a single shot, reporting the pre-measurement state of every round.
pub fn simulate_shot(
    source: EvolutionSource<'_>,
    protocol: &DetectionProtocol,
    config: &SamplingConfig,
    shot: u64,
    observer: RoundObserver<'_>,
) -> Result<ShotOutcome> {
    let prepared = prepare(source, protocol, config)?;
    Ok(prepared.run(protocol, config, shot, Some(observer)))
}

fn check_shots(config: &SamplingConfig) -> Result<()> {
    if config.shots < 1 {
        return Err(Error::param("shots", "must be >= 1"));
    }
    Ok(())
}

/// Samples `config.shots` trajectories on the current thread.
pub fn sample_trajectories_sequential(
    source: EvolutionSource<'_>,
    protocol: &DetectionProtocol,
    config: &SamplingConfig,
) -> Result<FirstDetectionDistribution> {
    check_shots(config)?;
    let prepared = prepare(source, protocol, config)?;
    let counts = (0..config.shots).fold(ShotCounts::new(protocol.n_measurements), |acc, shot| {
        prepared.run(protocol, config, shot, None).record(acc)
    });
    Ok(FirstDetectionDistribution::from_counts(counts))
}

/// Samples `config.shots` trajectories, in parallel with the `parallel`
/// feature. The result is identical to [`sample_trajectories_sequential`].
pub fn sample_trajectories(
    source: EvolutionSource<'_>,
    protocol: &DetectionProtocol,
    config: &SamplingConfig,
) -> Result<FirstDetectionDistribution> {
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        check_shots(config)?;
        let prepared = prepare(source, protocol, config)?;
        let n = protocol.n_measurements;
        let counts = (0..config.shots)
            .into_par_iter()
            .fold(
                || ShotCounts::new(n),
                |acc, shot| prepared.run(protocol, config, shot, None).record(acc),
            )
            .reduce(|| ShotCounts::new(n), |a, b| a.merge(&b));
        Ok(FirstDetectionDistribution::from_counts(counts))
    }
    #[cfg(not(feature = "parallel"))]
    {
        sample_trajectories_sequential(source, protocol, config)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::build_protocol_circuit;
    use crate::gates::{Layout, TrotterPlan};
    use crate::linalg::{build_two_site_hamiltonian, exact_unitary, ModelParams};
    use crate::monitor::DetectionMode;

    fn exact(gamma: f64, u: f64, tau: f64) -> UnitaryMatrix {
        exact_unitary(
            &build_two_site_hamiltonian(&ModelParams::two_site(gamma, u, tau).unwrap()).unwrap(),
            tau,
        )
    }

    #[test]
    fn identity_evolution_detects_immediately() {
        let v = exact(0.0, 0.0, 1.0);
        let proto = DetectionProtocol::two_site(1, DetectionMode::Fdr, 5).unwrap();
        let dist = sample_trajectories(
            EvolutionSource::Exact(&v),
            &proto,
            &SamplingConfig::noiseless(500, 1),
        )
        .unwrap();
        assert_eq!(dist.probabilities[0], 1.0);
        assert_eq!(dist.counts.unwrap().detected[0], 500);
    }

    #[test]
    fn rejects_bad_configs() {
        let v = exact(1.0, 0.0, 1.0);
        let proto = DetectionProtocol::two_site(0, DetectionMode::Fdr, 5).unwrap();
        assert!(sample_trajectories(
            EvolutionSource::Exact(&v),
            &proto,
            &SamplingConfig::noiseless(0, 1)
        )
        .is_err());
        let cfg = SamplingConfig {
            mitigation: MitigationScheme::RepetitionMajority,
            ..SamplingConfig::noiseless(10, 1)
        };
        assert!(matches!(
            sample_trajectories(EvolutionSource::Exact(&v), &proto, &cfg),
            Err(Error::IncompatibleMitigation { .. })
        ));

        let p = ModelParams::two_site(1.0, 0.0, 1.0).unwrap();
        let plan = TrotterPlan::new(1.0, 1).unwrap();
        let c = build_protocol_circuit(&p, &plan, &proto, Layout::TwoQubit, MitigationScheme::None)
            .unwrap();
        let cfg = SamplingConfig {
            mitigation: MitigationScheme::SectorPostselect,
            ..SamplingConfig::noiseless(10, 1)
        };
        assert!(sample_trajectories(EvolutionSource::Circuit(&c), &proto, &cfg).is_err());
    }

    #[test]
    fn sequential_and_parallel_agree() {
        let p = ModelParams::two_site(3.0, 0.5, 0.4).unwrap();
        let plan = TrotterPlan::new(0.4, 3).unwrap();
        let proto = DetectionProtocol::two_site(1, DetectionMode::Fdt, 40).unwrap();
        let c = build_protocol_circuit(
            &p,
            &plan,
            &proto,
            Layout::SingleQubit,
            MitigationScheme::RepetitionMajority,
        )
        .unwrap();
        let cfg = SamplingConfig {
            shots: 3000,
            seed: 99,
            noise: NoiseModel {
                depolarizing_1q: 0.01,
                ..NoiseModel::symmetric_readout(0.03)
            },
            mitigation: MitigationScheme::RepetitionMajority,
        };
        let a = sample_trajectories(EvolutionSource::Circuit(&c), &proto, &cfg).unwrap();
        let b = sample_trajectories_sequential(EvolutionSource::Circuit(&c), &proto, &cfg).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn fused_and_gate_by_gate_agree_without_noise() {
        // With gate noise enabled at probability zero the program is not
        // fused; the sampled counts must still match exactly.
        let p = ModelParams::two_site(-1.0, 1.0, 3.0).unwrap();
        let plan = TrotterPlan::new(3.0, 5).unwrap();
        let proto = DetectionProtocol::two_site(0, DetectionMode::Fdr, 10).unwrap();
        let c = build_protocol_circuit(
            &p,
            &plan,
            &proto,
            Layout::SingleQubit,
            MitigationScheme::None,
        )
        .unwrap();
        let program_fused = Program::compile(&c, true).unwrap();
        let program_plain = Program::compile(&c, false).unwrap();
        let noise = NoiseModel::noiseless();
        for shot in 0..200 {
            let a = run_circuit_shot(&program_fused, &c, &noise, &mut shot_rng(4, shot), None);
            let b = run_circuit_shot(&program_plain, &c, &noise, &mut shot_rng(4, shot), None);
            assert_eq!(a, b);
        }
        assert_eq!(program_fused.matrices.len(), 1);
    }

    #[test]
    fn reset_returns_ancilla_to_zero() {
        let mut amps = DVector::<C64>::zeros(4);
        amps[3] = C64::new(1.0, 0.0); // |11>
        let mut rng = shot_rng(0, 0);
        reset_qubit(&mut amps, 2, 1, &mut rng);
        assert_eq!(amps[2], C64::new(1.0, 0.0));
    }

    #[test]
    fn observer_sees_normalized_states() {
        let v = exact(0.8, 0.3, 0.9);
        let proto = DetectionProtocol::two_site(0, DetectionMode::Fdt, 30).unwrap();
        let mut rounds = Vec::new();
        let outcome = simulate_shot(
            EvolutionSource::Exact(&v),
            &proto,
            &SamplingConfig::noiseless(1, 5),
            0,
            &mut |n, psi| {
                assert!((psi.norm_squared() - 1.0).abs() < 1e-12);
                rounds.push(n);
            },
        )
        .unwrap();
        match outcome {
            ShotOutcome::Detected(n) => assert_eq!(rounds.len(), n),
            ShotOutcome::Undetected => assert_eq!(rounds.len(), 30),
            ShotOutcome::Rejected => unreachable!(),
        }
    }
}
