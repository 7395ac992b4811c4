use mqwalk::analytic::{c_parameter, is_near_degenerate, return_amplitude, truncated_moments};
use mqwalk::circuit::build_protocol_circuit;
use mqwalk::gates::trotterized_unitary;
use mqwalk::linalg::{build_two_site_hamiltonian, exact_unitary};
use mqwalk::monitor::{amplitude_distribution, detection_moments};
use mqwalk::rng::derive_seed;
use mqwalk::trajectory::sample_trajectories;
use mqwalk::{DetectionMode, DetectionProtocol, EvolutionSource, Layout, SamplingConfig};
use serde::{Deserialize, Serialize};

use crate::config::SweepConfig;
use crate::error::Result;

/// One sweep value under one detection mode.
///
/// `*_analytic` columns use the closed forms in `c = cos(ωτ)`;
/// `*_analytic_return` feed them the exact return amplitude instead, which
/// differs once `U ≠ 0`. `*_trotter` is the noiseless distribution of the
/// sampled circuit, the reference for z-scores.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub value: f64,
    pub mode: DetectionMode,
    pub gamma: f64,
    pub u: f64,
    pub tau: f64,
    pub c: f64,
    pub return_amplitude: f64,
    pub near_degenerate: bool,
    pub mean_analytic: f64,
    pub variance_analytic: f64,
    pub mean_analytic_return: f64,
    pub variance_analytic_return: f64,
    pub mean_deterministic: f64,
    pub variance_deterministic: f64,
    pub detection_probability: f64,
    pub mean_trotter: f64,
    pub variance_trotter: f64,
    pub sampled: Option<SampledColumns>,
    /// Deterministic `p_1..p_N`.
    pub pmf: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampledColumns {
    pub shots: u64,
    pub accepted_shots: u64,
    pub mean: f64,
    pub variance: f64,
    /// `None` when every shot was rejected.
    pub standard_error: Option<f64>,
    pub detection_probability: f64,
    pub rejected_fraction: f64,
    /// Empirical `q_1..q_N`, normalized over accepted shots.
    pub pmf: Vec<f64>,
}

impl SweepRow {
    /// `(sampled − trotter) / SE`, when sampled.
    pub fn z_score(&self) -> Option<f64> {
        let s = self.sampled.as_ref()?;
        let se = s.standard_error?;
        let diff = s.mean - self.mean_trotter;
        if se > 0.0 {
            Some(diff / se)
        } else if diff.abs() < 1e-12 {
            Some(0.0)
        } else {
            Some(f64::INFINITY.copysign(diff))
        }
    }
}

fn mode_index(mode: DetectionMode) -> u64 {
    match mode {
        DetectionMode::Fdr => 0,
        DetectionMode::Fdt => 1,
    }
}

fn run_point(
    config: &SweepConfig,
    index: usize,
    value: f64,
    mode: DetectionMode,
) -> Result<SweepRow> {
    let params = config.params_at(value)?;
    let plan = config.trotter_plan()?;
    let n = config.n_measurements;
    let protocol = DetectionProtocol::two_site(config.initial(), mode, n)?;

    let c = c_parameter(&params)?;
    let r = return_amplitude(&params)?;
    let analytic = truncated_moments(c, n, mode);
    let analytic_return = truncated_moments(r, n, mode);

    let exact = exact_unitary(&build_two_site_hamiltonian(&params)?, params.tau);
    let deterministic = amplitude_distribution(&exact, &protocol)?;
    let det = detection_moments(&deterministic);

    // the two-qubit slice acts on the single-excitation sector exactly like
    // the single-qubit one
    let trotter = trotterized_unitary(&params, &plan, Layout::SingleQubit)?;
    let trot = detection_moments(&amplitude_distribution(&trotter, &protocol)?);

    let sampled = if config.shots > 0 {
        let circuit =
            build_protocol_circuit(&params, &plan, &protocol, config.layout, config.mitigation)?;
        let seed = derive_seed(
            config.seed.unwrap_or(0),
            2 * index as u64 + mode_index(mode),
        );
        let sampling = SamplingConfig {
            shots: config.shots,
            seed,
            noise: config.noise(),
            mitigation: config.mitigation,
        };
        let dist = sample_trajectories(EvolutionSource::Circuit(&circuit), &protocol, &sampling)?;
        let m = detection_moments(&dist);
        let counts = dist
            .counts
            .as_ref()
            .expect("sampled distributions carry counts");
        let accepted = counts.accepted();
        Some(SampledColumns {
            shots: config.shots,
            accepted_shots: accepted,
            mean: m.mean,
            variance: m.variance,
            standard_error: (accepted > 0).then(|| m.standard_error(accepted)),
            detection_probability: m.detection_probability,
            rejected_fraction: counts.rejected_fraction(),
            pmf: dist.probabilities.clone(),
        })
    } else {
        None
    };

    Ok(SweepRow {
        value,
        mode,
        gamma: params.gamma,
        u: params.u,
        tau: params.tau,
        c,
        return_amplitude: r,
        near_degenerate: is_near_degenerate(c),
        mean_analytic: analytic.mean,
        variance_analytic: analytic.variance,
        mean_analytic_return: analytic_return.mean,
        variance_analytic_return: analytic_return.variance,
        mean_deterministic: det.mean,
        variance_deterministic: det.variance,
        detection_probability: det.detection_probability,
        mean_trotter: trot.mean,
        variance_trotter: trot.variance,
        sampled,
        pmf: deterministic.probabilities,
    })
}

/// Runs every (value, mode) point. Rows come out in grid order, FDR before
/// FDT, and depend only on the config and seed.
pub fn run_sweep(config: &SweepConfig) -> Result<Vec<SweepRow>> {
    config.validate()?;
    let grid = config.grid()?;
    let modes = config.mode.modes();
    let jobs: Vec<(usize, f64, DetectionMode)> = grid
        .iter()
        .enumerate()
        .flat_map(|(i, &v)| modes.iter().map(move |&m| (i, v, m)))
        .collect();

    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        jobs.par_iter()
            .map(|&(i, v, m)| run_point(config, i, v, m))
            .collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        jobs.iter()
            .map(|&(i, v, m)| run_point(config, i, v, m))
            .collect()
    }
}
