//! Exact, closed-form and sampled first-return statistics at one point.

use mqwalk::analytic::{return_amplitude, truncated_moments};
use mqwalk::circuit::build_protocol_circuit;
use mqwalk::linalg::{build_two_site_hamiltonian, exact_unitary};
use mqwalk::monitor::{amplitude_distribution, detection_moments};
use mqwalk::trajectory::sample_trajectories;
use mqwalk::{
    DetectionMode, DetectionProtocol, EvolutionSource, Layout, MitigationScheme, ModelParams,
    NoiseModel, SamplingConfig, TrotterPlan,
};

fn main() -> mqwalk::Result<()> {
    let params = ModelParams::two_site(-1.0, 0.7, 3.0)?;
    let protocol = DetectionProtocol::two_site(1, DetectionMode::Fdr, 40)?;

    let v = exact_unitary(&build_two_site_hamiltonian(&params)?, params.tau);
    let exact = detection_moments(&amplitude_distribution(&v, &protocol)?);
    let closed = truncated_moments(return_amplitude(&params)?, 40, DetectionMode::Fdr);
    println!(
        "exact mean {:.6}, closed form {:.6}",
        exact.mean, closed.mean
    );

    let plan = TrotterPlan::new(params.tau, 30)?;
    let circuit = build_protocol_circuit(
        &params,
        &plan,
        &protocol,
        Layout::SingleQubit,
        MitigationScheme::RepetitionMajority,
    )?;
    let mut config = SamplingConfig::noiseless(20_000, 7);
    config.noise = NoiseModel::symmetric_readout(0.03);
    config.mitigation = MitigationScheme::RepetitionMajority;
    let sampled = sample_trajectories(EvolutionSource::Circuit(&circuit), &protocol, &config)?;
    println!("sampled mean {:.4}", detection_moments(&sampled).mean);
    Ok(())
}
