//! Deterministic monitored evolution.
//!
//! With `P = 1 - |d><d|` and one-period evolution `V`, the first detection at
//! round `n` has amplitude `<d| V (P V)^{n-1} |j>`. Propagating the
//! unnormalized survival state `ψ_n = P V ψ_{n-1}` gives every `p_n` in one
//! pass, and `|ψ_N|²` is the probability of never being detected.

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::UnitaryMatrix;
use crate::C64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DetectionMode {
    /// First detected return: detect the initial state.
    Fdr,
    /// First detected transition: detect a different state.
    Fdt,
}

impl DetectionMode {
    pub fn name(self) -> &'static str {
        match self {
            DetectionMode::Fdr => "fdr",
            DetectionMode::Fdt => "fdt",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DetectionProtocol {
    pub initial_state: usize,
    pub detect_state: usize,
    pub mode: DetectionMode,
    pub n_measurements: usize,
}

impl DetectionProtocol {
    /// Mode is inferred: FDR when `initial == detect`, FDT otherwise.
    pub fn new(initial_state: usize, detect_state: usize, n_measurements: usize) -> Result<Self> {
        if n_measurements < 1 {
            return Err(Error::param("n_measurements", "must be >= 1"));
        }
        let mode = if initial_state == detect_state {
            DetectionMode::Fdr
        } else {
            DetectionMode::Fdt
        };
        Ok(Self {
            initial_state,
            detect_state,
            mode,
            n_measurements,
        })
    }

    /// Two-site protocol starting from `initial` (0 or 1).
    pub fn two_site(initial: usize, mode: DetectionMode, n_measurements: usize) -> Result<Self> {
        if initial > 1 {
            return Err(Error::param(
                "initial_state",
                "two-site index must be 0 or 1",
            ));
        }
        let detect = match mode {
            DetectionMode::Fdr => initial,
            DetectionMode::Fdt => 1 - initial,
        };
        Self::new(initial, detect, n_measurements)
    }

    pub fn validate(&self, dim: usize) -> Result<()> {
        if self.n_measurements < 1 {
            return Err(Error::param("n_measurements", "must be >= 1"));
        }
        for (name, idx) in [
            ("initial_state", self.initial_state),
            ("detect_state", self.detect_state),
        ] {
            if idx >= dim {
                return Err(Error::param(
                    name,
                    format!("index {idx} out of range for dimension {dim}"),
                ));
            }
        }
        let consistent = match self.mode {
            DetectionMode::Fdr => self.initial_state == self.detect_state,
            DetectionMode::Fdt => self.initial_state != self.detect_state,
        };
        if !consistent {
            return Err(Error::param(
                "mode",
                "inconsistent with initial/detect states",
            ));
        }
        Ok(())
    }
}

/// Per-shot tallies behind an empirical distribution.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ShotCounts {
    /// `detected[n-1]` = shots first detected at round `n`.
    pub detected: Vec<u64>,
    pub undetected: u64,
    /// Shots discarded by post-selection; not part of the distribution.
    pub rejected: u64,
}

impl ShotCounts {
    pub fn new(n_measurements: usize) -> Self {
        Self {
            detected: vec![0; n_measurements],
            ..Self::default()
        }
    }

    pub fn accepted(&self) -> u64 {
        self.detected.iter().sum::<u64>() + self.undetected
    }

    pub fn total(&self) -> u64 {
        self.accepted() + self.rejected
    }

    /// Elementwise sum. Associative and commutative, so shot order and
    /// thread scheduling do not affect the merged result.
    pub fn merge(mut self, other: &ShotCounts) -> ShotCounts {
        if self.detected.len() < other.detected.len() {
            self.detected.resize(other.detected.len(), 0);
        }
        for (a, b) in self.detected.iter_mut().zip(&other.detected) {
            *a += b;
        }
        self.undetected += other.undetected;
        self.rejected += other.rejected;
        self
    }

    pub fn rejected_fraction(&self) -> f64 {
        let total = self.total();
        if total == 0 {
            0.0
        } else {
            self.rejected as f64 / total as f64
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FirstDetectionDistribution {
    /// `probabilities[n-1] = p_n`.
    pub probabilities: Vec<f64>,
    pub undetected_mass: f64,
    /// Accepted shots for an empirical distribution, `None` if deterministic.
    pub n_shots: Option<u64>,
    pub counts: Option<ShotCounts>,
}

impl FirstDetectionDistribution {
    /// Normalizes counts over accepted shots. With no accepted shots all
    /// probabilities are zero.
    pub fn from_counts(counts: ShotCounts) -> Self {
        let accepted = counts.accepted();
        let norm = if accepted == 0 {
            0.0
        } else {
            1.0 / accepted as f64
        };
        Self {
            probabilities: counts.detected.iter().map(|&k| k as f64 * norm).collect(),
            undetected_mass: counts.undetected as f64 * norm,
            n_shots: Some(accepted),
            counts: Some(counts),
        }
    }

    pub fn n_measurements(&self) -> usize {
        self.probabilities.len()
    }

    pub fn total_mass(&self) -> f64 {
        self.probabilities.iter().sum::<f64>() + self.undetected_mass
    }

    pub fn is_empirical(&self) -> bool {
        self.n_shots.is_some()
    }
}

/// Truncated, unnormalized moments of a first-detection distribution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetectionMoments {
    /// `Σ n·p_n`
    pub mean: f64,
    /// `Σ n²·p_n`
    pub second_moment: f64,
    pub variance: f64,
    /// `Σ p_n`
    pub detection_probability: f64,
}

impl DetectionMoments {
    pub fn from_sums(detection_probability: f64, mean: f64, second_moment: f64) -> Self {
        Self {
            mean,
            second_moment,
            variance: second_moment - mean * mean,
            detection_probability,
        }
    }

    /// Standard error of the sampled mean over `shots` shots, treating an
    /// undetected shot as `n = 0`.
    pub fn standard_error(&self, shots: u64) -> f64 {
        if shots == 0 {
            return f64::NAN;
        }
        (self.variance.max(0.0) / shots as f64).sqrt()
    }
}

pub fn detection_moments(dist: &FirstDetectionDistribution) -> DetectionMoments {
    let (mut s0, mut s1, mut s2) = (0.0, 0.0, 0.0);
    for (i, &p) in dist.probabilities.iter().enumerate() {
        let n = (i + 1) as f64;
        s0 += p;
        s1 += n * p;
        s2 += n * n * p;
    }
    DetectionMoments::from_sums(s0, s1, s2)
}

/// Runs up to `rounds` detection rounds, calling `on_round(n, p_n)`, and
/// returns the unnormalized surviving state.
fn propagate(
    evolution: &UnitaryMatrix,
    protocol: &DetectionProtocol,
    rounds: usize,
    mut on_round: impl FnMut(usize, f64),
) -> DVector<C64> {
    let dim = evolution.dim();
    let v = evolution.matrix();
    let mut psi = DVector::<C64>::zeros(dim);
    psi[protocol.initial_state] = C64::new(1.0, 0.0);
    let d = protocol.detect_state;
    for n in 1..=rounds {
        psi = v * &psi;
        on_round(n, psi[d].norm_sqr());
        psi[d] = C64::new(0.0, 0.0);
    }
    psi
}

pub fn amplitude_distribution(
    evolution: &UnitaryMatrix,
    protocol: &DetectionProtocol,
) -> Result<FirstDetectionDistribution> {
    protocol.validate(evolution.dim())?;
    let mut probabilities = Vec::with_capacity(protocol.n_measurements);
    let survivor = propagate(evolution, protocol, protocol.n_measurements, |_, p| {
        probabilities.push(p)
    });
    Ok(FirstDetectionDistribution {
        probabilities,
        undetected_mass: survivor.norm_squared(),
        n_shots: None,
        counts: None,
    })
}

/// Probability of no detection in the first `n` rounds.
pub fn survival_probability(
    evolution: &UnitaryMatrix,
    protocol: &DetectionProtocol,
    n: usize,
) -> Result<f64> {
    protocol.validate(evolution.dim())?;
    Ok(propagate(evolution, protocol, n, |_, _| {}).norm_squared())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic::{fdr_pmf, fdt_pmf};
    use crate::linalg::{build_two_site_hamiltonian, exact_unitary, ModelParams};
    use std::f64::consts::FRAC_PI_2;

    fn two_site(gamma: f64, u: f64, tau: f64) -> UnitaryMatrix {
        exact_unitary(
            &build_two_site_hamiltonian(&ModelParams::two_site(gamma, u, tau).unwrap()).unwrap(),
            tau,
        )
    }

    #[test]
    fn quarter_period_transition_is_immediate() {
        let v = two_site(1.0, 0.0, FRAC_PI_2);
        let proto = DetectionProtocol::two_site(0, DetectionMode::Fdt, 10).unwrap();
        let dist = amplitude_distribution(&v, &proto).unwrap();
        assert!((dist.probabilities[0] - 1.0).abs() < 1e-15);
        assert!(dist.probabilities[1..].iter().all(|&p| p < 1e-30));
    }

    #[test]
    fn hopping_only_matches_closed_form() {
        let c = 0.4f64.cos();
        let v = two_site(1.0, 0.0, 0.4);
        for initial in [0, 1] {
            let fdr = amplitude_distribution(
                &v,
                &DetectionProtocol::two_site(initial, DetectionMode::Fdr, 40).unwrap(),
            )
            .unwrap();
            let fdt = amplitude_distribution(
                &v,
                &DetectionProtocol::two_site(initial, DetectionMode::Fdt, 40).unwrap(),
            )
            .unwrap();
            for n in 1..=40 {
                assert!((fdr.probabilities[n - 1] - fdr_pmf(c, n)).abs() < 1e-10);
                assert!((fdt.probabilities[n - 1] - fdt_pmf(c, n)).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn survival_and_conservation() {
        let v = two_site(0.7, 0.4, 1.1);
        let proto = DetectionProtocol::two_site(1, DetectionMode::Fdt, 25).unwrap();
        let dist = amplitude_distribution(&v, &proto).unwrap();
        assert!((dist.total_mass() - 1.0).abs() < 1e-9);
        assert_eq!(survival_probability(&v, &proto, 0).unwrap(), 1.0);
        let mut cumulative = 0.0;
        for n in 1..=25 {
            cumulative += dist.probabilities[n - 1];
            assert!(
                (survival_probability(&v, &proto, n).unwrap() - (1.0 - cumulative)).abs() < 1e-10
            );
        }
        assert!(
            (survival_probability(&v, &proto, 25).unwrap() - dist.undetected_mass).abs() < 1e-15
        );
    }

    #[test]
    fn hopping_only_survival_is_geometric() {
        let (gamma, tau) = (1.3f64, 0.4);
        let c = (gamma * tau).cos();
        let v = two_site(gamma, 0.0, tau);
        let proto = DetectionProtocol::two_site(0, DetectionMode::Fdt, 5).unwrap();
        for n in 0..12 {
            let s = survival_probability(&v, &proto, n).unwrap();
            assert!((s - c.powi(2 * n as i32)).abs() < 1e-12);
        }
    }

    #[test]
    fn protocol_validation() {
        assert!(DetectionProtocol::new(0, 0, 0).is_err());
        assert!(DetectionProtocol::two_site(2, DetectionMode::Fdr, 3).is_err());
        let p = DetectionProtocol::new(0, 3, 4).unwrap();
        assert_eq!(p.mode, DetectionMode::Fdt);
        assert!(p.validate(2).is_err());
        let bad = DetectionProtocol {
            mode: DetectionMode::Fdr,
            ..p
        };
        assert!(bad.validate(4).is_err());
    }

    #[test]
    fn counts_merge_and_normalize() {
        let a = ShotCounts {
            detected: vec![1, 2, 0],
            undetected: 1,
            rejected: 2,
        };
        let b = ShotCounts {
            detected: vec![0, 1, 3],
            undetected: 0,
            rejected: 1,
        };
        let m = a.clone().merge(&b);
        assert_eq!(m, b.clone().merge(&a));
        assert_eq!(m.detected, vec![1, 3, 3]);
        assert_eq!(m.accepted(), 8);
        assert!((m.rejected_fraction() - 3.0 / 11.0).abs() < 1e-15);
        let dist = FirstDetectionDistribution::from_counts(m);
        assert_eq!(dist.n_shots, Some(8));
        assert_eq!(dist.total_mass(), 1.0);
    }

    #[test]
    fn moments_of_point_mass() {
        let dist = FirstDetectionDistribution {
            probabilities: vec![0.0, 1.0, 0.0],
            undetected_mass: 0.0,
            n_shots: None,
            counts: None,
        };
        let m = detection_moments(&dist);
        assert_eq!((m.mean, m.second_moment, m.variance), (2.0, 4.0, 0.0));
    }
}
