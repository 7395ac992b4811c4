//! Closed-form first-detection statistics of the two-site walk.
//!
//! Everything is a function of the return parameter
//! `c = cos(sqrt(U² + γ²)·τ)`; write `x = c²`.
//!
//! | quantity        | FDR                                   | FDT                |
//! |-----------------|---------------------------------------|--------------------|
//! | `p_n`           | `x` (n = 1), `(1-x)²·x^(n-2)` (n ≥ 2) | `(1-x)·x^(n-1)`    |
//! | `Σ p_n`         | 1                                     | 1, or 0 if `x = 1` |
//! | `⟨n⟩`           | 2, or 1 if `x = 1`                    | `1/(1-x)`, or 0    |
//!
//! # Truncated moments
//!
//! With `N` measurements the moments are the unnormalized sums
//! `Σ_{n≤N} n^k·p_n`; undetected mass contributes nothing. They follow from the
//! finite power sums `G_k(M) = Σ_{m=0}^{M-1} m^k x^m`:
//!
//! ```text
//! G_0 = (1 - x^M) / (1-x)
//! G_1 = x·(1 - M·x^(M-1) + (M-1)·x^M) / (1-x)²
//! G_2 = x·((1+x) - M²·x^(M-1) + (2M² - 2M - 1)·x^M - (M-1)²·x^(M+1)) / (1-x)³
//! ```
//!
//! FDT (`m = n-1`, `M = N`):
//! `Σp = (1-x)·G_0`, `Σnp = (1-x)(G_1 + G_0)`, `Σn²p = (1-x)(G_2 + 2G_1 + G_0)`.
//!
//! FDR (`m = n-2`, `M = N-1`):
//! `Σp = x + (1-x)²·G_0`, `Σnp = x + (1-x)²(G_1 + 2G_0)`,
//! `Σn²p = x + (1-x)²(G_2 + 4G_1 + 4G_0)`.
//!
//! At `x = 1` the truncated FDT mean is exactly 0: with a finite number of
//! measurements it vanishes instead of diverging.
//!
//! The table is exact at `U = 0`. With a potential the one-period return
//! probability is `r = cos²(ωτ) + (U/ω)²·sin²(ωτ)`, not `c²`, and the same
//! formulas hold with `x = r`; [`return_amplitude`] gives `sqrt(r)` to feed
//! into them. Both agree on where `x = 1`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::ModelParams;
use crate::monitor::{DetectionMode, DetectionMoments};
use crate::{DEGENERACY_TOL, NEAR_DEGENERACY_TOL};

/// The closed forms cancel catastrophically while `x^terms` is still close to
/// one, i.e. while `(1 - x)·terms` is small. Below this product the sums are
/// accumulated term by term instead; above it `x^terms < e^-64`.
const CLOSED_FORM_MIN_DECAY: f64 = 64.0;

/// `cos(sqrt(U² + γ²)·τ)`.
pub fn c_parameter(params: &ModelParams) -> Result<f64> {
    params.validate()?;
    if params.l != 2 {
        return Err(Error::param(
            "l",
            "the return parameter is defined for two sites",
        ));
    }
    Ok((params.omega() * params.tau).cos())
}

/// `|⟨j|e^{-iHτ}|j⟩|`, the same for both sites. Equals `|c|` only when
/// `U = 0`.
pub fn return_amplitude(params: &ModelParams) -> Result<f64> {
    let c = c_parameter(params)?;
    let omega = params.omega();
    if omega == 0.0 {
        return Ok(1.0);
    }
    let s = (omega * params.tau).sin() * params.u / omega;
    Ok((c * c + s * s).min(1.0).sqrt())
}

pub fn is_degenerate(c: f64) -> bool {
    (c * c - 1.0).abs() < DEGENERACY_TOL
}

pub fn is_near_degenerate(c: f64) -> bool {
    (c * c - 1.0).abs() < NEAR_DEGENERACY_TOL
}

fn check_c(c: f64) {
    assert!(
        c.is_finite() && c.abs() <= 1.0 + 1e-12,
        "return parameter must satisfy |c| <= 1, got {c}"
    );
}

/// First-detected-return probability at measurement `n ≥ 1`.
pub fn fdr_pmf(c: f64, n: usize) -> f64 {
    check_c(c);
    assert!(n >= 1, "measurement index starts at 1");
    let x = c * c;
    if n == 1 {
        x
    } else {
        (1.0 - x).powi(2) * x.powi((n - 2) as i32)
    }
}

/// First-detected-transition probability at measurement `n ≥ 1`.
pub fn fdt_pmf(c: f64, n: usize) -> f64 {
    check_c(c);
    assert!(n >= 1, "measurement index starts at 1");
    let x = c * c;
    (1.0 - x) * x.powi((n - 1) as i32)
}

pub fn pmf(mode: DetectionMode, c: f64, n: usize) -> f64 {
    match mode {
        DetectionMode::Fdr => fdr_pmf(c, n),
        DetectionMode::Fdt => fdt_pmf(c, n),
    }
}

/// Infinite-`N` mean FDR time: 2, or 1 at a degeneracy.
pub fn mean_fdr(c: f64) -> f64 {
    check_c(c);
    if is_degenerate(c) {
        1.0
    } else {
        2.0
    }
}

/// Infinite-`N` mean FDT time `1/(1-c²)`, or 0 at a degeneracy. Not clamped
/// near the degeneracy.
pub fn mean_fdt(c: f64) -> f64 {
    check_c(c);
    if is_degenerate(c) {
        0.0
    } else {
        1.0 / (1.0 - c * c)
    }
}

/// Total infinite-`N` FDT probability: 1, or 0 at a degeneracy.
pub fn fdt_total(c: f64) -> f64 {
    check_c(c);
    if is_degenerate(c) {
        0.0
    } else {
        1.0
    }
}

/// `[G_0, G_1, G_2]` with `G_k = Σ_{m=0}^{terms-1} m^k x^m`.
fn power_sums(x: f64, terms: usize) -> [f64; 3] {
    if terms == 0 {
        return [0.0; 3];
    }
    let gap = 1.0 - x;
    if gap * (terms as f64) < CLOSED_FORM_MIN_DECAY {
        let mut sums = [0.0; 3];
        let mut xm = 1.0;
        for m in 0..terms {
            let mf = m as f64;
            sums[0] += xm;
            sums[1] += mf * xm;
            sums[2] += mf * mf * xm;
            xm *= x;
        }
        return sums;
    }
    let m = terms as f64;
    let x_m1 = x.powi(terms as i32 - 1);
    let x_m = x_m1 * x;
    let g0 = (1.0 - x_m) / gap;
    let g1 = x * (1.0 - m * x_m1 + (m - 1.0) * x_m) / (gap * gap);
    let g2 = x
        * ((1.0 + x) - m * m * x_m1 + (2.0 * m * m - 2.0 * m - 1.0) * x_m
            - (m - 1.0).powi(2) * x_m * x)
        / (gap * gap * gap);
    [g0, g1, g2]
}

/// Truncated moments of the first `n_measurements` detection probabilities.
pub fn truncated_moments(c: f64, n_measurements: usize, mode: DetectionMode) -> DetectionMoments {
    check_c(c);
    assert!(n_measurements >= 1, "need at least one measurement");
    let x = (c * c).min(1.0);
    let degenerate = is_degenerate(c);
    let (total, first, second) = match mode {
        DetectionMode::Fdt => {
            if degenerate {
                (0.0, 0.0, 0.0)
            } else {
                let [g0, g1, g2] = power_sums(x, n_measurements);
                let w = 1.0 - x;
                (w * g0, w * (g1 + g0), w * (g2 + 2.0 * g1 + g0))
            }
        }
        DetectionMode::Fdr => {
            if degenerate {
                (1.0, 1.0, 1.0)
            } else {
                let [g0, g1, g2] = power_sums(x, n_measurements - 1);
                let w = (1.0 - x).powi(2);
                (
                    x + w * g0,
                    x + w * (g1 + 2.0 * g0),
                    x + w * (g2 + 4.0 * g1 + 4.0 * g0),
                )
            }
        }
    };
    DetectionMoments::from_sums(total, first, second)
}

/// Degenerate points of the two-site model at fixed `γ` and `τ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DegeneracySet {
    pub tau: f64,
    pub gamma: f64,
    /// `(k, U_d)` pairs with `U_d = sqrt(π²k²/τ² - γ²)`, ascending.
    pub potentials: Vec<(usize, f64)>,
    /// Hopping values `πk/τ` that are degenerate at `U = 0`.
    pub gamma_degeneracies: Vec<f64>,
}

impl DegeneracySet {
    pub fn potential_values(&self) -> Vec<f64> {
        self.potentials.iter().map(|&(_, u)| u).collect()
    }
}

/// Potentials `U_d` with `cos²(sqrt(U_d² + γ²)·τ) = 1` for `k = 1..=k_max`.
/// Orders with a negative radicand are skipped.
pub fn degenerate_potentials(gamma: f64, tau: f64, k_max: usize) -> Result<DegeneracySet> {
    if !(tau.is_finite() && tau > 0.0) {
        return Err(Error::param("tau", "must be > 0"));
    }
    if !gamma.is_finite() {
        return Err(Error::param("gamma", "must be finite"));
    }
    let pi = std::f64::consts::PI;
    let potentials = (1..=k_max)
        .filter_map(|k| {
            let radicand = (pi * k as f64 / tau).powi(2) - gamma * gamma;
            (radicand >= 0.0).then(|| (k, radicand.sqrt()))
        })
        .collect();
    let gamma_degeneracies = (1..=k_max).map(|k| pi * k as f64 / tau).collect();
    Ok(DegeneracySet {
        tau,
        gamma,
        potentials,
        gamma_degeneracies,
    })
}
