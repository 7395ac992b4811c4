use std::fmt::Write;

use crate::sweep::SweepRow;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// Bound on |analytic − deterministic| for the mean and detection mass.
    pub analytic_gap: f64,
    /// |z| above this flags a systematic bias.
    pub z_max: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            analytic_gap: 1e-9,
            z_max: 5.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub text: String,
    pub max_analytic_gap: f64,
    /// Same gap with the exact return amplitude in the closed forms.
    pub max_analytic_return_gap: f64,
    pub max_abs_z: Option<f64>,
    pub flagged: Vec<usize>,
    pub deterministic_only: bool,
    pub passed: bool,
}

/// Summarizes a sweep: z-scores of the sampled means against the noiseless
/// circuit, and the worst analytic/deterministic gap. Flags bias but never
/// errors.
pub fn compare_report(rows: &[SweepRow], tol: Tolerances) -> Report {
    let mut text = String::new();
    let max_analytic_gap = rows
        .iter()
        .map(|r| (r.mean_analytic - r.mean_deterministic).abs())
        .fold(0.0, f64::max);
    let max_analytic_return_gap = rows
        .iter()
        .map(|r| (r.mean_analytic_return - r.mean_deterministic).abs())
        .fold(0.0, f64::max);
    let deterministic_only = rows.iter().all(|r| r.sampled.is_none());

    let _ = writeln!(text, "rows: {}", rows.len());
    let _ = writeln!(
        text,
        "max |analytic - deterministic| mean: {max_analytic_gap:.3e}"
    );
    let _ = writeln!(
        text,
        "max |analytic(return amplitude) - deterministic| mean: {max_analytic_return_gap:.3e}"
    );

    let mut flagged = Vec::new();
    let mut max_abs_z: Option<f64> = None;
    if deterministic_only {
        let _ = writeln!(text, "deterministic only: no sampled columns");
    } else {
        let _ = writeln!(
            text,
            "{:>12} {:>4} {:>12} {:>12} {:>10} {:>9}",
            "value", "mode", "trotter", "sampled", "se", "z"
        );
        for (i, r) in rows.iter().enumerate() {
            let (Some(s), Some(z)) = (r.sampled.as_ref(), r.z_score()) else {
                continue;
            };
            max_abs_z = Some(max_abs_z.map_or(z.abs(), |m: f64| m.max(z.abs())));
            let mark = if z.abs() > tol.z_max {
                flagged.push(i);
                "  <- bias"
            } else {
                ""
            };
            let _ = writeln!(
                text,
                "{:>12.6} {:>4} {:>12.6} {:>12.6} {:>10.3e} {:>9.2}{mark}",
                r.value,
                r.mode.name(),
                r.mean_trotter,
                s.mean,
                s.standard_error.unwrap_or(f64::NAN),
                z
            );
        }
        if let Some(m) = max_abs_z {
            let _ = writeln!(text, "max |z|: {m:.2}");
        }
        if !flagged.is_empty() {
            let _ = writeln!(
                text,
                "systematic bias (|z| > {}) at {} row(s)",
                tol.z_max,
                flagged.len()
            );
        }
    }
    let passed = max_analytic_gap <= tol.analytic_gap && flagged.is_empty();
    let _ = writeln!(text, "result: {}", if passed { "PASS" } else { "FAIL" });
    Report {
        text,
        max_analytic_gap,
        max_analytic_return_gap,
        max_abs_z,
        flagged,
        deterministic_only,
        passed,
    }
}
