//! Result files.
//!
//! CSV columns, one row per (sweep value, mode):
//!
//! ```text
//! value mode gamma u tau c return_amplitude near_degenerate
//! mean_analytic variance_analytic mean_analytic_return variance_analytic_return
//! mean_deterministic variance_deterministic detection_probability
//! mean_trotter variance_trotter
//! shots accepted_shots mean_sampled variance_sampled standard_error
//! detection_probability_sampled rejected_fraction z_score
//! p_1 .. p_N   (deterministic)
//! q_1 .. q_N   (sampled)
//! ```
//!
//! Sampled columns are empty without shots. CSV cannot carry the config, so
//! it is echoed next to the file as `<stem>.config.toml`; JSON embeds it.
//!
//! Plotting: mean and variance against `value` give the line plots; the
//! `p_n` (or `q_n`) block reshaped to `rows × N` is the heatmap.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::config::{OutputFormat, SweepConfig, SCHEMA_VERSION};
use crate::error::{HarnessError, Result};
use crate::sweep::SweepRow;

const FIXED_COLUMNS: [&str; 25] = [
    "value",
    "mode",
    "gamma",
    "u",
    "tau",
    "c",
    "return_amplitude",
    "near_degenerate",
    "mean_analytic",
    "variance_analytic",
    "mean_analytic_return",
    "variance_analytic_return",
    "mean_deterministic",
    "variance_deterministic",
    "detection_probability",
    "mean_trotter",
    "variance_trotter",
    "shots",
    "accepted_shots",
    "mean_sampled",
    "variance_sampled",
    "standard_error",
    "detection_probability_sampled",
    "rejected_fraction",
    "z_score",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepOutput {
    pub schema_version: u32,
    pub config: SweepConfig,
    pub rows: Vec<SweepRow>,
}

pub fn csv_header(n_measurements: usize) -> Vec<String> {
    let mut header: Vec<String> = FIXED_COLUMNS.iter().map(|s| s.to_string()).collect();
    header.extend((1..=n_measurements).map(|n| format!("p_{n}")));
    header.extend((1..=n_measurements).map(|n| format!("q_{n}")));
    header
}

fn num(x: f64) -> String {
    format!("{x}")
}

fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

fn csv_record(row: &SweepRow, n_measurements: usize) -> Vec<String> {
    let s = row.sampled.as_ref();
    let mut rec = vec![
        num(row.value),
        row.mode.name().to_string(),
        num(row.gamma),
        num(row.u),
        num(row.tau),
        num(row.c),
        num(row.return_amplitude),
        row.near_degenerate.to_string(),
        num(row.mean_analytic),
        num(row.variance_analytic),
        num(row.mean_analytic_return),
        num(row.variance_analytic_return),
        num(row.mean_deterministic),
        num(row.variance_deterministic),
        num(row.detection_probability),
        num(row.mean_trotter),
        num(row.variance_trotter),
        s.map(|s| s.shots.to_string()).unwrap_or_default(),
        s.map(|s| s.accepted_shots.to_string()).unwrap_or_default(),
        opt(s.map(|s| s.mean)),
        opt(s.map(|s| s.variance)),
        opt(s.and_then(|s| s.standard_error)),
        opt(s.map(|s| s.detection_probability)),
        opt(s.map(|s| s.rejected_fraction)),
        opt(row.z_score()),
    ];
    rec.extend(row.pmf.iter().map(|&p| num(p)));
    match s {
        Some(s) => rec.extend(s.pmf.iter().map(|&q| num(q))),
        None => rec.extend(std::iter::repeat_n(String::new(), n_measurements)),
    }
    rec
}

/// CSV text for `rows`.
pub fn to_csv(rows: &[SweepRow], n_measurements: usize) -> Vec<u8> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::CRLF)
        .from_writer(Vec::new());
    w.write_record(csv_header(n_measurements))
        .expect("writing to memory");
    for row in rows {
        w.write_record(csv_record(row, n_measurements))
            .expect("writing to memory");
    }
    w.into_inner().expect("flushing to memory")
}

pub fn to_json(config: &SweepConfig, rows: &[SweepRow]) -> Vec<u8> {
    let out = SweepOutput {
        schema_version: SCHEMA_VERSION,
        config: config.clone(),
        rows: rows.to_vec(),
    };
    let mut bytes = serde_json::to_vec_pretty(&out).expect("rows contain only finite numbers");
    bytes.push(b'\n');
    bytes
}

pub fn config_sidecar(path: &Path) -> PathBuf {
    let stem = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    path.with_file_name(format!("{stem}.config.toml"))
}

fn write(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|source| HarnessError::Io {
            path: dir.to_path_buf(),
            source,
        })?;
    }
    fs::write(path, bytes).map_err(|source| HarnessError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Writes `rows` in `format` to `path`, echoing the resolved config. Returns
/// every file written.
pub fn emit_results(
    config: &SweepConfig,
    rows: &[SweepRow],
    format: OutputFormat,
    path: &Path,
) -> Result<Vec<PathBuf>> {
    if rows.is_empty() {
        return Err(HarnessError::Format {
            path: path.to_path_buf(),
            reason: "no rows to write".into(),
        });
    }
    let resolved = config.resolved()?;
    match format {
        OutputFormat::Csv => {
            write(path, &to_csv(rows, config.n_measurements))?;
            let sidecar = config_sidecar(path);
            write(&sidecar, resolved.to_toml_string().as_bytes())?;
            Ok(vec![path.to_path_buf(), sidecar])
        }
        OutputFormat::Json => {
            write(path, &to_json(&resolved, rows))?;
            Ok(vec![path.to_path_buf()])
        }
    }
}

pub fn read_json(path: &Path) -> Result<SweepOutput> {
    let text = fs::read(path).map_err(|source| HarnessError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    serde_json::from_slice(&text).map_err(|e| HarnessError::Format {
        path: path.to_path_buf(),
        reason: e.to_string(),
    })
}
