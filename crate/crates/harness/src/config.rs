//! Sweep configuration: a flat TOML document.
//!
//! ```toml
//! schema_version = 1
//! sweep_variable = "gamma"      # or "u"
//! start = 0.0                   # or: values = [0.5, 1.0, ...]
//! stop = 16.0
//! points = 81
//! u = 0.0                       # the fixed parameter
//! tau = 0.4
//! trotter_steps = 1             # or: delta_t = 0.4
//! n_measurements = 40
//! shots = 32000                 # 0 = deterministic columns only
//! seed = 7                      # required when shots > 0
//! layout = "single_qubit"       # or "two_qubit"
//! mode = "fdr"                  # "fdt" or "both"
//! initial_state = 1             # two-site index; default 1 (single), 0 (two)
//! readout_flip = 0.02           # symmetric; or readout_flip_0to1 / _1to0
//! depolarizing_1q = 0.0
//! depolarizing_2q = 0.0
//! noisy_encode = false
//! mitigation = "none"           # "repetition_majority" or "sector_postselect"
//! output = "gamma_fdr.csv"
//! format = "csv"                # or "json"
//! ```

use std::path::{Path, PathBuf};

use mqwalk::{DetectionMode, Layout, MitigationScheme, ModelParams, NoiseModel, TrotterPlan};
use serde::{Deserialize, Serialize};

use crate::error::{HarnessError, Result};

pub const SCHEMA_VERSION: u32 = 1;
pub const DEFAULT_POINTS: usize = 81;
/// Relative output paths are resolved against this directory when set.
pub const OUTPUT_DIR_ENV: &str = "MQWALK_OUTPUT_DIR";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepVariable {
    Gamma,
    U,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModeSelection {
    Fdr,
    Fdt,
    Both,
}

impl ModeSelection {
    pub fn modes(self) -> Vec<DetectionMode> {
        match self {
            ModeSelection::Fdr => vec![DetectionMode::Fdr],
            ModeSelection::Fdt => vec![DetectionMode::Fdt],
            ModeSelection::Both => vec![DetectionMode::Fdr, DetectionMode::Fdt],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

impl OutputFormat {
    pub fn extension(self) -> &'static str {
        match self {
            OutputFormat::Csv => "csv",
            OutputFormat::Json => "json",
        }
    }
}

fn default_layout() -> Layout {
    Layout::SingleQubit
}

fn default_mitigation() -> MitigationScheme {
    MitigationScheme::None
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub schema_version: u32,
    pub sweep_variable: SweepVariable,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub values: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub start: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stop: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub points: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub u: Option<f64>,
    pub tau: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trotter_steps: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta_t: Option<f64>,
    pub n_measurements: usize,
    #[serde(default)]
    pub shots: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default = "default_layout")]
    pub layout: Layout,
    pub mode: ModeSelection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial_state: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub readout_flip: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub readout_flip_0to1: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub readout_flip_1to0: Option<f64>,
    #[serde(default)]
    pub depolarizing_1q: f64,
    #[serde(default)]
    pub depolarizing_2q: f64,
    #[serde(default)]
    pub noisy_encode: bool,
    #[serde(default = "default_mitigation")]
    pub mitigation: MitigationScheme,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
    #[serde(default)]
    pub format: OutputFormat,
}

fn bad(field: &'static str, reason: impl Into<String>) -> HarnessError {
    HarnessError::Config {
        field,
        reason: reason.into(),
    }
}

impl SweepConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| HarnessError::Parse(e.message().to_string()))
    }

    pub fn from_table(table: toml::Table) -> Result<Self> {
        toml::Value::Table(table)
            .try_into()
            .map_err(|e: toml::de::Error| HarnessError::Parse(e.message().to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| HarnessError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config is always representable as TOML")
    }

    /// Sweep grid: explicit `values`, or `points` uniform samples of
    /// `[start, stop]`.
    pub fn grid(&self) -> Result<Vec<f64>> {
        match (&self.values, self.start, self.stop) {
            (Some(_), Some(_), _) | (Some(_), _, Some(_)) => {
                Err(bad("values", "give either values or start/stop, not both"))
            }
            (Some(v), None, None) => Ok(v.clone()),
            (None, Some(a), Some(b)) => {
                let n = self.points.unwrap_or(DEFAULT_POINTS);
                if n == 0 {
                    return Err(bad("points", "must be >= 1"));
                }
                if n == 1 {
                    return Ok(vec![a]);
                }
                let step = (b - a) / (n - 1) as f64;
                Ok((0..n)
                    .map(|i| if i == n - 1 { b } else { a + step * i as f64 })
                    .collect())
            }
            (None, None, _) => Err(bad("start", "missing; give values or start/stop")),
            (None, _, None) => Err(bad("stop", "missing; give values or start/stop")),
        }
    }

    pub fn trotter_plan(&self) -> Result<TrotterPlan> {
        let plan = match (self.trotter_steps, self.delta_t) {
            (Some(k), None) => TrotterPlan::new(self.tau, k),
            (None, Some(dt)) => TrotterPlan::from_delta_t(self.tau, dt),
            (Some(k), Some(dt)) => {
                let plan = TrotterPlan::new(self.tau, k)?;
                if (plan.delta_t - dt).abs() > 1e-9 * dt.abs().max(1.0) {
                    return Err(bad(
                        "delta_t",
                        format!("tau / trotter_steps = {} but delta_t = {dt}", plan.delta_t),
                    ));
                }
                Ok(plan)
            }
            (None, None) => {
                return Err(bad(
                    "trotter_steps",
                    "missing; give trotter_steps or delta_t",
                ))
            }
        };
        plan.map_err(|e| bad("trotter_steps", e.to_string()))
    }

    pub fn noise(&self) -> NoiseModel {
        let symmetric = self.readout_flip.unwrap_or(0.0);
        NoiseModel {
            readout_flip_0to1: self.readout_flip_0to1.unwrap_or(symmetric),
            readout_flip_1to0: self.readout_flip_1to0.unwrap_or(symmetric),
            depolarizing_1q: self.depolarizing_1q,
            depolarizing_2q: self.depolarizing_2q,
            noisy_encode: self.noisy_encode,
        }
    }

    /// Two-site index of the starting site.
    pub fn initial(&self) -> usize {
        self.initial_state.unwrap_or(match self.layout {
            // |1> on the single qubit
            Layout::SingleQubit => 1,
            // |01> on the register
            Layout::TwoQubit => 0,
        })
    }

    pub fn params_at(&self, value: f64) -> Result<ModelParams> {
        let (gamma, u) = match self.sweep_variable {
            SweepVariable::Gamma => (value, self.u.unwrap_or(0.0)),
            SweepVariable::U => (
                self.gamma
                    .ok_or_else(|| bad("gamma", "required for a U sweep"))?,
                value,
            ),
        };
        ModelParams::two_site(gamma, u, self.tau).map_err(|e| bad("values", e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(bad(
                "schema_version",
                format!(
                    "unsupported version {}, expected {SCHEMA_VERSION}",
                    self.schema_version
                ),
            ));
        }
        let grid = self.grid()?;
        if grid.is_empty() {
            return Err(bad("values", "must not be empty"));
        }
        if let Some(v) = grid.iter().find(|v| !v.is_finite()) {
            return Err(bad("values", format!("non-finite value {v}")));
        }
        match self.sweep_variable {
            SweepVariable::Gamma if self.gamma.is_some() => {
                return Err(bad(
                    "gamma",
                    "is the swept variable; use values or start/stop",
                ))
            }
            SweepVariable::U if self.u.is_some() => {
                return Err(bad("u", "is the swept variable; use values or start/stop"))
            }
            _ => {}
        }
        if !(self.tau.is_finite() && self.tau > 0.0) {
            return Err(bad("tau", "must be finite and > 0"));
        }
        if self.n_measurements < 1 {
            return Err(bad("n_measurements", "must be >= 1"));
        }
        self.trotter_plan()?;
        if self.initial() > 1 {
            return Err(bad("initial_state", "two-site index must be 0 or 1"));
        }
        if self.shots > 0 && self.seed.is_none() {
            return Err(bad("seed", "required for sampled runs (shots > 0)"));
        }
        if self.readout_flip.is_some()
            && (self.readout_flip_0to1.is_some() || self.readout_flip_1to0.is_some())
        {
            return Err(bad(
                "readout_flip",
                "conflicts with readout_flip_0to1 / readout_flip_1to0",
            ));
        }
        self.noise()
            .validate()
            .map_err(|e| bad("readout_flip", e.to_string()))?;
        self.mitigation
            .check_layout(self.layout)
            .map_err(|e| bad("mitigation", e.to_string()))?;
        for v in &grid {
            self.params_at(*v)?;
        }
        Ok(())
    }

    /// Fully explicit copy used for the config echo: grid values, Trotter
    /// plan, initial state and readout rates spelled out.
    pub fn resolved(&self) -> Result<SweepConfig> {
        self.validate()?;
        let plan = self.trotter_plan()?;
        let noise = self.noise();
        let mut out = self.clone();
        out.values = Some(self.grid()?);
        out.start = None;
        out.stop = None;
        out.points = None;
        out.trotter_steps = Some(plan.k);
        out.delta_t = Some(plan.delta_t);
        out.initial_state = Some(self.initial());
        out.readout_flip = None;
        out.readout_flip_0to1 = Some(noise.readout_flip_0to1);
        out.readout_flip_1to0 = Some(noise.readout_flip_1to0);
        if let SweepVariable::Gamma = self.sweep_variable {
            out.u = Some(self.u.unwrap_or(0.0));
        }
        Ok(out)
    }

    /// Output path with `MQWALK_OUTPUT_DIR` applied to relative paths.
    pub fn output_path(&self, fallback_stem: &str) -> PathBuf {
        let path = self.output.clone().unwrap_or_else(|| {
            PathBuf::from(format!("{fallback_stem}.{}", self.format.extension()))
        });
        if path.is_absolute() {
            return path;
        }
        match std::env::var_os(OUTPUT_DIR_ENV) {
            Some(dir) if !dir.is_empty() => Path::new(&dir).join(path),
            _ => path,
        }
    }
}
