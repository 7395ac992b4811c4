//! Parameter sweeps over the two-site monitored walk.
//!
//! A [`SweepConfig`] names the swept variable (`γ` or `U`), the fixed
//! parameters, the circuit layout, noise and mitigation. [`run_sweep`]
//! evaluates every grid point through the closed forms, exact amplitude
//! propagation and (with shots) sampled circuit trajectories;
//! [`emit_results`] writes CSV or JSON and [`compare_report`] checks the
//! routes against each other.

pub mod config;
pub mod error;
pub mod output;
pub mod report;
pub mod sweep;

pub use config::{ModeSelection, OutputFormat, SweepConfig, SweepVariable};
pub use error::{HarnessError, Result};
pub use output::{emit_results, read_json, SweepOutput};
pub use report::{compare_report, Report, Tolerances};
pub use sweep::{run_sweep, SampledColumns, SweepRow};
