use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};
use mqwalk::analytic::{
    c_parameter, degenerate_potentials, fdt_total, is_near_degenerate, mean_fdr, mean_fdt, pmf,
    return_amplitude, truncated_moments,
};
use mqwalk::{DetectionMode, ModelParams};
use mqwalk_harness::config::SCHEMA_VERSION;
use mqwalk_harness::{
    compare_report, emit_results, read_json, run_sweep, ModeSelection, SweepConfig, Tolerances,
};

#[derive(Parser)]
#[command(
    name = "mqwalk",
    version,
    about = "Monitored quantum walk sweeps: analytic, exact and sampled"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a sweep and write CSV or JSON.
    Sweep(SweepArgs),
    /// Closed-form statistics at one parameter point.
    Analytic(AnalyticArgs),
    /// Potentials U_d where the two-site walk is degenerate.
    Degeneracies(DegeneracyArgs),
    /// Compare the computation routes of a sweep or a JSON result file.
    Compare(CompareArgs),
}

/// Every field overrides the config file value of the same name.
#[derive(Args, Default)]
struct SweepArgs {
    /// Flat TOML config; flags override its values.
    #[arg(long, short)]
    config: Option<PathBuf>,
    #[arg(long)]
    sweep_variable: Option<String>,
    /// Comma-separated grid, e.g. `0.5,1,1.5`.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    values: Option<Vec<f64>>,
    #[arg(long, allow_hyphen_values = true)]
    start: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    stop: Option<f64>,
    #[arg(long)]
    points: Option<usize>,
    #[arg(long, allow_hyphen_values = true)]
    gamma: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    u: Option<f64>,
    #[arg(long)]
    tau: Option<f64>,
    #[arg(long)]
    trotter_steps: Option<usize>,
    #[arg(long)]
    delta_t: Option<f64>,
    #[arg(long)]
    n_measurements: Option<usize>,
    #[arg(long)]
    shots: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    /// single_qubit or two_qubit
    #[arg(long)]
    layout: Option<String>,
    /// fdr, fdt or both
    #[arg(long)]
    mode: Option<String>,
    #[arg(long)]
    initial_state: Option<usize>,
    #[arg(long)]
    readout_flip: Option<f64>,
    #[arg(long)]
    readout_flip_0to1: Option<f64>,
    #[arg(long)]
    readout_flip_1to0: Option<f64>,
    #[arg(long)]
    depolarizing_1q: Option<f64>,
    #[arg(long)]
    depolarizing_2q: Option<f64>,
    #[arg(long)]
    noisy_encode: Option<bool>,
    /// none, repetition_majority or sector_postselect
    #[arg(long)]
    mitigation: Option<String>,
    #[arg(long, short)]
    output: Option<PathBuf>,
    /// csv or json
    #[arg(long)]
    format: Option<String>,
}

#[derive(Args)]
struct AnalyticArgs {
    #[arg(long, allow_hyphen_values = true)]
    gamma: f64,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    u: f64,
    #[arg(long)]
    tau: f64,
    #[arg(long, default_value_t = 40)]
    n_measurements: usize,
    #[arg(long, default_value = "both")]
    mode: String,
    /// Print p_n for n up to this many rounds.
    #[arg(long, default_value_t = 10)]
    show: usize,
}

#[derive(Args)]
struct DegeneracyArgs {
    #[arg(long, allow_hyphen_values = true)]
    gamma: f64,
    #[arg(long)]
    tau: f64,
    #[arg(long, default_value_t = 3)]
    k_max: usize,
}

#[derive(Args)]
struct CompareArgs {
    /// JSON file written by `sweep --format json`; otherwise the sweep is run.
    #[arg(long, conflicts_with = "config")]
    results: Option<PathBuf>,
    #[command(flatten)]
    sweep: SweepArgs,
    #[arg(long, default_value_t = 1e-9)]
    analytic_tolerance: f64,
    #[arg(long, default_value_t = 5.0)]
    z_max: f64,
    /// Exit nonzero when the report fails.
    #[arg(long)]
    strict: bool,
}

impl SweepArgs {
    fn to_config(&self) -> anyhow::Result<SweepConfig> {
        let mut table = match &self.config {
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .with_context(|| format!("reading {}", path.display()))?;
                text.parse::<toml::Table>()
                    .with_context(|| format!("parsing {}", path.display()))?
            }
            None => {
                let mut t = toml::Table::new();
                t.insert("schema_version".into(), (SCHEMA_VERSION as i64).into());
                t
            }
        };
        let mut set = |key: &str, value: toml::Value, clears: &[&str]| {
            for k in clears {
                table.remove(*k);
            }
            table.insert(key.into(), value);
        };
        let int =
            |v: u64| -> anyhow::Result<toml::Value> { Ok(toml::Value::Integer(i64::try_from(v)?)) };

        if let Some(v) = &self.sweep_variable {
            set("sweep_variable", v.clone().into(), &[]);
        }
        if let Some(v) = &self.values {
            set(
                "values",
                toml::Value::Array(v.iter().map(|&x| x.into()).collect()),
                &["start", "stop", "points"],
            );
        }
        if let Some(v) = self.start {
            set("start", v.into(), &["values"]);
        }
        if let Some(v) = self.stop {
            set("stop", v.into(), &["values"]);
        }
        if let Some(v) = self.points {
            set("points", int(v as u64)?, &["values"]);
        }
        for (key, v) in [("gamma", self.gamma), ("u", self.u), ("tau", self.tau)] {
            if let Some(v) = v {
                set(key, v.into(), &[]);
            }
        }
        if let Some(v) = self.trotter_steps {
            set("trotter_steps", int(v as u64)?, &["delta_t"]);
        }
        if let Some(v) = self.delta_t {
            set("delta_t", v.into(), &["trotter_steps"]);
        }
        if let Some(v) = self.n_measurements {
            set("n_measurements", int(v as u64)?, &[]);
        }
        if let Some(v) = self.shots {
            set("shots", int(v)?, &[]);
        }
        if let Some(v) = self.seed {
            set("seed", int(v)?, &[]);
        }
        for (key, v) in [
            ("layout", &self.layout),
            ("mode", &self.mode),
            ("mitigation", &self.mitigation),
            ("format", &self.format),
        ] {
            if let Some(v) = v {
                set(key, v.clone().into(), &[]);
            }
        }
        if let Some(v) = self.initial_state {
            set("initial_state", int(v as u64)?, &[]);
        }
        if let Some(v) = self.readout_flip {
            set(
                "readout_flip",
                v.into(),
                &["readout_flip_0to1", "readout_flip_1to0"],
            );
        }
        for (key, v) in [
            ("readout_flip_0to1", self.readout_flip_0to1),
            ("readout_flip_1to0", self.readout_flip_1to0),
            ("depolarizing_1q", self.depolarizing_1q),
            ("depolarizing_2q", self.depolarizing_2q),
        ] {
            if let Some(v) = v {
                let clears: &[&str] = if key.starts_with("readout") {
                    &["readout_flip"]
                } else {
                    &[]
                };
                set(key, v.into(), clears);
            }
        }
        if let Some(v) = self.noisy_encode {
            set("noisy_encode", v.into(), &[]);
        }
        if let Some(v) = &self.output {
            set("output", v.to_string_lossy().into_owned().into(), &[]);
        }
        let config = SweepConfig::from_table(table)?;
        config.validate()?;
        Ok(config)
    }

    fn stem(&self) -> String {
        self.config
            .as_ref()
            .and_then(|p| p.file_stem())
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "sweep".into())
    }
}

fn sweep(args: SweepArgs) -> anyhow::Result<()> {
    let config = args.to_config()?;
    let rows = run_sweep(&config)?;
    let path = config.output_path(&args.stem());
    let written = emit_results(&config, &rows, config.format, &path)?;
    println!(
        "{} rows ({} values, mode {:?}, layout {}, mitigation {})",
        rows.len(),
        config.grid()?.len(),
        config.mode,
        config.layout.name(),
        config.mitigation.name()
    );
    for p in written {
        println!("wrote {}", p.display());
    }
    let report = compare_report(&rows, Tolerances::default());
    println!(
        "max |analytic - deterministic|: {:.3e}; max |z|: {}",
        report.max_analytic_gap,
        report
            .max_abs_z
            .map_or("n/a".to_string(), |z| format!("{z:.2}"))
    );
    Ok(())
}

fn parse_modes(mode: &str) -> anyhow::Result<Vec<DetectionMode>> {
    let sel: ModeSelection = toml::Value::String(mode.into())
        .try_into()
        .with_context(|| format!("mode must be fdr, fdt or both, got {mode:?}"))?;
    Ok(sel.modes())
}

fn analytic(args: AnalyticArgs) -> anyhow::Result<()> {
    let params = ModelParams::two_site(args.gamma, args.u, args.tau)?;
    let c = c_parameter(&params)?;
    let r = return_amplitude(&params)?;
    println!("c = cos(sqrt(U^2 + gamma^2) tau) = {c}");
    println!(
        "c^2 = {}{}",
        c * c,
        if is_near_degenerate(c) {
            "  (near-degenerate)"
        } else {
            ""
        }
    );
    println!("return amplitude |<j|V|j>| = {r}");
    println!(
        "infinite-N: mean FDR {}, mean FDT {}, FDT total {}",
        mean_fdr(c),
        mean_fdt(c),
        fdt_total(c)
    );
    for mode in parse_modes(&args.mode)? {
        let m = truncated_moments(c, args.n_measurements, mode);
        println!(
            "{} N={}: mean {}, variance {}, detected {}",
            mode.name(),
            args.n_measurements,
            m.mean,
            m.variance,
            m.detection_probability
        );
        if (r - c.abs()).abs() > 1e-12 {
            let e = truncated_moments(r, args.n_measurements, mode);
            println!(
                "  with the return amplitude: mean {}, variance {}, detected {}",
                e.mean, e.variance, e.detection_probability
            );
        }
        let shown: Vec<String> = (1..=args.show.min(args.n_measurements))
            .map(|n| format!("{:.6}", pmf(mode, c, n)))
            .collect();
        println!("  p_1..: {}", shown.join(" "));
    }
    Ok(())
}

fn degeneracies(args: DegeneracyArgs) -> anyhow::Result<()> {
    let set = degenerate_potentials(args.gamma, args.tau, args.k_max)?;
    println!("gamma = {}, tau = {}", set.gamma, set.tau);
    if set.potentials.is_empty() {
        println!("no degenerate U for k <= {}", args.k_max);
    }
    for (k, u) in &set.potentials {
        println!("k = {k}: U_d = {u:.6}");
    }
    let g: Vec<String> = set
        .gamma_degeneracies
        .iter()
        .map(|g| format!("{g:.6}"))
        .collect();
    println!("degenerate gamma at U = 0: {}", g.join(", "));
    Ok(())
}

fn compare(args: CompareArgs) -> anyhow::Result<bool> {
    let rows = match &args.results {
        Some(path) => read_json(path)?.rows,
        None => {
            if args.sweep.config.is_none() && args.sweep.tau.is_none() {
                bail!("give --results FILE.json or a sweep via --config / flags");
            }
            run_sweep(&args.sweep.to_config()?)?
        }
    };
    let report = compare_report(
        &rows,
        Tolerances {
            analytic_gap: args.analytic_tolerance,
            z_max: args.z_max,
        },
    );
    print!("{}", report.text);
    Ok(report.passed || !args.strict)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Sweep(a) => sweep(a).map(|_| true),
        Command::Analytic(a) => analytic(a).map(|_| true),
        Command::Degeneracies(a) => degeneracies(a).map(|_| true),
        Command::Compare(a) => compare(a),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
