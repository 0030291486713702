use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use clustersim::duality::{run_duality_suite, DualitySuiteConfig};
use clustersim::{cross_check, CircuitSpec, FitOptions, ObservableId, XcheckConfig};
use clustersim_cli::report::{self, CollapseRequest};
use clustersim_cli::sweep::run_sweep;
use clustersim_cli::table::write_atomic;
use clustersim_cli::{CliError, CliResult, SweepConfig, Table};
use serde::Serialize;
use serde_json::Value;

#[derive(Parser)]
#[command(name = "clustersim", version, about = "Monitored generalized cluster circuits")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a parameter sweep and write the results table.
    Sweep(SweepArgs),
    /// Merge results tables into one.
    Merge {
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Finite-size analysis of results tables.
    Report(ReportArgs),
    /// Check the duality between Z/cluster measurement records.
    DualityCheck(DualityArgs),
    /// Replay random circuits on both engines and compare them.
    OracleXcheck(XcheckArgs),
}

#[derive(Args)]
struct SweepArgs {
    #[arg(short, long)]
    config: PathBuf,
    /// Overrides the config's `output`.
    #[arg(short, long)]
    output: Option<PathBuf>,
    #[arg(long)]
    alpha: Option<usize>,
    #[arg(long)]
    n_qubits: Option<usize>,
    #[arg(long)]
    p_s: Option<f64>,
    #[arg(long)]
    p_u: Option<f64>,
    #[arg(long)]
    n_circuits: Option<usize>,
    #[arg(long)]
    master_seed: Option<u64>,
    #[arg(long)]
    engine: Option<String>,
    #[arg(long)]
    gate_family: Option<String>,
    #[arg(long)]
    burn_in_steps: Option<usize>,
    #[arg(long)]
    sample_steps: Option<usize>,
    #[arg(long)]
    workers: Option<usize>,
    #[arg(short, long)]
    quiet: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    PhaseDiagram,
    Extrapolate,
    Collapse,
    Duality,
}

#[derive(Args)]
struct ReportArgs {
    #[arg(long, value_enum)]
    mode: Mode,
    /// Results tables, or one duality-check JSON file in duality mode.
    #[arg(short, long, required = true)]
    input: Vec<PathBuf>,
    #[arg(short, long)]
    output: Option<PathBuf>,
    /// Smallest size used in fits.
    #[arg(long, default_value_t = 64)]
    n_min: usize,
    #[arg(long, default_value = "S_spt")]
    observable: String,
    #[arg(long)]
    alpha: Option<usize>,
    #[arg(long)]
    p_u: Option<f64>,
    #[arg(long)]
    p_c: Option<f64>,
    #[arg(long)]
    eta: Option<f64>,
    #[arg(long, default_value_t = 0.5)]
    nu_min: f64,
    #[arg(long, default_value_t = 3.0)]
    nu_max: f64,
    /// Only use grid points with |p_s - p_c| <= window.
    #[arg(long)]
    window: Option<f64>,
}

#[derive(Args)]
struct DualityArgs {
    #[arg(long, value_delimiter = ',', default_values_t = [1, 2, 3])]
    alphas: Vec<usize>,
    /// Sizes to try; those not divisible by α are skipped.
    #[arg(long, value_delimiter = ',', default_values_t = (8..=16).collect::<Vec<usize>>())]
    sizes: Vec<usize>,
    #[arg(long, default_value_t = 50)]
    seeds: u64,
    #[arg(long, default_value_t = 200)]
    steps: usize,
    #[arg(long, value_delimiter = ',', default_values_t = [0.5, 0.25, 0.75])]
    p_s: Vec<f64>,
    #[arg(long, default_value_t = 2024)]
    master_seed: u64,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct XcheckArgs {
    #[arg(long, default_value_t = 2)]
    alpha: usize,
    #[arg(long, default_value_t = 10)]
    n: usize,
    #[arg(long, default_value_t = 20)]
    seeds: u64,
    #[arg(long, default_value_t = 500)]
    ops: usize,
    #[arg(long, default_value_t = 0.4)]
    p_s: f64,
    #[arg(long, default_value_t = 0.2)]
    p_u: f64,
    #[arg(long, default_value_t = 1)]
    master_seed: u64,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

fn emit<T: Serialize>(value: &T, output: Option<&Path>) -> CliResult<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| CliError::Io(e.to_string()))?;
    text.push('\n');
    match output {
        Some(p) => write_atomic(p, text.as_bytes()),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn sweep(args: SweepArgs) -> CliResult<()> {
    let text = fs::read_to_string(&args.config).map_err(|e| CliError::io(&args.config, e))?;
    let mut overrides: Vec<(&str, Value)> = Vec::new();
    let mut put = |k, v: Option<Value>| {
        if let Some(v) = v {
            overrides.push((k, v));
        }
    };
    put("alpha", args.alpha.map(Value::from));
    put("n_qubits", args.n_qubits.map(Value::from));
    put("p_s", args.p_s.map(Value::from));
    put("p_u", args.p_u.map(Value::from));
    put("n_circuits", args.n_circuits.map(Value::from));
    put("master_seed", args.master_seed.map(Value::from));
    put("engine", args.engine.map(Value::from));
    put("gate_family", args.gate_family.map(Value::from));
    put("burn_in_steps", args.burn_in_steps.map(Value::from));
    put("sample_steps", args.sample_steps.map(Value::from));
    put("workers", args.workers.map(Value::from));
    let cfg = SweepConfig::from_json(&text, &overrides)?;
    let output = args
        .output
        .or_else(|| cfg.output.clone())
        .ok_or_else(|| CliError::Config("output: no output path in the config or on the command line".into()))?;
    let summary = run_sweep(&cfg, &output, args.quiet)?;
    if !args.quiet {
        eprintln!(
            "{} points: {} computed, {} already present in {}",
            summary.points,
            summary.computed,
            summary.skipped,
            output.display()
        );
    }
    Ok(())
}

fn merge(inputs: &[PathBuf], output: &Path) -> CliResult<()> {
    let mut table = Table::new();
    for path in inputs {
        table.merge(&Table::read(path)?)?;
    }
    table.write(output)
}

fn read_tables(inputs: &[PathBuf]) -> CliResult<Table> {
    let mut table = Table::new();
    for path in inputs {
        table.merge(&Table::read(path)?)?;
    }
    Ok(table)
}

fn report(args: ReportArgs) -> CliResult<()> {
    let opts = FitOptions { n_min: args.n_min, ..FitOptions::default() };
    let output = args.output.as_deref();
    match args.mode {
        Mode::Duality => {
            let [path] = args.input.as_slice() else {
                return Err(CliError::Config("duality mode takes exactly one input".into()));
            };
            let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
            let doc: Value =
                serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
            let passed = doc
                .get("passed")
                .and_then(Value::as_bool)
                .ok_or_else(|| CliError::Config(format!("{}: missing boolean `passed`", path.display())))?;
            emit(&doc, output)?;
            if !passed {
                return Err(CliError::Numerical("duality check reported failures".into()));
            }
            Ok(())
        }
        Mode::Extrapolate => emit(&report::extrapolate(&read_tables(&args.input)?, &opts)?, output),
        Mode::PhaseDiagram => emit(&report::phase_diagram(&read_tables(&args.input)?, &opts)?, output),
        Mode::Collapse => {
            let observable: ObservableId = args.observable.parse().map_err(|e| CliError::Config(format!("observable: {e}")))?;
            let req = CollapseRequest {
                observable,
                alpha: args.alpha,
                p_u: args.p_u,
                p_c: args.p_c,
                eta: args.eta,
                nu_range: (args.nu_min, args.nu_max),
                window: args.window,
            };
            emit(&report::collapse(&read_tables(&args.input)?, &req, &opts)?, output)
        }
    }
}

fn duality_check(args: DualityArgs) -> CliResult<()> {
    let config = DualitySuiteConfig {
        alphas: args.alphas,
        sizes: args.sizes,
        seeds: args.seeds,
        steps: args.steps,
        p_s: args.p_s,
        master_seed: args.master_seed,
    };
    let rep = run_duality_suite(&config)?;
    emit(&rep, args.output.as_deref())?;
    if !rep.passed {
        return Err(CliError::Numerical(format!("{} duality realizations failed", rep.failures.len())));
    }
    Ok(())
}

fn oracle_xcheck(args: XcheckArgs) -> CliResult<()> {
    let spec = CircuitSpec::new(args.alpha, args.n, args.p_s, args.p_u).with_seed(args.master_seed);
    let config = XcheckConfig { trajectories: args.seeds, operations: args.ops, ..XcheckConfig::default() };
    let rep = cross_check(&spec, &config)?;
    emit(&rep, args.output.as_deref())?;
    if !rep.passed {
        return Err(CliError::Numerical(format!(
            "engines disagree: max expectation diff {:e}, max entropy diff {:e}",
            rep.max_expectation_diff, rep.max_entropy_diff
        )));
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Sweep(a) => sweep(a),
        Command::Merge { inputs, output } => merge(&inputs, &output),
        Command::Report(a) => report(a),
        Command::DualityCheck(a) => duality_check(a),
        Command::OracleXcheck(a) => oracle_xcheck(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
