//! `ibstokes`: command-line driver for the interface simulations.
//!
//! Exit status: 0 on a clean finish, 2 when a run detects an instability,
//! 3 when a linear solver fails, 64 on invalid usage or configuration and 1
//! on I/O errors.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use ibstokes::integrators::Scheme;
use ibstokes::sim::{
    self, convergence, cost_scaling, preset, presets, stability_sweep, write_convergence, write_cost, write_sweep,
    CostBudget, PresetKind, RunConfig, RunOutcome, SweepColumn, OUTPUT_DIR_ENV,
};
use ibstokes::Error;

const EXIT_INSTABILITY: u8 = 2;
const EXIT_SOLVER: u8 = 3;
const EXIT_USAGE: u8 = 64;
const EXIT_IO: u8 = 1;

#[derive(Parser)]
#[command(name = "ibstokes", version, about = "Elastic interface in 2D periodic Stokes flow")]
#[command(after_help = "The output directory of every command can be overridden with IBSTOKES_OUTPUT_DIR.")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct ConfigArgs {
    /// Configuration file (flat `key = value` lines).
    #[arg(short, long)]
    config: Option<PathBuf>,
    /// Override a configuration key; repeatable.
    #[arg(short = 's', long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

impl ConfigArgs {
    fn load(&self) -> Result<RunConfig, Error> {
        let base = match &self.config {
            Some(path) => RunConfig::parse(&std::fs::read_to_string(path)?)?,
            None => RunConfig::default(),
        };
        let config = base.with_overrides(&self.overrides)?;
        config.validate()?;
        Ok(config)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Run one simulation, writing a diagnostics CSV and snapshots.
    Run(ConfigArgs),
    /// Temporal convergence study over a halving chain of step sizes.
    Convergence {
        #[command(flatten)]
        config: ConfigArgs,
        /// Step sizes, largest first, each half the previous.
        #[arg(long, value_delimiter = ',', required = true)]
        dts: Vec<f64>,
    },
    /// Stable/unstable verdicts over step sizes, grid sizes and viscosities.
    Sweep {
        #[command(flatten)]
        config: ConfigArgs,
        #[arg(long, value_delimiter = ',')]
        dts: Vec<f64>,
        /// Grid sizes; the configured N when omitted.
        #[arg(long = "n", value_delimiter = ',')]
        ns: Vec<usize>,
        /// Viscosities; the configured mu when omitted.
        #[arg(long = "mu", value_delimiter = ',')]
        mus: Vec<f64>,
    },
    /// Per-step wall time and operation counts against grid size.
    Cost {
        #[command(flatten)]
        config: ConfigArgs,
        #[arg(long, value_delimiter = ',', required = true)]
        schemes: Vec<Scheme>,
        /// Ascending grid sizes.
        #[arg(long = "n", value_delimiter = ',', required = true)]
        ns: Vec<usize>,
        /// Minimum timed wall time per sample, in seconds.
        #[arg(long, default_value_t = CostBudget::default().min_seconds)]
        min_seconds: f64,
    },
    /// List or run the named experiment presets.
    Presets {
        #[command(subcommand)]
        action: PresetAction,
    },
}

#[derive(Subcommand)]
enum PresetAction {
    List,
    /// Run a preset; overrides apply to each of its runs.
    Run {
        name: String,
        #[arg(short = 's', long = "set", value_name = "KEY=VALUE")]
        overrides: Vec<String>,
    },
}

fn exit_for(err: &Error) -> u8 {
    match err {
        e if e.is_instability() => EXIT_INSTABILITY,
        e if e.is_solver_failure() => EXIT_SOLVER,
        Error::Io(_) | Error::Json(_) => EXIT_IO,
        _ => EXIT_USAGE,
    }
}

fn outcome_line(name: &str, outcome: &RunOutcome) -> String {
    match outcome {
        RunOutcome::Completed => format!("{name}: completed"),
        RunOutcome::Unstable { step, reason } => format!("{name}: unstable at step {step} ({reason})"),
        RunOutcome::SolverFailure { step, reason } => format!("{name}: solver failure at step {step} ({reason})"),
    }
}

fn cmd_run(config: &RunConfig) -> Result<u8, Error> {
    let report = sim::run(config)?;
    println!("{}", outcome_line(&config.name, &report.outcome));
    if let Some(last) = report.records.last() {
        println!("  t = {:.6}, E = {:.6e}, area = {:.6e}", last.t, last.total, last.area);
    }
    if let Some(csv) = &report.csv_path {
        println!("  diagnostics: {}", csv.display());
    }
    Ok(report.outcome.exit_code() as u8)
}

fn fmt_rate(r: Option<f64>) -> String {
    r.map(|r| format!("{r:.3}")).unwrap_or_else(|| "n/a".into())
}

fn cmd_convergence(config: &RunConfig, dts: &[f64]) -> Result<u8, Error> {
    let report = convergence(config, dts)?;
    let (csv, _) = write_convergence(&report, &config.resolved_output_dir(), &config.name)?;
    println!("{}: X-rate {}, u-rate {}", config.name, fmt_rate(report.x_rate), fmt_rate(report.u_rate));
    println!("  table: {}", csv.display());
    match &report.aborted {
        Some(reason) => {
            eprintln!("study aborted: {reason}");
            Ok(EXIT_INSTABILITY)
        }
        None => Ok(0),
    }
}

fn cmd_sweep(config: &RunConfig, dts: &[f64], ns: &[usize], mus: &[f64]) -> Result<u8, Error> {
    let ns = if ns.is_empty() { vec![config.n] } else { ns.to_vec() };
    let mus = if mus.is_empty() { vec![config.mu] } else { mus.to_vec() };
    let columns: Vec<SweepColumn> = ns.iter().flat_map(|&n| mus.iter().map(move |&mu| SweepColumn { n, mu })).collect();
    let report = stability_sweep(config, dts, &columns)?;
    let path = write_sweep(&report, &config.resolved_output_dir(), &config.name)?;
    for (col, largest) in report.columns.iter().zip(&report.largest_stable) {
        let d = largest.map(|d| format!("{d}")).unwrap_or_else(|| "none".into());
        println!("{} {}: largest stable dt {d}", report.scheme, col.label());
    }
    println!("  matrix: {}", path.display());
    Ok(0)
}

fn cmd_cost(config: &RunConfig, schemes: &[Scheme], ns: &[usize], min_seconds: f64) -> Result<u8, Error> {
    let budget = CostBudget { min_seconds, ..CostBudget::default() };
    let report = cost_scaling(config, schemes, ns, budget)?;
    let path = write_cost(&report, &config.resolved_output_dir(), &config.name)?;
    for s in &report.samples {
        println!(
            "{:<32} N={:<5} {:.3e} s/step  {:.1} fluid solves/step",
            s.scheme.name(),
            s.n,
            s.seconds_per_step,
            s.fluid_solves_per_step
        );
    }
    for (scheme, e) in &report.exponents {
        println!("{scheme}: time exponent {}", fmt_rate(*e));
    }
    println!("  report: {}", path.display());
    Ok(0)
}

fn cmd_presets_list() {
    for p in presets() {
        println!("{:<18} {}", p.name, p.description);
    }
}

/// Runs every member of a preset. Instabilities are results here, so only
/// solver failures change the exit status.
fn cmd_presets_run(name: &str, overrides: &[String]) -> Result<u8, Error> {
    let p = preset(name)
        .ok_or_else(|| Error::Config { field: "preset".into(), reason: format!("unknown preset `{name}`") })?;
    let mut status = 0;
    match p.kind {
        PresetKind::Runs(configs) => {
            for c in configs {
                let c = c.with_overrides(overrides)?;
                let report = sim::run(&c)?;
                println!("{}", outcome_line(&c.name, &report.outcome));
                if matches!(report.outcome, RunOutcome::SolverFailure { .. }) {
                    status = EXIT_SOLVER;
                }
            }
        }
        PresetKind::Convergence(studies) => {
            for (c, dts) in studies {
                let c = c.with_overrides(overrides)?;
                status = status.max(cmd_convergence(&c, &dts)?);
            }
        }
    }
    Ok(status)
}

fn dispatch(command: Command) -> Result<u8, Error> {
    match command {
        Command::Run(args) => cmd_run(&args.load()?),
        Command::Convergence { config, dts } => cmd_convergence(&config.load()?, &dts),
        Command::Sweep { config, dts, ns, mus } => cmd_sweep(&config.load()?, &dts, &ns, &mus),
        Command::Cost { config, schemes, ns, min_seconds } => cmd_cost(&config.load()?, &schemes, &ns, min_seconds),
        Command::Presets { action: PresetAction::List } => {
            cmd_presets_list();
            Ok(0)
        }
        Command::Presets { action: PresetAction::Run { name, overrides } } => cmd_presets_run(&name, &overrides),
    }
}

fn describe_output_dir() -> Option<String> {
    std::env::var_os(OUTPUT_DIR_ENV).map(|d| Path::new(&d).display().to_string())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if let Some(dir) = describe_output_dir() {
        log::info!("output directory overridden by {OUTPUT_DIR_ENV}: {dir}");
    }
    match dispatch(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_for(&e))
        }
    }
}
