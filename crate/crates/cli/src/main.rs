//! `superosc` command-line front end.

mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use superosc::experiments::{
    run_amplitude_matching, run_constraints, run_convergence, run_cost_sweep, run_derivative_matching, run_extreme,
    ExperimentError,
};

use config::{ConfigError, Overrides, RawConfig};

const MAX_DIGITS_ENV: &str = "SUPEROSC_MAX_DIGITS";

#[derive(Parser)]
#[command(
    name = "superosc",
    version,
    about = "Minimum-norm superoscillatory wave construction"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct Common {
    /// JSON config (or a previous report, whose embedded config is reused).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, default_value = ".")]
    out: PathBuf,
    /// Starting working precision in decimal digits.
    #[arg(long)]
    digits: Option<u32>,
    /// Relative residual tolerance.
    #[arg(long)]
    tol: Option<f64>,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the constraint problem described by the config.
    Construct(Common),
    /// Run one of the predefined experiments.
    Experiment {
        name: Experiment,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Experiment {
    #[value(skip)]
    Construct,
    AmpMatch,
    DerivMatch,
    CostSweep,
    Extreme,
    Convergence,
}

impl Experiment {
    fn name(self) -> &'static str {
        match self {
            Experiment::Construct => "construct",
            Experiment::AmpMatch => "amp-match",
            Experiment::DerivMatch => "deriv-match",
            Experiment::CostSweep => "cost-sweep",
            Experiment::Extreme => "extreme",
            Experiment::Convergence => "convergence",
        }
    }
}

enum Failure {
    Validation(String),
    Solver { kind: String, message: String },
    Io(anyhow::Error),
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        Failure::Validation(e.to_string())
    }
}

impl From<ExperimentError> for Failure {
    fn from(e: ExperimentError) -> Self {
        if e.is_validation() {
            Failure::Validation(format!("{}: {e}", e.kind()))
        } else {
            Failure::Solver {
                kind: e.kind().to_string(),
                message: e.to_string(),
            }
        }
    }
}

fn max_digits_cap() -> Result<Option<u32>, Failure> {
    match std::env::var(MAX_DIGITS_ENV) {
        Ok(v) => v
            .trim()
            .parse::<u32>()
            .ok()
            .filter(|&d| d > 0)
            .map(Some)
            .ok_or_else(|| Failure::Validation(format!("{MAX_DIGITS_ENV}: expected a positive integer, got {v:?}"))),
        Err(_) => Ok(None),
    }
}

fn run(exp: Experiment, common: &Common) -> Result<(), Failure> {
    let raw = match &common.config {
        Some(p) => config::load(p)?,
        None => RawConfig::default(),
    };
    let ov = Overrides {
        digits: common.digits,
        tol: common.tol,
        max_digits_cap: max_digits_cap()?,
    };
    let rc = raw.resolve(exp, ov)?;
    let cfg = rc.physical();
    let opts = rc.options(true);
    let doc = match exp {
        Experiment::Construct => {
            let cs = rc.constraints()?;
            output::Document::report(exp.name(), &rc, run_constraints(&cfg, &cs, rc.pbar(), &opts)?)
        }
        Experiment::AmpMatch => {
            let n = rc.problem.count.unwrap_or(9);
            let pbar = rc.pbar().expect("validated");
            output::Document::report(exp.name(), &rc, run_amplitude_matching(&cfg, pbar, n, &opts)?)
        }
        Experiment::DerivMatch => {
            let n = rc.problem.count.unwrap_or(23);
            let pbar = rc.pbar().expect("validated");
            output::Document::report(exp.name(), &rc, run_derivative_matching(&cfg, pbar, n, &opts)?)
        }
        Experiment::Extreme => {
            let nodes = rc.constraints()?.nodes;
            output::Document::report(exp.name(), &rc, run_extreme(&cfg, &nodes, &opts)?)
        }
        Experiment::CostSweep => {
            let spacing = rc.problem.spacing.unwrap_or(cfg.lambda_min() / 4.0);
            let range = rc.sweep.n_min..=rc.sweep.n_max;
            let sweep = run_cost_sweep(&cfg, spacing, range, rc.values_mode(), &rc.options(false))?;
            output::Document::sweep(exp.name(), &rc, sweep)
        }
        Experiment::Convergence => {
            let pbar = rc.pbar().expect("validated");
            let sweep = run_convergence(&cfg, pbar, &rc.sweep.n_list, &rc.options(false))?;
            output::Document::sweep(exp.name(), &rc, sweep)
        }
    };
    let written = doc.write(&common.out, &rc.outputs).map_err(Failure::Io)?;
    for path in written {
        println!("{}", path.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (exp, common) = match &cli.command {
        Command::Construct(c) => (Experiment::Construct, c),
        Command::Experiment { name, common } => (*name, common),
    };
    match run(exp, common) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Validation(m)) => {
            eprintln!("error: invalid input: {m}");
            ExitCode::from(2)
        }
        Err(Failure::Solver { kind, message }) => {
            eprintln!("error: solver failure [{kind}]: {message}");
            ExitCode::from(3)
        }
        Err(Failure::Io(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
