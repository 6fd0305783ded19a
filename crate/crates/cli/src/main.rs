//! `nodal-census`: predictions, simulations and acceptance checks for invariant
//! Gaussian polynomial ensembles.
//!
//! Exit codes: 0 success, 1 usage, 2 numeric failure or unreliable census,
//! 3 acceptance failure.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use nodal_census::census::Observable;
use nodal_census::ensemble::EnsembleKind;
use thiserror::Error;

use config::{Command, RunConfig};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] nodal_census::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        use nodal_census::Error as E;
        match self {
            Self::Usage(_) | Self::Io(_) => 1,
            Self::Core(E::Numeric(_) | E::Overflow(_) | E::Degenerate(_)) => 2,
            Self::Core(_) => 1,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "nodal-census", version, about = "Invariant Gaussian polynomial ensembles on spheres")]
struct Cli {
    /// JSON config file; flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Base seed (default 0).
    #[arg(long, global = true, env = "NODAL_CENSUS_SEED")]
    seed: Option<u64>,
    /// Worker thread cap; results do not depend on it.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Also write the JSON report to this file.
    #[arg(long, global = true)]
    json: Option<PathBuf>,
    #[command(subcommand)]
    command: Sub,
}

#[derive(Debug, Args, Default)]
struct EnsembleArgs {
    #[arg(long)]
    kind: Option<EnsembleKind>,
    #[arg(long)]
    n: Option<u32>,
    #[arg(long)]
    d: Option<usize>,
    /// Comma-separated degrees.
    #[arg(long, value_delimiter = ',')]
    d_list: Option<Vec<usize>>,
    /// Rescaling exponent for a prescribed family.
    #[arg(long)]
    lambda: Option<f64>,
}

#[derive(Debug, Subcommand)]
enum Sub {
    /// Closed-form predictions per degree.
    Predict {
        #[command(flatten)]
        ensemble: EnsembleArgs,
        /// GOE samples for the I-integral.
        #[arg(long)]
        samples: Option<u64>,
    },
    /// Monte-Carlo census of zeros, extrema or nodal components.
    Simulate {
        #[command(flatten)]
        ensemble: EnsembleArgs,
        #[arg(long)]
        trials: Option<u64>,
        #[arg(long)]
        observable: Option<Observable>,
        /// Also run the slice experiment (equator zeros against components).
        #[arg(long)]
        slice_experiment: bool,
        #[arg(long)]
        grid_factor: Option<usize>,
        #[arg(long)]
        grid_resolution: Option<usize>,
        /// Per-trial CSV output.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// The GOE integral I(N, B).
    Goe {
        #[arg(long = "N")]
        big_n: Option<usize>,
        #[arg(long = "B")]
        big_b: Option<f64>,
        #[arg(long)]
        samples: Option<u64>,
    },
    /// Barrier margins and the probability of the barrier event.
    Barrier {
        #[command(flatten)]
        ensemble: EnsembleArgs,
        #[arg(long)]
        trials: Option<u64>,
        /// Band multipliers A,B.
        #[arg(long, value_delimiter = ',', num_args = 2)]
        band: Option<Vec<f64>>,
        #[arg(long)]
        radius: Option<f64>,
        #[arg(long)]
        boundary_samples: Option<usize>,
    },
    /// Run the acceptance checks.
    Validate {
        /// Reduced sample counts; skips the grid census.
        #[arg(long)]
        quick: bool,
    },
}

fn ensemble_layer(a: EnsembleArgs, command: Command) -> RunConfig {
    RunConfig { command: Some(command), kind: a.kind, n: a.n, d: a.d, d_list: a.d_list, lambda: a.lambda, ..Default::default() }
}

fn flag_layer(cli: &mut Cli) -> RunConfig {
    let sub = std::mem::replace(&mut cli.command, Sub::Validate { quick: false });
    let mut layer = match sub {
        Sub::Predict { ensemble, samples } => RunConfig { samples, ..ensemble_layer(ensemble, Command::Predict) },
        Sub::Simulate { ensemble, trials, observable, slice_experiment, grid_factor, grid_resolution, csv } => RunConfig {
            trials,
            observable,
            slice_experiment: slice_experiment.then_some(true),
            grid_factor,
            grid_resolution,
            csv,
            ..ensemble_layer(ensemble, Command::Simulate)
        },
        Sub::Goe { big_n, big_b, samples } => {
            RunConfig { command: Some(Command::Goe), goe_n: big_n, goe_b: big_b, samples, ..Default::default() }
        }
        Sub::Barrier { ensemble, trials, band, radius, boundary_samples } => RunConfig {
            trials,
            band: band.map(|b| [b[0], b[1]]),
            radius,
            boundary_samples,
            ..ensemble_layer(ensemble, Command::Barrier)
        },
        Sub::Validate { quick } => {
            RunConfig { command: Some(Command::Validate), quick: quick.then_some(true), ..Default::default() }
        }
    };
    layer.seed = cli.seed;
    layer.threads = cli.threads;
    layer.json = cli.json.take();
    layer
}

fn execute(mut cli: Cli) -> Result<u8, CliError> {
    let base = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    let flags = flag_layer(&mut cli);
    if let (Some(file_cmd), Some(cmd)) = (base.command, flags.command) {
        if file_cmd != cmd {
            return Err(CliError::Usage(format!(
                "config file is for '{}' but '{}' was requested",
                file_cmd.as_str(),
                cmd.as_str()
            )));
        }
    }
    let cfg = base.overlay(flags);
    if let Some(threads) = cfg.threads {
        if threads == 0 {
            return Err(CliError::Usage("--threads must be positive".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| CliError::Usage(format!("cannot size thread pool: {e}")))?;
    }
    let report = commands::run(&cfg)?;
    if let Some(path) = &cfg.json {
        std::fs::write(path, format!("{}\n", report.json))
            .map_err(|e| CliError::Usage(format!("cannot write {}: {e}", path.display())))?;
    }
    match &report.table {
        Some(table) => print!("{table}"),
        None => println!("{}", report.json),
    }
    Ok(report.exit as u8)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match execute(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
