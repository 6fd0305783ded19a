//! One function per subcommand. Each returns a JSON report and an exit status.

use std::fs::File;
use std::io::BufWriter;

use nodal_census::barrier::{barrier_margins, estimate_omega_probability, BarrierConfig, MarginReport, OmegaEstimate};
use nodal_census::census::{run_census, slice_experiment, CensusSummary, Observable, SliceReport};
use nodal_census::covariance::{slice_parameter, CovarianceSummary};
use nodal_census::ensemble::EnsembleKind;
use nodal_census::rmt::{expected_minima, i_exact, i_integral, leading_coeff_bound, CoefficientBound, ExtremaPrediction, GoeEstimate, ISource};
use nodal_census::validate::{run_all, Outcome, Scale};
use serde::Serialize;

use crate::config::{Command, RunConfig};
use crate::CliError;

pub const DEFAULT_GOE_SAMPLES: u64 = 100_000;
pub const DEFAULT_TRIALS: u64 = 200;

/// Every report carries where it came from.
#[derive(Debug, Serialize)]
pub struct Envelope<T: Serialize> {
    pub module: &'static str,
    pub operation: &'static str,
    pub seed: u64,
    pub samples: u64,
    pub result: T,
}

pub struct Report {
    pub json: String,
    /// Printed instead of the JSON when present.
    pub table: Option<String>,
    pub exit: i32,
}

fn envelope<T: Serialize>(module: &'static str, operation: &'static str, seed: u64, samples: u64, result: T) -> String {
    serde_json::to_string_pretty(&Envelope { module, operation, seed, samples, result }).expect("report serializes")
}

pub fn run(cfg: &RunConfig) -> Result<Report, CliError> {
    match cfg.command.ok_or_else(|| CliError::Usage("no command given".into()))? {
        Command::Predict => cmd_predict(cfg),
        Command::Simulate => cmd_simulate(cfg),
        Command::Goe => cmd_goe(cfg),
        Command::Barrier => cmd_barrier(cfg),
        Command::Validate => cmd_validate(cfg),
    }
}

#[derive(Debug, Serialize)]
struct PredictEntry {
    d: usize,
    covariance: CovarianceSummary,
    extrema: ExtremaPrediction,
}

#[derive(Debug, Serialize)]
struct PredictResult {
    kind: EnsembleKind,
    n: u32,
    /// Absent for families without a rescaling limit.
    bound: Option<CoefficientBound>,
    entries: Vec<PredictEntry>,
}

pub fn cmd_predict(cfg: &RunConfig) -> Result<Report, CliError> {
    let family = cfg.family()?;
    let n = cfg.sphere_dim()?;
    let seed = cfg.seed();
    let samples = cfg.samples.unwrap_or(DEFAULT_GOE_SAMPLES);
    let degrees = if cfg.d.is_some() || cfg.d_list.is_some() { cfg.degrees()? } else { Vec::new() };
    let bound = if family.is_coherent() {
        let source = if i_exact(n as usize + 1).is_some() {
            ISource::ClosedForm
        } else {
            ISource::MonteCarlo { samples, seed }
        };
        Some(leading_coeff_bound(&family, n, source)?)
    } else {
        None
    };
    if degrees.is_empty() && bound.is_none() {
        return Err(CliError::Usage(format!("{} predictions need a degree", family.kind())));
    }
    let mut entries = Vec::with_capacity(degrees.len());
    for d in degrees {
        let e = family.build(n, d)?;
        entries.push(PredictEntry {
            d,
            covariance: CovarianceSummary::compute(&e)?,
            extrema: expected_minima(&e, samples, seed)?,
        });
    }
    let result = PredictResult { kind: family.kind(), n, bound, entries };
    Ok(Report { json: envelope("covariance+rmt", "predict", seed, samples, result), table: None, exit: 0 })
}

#[derive(Debug, Serialize)]
struct SimulateEntry {
    census: CensusSummary,
    /// 2δ for zero-count observables.
    two_delta: Option<f64>,
    unreliable: bool,
    slice: Option<SliceReport>,
}

#[derive(Debug, Serialize)]
struct CsvRow {
    d: usize,
    trial: u64,
    seed: u64,
    count: u64,
    flagged: bool,
}

pub fn cmd_simulate(cfg: &RunConfig) -> Result<Report, CliError> {
    let family = cfg.family()?;
    let n = cfg.sphere_dim()?;
    let seed = cfg.seed();
    let trials = cfg.trials.unwrap_or(DEFAULT_TRIALS);
    let observable = cfg.observable.unwrap_or(if n == 1 { Observable::CircleZeros } else { Observable::NodalComponents });
    let grid = cfg.grid();
    let mut entries = Vec::new();
    let mut rows = Vec::new();
    for d in cfg.degrees()? {
        let e = family.build(n, d)?;
        let rep = run_census(&e, observable, trials, seed, grid)?;
        rows.extend(rep.records.iter().map(|r| CsvRow { d, trial: r.trial, seed: r.seed, count: r.count, flagged: r.flagged }));
        let zeros = matches!(observable, Observable::CircleZeros | Observable::SliceZeros);
        let slice = if cfg.slice_experiment.unwrap_or(false) {
            Some(slice_experiment(&e, trials, seed, grid)?)
        } else {
            None
        };
        entries.push(SimulateEntry {
            census: rep.summary(),
            two_delta: zeros.then(|| 2.0 * slice_parameter(&e)),
            unreliable: rep.unreliable || slice.as_ref().is_some_and(|s| s.unreliable),
            slice,
        });
    }
    if let Some(path) = &cfg.csv {
        let file = File::create(path).map_err(|e| CliError::Usage(format!("cannot write {}: {e}", path.display())))?;
        let mut w = csv::Writer::from_writer(BufWriter::new(file));
        for row in &rows {
            w.serialize(row).map_err(|e| CliError::Io(std::io::Error::other(e)))?;
        }
        w.flush()?;
    }
    let exit = if entries.iter().any(|e| e.unreliable) { 2 } else { 0 };
    Ok(Report { json: envelope("census", "simulate", seed, trials, entries), table: None, exit })
}

pub fn cmd_goe(cfg: &RunConfig) -> Result<Report, CliError> {
    let n = cfg.goe_n.ok_or_else(|| CliError::Usage("--N is required".into()))?;
    let b = cfg.goe_b.ok_or_else(|| CliError::Usage("--B is required".into()))?;
    let seed = cfg.seed();
    let samples = cfg.samples.unwrap_or(DEFAULT_GOE_SAMPLES);
    let est: GoeEstimate = i_integral(n, b, samples, seed)?;
    Ok(Report { json: envelope("rmt", "i_integral", seed, samples, est), table: None, exit: 0 })
}

#[derive(Debug, Serialize)]
struct BarrierResult {
    estimates: Vec<OmegaEstimate>,
    margins: MarginReport,
}

pub fn cmd_barrier(cfg: &RunConfig) -> Result<Report, CliError> {
    let family = cfg.family()?;
    let n = cfg.sphere_dim()?;
    let seed = cfg.seed();
    let trials = cfg.trials.unwrap_or(1000);
    let mut bc = BarrierConfig::default();
    if let Some(band) = cfg.band {
        bc.band = band;
    }
    if let Some(m) = cfg.boundary_samples {
        bc.boundary_samples = m;
    }
    bc.radius = cfg.radius;
    let degrees = cfg.degrees()?;
    let mut estimates = Vec::with_capacity(degrees.len());
    for &d in &degrees {
        estimates.push(estimate_omega_probability(&family.build(n, d)?, &bc, trials, seed)?);
    }
    let margins = barrier_margins(|d| family.build(n, d), &bc, &degrees)?;
    let result = BarrierResult { estimates, margins };
    Ok(Report { json: envelope("barrier", "estimate_omega_probability", seed, trials, result), table: None, exit: 0 })
}

pub fn cmd_validate(cfg: &RunConfig) -> Result<Report, CliError> {
    let scale = if cfg.quick.unwrap_or(false) { Scale::quick() } else { Scale::full() };
    let seed = cfg.seed();
    let outcomes: Vec<Outcome> = run_all(&scale, seed);
    let failed = outcomes.iter().filter(|o| o.passed == Some(false)).count();
    let mut table: String = outcomes.iter().map(|o| o.line() + "\n").collect();
    table.push_str(&format!("{} passed, {failed} failed, {} skipped\n", outcomes.iter().filter(|o| o.passed == Some(true)).count(), outcomes.iter().filter(|o| o.passed.is_none()).count()));
    let exit = if failed > 0 { 3 } else { 0 };
    Ok(Report { json: envelope("validate", "acceptance", seed, scale.goe_samples, outcomes), table: Some(table), exit })
}
