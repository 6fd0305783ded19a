//! Empirical counts on sampled fields: zeros on circles, nodal components and
//! local extrema on S², and their Monte-Carlo aggregation.

use std::f64::consts::TAU;
use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::covariance::{covariance_fn, slice_parameter};
use crate::ensemble::{EnsembleKind, EnsembleSpec};
use crate::error::{Error, Result};
use crate::fieldsim::{sample_field, FieldSample};
use crate::grid::SphereGrid;
use crate::stats::{derive_seed, Welford};

/// Default grid resolution per unit degree (R = 12d).
pub const DEFAULT_RESOLUTION_FACTOR: usize = 12;
/// A census whose flagged fraction exceeds this is marked unreliable.
pub const UNRELIABLE_FLAG_FRACTION: f64 = 0.05;
const MAX_REFINEMENTS: usize = 3;

/// Union–find with path halving and union by size.
#[derive(Debug, Clone)]
pub struct UnionFind {
    parent: Vec<u32>,
    size: Vec<u32>,
    sets: usize,
}

impl UnionFind {
    pub fn new(n: usize) -> Self {
        Self { parent: (0..n as u32).collect(), size: vec![1; n], sets: n }
    }

    pub fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] as usize != x {
            let p = self.parent[x] as usize;
            self.parent[x] = self.parent[p];
            x = self.parent[x] as usize;
        }
        x
    }

    pub fn union(&mut self, a: usize, b: usize) -> bool {
        let (mut ra, mut rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        if self.size[ra] < self.size[rb] {
            std::mem::swap(&mut ra, &mut rb);
        }
        self.parent[rb] = ra as u32;
        self.size[ra] += self.size[rb];
        self.sets -= 1;
        true
    }

    pub fn sets(&self) -> usize {
        self.sets
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CircleZeros {
    pub count: usize,
    /// Zero locations, bisected to |Δθ| < 1e−12.
    pub roots: Vec<f64>,
    pub flagged: bool,
}

fn sign_changes(values: &[f64]) -> Vec<usize> {
    let m = values.len();
    (0..m).filter(|&i| (values[i] >= 0.0) != (values[(i + 1) % m] >= 0.0)).collect()
}

/// Zeros of a degree-d trigonometric polynomial on [0, 2π).
///
/// Sign changes are counted on 16d uniform samples and recounted on a grid
/// four times finer; disagreement triggers further refinement, and a trial
/// still disagreeing after three refinements is flagged.
pub fn count_circle_zeros<F: FnMut(f64) -> f64>(mut g: F, d: usize) -> CircleZeros {
    let sample = |g: &mut F, m: usize| -> Vec<f64> { (0..m).map(|i| g(TAU * i as f64 / m as f64)).collect() };
    let mut m = 16 * d.max(1);
    let mut values = sample(&mut g, m);
    let mut changes = sign_changes(&values);
    let mut flagged = true;
    for _ in 0..MAX_REFINEMENTS {
        let finer = sample(&mut g, 4 * m);
        let finer_changes = sign_changes(&finer);
        let agree = finer_changes.len() == changes.len();
        m *= 4;
        values = finer;
        changes = finer_changes;
        if agree {
            flagged = false;
            break;
        }
    }
    let h = TAU / m as f64;
    let roots = changes
        .iter()
        .map(|&i| {
            let (mut lo, mut hi) = (i as f64 * h, (i + 1) as f64 * h);
            let lo_pos = values[i] >= 0.0;
            while hi - lo > 1e-12 {
                let mid = 0.5 * (lo + hi);
                if (g(mid) >= 0.0) == lo_pos {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            0.5 * (lo + hi)
        })
        .collect();
    CircleZeros { count: changes.len(), roots, flagged }
}

/// Strict local extrema of a sampled periodic function, with the same refinement rule.
pub fn count_circle_extrema<F: FnMut(f64) -> f64>(mut g: F, d: usize) -> (usize, bool) {
    let count = |g: &mut F, m: usize| -> (usize, bool) {
        let v: Vec<f64> = (0..m).map(|i| g(TAU * i as f64 / m as f64)).collect();
        let mut c = 0;
        let mut tie = false;
        for i in 0..m {
            let (a, b, x) = (v[(i + m - 1) % m], v[(i + 1) % m], v[i]);
            if (x > a && x > b) || (x < a && x < b) {
                c += 1;
            } else if x == a || x == b {
                tie = true;
            }
        }
        (c, tie)
    };
    let mut m = 16 * d.max(1);
    let (mut c, _) = count(&mut g, m);
    for _ in 0..MAX_REFINEMENTS {
        m *= 4;
        let (fine, tie) = count(&mut g, m);
        if fine == c {
            return (fine, tie);
        }
        c = fine;
    }
    (c, true)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ComponentCount {
    /// Sign regions of the grid labeling.
    pub regions: usize,
    /// Nodal components on S² (= regions − 1).
    pub components: usize,
    pub flagged: bool,
}

/// Sign labels with values below `zero_tol` in magnitude treated as positive.
fn signs(values: &[f64], zero_tol: f64) -> (Vec<bool>, bool) {
    let mut flagged = false;
    let s = values
        .iter()
        .map(|&v| {
            if v.abs() < zero_tol {
                flagged = true;
            }
            v >= 0.0 || v.abs() < zero_tol
        })
        .collect();
    (s, flagged)
}

fn region_labels(grid: &SphereGrid, positive: &[bool]) -> UnionFind {
    let mut uf = UnionFind::new(grid.len());
    for i in 0..grid.len() {
        for &j in grid.neighbors(i) {
            let j = j as usize;
            if j > i && positive[i] == positive[j] {
                uf.union(i, j);
            }
        }
    }
    uf
}

/// Nodal components from grid values: same-sign neighbors are merged and the
/// count of sign regions minus one is returned.
pub fn components_from_values(grid: &SphereGrid, values: &[f64], zero_tol: f64) -> ComponentCount {
    let (positive, flagged) = signs(values, zero_tol);
    let uf = region_labels(grid, &positive);
    let regions = uf.sets();
    ComponentCount { regions, components: regions.saturating_sub(1), flagged }
}

pub fn count_nodal_components(fs: &FieldSample, grid: &SphereGrid) -> Result<ComponentCount> {
    let values = fs.eval_grid(grid.nodes())?;
    Ok(components_from_values(grid, &values, zero_tolerance(fs.ensemble())?))
}

fn zero_tolerance(e: &EnsembleSpec) -> Result<f64> {
    Ok(1e-13 * covariance_fn(e, 1.0)?.sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ExtremaCount {
    pub minima: usize,
    pub maxima: usize,
    /// A node tied with a neighbor would otherwise have been an extremum.
    pub flagged: bool,
}

pub fn extrema_from_values(grid: &SphereGrid, values: &[f64]) -> ExtremaCount {
    let (mut minima, mut maxima, mut flagged) = (0, 0, false);
    for (i, &v) in values.iter().enumerate() {
        let (mut above, mut below, mut tie) = (true, true, false);
        for &j in grid.neighbors(i) {
            let w = values[j as usize];
            if w >= v {
                above = false;
            }
            if w <= v {
                below = false;
            }
            if w == v {
                tie = true;
            }
        }
        if above {
            maxima += 1;
        }
        if below {
            minima += 1;
        }
        if tie && !above && !below {
            let ge = grid.neighbors(i).iter().all(|&j| values[j as usize] <= v);
            let le = grid.neighbors(i).iter().all(|&j| values[j as usize] >= v);
            flagged |= ge || le;
        }
    }
    ExtremaCount { minima, maxima, flagged }
}

pub fn count_local_extrema(fs: &FieldSample, grid: &SphereGrid) -> Result<ExtremaCount> {
    let values = fs.eval_grid(grid.nodes())?;
    Ok(extrema_from_values(grid, &values))
}

/// Nodal components and local extrema of one field draw on one grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct JointCount {
    pub components: usize,
    pub minima: usize,
    pub maxima: usize,
    pub flagged: bool,
}

pub fn joint_from_values(grid: &SphereGrid, values: &[f64], zero_tol: f64) -> JointCount {
    let c = components_from_values(grid, values, zero_tol);
    let x = extrema_from_values(grid, values);
    JointCount { components: c.components, minima: x.minima, maxima: x.maxima, flagged: c.flagged || x.flagged }
}

/// b₀ of the projective curve from b₀ of its double cover: (b₀(X̄) + [d odd])/2.
pub fn projective_components(cover_components: usize, d: usize) -> usize {
    (cover_components + d % 2) / 2
}

/// Components of the projective curve by labeling the antipodal quotient directly.
///
/// Each nodal circle separates two adjacent sign regions; the antipodal map
/// permutes these adjacencies, and the projective count is the number of orbits.
pub fn projective_components_by_quotient(grid: &SphereGrid, values: &[f64], zero_tol: f64) -> usize {
    let (positive, _) = signs(values, zero_tol);
    let mut uf = region_labels(grid, &positive);
    let mut edges = std::collections::BTreeSet::new();
    for i in 0..grid.len() {
        for &j in grid.neighbors(i) {
            let (a, b) = (uf.find(i), uf.find(j as usize));
            if a != b {
                edges.insert((a.min(b), a.max(b)));
            }
        }
    }
    let mut image = std::collections::HashMap::new();
    for i in 0..grid.len() {
        let r = uf.find(i);
        image.entry(r).or_insert_with(|| grid.antipode(i));
    }
    let mut fixed = 0;
    for &(a, b) in &edges {
        let ia = uf.find(image[&a]);
        let ib = uf.find(image[&b]);
        if (ia.min(ib), ia.max(ib)) == (a, b) {
            fixed += 1;
        }
    }
    (edges.len() + fixed) / 2
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Observable {
    CircleZeros,
    NodalComponents,
    Extrema,
    SliceZeros,
}

impl Observable {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::CircleZeros => "circle_zeros",
            Self::NodalComponents => "nodal_components",
            Self::Extrema => "extrema",
            Self::SliceZeros => "slice_zeros",
        }
    }
}

impl std::str::FromStr for Observable {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "circle_zeros" => Ok(Self::CircleZeros),
            "nodal_components" => Ok(Self::NodalComponents),
            "extrema" => Ok(Self::Extrema),
            "slice_zeros" => Ok(Self::SliceZeros),
            other => Err(Error::InvalidInput(format!("unknown observable '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GridParams {
    /// R = factor·d unless `resolution` is set.
    pub factor: usize,
    pub resolution: Option<usize>,
}

impl Default for GridParams {
    fn default() -> Self {
        Self { factor: DEFAULT_RESOLUTION_FACTOR, resolution: None }
    }
}

impl GridParams {
    pub fn resolution_for(&self, d: usize) -> usize {
        self.resolution.unwrap_or(self.factor * d).max(1)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct TrialRecord {
    pub trial: u64,
    pub seed: u64,
    pub count: u64,
    pub flagged: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct CensusReport {
    pub observable: Observable,
    pub ensemble: EnsembleKind,
    pub n: u32,
    pub d: usize,
    pub seed: u64,
    pub records: Vec<TrialRecord>,
    /// Over unflagged trials.
    pub mean: f64,
    /// Absent with fewer than two unflagged trials.
    pub stderr: Option<f64>,
    pub flagged_fraction: f64,
    pub unreliable: bool,
}

/// JSON summary form of a census.
#[derive(Debug, Clone, Serialize)]
pub struct CensusSummary {
    pub observable: Observable,
    pub ensemble: EnsembleKind,
    pub d: usize,
    pub trials: usize,
    pub mean: f64,
    pub stderr: Option<f64>,
    pub flagged_fraction: f64,
}

impl CensusReport {
    fn from_records(observable: Observable, e: &EnsembleSpec, seed: u64, records: Vec<TrialRecord>) -> Self {
        let stats: Welford = records.iter().filter(|r| !r.flagged).map(|r| r.count as f64).collect();
        let flagged = records.iter().filter(|r| r.flagged).count();
        let flagged_fraction = if records.is_empty() { 0.0 } else { flagged as f64 / records.len() as f64 };
        Self {
            observable,
            ensemble: e.kind(),
            n: e.n(),
            d: e.d(),
            seed,
            mean: stats.mean,
            stderr: stats.stderr(),
            flagged_fraction,
            unreliable: flagged_fraction > UNRELIABLE_FLAG_FRACTION,
            records,
        }
    }

    pub fn trials(&self) -> usize {
        self.records.len()
    }

    pub fn summary(&self) -> CensusSummary {
        CensusSummary {
            observable: self.observable,
            ensemble: self.ensemble,
            d: self.d,
            trials: self.records.len(),
            mean: self.mean,
            stderr: self.stderr,
            flagged_fraction: self.flagged_fraction,
        }
    }

    /// One row per trial: trial, seed, count, flagged.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        for r in &self.records {
            out.serialize(r).map_err(|e| Error::Io(std::io::Error::other(e)))?;
        }
        out.flush()?;
        Ok(())
    }
}

const EQUATOR: ([f64; 3], [f64; 3]) = ([1.0, 0.0, 0.0], [0.0, 1.0, 0.0]);

/// Count for one trial of `observable`, with its flag.
fn trial_count(fs: &FieldSample, observable: Observable, grid: Option<&SphereGrid>, zero_tol: f64) -> Result<(u64, bool)> {
    let e = fs.ensemble();
    let d = e.d();
    match (observable, e.n()) {
        (Observable::CircleZeros | Observable::SliceZeros, 1) => {
            let ev = fs.evaluator();
            let z = count_circle_zeros(|t| ev.eval_angle(t), d);
            Ok((z.count as u64, z.flagged))
        }
        (Observable::CircleZeros | Observable::SliceZeros, 2) => {
            let c = fs.restrict_to_circle(EQUATOR.0, EQUATOR.1)?;
            let z = count_circle_zeros(|t| c.value(t), d);
            Ok((z.count as u64, z.flagged))
        }
        (Observable::Extrema, 1) => {
            let ev = fs.evaluator();
            let (c, flagged) = count_circle_extrema(|t| ev.eval_angle(t), d);
            Ok((c as u64, flagged))
        }
        (Observable::NodalComponents | Observable::Extrema, 2) => {
            let grid = grid.expect("grid built for n = 2");
            let values = fs.eval_grid_seq(grid.nodes())?;
            if observable == Observable::Extrema {
                let x = extrema_from_values(grid, &values);
                Ok(((x.minima + x.maxima) as u64, x.flagged))
            } else {
                let c = components_from_values(grid, &values, zero_tol);
                Ok((c.components as u64, c.flagged))
            }
        }
        (Observable::NodalComponents, _) => {
            Err(Error::Capability("nodal components are counted on S^2 only".into()))
        }
        _ => Err(Error::Capability(format!("field sampling unavailable for n = {}", e.n()))),
    }
}

/// Monte-Carlo census; trial i uses the field seed `derive_seed(seed, i)`.
pub fn run_census(
    e: &EnsembleSpec,
    observable: Observable,
    trials: u64,
    seed: u64,
    params: GridParams,
) -> Result<CensusReport> {
    if trials == 0 {
        return Err(Error::InvalidInput("at least one trial is required".into()));
    }
    let needs_grid = e.n() == 2 && matches!(observable, Observable::NodalComponents | Observable::Extrema);
    let grid = needs_grid.then(|| SphereGrid::new(params.resolution_for(e.d()))).transpose()?;
    let zero_tol = zero_tolerance(e)?;
    let records = (0..trials)
        .into_par_iter()
        .map(|t| {
            let s = derive_seed(seed, t);
            let fs = sample_field(e, s)?;
            let (count, flagged) = trial_count(&fs, observable, grid.as_ref(), zero_tol)?;
            Ok(TrialRecord { trial: t, seed: s, count, flagged })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(CensusReport::from_records(observable, e, seed, records))
}

/// Components and extrema of each trial on a shared grid.
pub fn joint_census(e: &EnsembleSpec, trials: u64, seed: u64, params: GridParams) -> Result<Vec<JointCount>> {
    if e.n() != 2 {
        return Err(Error::Capability("joint census requires S^2".into()));
    }
    let grid = SphereGrid::new(params.resolution_for(e.d()))?;
    let zero_tol = zero_tolerance(e)?;
    (0..trials)
        .into_par_iter()
        .map(|t| {
            let fs = sample_field(e, derive_seed(seed, t))?;
            let values = fs.eval_grid_seq(grid.nodes())?;
            Ok(joint_from_values(&grid, &values, zero_tol))
        })
        .collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct SliceReport {
    pub d: usize,
    pub trials: usize,
    pub delta: f64,
    pub two_delta: f64,
    pub slice_mean: f64,
    pub slice_stderr: Option<f64>,
    /// b₀ of the double cover on S².
    pub components_mean: f64,
    pub components_stderr: Option<f64>,
    /// components_mean / δ²
    pub ratio: f64,
    pub flagged_fraction: f64,
    pub unreliable: bool,
}

/// Equator zeros and nodal components of the same draws.
pub fn slice_experiment(e: &EnsembleSpec, trials: u64, seed: u64, params: GridParams) -> Result<SliceReport> {
    if e.n() != 2 {
        return Err(Error::Capability("slice experiment requires S^2".into()));
    }
    if !e.is_coherent_kind() {
        return Err(Error::Capability(format!("{} ensemble has no rescaling limit", e.kind())));
    }
    if trials == 0 {
        return Err(Error::InvalidInput("at least one trial is required".into()));
    }
    let grid = SphereGrid::new(params.resolution_for(e.d()))?;
    let zero_tol = zero_tolerance(e)?;
    let rows = (0..trials)
        .into_par_iter()
        .map(|t| {
            let fs = sample_field(e, derive_seed(seed, t))?;
            let (z, zf) = trial_count(&fs, Observable::SliceZeros, None, zero_tol)?;
            let (c, cf) = trial_count(&fs, Observable::NodalComponents, Some(&grid), zero_tol)?;
            Ok((z, c, zf || cf))
        })
        .collect::<Result<Vec<_>>>()?;
    let ok: Vec<_> = rows.iter().filter(|r| !r.2).collect();
    let zs: Welford = ok.iter().map(|r| r.0 as f64).collect();
    let cs: Welford = ok.iter().map(|r| r.1 as f64).collect();
    let delta = slice_parameter(e);
    let flagged_fraction = (rows.len() - ok.len()) as f64 / rows.len() as f64;
    Ok(SliceReport {
        d: e.d(),
        trials: rows.len(),
        delta,
        two_delta: 2.0 * delta,
        slice_mean: zs.mean,
        slice_stderr: zs.stderr(),
        components_mean: cs.mean,
        components_stderr: cs.stderr(),
        ratio: cs.mean / (delta * delta),
        flagged_fraction,
        unreliable: flagged_fraction > UNRELIABLE_FLAG_FRACTION,
    })
}
