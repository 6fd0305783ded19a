//! Band-limited barrier functions and the Monte-Carlo probability of the
//! event "f(x) > 0 and f < 0 on the boundary circle of D(x, r)".

use rayon::prelude::*;
use serde::Serialize;

use crate::ensemble::EnsembleSpec;
use crate::error::{Error, Result};
use crate::fieldsim::sample_field;
use crate::specfun::{bessel_first_min, check_unit_vector, zonal_harmonic};
use crate::stats::{derive_seed, Welford};

pub const DEFAULT_BAND: [f64; 2] = [0.75, 1.0];
pub const DEFAULT_BOUNDARY_SAMPLES: usize = 256;
const MARGIN_BOUNDARY_SAMPLES: usize = 64;

#[derive(Debug, Clone, PartialEq)]
pub struct BarrierConfig {
    /// [A, B] in units of the ensemble's degree scale (see [`degree_scale`]).
    pub band: [f64; 2],
    /// Unit vector in R^{n+1}; the north pole when absent.
    pub center: Option<Vec<f64>>,
    pub boundary_samples: usize,
    /// Overrides the radius rule.
    pub radius: Option<f64>,
}

impl Default for BarrierConfig {
    fn default() -> Self {
        Self { band: DEFAULT_BAND, center: None, boundary_samples: DEFAULT_BOUNDARY_SAMPLES, radius: None }
    }
}

/// Degree scale S with the band covering degrees [A·S, B·S]: d^λ times the
/// effective top of ψ (d^λ for RFS, 2√2·√d for Kostlan), and d for ensembles
/// without a limit profile.
pub fn degree_scale(e: &EnsembleSpec) -> f64 {
    let d = e.d() as f64;
    match e.psi() {
        Some(psi) if e.is_coherent_kind() => d.powf(e.lambda()) * psi.effective_top(),
        _ => d,
    }
}

/// A barrier B_x centered at `center`, ready for evaluation.
#[derive(Debug, Clone, Serialize)]
pub struct Barrier {
    pub n: u32,
    pub d: usize,
    pub center: Vec<f64>,
    /// Degrees in the band with positive weight.
    pub degrees: Vec<usize>,
    /// p_d(ℓ) per band degree.
    pub weights: Vec<f64>,
    /// p_d(ℓ)/√k per band degree.
    pub coefficients: Vec<f64>,
    /// Band endpoints in degree units.
    pub band_degrees: [f64; 2],
    pub radius: f64,
}

fn north_pole(n: u32) -> Vec<f64> {
    let mut c = vec![0.0; n as usize + 1];
    c[n as usize] = 1.0;
    c
}

/// B_x(y) = Σ_{ℓ in band} p_d(ℓ)·Y_ℓ(⟨x, y⟩)/√k with Y_ℓ the unit-norm zonal harmonic.
///
/// Radius r = 2yₙ/(2·b + n − 1) with b the top of the band in degree units.
pub fn make_barrier(e: &EnsembleSpec, cfg: &BarrierConfig) -> Result<Barrier> {
    let [a, b] = cfg.band;
    if !(a > 0.0 && a < b) {
        return Err(Error::InvalidInput(format!("band [{a}, {b}] must satisfy 0 < A < B")));
    }
    let n = e.n();
    let center = cfg.center.clone().unwrap_or_else(|| north_pole(n));
    check_unit_vector(&center, n as usize + 1)?;
    let scale = degree_scale(e);
    let (lo, hi) = (a * scale, b * scale);
    let degrees: Vec<usize> =
        e.support().map(|(l, _)| l).filter(|&l| (l as f64) >= lo - 1e-9 && (l as f64) <= hi + 1e-9).collect();
    if degrees.is_empty() {
        return Err(Error::InvalidInput(format!(
            "band [{lo:.3}, {hi:.3}] contains no degree with positive weight"
        )));
    }
    let k = degrees.len() as f64;
    let weights: Vec<f64> = degrees.iter().map(|&l| e.weight(l)).collect();
    let coefficients = weights.iter().map(|w| w / k.sqrt()).collect();
    let radius = match cfg.radius {
        Some(r) => r,
        None => 2.0 * bessel_first_min(n) / (2.0 * hi + f64::from(n) - 1.0),
    };
    if !(radius > 0.0 && radius < std::f64::consts::PI) {
        return Err(Error::InvalidInput(format!("radius {radius} outside (0, π)")));
    }
    Ok(Barrier { n, d: e.d(), center, degrees, weights, coefficients, band_degrees: [lo, hi], radius })
}

impl Barrier {
    /// Value as a function of the angle θ from the center.
    pub fn value_at_angle(&self, theta: f64) -> Result<f64> {
        let t = theta.cos();
        let mut acc = 0.0;
        for (&l, &c) in self.degrees.iter().zip(&self.coefficients) {
            acc += c * zonal_harmonic(self.n, l, t)?;
        }
        Ok(acc)
    }

    pub fn eval(&self, point: &[f64]) -> Result<f64> {
        check_unit_vector(point, self.n as usize + 1)?;
        let t: f64 = point.iter().zip(&self.center).map(|(a, b)| a * b).sum();
        self.value_at_angle(t.clamp(-1.0, 1.0).acos())
    }

    /// Norm in ξ-coordinates: level ℓ contributes (coefficient/p_d(ℓ))², each
    /// unit zonal harmonic being a unit vector in its level.
    pub fn xi_norm(&self) -> f64 {
        self.coefficients.iter().zip(&self.weights).map(|(c, w)| (c / w).powi(2)).sum::<f64>().sqrt()
    }

    /// Points on ∂D(center, r): `m` samples on S², the two endpoints on S¹.
    pub fn boundary_points(&self, m: usize) -> Vec<Vec<f64>> {
        let (s, c) = self.radius.sin_cos();
        let x = &self.center;
        if self.n == 1 {
            return vec![vec![c * x[0] - s * x[1], s * x[0] + c * x[1]], vec![c * x[0] + s * x[1], -s * x[0] + c * x[1]]];
        }
        let (e1, e2) = tangent_frame([x[0], x[1], x[2]]);
        (0..m)
            .map(|i| {
                let t = std::f64::consts::TAU * i as f64 / m as f64;
                let (st, ct) = t.sin_cos();
                (0..3).map(|k| c * x[k] + s * (ct * e1[k] + st * e2[k])).collect()
            })
            .collect()
    }
}

/// Orthonormal pair spanning the tangent plane at a unit vector.
fn tangent_frame(x: [f64; 3]) -> ([f64; 3], [f64; 3]) {
    let helper = if x[0].abs() < 0.9 { [1.0, 0.0, 0.0] } else { [0.0, 1.0, 0.0] };
    let dot = helper[0] * x[0] + helper[1] * x[1] + helper[2] * x[2];
    let mut e1 = [helper[0] - dot * x[0], helper[1] - dot * x[1], helper[2] - dot * x[2]];
    let norm = (e1[0] * e1[0] + e1[1] * e1[1] + e1[2] * e1[2]).sqrt();
    e1 = e1.map(|v| v / norm);
    let e2 = [x[1] * e1[2] - x[2] * e1[1], x[2] * e1[0] - x[0] * e1[2], x[0] * e1[1] - x[1] * e1[0]];
    (e1, e2)
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct MarginEntry {
    pub d: usize,
    pub radius: f64,
    /// B_x(x)·d^{−λ(n−2)/2}
    pub m_plus: f64,
    /// max over ∂D(x, r) of B_x, same scaling
    pub m_minus: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct MarginReport {
    pub entries: Vec<MarginEntry>,
    /// Largest c with m₊ ≥ c and m₋ ≤ −c at every d, if positive.
    pub common_margin: Option<f64>,
}

/// Barrier margins for the family built by `build` at each degree of `d_list`.
pub fn barrier_margins<F>(build: F, cfg: &BarrierConfig, d_list: &[usize]) -> Result<MarginReport>
where
    F: Fn(usize) -> Result<EnsembleSpec>,
{
    let mut entries = Vec::with_capacity(d_list.len());
    for &d in d_list {
        let e = build(d)?;
        let bar = make_barrier(&e, cfg)?;
        let scale = (d as f64).powf(-e.lambda() * (f64::from(e.n()) - 2.0) / 2.0);
        let m_plus = bar.value_at_angle(0.0)? * scale;
        let mut m_minus = f64::NEG_INFINITY;
        for p in bar.boundary_points(MARGIN_BOUNDARY_SAMPLES) {
            m_minus = m_minus.max(bar.eval(&p)? * scale);
        }
        entries.push(MarginEntry { d, radius: bar.radius, m_plus, m_minus });
    }
    let c = entries.iter().map(|m| m.m_plus.min(-m.m_minus)).fold(f64::INFINITY, f64::min);
    Ok(MarginReport { entries, common_margin: (c > 0.0 && c.is_finite()).then_some(c) })
}

#[derive(Debug, Clone, Serialize)]
pub struct OmegaEstimate {
    pub d: usize,
    pub r: f64,
    /// Band endpoints in degree units.
    pub band: [f64; 2],
    pub p_omega: f64,
    pub stderr: f64,
    pub trials: u64,
    pub boundary_samples: usize,
}

/// Fraction of draws with f(x) > 0 and f < 0 at every sampled boundary point.
///
/// The boundary is sampled at max(cfg.boundary_samples, 4d) points whenever
/// the configured count is below 2d.
pub fn estimate_omega_probability(e: &EnsembleSpec, cfg: &BarrierConfig, trials: u64, seed: u64) -> Result<OmegaEstimate> {
    if trials == 0 {
        return Err(Error::InvalidInput("at least one trial is required".into()));
    }
    let bar = make_barrier(e, cfg)?;
    let m = if cfg.boundary_samples < 2 * e.d() { cfg.boundary_samples.max(4 * e.d()) } else { cfg.boundary_samples };
    let boundary = bar.boundary_points(m);
    let hits = (0..trials)
        .into_par_iter()
        .map(|t| {
            let fs = sample_field(e, derive_seed(seed, t))?;
            let ev = fs.evaluator();
            if ev.eval(&bar.center)? <= 0.0 {
                return Ok(0.0);
            }
            for p in &boundary {
                if ev.eval(p)? >= 0.0 {
                    return Ok(0.0);
                }
            }
            Ok(1.0)
        })
        .collect::<Result<Vec<f64>>>()?;
    let w: Welford = hits.into_iter().collect();
    Ok(OmegaEstimate {
        d: e.d(),
        r: bar.radius,
        band: bar.band_degrees,
        p_omega: w.mean,
        stderr: w.stderr().unwrap_or(0.0),
        trials,
        boundary_samples: boundary.len(),
    })
}
