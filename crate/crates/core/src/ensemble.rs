//! Weight families p_d(ℓ) for invariant ensembles, their rescaled profiles
//! and the coherence diagnostics.
//!
//! A random invariant polynomial of degree `d` on Sⁿ is
//! f = Σ_ℓ p_d(ℓ) Σ_j ξ_ℓ^j Y_ℓ^j over degrees ℓ ≡ d (mod 2). Every
//! constructor here returns weights normalized to unit sum.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::quad;
use crate::stats::compensated_sum;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EnsembleKind {
    Kostlan,
    Rfs,
    Harmonic,
    Prescribed,
}

impl EnsembleKind {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Kostlan => "kostlan",
            Self::Rfs => "rfs",
            Self::Harmonic => "harmonic",
            Self::Prescribed => "prescribed",
        }
    }
}

impl fmt::Display for EnsembleKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for EnsembleKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "kostlan" => Ok(Self::Kostlan),
            "rfs" => Ok(Self::Rfs),
            "harmonic" => Ok(Self::Harmonic),
            "prescribed" => Ok(Self::Prescribed),
            other => Err(Error::InvalidInput(format!("unknown ensemble kind '{other}'"))),
        }
    }
}

/// A black-box profile with its declared subgaussian bound |ψ(x)| ≤ c1·exp(−c2·x²).
#[derive(Clone)]
pub struct CustomPsi {
    pub name: String,
    pub func: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    pub c1: f64,
    pub c2: f64,
    pub breakpoints: Vec<f64>,
}

impl fmt::Debug for CustomPsi {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CustomPsi")
            .field("name", &self.name)
            .field("c1", &self.c1)
            .field("c2", &self.c2)
            .finish_non_exhaustive()
    }
}

/// Limit profile ψ on [0, ∞).
#[derive(Debug, Clone)]
pub enum Psi {
    /// χ_[lo, hi]
    Indicator { lo: f64, hi: f64 },
    /// amplitude · exp(−x²/(2σ²))
    Gaussian { amplitude: f64, sigma: f64 },
    Custom(CustomPsi),
}

/// Serializable form of [`Psi`]: `{"type": ..., "params": {...}}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", content = "params", rename_all = "lowercase")]
pub enum PsiDescriptor {
    Indicator { lo: f64, hi: f64 },
    Gaussian { amplitude: f64, sigma: f64 },
    Custom { name: String, c1: f64, c2: f64 },
}

impl Psi {
    pub fn indicator_unit() -> Self {
        Psi::Indicator { lo: 0.0, hi: 1.0 }
    }

    /// e^{−x²/4}/(2π)^{1/4}, the Kostlan limit shape.
    pub fn kostlan() -> Self {
        Psi::Gaussian { amplitude: (2.0 * std::f64::consts::PI).powf(-0.25), sigma: std::f64::consts::SQRT_2 }
    }

    pub fn custom<F>(name: impl Into<String>, func: F, c1: f64, c2: f64) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        Psi::Custom(CustomPsi { name: name.into(), func: Arc::new(func), c1, c2, breakpoints: Vec::new() })
    }

    pub fn eval(&self, x: f64) -> f64 {
        if x < 0.0 {
            return 0.0;
        }
        match self {
            Psi::Indicator { lo, hi } => {
                if x >= *lo && x <= *hi {
                    1.0
                } else {
                    0.0
                }
            }
            Psi::Gaussian { amplitude, sigma } => amplitude * (-x * x / (2.0 * sigma * sigma)).exp(),
            Psi::Custom(c) => (c.func)(x),
        }
    }

    /// Constants (c1, c2) with |ψ(x)| ≤ c1·exp(−c2·x²).
    pub fn tail_bound(&self) -> (f64, f64) {
        match self {
            Psi::Indicator { hi, .. } => ((hi * hi).exp(), 1.0),
            Psi::Gaussian { amplitude, sigma } => (amplitude.abs(), 1.0 / (2.0 * sigma * sigma)),
            Psi::Custom(c) => (c.c1, c.c2),
        }
    }

    pub fn breakpoints(&self) -> Vec<f64> {
        match self {
            Psi::Indicator { lo, hi } => vec![*lo, *hi],
            Psi::Gaussian { .. } => Vec::new(),
            Psi::Custom(c) => c.breakpoints.clone(),
        }
    }

    /// X beyond which c1²·exp(−2c2x²)·x^k < 1e−16.
    pub fn integration_cutoff(&self, k: f64) -> f64 {
        if let Psi::Indicator { hi, .. } = self {
            return *hi;
        }
        let (c1, c2) = self.tail_bound();
        let bound = |x: f64| 2.0 * c1.ln() - 2.0 * c2 * x * x + k * x.max(1e-300).ln();
        let mut x = 1.0;
        while bound(x) > (1e-16f64).ln() {
            x *= 1.25;
        }
        x
    }

    /// Scale marking the effective top of ψ's mass; used for default barrier bands.
    pub fn effective_top(&self) -> f64 {
        match self {
            Psi::Indicator { hi, .. } => *hi,
            Psi::Gaussian { sigma, .. } => 2.0 * sigma,
            Psi::Custom(_) => {
                // 0.995 quantile of ψ² mass
                let end = self.integration_cutoff(0.0);
                let f = |x: f64| self.eval(x).powi(2);
                let total = quad::integrate(f, 0.0, end, &self.breakpoints(), 1e-12).map(|r| r.value).unwrap_or(0.0);
                let steps = 4000;
                let h = end / steps as f64;
                let mut acc = 0.0;
                for i in 0..steps {
                    let x0 = i as f64 * h;
                    acc += 0.5 * h * (f(x0) + f(x0 + h));
                    if acc >= 0.995 * total {
                        return x0 + h;
                    }
                }
                end
            }
        }
    }

    pub fn descriptor(&self) -> PsiDescriptor {
        match self {
            Psi::Indicator { lo, hi } => PsiDescriptor::Indicator { lo: *lo, hi: *hi },
            Psi::Gaussian { amplitude, sigma } => PsiDescriptor::Gaussian { amplitude: *amplitude, sigma: *sigma },
            Psi::Custom(c) => PsiDescriptor::Custom { name: c.name.clone(), c1: c.c1, c2: c.c2 },
        }
    }

    pub fn from_descriptor(d: &PsiDescriptor) -> Result<Self> {
        match d {
            PsiDescriptor::Indicator { lo, hi } => Ok(Psi::Indicator { lo: *lo, hi: *hi }),
            PsiDescriptor::Gaussian { amplitude, sigma } => Ok(Psi::Gaussian { amplitude: *amplitude, sigma: *sigma }),
            PsiDescriptor::Custom { name, .. } => {
                Err(Error::InvalidInput(format!("custom profile '{name}' cannot be reconstructed from its descriptor")))
            }
        }
    }

    /// ∫₀^∞ ψ.
    pub fn integral(&self) -> Result<f64> {
        let end = self.integration_cutoff(0.0);
        Ok(quad::integrate(|x| self.eval(x), 0.0, end, &self.breakpoints(), 1e-11)?.value)
    }
}

/// Moments μ_k(ψ²) = ∫₀^∞ ψ(x)² x^k dx.
#[derive(Debug, Clone, Serialize)]
pub struct MomentTable {
    pub entries: Vec<MomentEntry>,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct MomentEntry {
    pub k: u32,
    pub value: f64,
    pub error: f64,
}

impl MomentTable {
    pub fn get(&self, k: u32) -> Option<f64> {
        self.entries.iter().find(|e| e.k == k).map(|e| e.value)
    }
}

pub fn moments(psi: &Psi, ks: &[u32]) -> Result<MomentTable> {
    let entries = ks
        .iter()
        .map(|&k| {
            let end = psi.integration_cutoff(f64::from(k));
            let f = |x: f64| psi.eval(x).powi(2) * x.powi(k as i32);
            let r = quad::integrate(f, 0.0, end, &psi.breakpoints(), 1e-10)?;
            Ok(MomentEntry { k, value: r.value, error: r.error })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(MomentTable { entries })
}

/// μ_{n+3}/((n+2)·μ_{n+1}), the profile constant in the B asymptotics.
pub fn moment_ratio(psi: &Psi, n: u32) -> Result<f64> {
    let t = moments(psi, &[n + 1, n + 3])?;
    let lo = t.get(n + 1).expect("requested");
    let hi = t.get(n + 3).expect("requested");
    if lo <= 0.0 {
        return Err(Error::Degenerate("μ_{n+1}(ψ²) vanishes".into()));
    }
    Ok(hi / ((f64::from(n) + 2.0) * lo))
}

/// An invariant ensemble at fixed (n, d).
#[derive(Debug, Clone)]
pub struct EnsembleSpec {
    kind: EnsembleKind,
    n: u32,
    d: usize,
    lambda: f64,
    /// p_d(ℓ) for ℓ = 0..=d; zero at the wrong parity.
    weights: Vec<f64>,
    psi: Option<Psi>,
}

/// JSON form `{kind, n, d, lambda, weights, psi}`; `weights[ℓ]` for ℓ = 0..=d.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleDescriptor {
    pub kind: EnsembleKind,
    pub n: u32,
    pub d: usize,
    pub lambda: f64,
    pub weights: Vec<f64>,
    pub psi: Option<PsiDescriptor>,
}

fn check_nd(n: u32, d: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::InvalidInput("sphere dimension n must be at least 1".into()));
    }
    if d == 0 {
        return Err(Error::InvalidInput("degree d must be at least 1".into()));
    }
    Ok(())
}

impl EnsembleSpec {
    /// Builds an ensemble from raw weights indexed by ℓ = 0..=d, normalizing to unit sum.
    pub fn from_weights(
        kind: EnsembleKind,
        n: u32,
        d: usize,
        lambda: f64,
        mut weights: Vec<f64>,
        psi: Option<Psi>,
    ) -> Result<Self> {
        check_nd(n, d)?;
        if weights.len() != d + 1 {
            return Err(Error::InvalidInput(format!("expected {} weights, got {}", d + 1, weights.len())));
        }
        if !(lambda > 0.0 && lambda <= 1.0) {
            return Err(Error::InvalidInput(format!("rescaling exponent {lambda} outside (0, 1]")));
        }
        for (l, &w) in weights.iter().enumerate() {
            if !(w.is_finite() && w >= 0.0) {
                return Err(Error::InvalidInput(format!("weight p({l}) = {w} is not a nonnegative number")));
            }
            if (d - l) % 2 == 1 && w != 0.0 {
                return Err(Error::InvalidInput(format!("weight at ℓ = {l} has the wrong parity for d = {d}")));
            }
        }
        let total = compensated_sum(weights.iter().copied());
        if total <= 0.0 {
            return Err(Error::Degenerate("all weights vanish".into()));
        }
        for w in &mut weights {
            *w /= total;
        }
        Ok(Self { kind, n, d, lambda, weights, psi })
    }

    pub fn kind(&self) -> EnsembleKind {
        self.kind
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn psi(&self) -> Option<&Psi> {
        self.psi.as_ref()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn weight(&self, l: usize) -> f64 {
        self.weights.get(l).copied().unwrap_or(0.0)
    }

    /// Degrees d, d−2, …, down to 0 or 1.
    pub fn admissible_degrees(&self) -> impl Iterator<Item = usize> + '_ {
        (0..=self.d).rev().step_by(2)
    }

    /// (ℓ, p_d(ℓ)) for degrees carrying positive weight, ℓ ascending.
    pub fn support(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.weights.iter().enumerate().filter(|(_, &w)| w > 0.0).map(|(l, &w)| (l, w))
    }

    pub fn max_degree(&self) -> usize {
        self.support().map(|(l, _)| l).max().unwrap_or(0)
    }

    /// Whether the family this ensemble belongs to satisfies the rescaling assumptions.
    pub fn is_coherent_kind(&self) -> bool {
        self.kind != EnsembleKind::Harmonic && self.psi.is_some()
    }

    /// Same ensemble with weights multiplied by `factor` and renormalized.
    pub fn rescaled(&self, factor: f64) -> Result<Self> {
        let w = self.weights.iter().map(|w| w * factor).collect();
        Self::from_weights(self.kind, self.n, self.d, self.lambda, w, self.psi.clone())
    }

    pub fn descriptor(&self) -> EnsembleDescriptor {
        EnsembleDescriptor {
            kind: self.kind,
            n: self.n,
            d: self.d,
            lambda: self.lambda,
            weights: self.weights.clone(),
            psi: self.psi.as_ref().map(Psi::descriptor),
        }
    }

    pub fn from_descriptor(desc: &EnsembleDescriptor) -> Result<Self> {
        let psi = desc.psi.as_ref().map(Psi::from_descriptor).transpose()?;
        Self::from_weights(desc.kind, desc.n, desc.d, desc.lambda, desc.weights.clone(), psi)
    }
}

/// Kostlan ensemble: covariance ⟨x, y⟩^d, λ = 1/2.
///
/// p_d(ℓ)² ∝ d!/(2^d·((d−ℓ)/2)!·Γ((n+1)/2 + (d+ℓ)/2)), evaluated in log-space.
pub fn make_kostlan(n: u32, d: usize) -> Result<EnsembleSpec> {
    check_nd(n, d)?;
    let df = d as f64;
    let half_n1 = 0.5 * (f64::from(n) + 1.0);
    let mut logs = vec![f64::NEG_INFINITY; d + 1];
    for l in (0..=d).rev().step_by(2) {
        let lf = l as f64;
        let log_sq = ln_gamma(df + 1.0)
            - df * std::f64::consts::LN_2
            - ln_gamma(0.5 * (df - lf) + 1.0)
            - ln_gamma(half_n1 + 0.5 * (df + lf));
        logs[l] = 0.5 * log_sq;
    }
    let top = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let weights = logs.iter().map(|&v| if v.is_finite() { (v - top).exp() } else { 0.0 }).collect();
    EnsembleSpec::from_weights(EnsembleKind::Kostlan, n, d, 0.5, weights, Some(Psi::kostlan()))
}

/// Real Fubini–Study: constant weights on admissible degrees, λ = 1, ψ = χ_[0,1].
pub fn make_rfs(n: u32, d: usize) -> Result<EnsembleSpec> {
    check_nd(n, d)?;
    let weights = (0..=d).map(|l| if (d - l) % 2 == 0 { 1.0 } else { 0.0 }).collect();
    EnsembleSpec::from_weights(EnsembleKind::Rfs, n, d, 1.0, weights, Some(Psi::indicator_unit()))
}

/// Random spherical harmonics: all mass at ℓ = d. Not a coherent family.
pub fn make_harmonic(n: u32, d: usize) -> Result<EnsembleSpec> {
    check_nd(n, d)?;
    let mut weights = vec![0.0; d + 1];
    weights[d] = 1.0;
    EnsembleSpec::from_weights(EnsembleKind::Harmonic, n, d, 1.0, weights, None)
}

/// p_d(ℓ) = d^{−λ}·ψ(ℓ/d^λ) on admissible degrees, renormalized.
pub fn make_prescribed(psi: Psi, lambda: f64, n: u32, d: usize) -> Result<EnsembleSpec> {
    check_nd(n, d)?;
    if !(lambda > 0.0 && lambda <= 1.0) {
        return Err(Error::InvalidInput(format!("rescaling exponent {lambda} outside (0, 1]")));
    }
    let scale = (d as f64).powf(lambda);
    let weights: Vec<f64> = (0..=d)
        .map(|l| if (d - l) % 2 == 0 { psi.eval(l as f64 / scale).max(0.0) / scale } else { 0.0 })
        .collect();
    if weights.iter().all(|&w| w == 0.0) {
        return Err(Error::Degenerate("ψ vanishes on every admissible degree".into()));
    }
    // verify the declared envelope on the sampled grid
    let (c1, c2) = psi.tail_bound();
    for l in (0..=d).rev().step_by(2) {
        let x = l as f64 / scale;
        let v = psi.eval(x);
        if v.abs() > c1 * (-c2 * x * x).exp() * (1.0 + 1e-9) + 1e-300 {
            return Err(Error::InvalidInput(format!(
                "ψ({x}) = {v} exceeds its declared envelope {c1}·exp(−{c2}x²)"
            )));
        }
    }
    EnsembleSpec::from_weights(EnsembleKind::Prescribed, n, d, lambda, weights, Some(psi))
}

/// A d-indexed family of ensembles at fixed n.
#[derive(Debug, Clone)]
pub enum EnsembleFamily {
    Kostlan,
    Rfs,
    Harmonic,
    Prescribed { psi: Psi, lambda: f64 },
}

impl EnsembleFamily {
    pub fn build(&self, n: u32, d: usize) -> Result<EnsembleSpec> {
        match self {
            Self::Kostlan => make_kostlan(n, d),
            Self::Rfs => make_rfs(n, d),
            Self::Harmonic => make_harmonic(n, d),
            Self::Prescribed { psi, lambda } => make_prescribed(psi.clone(), *lambda, n, d),
        }
    }

    pub fn kind(&self) -> EnsembleKind {
        match self {
            Self::Kostlan => EnsembleKind::Kostlan,
            Self::Rfs => EnsembleKind::Rfs,
            Self::Harmonic => EnsembleKind::Harmonic,
            Self::Prescribed { .. } => EnsembleKind::Prescribed,
        }
    }

    pub fn lambda(&self) -> f64 {
        match self {
            Self::Kostlan => 0.5,
            Self::Rfs | Self::Harmonic => 1.0,
            Self::Prescribed { lambda, .. } => *lambda,
        }
    }

    pub fn psi(&self) -> Option<Psi> {
        match self {
            Self::Kostlan => Some(Psi::kostlan()),
            Self::Rfs => Some(Psi::indicator_unit()),
            Self::Harmonic => None,
            Self::Prescribed { psi, .. } => Some(psi.clone()),
        }
    }

    pub fn is_coherent(&self) -> bool {
        !matches!(self, Self::Harmonic)
    }
}

/// Nearest integer to `target` with the parity of `d`, clamped to the admissible range.
fn nearest_admissible(d: usize, target: f64) -> usize {
    let df = d as f64;
    let k = ((df - target) / 2.0).round().clamp(0.0, (d / 2) as f64) as usize;
    d - 2 * k
}

/// P_{d,λ}(x) = p_d({d^λ x})·d^λ with {·} the nearest same-parity degree; 0 beyond ℓ = d.
pub fn rescaled_weight(e: &EnsembleSpec, x: f64) -> f64 {
    let scale = (e.d as f64).powf(e.lambda);
    let target = scale * x;
    if x < 0.0 || target > e.d as f64 {
        return 0.0;
    }
    e.weight(nearest_admissible(e.d, target)) * scale
}

/// ∫₀^∞ P_{d,λ}(x) dx for the step extension used by [`rescaled_weight`].
fn rescaled_integral(e: &EnsembleSpec) -> f64 {
    let d = e.d;
    let smallest = d % 2;
    compensated_sum(e.admissible_degrees().map(|l| {
        let lo = if l == smallest { 0.0 } else { l as f64 - 1.0 };
        let hi = ((l + 1) as f64).min(d as f64);
        e.weight(l) * (hi - lo)
    }))
}

/// Σ_ℓ ℓ^a·p_d(ℓ)^b over positive-weight degrees, in log-space.
pub fn moment_sum(e: &EnsembleSpec, a: f64, b: f64) -> f64 {
    compensated_sum(e.support().map(|(l, p)| {
        if l == 0 {
            if a == 0.0 {
                p.powf(b)
            } else {
                0.0
            }
        } else {
            (a * (l as f64).ln() + b * p.ln()).exp()
        }
    }))
}

/// Large-d limit of [`moment_sum`]: d^{λ(a−b+1)}·½∫x^a(cψ)^b, with c fixed so that
/// ½∫cψ = 1 matches the unit-sum normalization of the weights.
pub fn moment_sum_limit(e: &EnsembleSpec, a: f64, b: f64) -> Result<f64> {
    let psi = e.psi.as_ref().ok_or_else(|| Error::Degenerate("ensemble has no limit profile".into()))?;
    let c = 2.0 / psi.integral()?;
    let end = psi.integration_cutoff(a);
    let integral = quad::integrate(|x| x.powf(a) * (c * psi.eval(x)).powf(b), 0.0, end, &psi.breakpoints(), 1e-11)?;
    Ok((e.d as f64).powf(e.lambda * (a - b + 1.0)) * 0.5 * integral.value)
}

#[derive(Debug, Clone, Serialize)]
pub struct CoherenceEntry {
    pub d: usize,
    /// sup over the grid of |P_{d,λ}/∫P_{d,λ} − ψ/∫ψ|
    pub sup_distance: f64,
    pub sup_rescaled: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct CoherenceReport {
    pub kind: EnsembleKind,
    pub lambda: f64,
    pub coherent: bool,
    pub distances_nonincreasing: bool,
    pub entries: Vec<CoherenceEntry>,
    /// (c1, c2) with P_{d,λ}(x) ≤ c1·exp(−c2 x²) on every sampled grid.
    pub envelope: Option<(f64, f64)>,
    pub note: String,
}

/// Compares the rescaled weights with the limit profile for each degree in `d_list`.
///
/// Both sides are normalized to unit integral before the sup-distance is
/// taken, so the (implicit) normalizing constant of ψ does not enter.
pub fn coherence_check(family: &EnsembleFamily, n: u32, d_list: &[usize]) -> Result<CoherenceReport> {
    let lambda = family.lambda();
    let Some(psi) = family.psi() else {
        return Ok(CoherenceReport {
            kind: family.kind(),
            lambda,
            coherent: false,
            distances_nonincreasing: false,
            entries: Vec::new(),
            envelope: None,
            note: "no rescaling limit: all weight sits on the top degree".into(),
        });
    };
    let psi_mass = psi.integral()?;
    let x_end = 1.5 * psi.integration_cutoff(0.0);
    let grid: Vec<f64> = (0..=3000).map(|i| x_end * i as f64 / 3000.0).collect();
    let c2 = 0.5 * psi.tail_bound().1;
    let mut c1: f64 = 0.0;
    let mut entries = Vec::with_capacity(d_list.len());
    for &d in d_list {
        let e = family.build(n, d)?;
        let mass = rescaled_integral(&e);
        let mut sup = 0.0_f64;
        let mut sup_p = 0.0_f64;
        for &x in &grid {
            let p = rescaled_weight(&e, x);
            sup = sup.max((p / mass - psi.eval(x) / psi_mass).abs());
            sup_p = sup_p.max(p);
        }
        // envelope over the full support of P_{d,λ}
        let scale = (d as f64).powf(lambda);
        for l in e.admissible_degrees() {
            let x = l as f64 / scale;
            c1 = c1.max(e.weight(l) * scale * (c2 * x * x).exp());
        }
        entries.push(CoherenceEntry { d, sup_distance: sup, sup_rescaled: sup_p });
    }
    let nonincreasing = entries.windows(2).all(|w| w[1].sup_distance <= w[0].sup_distance + 1e-12);
    let envelope = (c1.is_finite() && c1 > 0.0).then_some((c1, c2));
    Ok(CoherenceReport {
        kind: family.kind(),
        lambda,
        coherent: nonincreasing && envelope.is_some(),
        distances_nonincreasing: nonincreasing,
        entries,
        envelope,
        note: String::new(),
    })
}
