//! GOE sampling and the largest-eigenvalue integral behind the expected-minima formula.
//!
//! Convention: diagonal entries have variance 1/N and off-diagonal entries
//! 1/(2N), so the joint eigenvalue density carries exp(−(N/2)Σλ²).
//! I(N, B) = E[exp(−N·B·λ_max²/2)] equals ∫ e^{−NBt²/2} dF_N(t).

use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::covariance::CovarianceSummary;
use crate::ensemble::{moment_ratio, EnsembleFamily, EnsembleSpec};
use crate::error::{Error, Result};
use crate::stats::{derive_seed, rng_from_seed, Rng, Welford};

/// Dense symmetric matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct SymMatrix {
    n: usize,
    data: Vec<f64>,
}

impl SymMatrix {
    pub fn zeros(n: usize) -> Self {
        Self { n, data: vec![0.0; n * n] }
    }

    /// Builds from rows; the input must be square and symmetric.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        let mut m = Self::zeros(n);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(Error::InvalidInput("matrix is not square".into()));
            }
            m.data[i * n..(i + 1) * n].copy_from_slice(row);
        }
        for i in 0..n {
            for j in 0..i {
                if m.get(i, j) != m.get(j, i) {
                    return Err(Error::InvalidInput("matrix is not symmetric".into()));
                }
            }
        }
        Ok(m)
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    fn set_sym(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.n + j] = v;
        self.data[j * self.n + i] = v;
    }

    pub fn trace_of_square(&self) -> f64 {
        self.data.iter().map(|x| x * x).sum()
    }
}

pub fn sample_goe(n: usize, rng: &mut Rng) -> SymMatrix {
    let mut h = SymMatrix::zeros(n);
    let nf = n as f64;
    let sd_diag = (1.0 / nf).sqrt();
    let sd_off = (0.5 / nf).sqrt();
    for i in 0..n {
        let z: f64 = StandardNormal.sample(rng);
        h.set_sym(i, i, sd_diag * z);
        for j in 0..i {
            let z: f64 = StandardNormal.sample(rng);
            h.set_sym(i, j, sd_off * z);
        }
    }
    h
}

/// All eigenvalues, ascending, by cyclic Jacobi rotations.
pub fn eigenvalues(h: &SymMatrix) -> Result<Vec<f64>> {
    const MAX_SWEEPS: usize = 100;
    let n = h.n;
    let mut a = h.data.clone();
    let scale = h.trace_of_square().sqrt().max(f64::MIN_POSITIVE);
    let off = |a: &[f64]| -> f64 {
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..i {
                s += 2.0 * a[i * n + j] * a[i * n + j];
            }
        }
        s.sqrt()
    };
    let mut sweeps = 0;
    while off(&a) > 1e-12 * scale {
        if sweeps == MAX_SWEEPS {
            return Err(Error::Numeric(format!("Jacobi iteration did not converge in {MAX_SWEEPS} sweeps")));
        }
        sweeps += 1;
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[p * n + q];
                if apq == 0.0 {
                    continue;
                }
                let (app, aqq) = (a[p * n + p], a[q * n + q]);
                let theta = (aqq - app) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    a[k * n + p] = c * akp - s * akq;
                    a[k * n + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p * n + k];
                    let aqk = a[q * n + k];
                    a[p * n + k] = c * apk - s * aqk;
                    a[q * n + k] = s * apk + c * aqk;
                }
            }
        }
    }
    let mut ev: Vec<f64> = (0..n).map(|i| a[i * n + i]).collect();
    ev.sort_by(f64::total_cmp);
    Ok(ev)
}

pub fn largest_eigenvalue(h: &SymMatrix) -> Result<f64> {
    if h.n == 0 {
        return Err(Error::InvalidInput("empty matrix".into()));
    }
    Ok(*eigenvalues(h)?.last().expect("nonempty"))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GoeEstimate {
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(rename = "B")]
    pub b: f64,
    pub value: f64,
    pub stderr: f64,
    pub samples: u64,
    pub seed: u64,
}

const CHUNK: u64 = 4096;

/// Monte-Carlo estimate of E[exp(−N·B·λ_max²/2)] over GOE(N).
///
/// Chunk `c` draws from the stream `derive_seed(seed, c)`; the estimate does
/// not depend on the number of worker threads.
pub fn i_integral(n: usize, b: f64, samples: u64, seed: u64) -> Result<GoeEstimate> {
    if n < 2 {
        return Err(Error::InvalidInput(format!("matrix size N = {n} must be at least 2")));
    }
    if !(0.0..=1.0).contains(&b) {
        return Err(Error::Domain(format!("B = {b} outside [0, 1]")));
    }
    if samples < 100 {
        return Err(Error::InvalidInput(format!("{samples} samples is below the minimum of 100")));
    }
    if b == 0.0 {
        return Ok(GoeEstimate { n, b, value: 1.0, stderr: 0.0, samples, seed });
    }
    let nf = n as f64;
    let chunks = samples.div_ceil(CHUNK);
    let parts: Vec<Result<Welford>> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = rng_from_seed(derive_seed(seed, c));
            let count = CHUNK.min(samples - c * CHUNK);
            let mut w = Welford::new();
            for _ in 0..count {
                let lmax = largest_eigenvalue(&sample_goe(n, &mut rng))?;
                w.push((-0.5 * nf * b * lmax * lmax).exp());
            }
            Ok(w)
        })
        .collect();
    let mut total = Welford::new();
    for p in parts {
        total.merge(&p?);
    }
    Ok(GoeEstimate { n, b, value: total.mean, stderr: total.stderr().unwrap_or(0.0), samples, seed })
}

/// Closed forms I₂ = √3/(2√2) and I₃ = 1/√6.
pub fn i_exact(n: usize) -> Option<f64> {
    match n {
        2 => Some(3f64.sqrt() / (2.0 * 2f64.sqrt())),
        3 => Some(1.0 / 6f64.sqrt()),
        _ => None,
    }
}

/// ζ′(1) as quoted alongside the asymptotic formula.
pub const ZETA_PRIME_CONSTANT: f64 = -0.1654;

/// Large-N approximation g_N of I(N, 1).
pub fn i_asymptotic(n: usize) -> f64 {
    let nf = n as f64;
    let ln_a = -(169.0 / 96.0) * std::f64::consts::LN_2 + 0.5 * ZETA_PRIME_CONSTANT;
    let ln_g = ln_a + (35.0 / 16.0) * std::f64::consts::LN_2 - (17.0 / 36.0) * nf.ln() - nf
        + (4.0 * 2f64.sqrt() / 3.0) * (nf - 1.0).sqrt();
    ln_g.exp()
}

/// How I_{n+1} is obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ISource {
    MonteCarlo { samples: u64, seed: u64 },
    /// Closed forms; available for N ∈ {2, 3}.
    ClosedForm,
}

fn i_value(n: usize, b: f64, source: ISource) -> Result<(f64, f64)> {
    match source {
        ISource::MonteCarlo { samples, seed } => i_integral(n, b, samples, seed).map(|g| (g.value, g.stderr)),
        ISource::ClosedForm => {
            if b != 1.0 {
                return Err(Error::Capability("closed forms are known only at B = 1".into()));
            }
            i_exact(n)
                .map(|v| (v, 0.0))
                .ok_or_else(|| Error::Capability(format!("no closed form for I at N = {n}")))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExtremaPrediction {
    pub n: u32,
    pub d: usize,
    #[serde(rename = "B")]
    pub b: f64,
    pub one_minus_b_inv: f64,
    pub i_value: f64,
    pub i_stderr: f64,
    /// Expected minima of the hemisphere field.
    pub minima_half: f64,
    pub minima_full: f64,
    pub extrema_full: f64,
    /// Monte-Carlo standard error carried into minima_half.
    pub minima_half_stderr: f64,
    /// minima_full / d^{λn}
    pub asymptotic_ratio: f64,
}

/// minima_half = (1+B)^{(n+1)/2}·((1−B)⁻¹)^{n/2}·I(n+1, B).
pub fn expected_minima(e: &EnsembleSpec, samples: u64, seed: u64) -> Result<ExtremaPrediction> {
    let s = CovarianceSummary::compute(e)?;
    let n = e.n();
    let nf = f64::from(n);
    let g = i_integral(n as usize + 1, s.b, samples, seed)?;
    let prefactor = (1.0 + s.b).powf(0.5 * (nf + 1.0)) * s.one_minus_b_inv.powf(0.5 * nf);
    let minima_half = prefactor * g.value;
    Ok(ExtremaPrediction {
        n,
        d: e.d(),
        b: s.b,
        one_minus_b_inv: s.one_minus_b_inv,
        i_value: g.value,
        i_stderr: g.stderr,
        minima_half,
        minima_full: 2.0 * minima_half,
        extrema_full: 4.0 * minima_half,
        minima_half_stderr: prefactor * g.stderr,
        asymptotic_ratio: 2.0 * minima_half / (e.d() as f64).powf(e.lambda() * nf),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoefficientBound {
    pub n: u32,
    /// μ_{n+3}/((n+2)μ_{n+1})
    pub moment_term: f64,
    pub i_value: f64,
    pub i_stderr: f64,
    pub bound_sphere: f64,
    pub bound_projective: f64,
}

/// Upper bounds on lim E b₀/d^{λn}: 2^{5/2}(μ_{n+3}/((n+2)μ_{n+1}))^{n/2}·I_{n+1} on the
/// sphere, half of it in projective space.
pub fn leading_coeff_bound(family: &EnsembleFamily, n: u32, source: ISource) -> Result<CoefficientBound> {
    let psi = family
        .psi()
        .filter(|_| family.is_coherent())
        .ok_or_else(|| Error::Capability(format!("{} family has no rescaling limit", family.kind())))?;
    let moment_term = moment_ratio(&psi, n)?;
    let (iv, ie) = i_value(n as usize + 1, 1.0, source)?;
    let factor = 2f64.powf(2.5) * moment_term.powf(0.5 * f64::from(n));
    let bound_sphere = factor * iv;
    Ok(CoefficientBound {
        n,
        moment_term,
        i_value: iv,
        i_stderr: factor * ie,
        bound_sphere,
        bound_projective: 0.5 * bound_sphere,
    })
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct PowerLawEntry {
    pub d: usize,
    pub minima_n: f64,
    pub minima_1: f64,
    pub ratio: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct PowerLawReport {
    pub n: u32,
    pub entries: Vec<PowerLawEntry>,
    /// (max − min)/mean of the ratios.
    pub spread: f64,
}

/// Compares minima_full of the n-dimensional ensemble with the n-th power of its
/// circle sibling over `d_list`. All degrees share one seed, so MC noise is coupled.
pub fn minima_power_law_check(
    family: &EnsembleFamily,
    n: u32,
    d_list: &[usize],
    samples: u64,
    seed: u64,
) -> Result<PowerLawReport> {
    if !family.is_coherent() {
        return Err(Error::Capability(format!("{} family has no rescaling limit", family.kind())));
    }
    let mut entries = Vec::with_capacity(d_list.len());
    for &d in d_list {
        let hi = expected_minima(&family.build(n, d)?, samples, seed)?;
        let lo = if n == 1 { hi } else { expected_minima(&family.build(1, d)?, samples, seed)? };
        let ratio = hi.minima_full / lo.minima_full.powi(n as i32);
        entries.push(PowerLawEntry { d, minima_n: hi.minima_full, minima_1: lo.minima_full, ratio });
    }
    let ratios: Vec<f64> = entries.iter().map(|e| e.ratio).collect();
    let mean = ratios.iter().sum::<f64>() / ratios.len().max(1) as f64;
    let max = ratios.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = ratios.iter().copied().fold(f64::INFINITY, f64::min);
    let spread = if ratios.is_empty() { 0.0 } else { (max - min) / mean };
    Ok(PowerLawReport { n, entries, spread })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensemble::{make_harmonic, make_kostlan, make_rfs};
    use proptest::prelude::*;

    /// Number of eigenvalues below σ from the signs of the LDLᵀ pivots of H − σI.
    fn count_below(h: &SymMatrix, sigma: f64) -> usize {
        let n = h.dim();
        let mut a: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| h.get(i, j)).collect()).collect();
        for (i, row) in a.iter_mut().enumerate() {
            row[i] -= sigma;
        }
        let mut negatives = 0;
        for k in 0..n {
            let mut piv = a[k][k];
            if piv == 0.0 {
                piv = 1e-300;
            }
            if piv < 0.0 {
                negatives += 1;
            }
            for i in k + 1..n {
                let f = a[i][k] / piv;
                for j in k + 1..n {
                    a[i][j] -= f * a[k][j];
                }
            }
        }
        negatives
    }

    fn lmax_by_bisection(h: &SymMatrix) -> f64 {
        let r = h.trace_of_square().sqrt() + 1.0;
        let (mut lo, mut hi) = (-r, r);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if count_below(h, mid) == h.dim() {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn eigenvalue_examples() {
        let d = SymMatrix::from_rows(&[vec![3.0, 0.0, 0.0], vec![0.0, 1.0, 0.0], vec![0.0, 0.0, 2.0]]).unwrap();
        assert_eq!(largest_eigenvalue(&d).unwrap(), 3.0);
        let (a, b) = (0.7, -1.3);
        let m = SymMatrix::from_rows(&[vec![a, b], vec![b, a]]).unwrap();
        assert!((largest_eigenvalue(&m).unwrap() - (a + b.abs())).abs() < 1e-14);
        assert!(SymMatrix::from_rows(&[vec![1.0, 2.0], vec![3.0, 1.0]]).is_err());
    }

    #[test]
    fn jacobi_matches_inertia_oracle() {
        let mut rng = rng_from_seed(11);
        for _ in 0..50 {
            let h = sample_goe(5, &mut rng);
            assert!((largest_eigenvalue(&h).unwrap() - lmax_by_bisection(&h)).abs() < 1e-9);
        }
        let h = sample_goe(40, &mut rng);
        let ev = eigenvalues(&h).unwrap();
        let tr: f64 = ev.iter().map(|x| x * x).sum();
        assert!((tr - h.trace_of_square()).abs() < 1e-10 * tr);
        assert!((ev[39] - lmax_by_bisection(&h)).abs() < 1e-9);
    }

    #[test]
    fn goe_variances() {
        let mut rng = rng_from_seed(3);
        let w: Welford = (0..100_000).map(|_| sample_goe(1, &mut rng).get(0, 0).powi(2)).collect();
        assert!((w.mean - 1.0).abs() < 3.0 * w.stderr().unwrap());
        for n in [2usize, 4, 7] {
            let w: Welford = (0..100_000).map(|_| sample_goe(n, &mut rng).trace_of_square()).collect();
            let expect = (n as f64 + 1.0) / 2.0;
            assert!((w.mean - expect).abs() < 3.0 * w.stderr().unwrap(), "N={n}: {} vs {expect}", w.mean);
        }
    }

    #[test]
    fn i_integral_contract() {
        assert_eq!(i_integral(4, 0.0, 1000, 1).unwrap().value, 1.0);
        assert!(i_integral(3, 1.0, 99, 1).is_err());
        assert!(i_integral(1, 1.0, 1000, 1).is_err());
        assert!(i_integral(3, 1.5, 1000, 1).is_err());
        let a = i_integral(3, 0.7, 10_000, 42).unwrap();
        let b = i_integral(3, 0.7, 10_000, 42).unwrap();
        assert_eq!(a, b);
        assert!(a.value > 0.0 && a.value <= 1.0);
        let json = serde_json::to_string(&a).unwrap();
        assert!(json.starts_with("{\"N\":3,\"B\":0.7,\"value\""), "{json}");
    }

    #[test]
    fn i_integral_independent_of_thread_count() {
        let run = |threads| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| i_integral(4, 1.0, 20_000, 9).unwrap())
        };
        assert_eq!(run(1), run(4));
    }

    #[test]
    fn small_n_closed_forms() {
        for n in [2usize, 3] {
            let g = i_integral(n, 1.0, 200_000, 5).unwrap();
            let exact = i_exact(n).unwrap();
            assert!((g.value - exact).abs() < 4.0 * g.stderr, "N={n}: {} ± {} vs {exact}", g.value, g.stderr);
        }
    }

    #[test]
    fn monotone_in_b_and_n() {
        let mut prev = f64::INFINITY;
        for k in 0..=10 {
            let v = i_integral(3, k as f64 / 10.0, 5000, 77).unwrap().value;
            assert!(v <= prev);
            prev = v;
        }
        let mut prev = f64::INFINITY;
        for n in 2..=12 {
            let v = i_integral(n, 1.0, 20_000, 8).unwrap().value;
            assert!(v < prev, "N={n}");
            prev = v;
        }
    }

    #[test]
    fn asymptotic_formula() {
        for n in 2..40usize {
            let nf = n as f64;
            let ln_a = -(169.0 / 96.0) * 2f64.ln() - 0.5 * 0.1654;
            let resid = i_asymptotic(n).ln() + nf - (4.0 * 2f64.sqrt() / 3.0) * (nf - 1.0).sqrt()
                + (17.0 / 36.0) * nf.ln()
                - (ln_a + (35.0 / 16.0) * 2f64.ln());
            assert!(resid.abs() < 1e-12);
            if n >= 4 {
                assert!(i_asymptotic(n + 1) < i_asymptotic(n));
            }
        }
        let mc = i_integral(10, 1.0, 100_000, 10).unwrap();
        assert!((i_asymptotic(10) / mc.value - 1.0).abs() < 0.25);
    }

    #[test]
    fn fyodorov_constants() {
        let samples = 200_000;
        let rel = |a: f64, b: f64| (a / b - 1.0).abs();
        let p = expected_minima(&make_rfs(2, 300).unwrap(), samples, 1).unwrap();
        assert!(rel(p.minima_full / 300f64.powi(2), 1.0 / (3.0 * 3f64.sqrt())) < 0.03);
        assert_eq!(p.extrema_full, 2.0 * p.minima_full);
        let p = expected_minima(&make_harmonic(2, 300).unwrap(), samples, 2).unwrap();
        assert!(rel(p.extrema_full / 300f64.powi(2), 1.0 / 3f64.sqrt()) < 0.03);
        let p = expected_minima(&make_rfs(1, 300).unwrap(), samples, 3).unwrap();
        assert!(rel(p.extrema_full / 300.0, 2.0 * 0.6f64.sqrt()) < 0.03);
        let p = expected_minima(&make_harmonic(1, 200).unwrap(), samples, 4).unwrap();
        assert!(rel(p.extrema_full / 200.0, 2.0) < 0.02);
    }

    #[test]
    fn minima_invariant_under_weight_scaling() {
        let e = make_kostlan(2, 30).unwrap();
        let f = e.rescaled(123.0).unwrap();
        let a = expected_minima(&e, 5000, 1).unwrap();
        let b = expected_minima(&f, 5000, 1).unwrap();
        assert!((a.minima_half - b.minima_half).abs() < 1e-9 * a.minima_half);
    }

    #[test]
    fn leading_coefficient_bounds() {
        let k = leading_coeff_bound(&EnsembleFamily::Kostlan, 2, ISource::ClosedForm).unwrap();
        assert!((k.bound_projective - 2.0 / 3f64.sqrt()).abs() < 1e-8);
        assert!((k.moment_term - 1.0).abs() < 1e-9);
        let r = leading_coeff_bound(&EnsembleFamily::Rfs, 2, ISource::ClosedForm).unwrap();
        assert!((r.bound_projective - 1.0 / (3.0 * 3f64.sqrt())).abs() < 1e-8);
        let k1 = leading_coeff_bound(&EnsembleFamily::Kostlan, 1, ISource::ClosedForm).unwrap();
        assert!((k1.bound_projective - 2f64.powf(1.5) * i_exact(2).unwrap()).abs() < 1e-8);
        let mc = leading_coeff_bound(&EnsembleFamily::Kostlan, 2, ISource::MonteCarlo { samples: 100_000, seed: 6 })
            .unwrap();
        assert!((mc.bound_projective / k.bound_projective - 1.0).abs() < 0.015);
        assert!(leading_coeff_bound(&EnsembleFamily::Harmonic, 2, ISource::ClosedForm).is_err());
        assert!(leading_coeff_bound(&EnsembleFamily::Rfs, 4, ISource::ClosedForm).is_err());
    }

    #[test]
    fn power_law_ratio_is_stable() {
        for fam in [EnsembleFamily::Rfs, EnsembleFamily::Kostlan] {
            let r = minima_power_law_check(&fam, 2, &[100, 200, 400], 50_000, 12).unwrap();
            assert!(r.spread < 0.05, "{r:?}");
            let r1 = minima_power_law_check(&fam, 1, &[10, 20], 1000, 1).unwrap();
            assert!(r1.entries.iter().all(|e| e.ratio == 1.0));
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]
        #[test]
        fn coupled_estimates_decrease_in_b(n in 2usize..6, b1 in 0.0f64..1.0, b2 in 0.0f64..1.0, seed in any::<u64>()) {
            let (lo, hi) = if b1 < b2 { (b1, b2) } else { (b2, b1) };
            let a = i_integral(n, lo, 500, seed).unwrap().value;
            let c = i_integral(n, hi, 500, seed).unwrap().value;
            prop_assert!(c <= a + 1e-15);
        }
    }
}
