//! Gaussian field samples f = Σ_ℓ p_d(ℓ) Σ_j ξ_ℓ^j Y_ℓ^j on S¹ and S².
//!
//! Coefficients ξ are stored for every admissible degree in (ℓ ascending,
//! j ascending) order, using the basis labels of
//! [`SphericalHarmonicBasis`](crate::specfun::SphericalHarmonicBasis). The
//! weights p_d(ℓ) are applied when an evaluator is built.

use std::f64::consts::{PI, SQRT_2};
use std::io::{Read, Write};

use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::ensemble::{EnsembleKind, EnsembleSpec};
use crate::error::{Error, Result};
use crate::specfun::{check_unit_vector, harmonic_dim, DEFAULT_BASIS_CAP};
use crate::stats::rng_from_seed;

/// Default degree cap for full sampling on S².
pub const DEFAULT_SPHERE_DEGREE_CAP: usize = 256;

#[derive(Debug, Clone)]
pub struct FieldSample {
    ensemble: EnsembleSpec,
    seed: u64,
    xi: Vec<f64>,
    /// Offset of degree ℓ's block inside `xi`; `usize::MAX` for inadmissible ℓ.
    offsets: Vec<usize>,
}

fn degree_len(n: u32, l: usize) -> usize {
    match (n, l) {
        (_, 0) => 1,
        (1, _) => 2,
        _ => 2 * l + 1,
    }
}

fn layout(e: &EnsembleSpec) -> (Vec<usize>, usize) {
    let mut offsets = vec![usize::MAX; e.d() + 1];
    let mut total = 0;
    for l in (e.d() % 2..=e.d()).step_by(2) {
        offsets[l] = total;
        total += degree_len(e.n(), l);
    }
    (offsets, total)
}

fn check_capability(e: &EnsembleSpec, cap: usize) -> Result<()> {
    if !(1..=2).contains(&e.n()) {
        return Err(Error::Capability(format!("field sampling only on S^1 and S^2, got n = {}", e.n())));
    }
    if e.d() > cap {
        return Err(Error::Capability(format!("degree {} exceeds sampling cap {cap}", e.d())));
    }
    Ok(())
}

/// Draws independent standard normals for every basis element of every admissible degree.
pub fn sample_field(e: &EnsembleSpec, seed: u64) -> Result<FieldSample> {
    let cap = if e.n() == 2 { DEFAULT_SPHERE_DEGREE_CAP } else { DEFAULT_BASIS_CAP };
    sample_field_with_cap(e, seed, cap)
}

pub fn sample_field_with_cap(e: &EnsembleSpec, seed: u64, cap: usize) -> Result<FieldSample> {
    check_capability(e, cap)?;
    let (offsets, total) = layout(e);
    let mut rng = rng_from_seed(seed);
    let xi = (0..total).map(|_| StandardNormal.sample(&mut rng)).collect();
    Ok(FieldSample { ensemble: e.clone(), seed, xi, offsets })
}

impl FieldSample {
    /// Field with prescribed coefficients (same layout as a sampled field).
    pub fn from_coefficients(e: &EnsembleSpec, xi: Vec<f64>) -> Result<Self> {
        check_capability(e, DEFAULT_BASIS_CAP)?;
        let (offsets, total) = layout(e);
        if xi.len() != total {
            return Err(Error::InvalidInput(format!("expected {total} coefficients, got {}", xi.len())));
        }
        Ok(Self { ensemble: e.clone(), seed: 0, xi, offsets })
    }

    pub fn ensemble(&self) -> &EnsembleSpec {
        &self.ensemble
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.xi
    }

    /// Σ_{admissible ℓ} d(n, ℓ).
    pub fn coefficient_count(&self) -> usize {
        self.xi.len()
    }

    /// Index into [`coefficients`](Self::coefficients) of basis label `j` at degree `l`.
    pub fn coefficient_index(&self, l: usize, j: usize) -> Option<usize> {
        let off = *self.offsets.get(l)?;
        (off != usize::MAX && j < degree_len(self.ensemble.n(), l)).then_some(off + j)
    }

    pub fn evaluator(&self) -> FieldEvaluator {
        FieldEvaluator::new(self)
    }

    pub fn eval(&self, point: &[f64]) -> Result<f64> {
        self.evaluator().eval(point)
    }

    /// Values at every point, in order. Parallel over points.
    pub fn eval_grid(&self, points: &[[f64; 3]]) -> Result<Vec<f64>> {
        if self.ensemble.n() != 2 {
            return Err(Error::InvalidInput("3-vector grids require a field on S^2".into()));
        }
        let ev = self.evaluator();
        let mut out = vec![0.0; points.len()];
        out.par_chunks_mut(1024).zip(points.par_chunks(1024)).try_for_each(|(o, p)| ev.clone().fill(p, o))?;
        Ok(out)
    }

    /// Sequential variant of [`eval_grid`](Self::eval_grid) for use inside parallel trial loops.
    pub fn eval_grid_seq(&self, points: &[[f64; 3]]) -> Result<Vec<f64>> {
        if self.ensemble.n() != 2 {
            return Err(Error::InvalidInput("3-vector grids require a field on S^2".into()));
        }
        let mut out = vec![0.0; points.len()];
        self.evaluator().fill(points, &mut out)?;
        Ok(out)
    }

    /// θ ↦ f(u cos θ + v sin θ) for an orthonormal pair (u, v) in R³.
    pub fn restrict_to_circle(&self, u: [f64; 3], v: [f64; 3]) -> Result<CircleRestriction> {
        if self.ensemble.n() != 2 {
            return Err(Error::InvalidInput("circle restriction requires a field on S^2".into()));
        }
        let dot = u[0] * v[0] + u[1] * v[1] + u[2] * v[2];
        check_unit_vector(&u, 3)?;
        check_unit_vector(&v, 3)?;
        if dot.abs() > 1e-9 {
            return Err(Error::Domain(format!("circle frame is not orthogonal (u·v = {dot})")));
        }
        Ok(CircleRestriction { eval: self.evaluator(), u, v })
    }

    /// Binary dump: magic, then n (u32), kind (u32), d (u64), seed (u64), count (u64),
    /// then the coefficients as little-endian f64.
    pub fn write_binary<W: Write>(&self, mut w: W) -> Result<()> {
        w.write_all(DUMP_MAGIC)?;
        w.write_all(&self.ensemble.n().to_le_bytes())?;
        w.write_all(&kind_code(self.ensemble.kind()).to_le_bytes())?;
        w.write_all(&(self.ensemble.d() as u64).to_le_bytes())?;
        w.write_all(&self.seed.to_le_bytes())?;
        w.write_all(&(self.xi.len() as u64).to_le_bytes())?;
        for x in &self.xi {
            w.write_all(&x.to_le_bytes())?;
        }
        Ok(())
    }
}

const DUMP_MAGIC: &[u8; 8] = b"NCFIELD1";

fn kind_code(k: EnsembleKind) -> u32 {
    match k {
        EnsembleKind::Kostlan => 0,
        EnsembleKind::Rfs => 1,
        EnsembleKind::Harmonic => 2,
        EnsembleKind::Prescribed => 3,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FieldDump {
    pub n: u32,
    pub kind: EnsembleKind,
    pub d: usize,
    pub seed: u64,
    pub coefficients: Vec<f64>,
}

pub fn read_binary<R: Read>(mut r: R) -> Result<FieldDump> {
    let mut magic = [0u8; 8];
    r.read_exact(&mut magic)?;
    if &magic != DUMP_MAGIC {
        return Err(Error::InvalidInput("not a field dump".into()));
    }
    let mut b4 = [0u8; 4];
    let mut b8 = [0u8; 8];
    r.read_exact(&mut b4)?;
    let n = u32::from_le_bytes(b4);
    r.read_exact(&mut b4)?;
    let kind = match u32::from_le_bytes(b4) {
        0 => EnsembleKind::Kostlan,
        1 => EnsembleKind::Rfs,
        2 => EnsembleKind::Harmonic,
        3 => EnsembleKind::Prescribed,
        k => return Err(Error::InvalidInput(format!("unknown ensemble code {k}"))),
    };
    r.read_exact(&mut b8)?;
    let d = u64::from_le_bytes(b8) as usize;
    r.read_exact(&mut b8)?;
    let seed = u64::from_le_bytes(b8);
    r.read_exact(&mut b8)?;
    let count = u64::from_le_bytes(b8) as usize;
    let mut coefficients = Vec::with_capacity(count);
    for _ in 0..count {
        r.read_exact(&mut b8)?;
        coefficients.push(f64::from_le_bytes(b8));
    }
    Ok(FieldDump { n, kind, d, seed, coefficients })
}

/// Evaluation state for one field: weighted coefficients arranged by order m
/// and the associated-Legendre recurrence constants.
#[derive(Debug, Clone)]
pub struct FieldEvaluator {
    n: u32,
    d: usize,
    /// n = 2: start of order m's run (ℓ = m..=d) in the flat arrays below.
    m_start: Vec<usize>,
    cos_coef: Vec<f64>,
    sin_coef: Vec<f64>,
    rec_a: Vec<f64>,
    rec_b: Vec<f64>,
    /// n = 1: weighted (cos, sin) coefficients per degree; constant term separate.
    constant: f64,
}

impl FieldEvaluator {
    fn new(fs: &FieldSample) -> Self {
        let e = &fs.ensemble;
        let d = e.d();
        let n = e.n();
        if n == 1 {
            let mut cos_coef = vec![0.0; d + 1];
            let mut sin_coef = vec![0.0; d + 1];
            let mut constant = 0.0;
            let c = 1.0 / PI.sqrt();
            for l in (d % 2..=d).step_by(2) {
                let p = e.weight(l);
                let off = fs.offsets[l];
                if l == 0 {
                    constant = p * fs.xi[off] / (2.0 * PI).sqrt();
                } else {
                    cos_coef[l] = p * c * fs.xi[off];
                    sin_coef[l] = p * c * fs.xi[off + 1];
                }
            }
            return Self {
                n,
                d,
                m_start: Vec::new(),
                cos_coef,
                sin_coef,
                rec_a: Vec::new(),
                rec_b: Vec::new(),
                constant,
            };
        }
        let mut m_start = Vec::with_capacity(d + 2);
        let mut total = 0;
        for m in 0..=d {
            m_start.push(total);
            total += d + 1 - m;
        }
        m_start.push(total);
        let mut cos_coef = vec![0.0; total];
        let mut sin_coef = vec![0.0; total];
        let mut rec_a = vec![0.0; total];
        let mut rec_b = vec![0.0; total];
        for m in 0..=d {
            let m2 = (m * m) as f64;
            for l in m..=d {
                let idx = m_start[m] + (l - m);
                if l >= m + 2 {
                    let lf = l as f64;
                    let l1 = lf - 1.0;
                    rec_a[idx] = ((4.0 * lf * lf - 1.0) / (lf * lf - m2)).sqrt();
                    rec_b[idx] = ((l1 * l1 - m2) / (4.0 * l1 * l1 - 1.0)).sqrt();
                }
                if (d - l) % 2 == 1 {
                    continue;
                }
                let p = e.weight(l);
                let off = fs.offsets[l];
                if m == 0 {
                    cos_coef[idx] = p * fs.xi[off];
                } else {
                    cos_coef[idx] = p * SQRT_2 * fs.xi[off + 2 * m - 1];
                    sin_coef[idx] = p * SQRT_2 * fs.xi[off + 2 * m];
                }
            }
        }
        Self { n, d, m_start, cos_coef, sin_coef, rec_a, rec_b, constant: 0.0 }
    }

    pub fn eval(&self, point: &[f64]) -> Result<f64> {
        check_unit_vector(point, self.n as usize + 1)?;
        Ok(if self.n == 1 { self.eval_angle(point[1].atan2(point[0])) } else { self.eval_unchecked(point) })
    }

    /// n = 1: value at angle θ.
    pub fn eval_angle(&self, theta: f64) -> f64 {
        let (s1, c1) = theta.sin_cos();
        let (mut c, mut s) = (1.0, 0.0);
        let mut acc = self.constant;
        for l in 1..=self.d {
            if l % 32 == 0 {
                (s, c) = (l as f64 * theta).sin_cos();
            } else {
                (c, s) = (c * c1 - s * s1, s * c1 + c * s1);
            }
            acc += self.cos_coef[l] * c + self.sin_coef[l] * s;
        }
        acc
    }

    fn eval_unchecked(&self, p: &[f64]) -> f64 {
        let d = self.d;
        let x = p[2].clamp(-1.0, 1.0);
        let rho = (p[0] * p[0] + p[1] * p[1]).sqrt();
        let (cphi, sphi) = if rho > 0.0 { (p[0] / rho, p[1] / rho) } else { (1.0, 0.0) };
        let s = (1.0 - x * x).max(0.0).sqrt();
        let mut pmm = 0.5 / PI.sqrt();
        let (mut cm, mut sm) = (1.0, 0.0);
        let mut total = 0.0;
        for m in 0..=d {
            if m > 0 {
                let mf = m as f64;
                pmm *= ((2.0 * mf + 1.0) / (2.0 * mf)).sqrt() * s;
                (cm, sm) = (cm * cphi - sm * sphi, sm * cphi + cm * sphi);
                if pmm == 0.0 {
                    break;
                }
            }
            let base = self.m_start[m];
            let cc = &self.cos_coef[base..self.m_start[m + 1]];
            let sc = &self.sin_coef[base..self.m_start[m + 1]];
            let mut a_sum = cc[0] * pmm;
            let mut b_sum = sc[0] * pmm;
            if m < d {
                let mut prev2 = pmm;
                let mut prev1 = (2.0 * m as f64 + 3.0).sqrt() * x * pmm;
                a_sum += cc[1] * prev1;
                b_sum += sc[1] * prev1;
                for k in 2..cc.len() {
                    let cur = self.rec_a[base + k] * (x * prev1 - self.rec_b[base + k] * prev2);
                    a_sum += cc[k] * cur;
                    b_sum += sc[k] * cur;
                    prev2 = prev1;
                    prev1 = cur;
                }
            }
            total += a_sum * cm + b_sum * sm;
        }
        total
    }

    fn fill(&self, points: &[[f64; 3]], out: &mut [f64]) -> Result<()> {
        for (p, o) in points.iter().zip(out.iter_mut()) {
            check_unit_vector(p, 3)?;
            *o = self.eval_unchecked(p);
        }
        Ok(())
    }
}

/// A field on S² restricted to a great circle.
#[derive(Debug, Clone)]
pub struct CircleRestriction {
    eval: FieldEvaluator,
    u: [f64; 3],
    v: [f64; 3],
}

impl CircleRestriction {
    pub fn point(&self, theta: f64) -> [f64; 3] {
        let (s, c) = theta.sin_cos();
        let mut p = [0.0; 3];
        for k in 0..3 {
            p[k] = c * self.u[k] + s * self.v[k];
        }
        let norm = (p[0] * p[0] + p[1] * p[1] + p[2] * p[2]).sqrt();
        p.map(|x| x / norm)
    }

    pub fn value(&self, theta: f64) -> f64 {
        self.eval.eval_unchecked(&self.point(theta))
    }
}

/// Number of coefficients a field of this ensemble carries.
pub fn coefficient_count(n: u32, d: usize) -> Result<u64> {
    let mut total = 0u64;
    for l in (d % 2..=d).step_by(2) {
        total += harmonic_dim(n, l as u32)?;
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::covariance::covariance_fn;
    use crate::ensemble::{make_harmonic, make_kostlan, make_rfs};
    use crate::specfun::SphericalHarmonicBasis;
    use crate::stats::Welford;
    use rand::Rng as _;

    fn random_unit(rng: &mut crate::stats::Rng) -> [f64; 3] {
        loop {
            let v: [f64; 3] = [rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)];
            let r = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
            if r > 0.1 && r < 1.0 {
                return v.map(|x| x / r);
            }
        }
    }

    /// Direct Σ p ξ Y via the full basis.
    fn oracle(fs: &FieldSample, point: &[f64]) -> f64 {
        let e = fs.ensemble();
        let basis = SphericalHarmonicBasis::new(e.n(), e.d()).unwrap();
        let y = basis.eval(point).unwrap();
        let mut acc = 0.0;
        for l in (e.d() % 2..=e.d()).step_by(2) {
            for j in 0..basis.degree_len(l) {
                acc += e.weight(l) * fs.coefficients()[fs.coefficient_index(l, j).unwrap()] * y[basis.degree_offset(l) + j];
            }
        }
        acc
    }

    #[test]
    fn coefficient_layout() {
        let e = make_rfs(2, 7).unwrap();
        let fs = sample_field(&e, 1).unwrap();
        assert_eq!(fs.coefficient_count(), 3 + 7 + 11 + 15);
        assert_eq!(coefficient_count(2, 7).unwrap(), 36);
        assert_eq!(fs.coefficient_index(2, 0), None);
        assert_eq!(fs.coefficient_index(3, 0), Some(3));
        let e = make_kostlan(1, 6).unwrap();
        assert_eq!(sample_field(&e, 1).unwrap().coefficient_count(), 1 + 2 + 2 + 2);
    }

    #[test]
    fn capability_errors() {
        assert!(matches!(sample_field(&make_rfs(3, 4).unwrap(), 0), Err(Error::Capability(_))));
        assert!(matches!(sample_field(&make_rfs(2, 300).unwrap(), 0), Err(Error::Capability(_))));
        assert!(sample_field_with_cap(&make_rfs(2, 300).unwrap(), 0, 400).is_ok());
    }

    #[test]
    fn fast_evaluation_matches_basis_oracle() {
        let mut rng = rng_from_seed(5);
        for (n, d) in [(2u32, 1usize), (2, 8), (2, 31), (1, 9), (1, 40)] {
            let e = make_kostlan(n, d).unwrap();
            let fs = sample_field(&e, 17).unwrap();
            for _ in 0..20 {
                let p = random_unit(&mut rng);
                let p: Vec<f64> = if n == 2 {
                    p.to_vec()
                } else {
                    let r = (p[0] * p[0] + p[1] * p[1]).sqrt();
                    vec![p[0] / r, p[1] / r]
                };
                let a = fs.eval(&p).unwrap();
                let b = oracle(&fs, &p);
                assert!((a - b).abs() < 1e-11 * (1.0 + b.abs()), "n={n} d={d}: {a} vs {b}");
            }
        }
        let fs = sample_field(&make_rfs(2, 10).unwrap(), 3).unwrap();
        for pole in [[0.0, 0.0, 1.0], [0.0, 0.0, -1.0]] {
            assert!((fs.eval(&pole).unwrap() - oracle(&fs, &pole)).abs() < 1e-12);
        }
    }

    #[test]
    fn linearity_and_single_coefficients() {
        let e = make_rfs(2, 5).unwrap();
        let zero = FieldSample::from_coefficients(&e, vec![0.0; 3 + 7 + 11]).unwrap();
        assert_eq!(zero.eval(&[0.6, 0.0, 0.8]).unwrap(), 0.0);
        let a = sample_field(&e, 1).unwrap();
        let b = sample_field(&e, 2).unwrap();
        let sum: Vec<f64> = a.coefficients().iter().zip(b.coefficients()).map(|(x, y)| x + y).collect();
        let c = FieldSample::from_coefficients(&e, sum).unwrap();
        let p = [0.48, -0.6, 0.64];
        let lhs = c.eval(&p).unwrap();
        let rhs = a.eval(&p).unwrap() + b.eval(&p).unwrap();
        assert!((lhs - rhs).abs() < 1e-13);

        let basis = SphericalHarmonicBasis::new(2, 5).unwrap();
        let y = basis.eval(&p).unwrap();
        let mut xi = vec![0.0; 21];
        let idx = a.coefficient_index(3, 4).unwrap();
        xi[idx] = 1.0;
        let single = FieldSample::from_coefficients(&e, xi).unwrap();
        assert!((single.eval(&p).unwrap() - e.weight(3) * y[basis.degree_offset(3) + 4]).abs() < 1e-14);
        assert!(single.eval(&[1.0, 1.0, 0.0]).is_err());
    }

    #[test]
    fn odd_parity_under_antipode() {
        let fs = sample_field(&make_kostlan(2, 9).unwrap(), 4).unwrap();
        let p = [0.36, 0.48, 0.8];
        let q = p.map(|x| -x);
        assert!((fs.eval(&p).unwrap() + fs.eval(&q).unwrap()).abs() < 1e-12);
        let fs = sample_field(&make_rfs(2, 8).unwrap(), 4).unwrap();
        assert!((fs.eval(&p).unwrap() - fs.eval(&q).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn grid_matches_pointwise() {
        let fs = sample_field(&make_rfs(2, 14).unwrap(), 8).unwrap();
        let mut rng = rng_from_seed(1);
        let pts: Vec<[f64; 3]> = (0..100).map(|_| random_unit(&mut rng)).collect();
        let g = fs.eval_grid(&pts).unwrap();
        let s = fs.eval_grid_seq(&pts).unwrap();
        assert_eq!(g, s);
        for (p, v) in pts.iter().zip(&g) {
            assert!((fs.eval(p).unwrap() - v).abs() < 1e-12);
        }
        assert_eq!(fs.eval_grid(&pts[..1]).unwrap().len(), 1);
    }

    #[test]
    fn determinism() {
        let e = make_kostlan(2, 12).unwrap();
        let a = sample_field(&e, 99).unwrap();
        let b = sample_field(&e, 99).unwrap();
        assert_eq!(a.coefficients(), b.coefficients());
    }

    #[test]
    fn variance_and_covariance_match_kernel() {
        let e = make_rfs(2, 6).unwrap();
        let x = [0.0, 0.0, 1.0];
        let ys = [[0.0, 0.0, 1.0], [0.6, 0.0, 0.8], [1.0, 0.0, 0.0], [0.0, -0.8, -0.6], [0.0, 0.0, -1.0]];
        let equator = [1.0, 0.0, 0.0];
        let mut stats = vec![Welford::new(); ys.len()];
        let mut eq = Welford::new();
        for t in 0..10_000u64 {
            let fs = sample_field(&e, t).unwrap();
            let ev = fs.evaluator();
            let fx = ev.eval(&x).unwrap();
            for (w, y) in stats.iter_mut().zip(&ys) {
                w.push(fx * ev.eval(y).unwrap());
            }
            eq.push(ev.eval(&equator).unwrap().powi(2));
        }
        for (w, y) in stats.iter().zip(&ys) {
            let expect = covariance_fn(&e, y[2]).unwrap();
            assert!((w.mean - expect).abs() < 3.0 * w.stderr().unwrap(), "{y:?}: {} vs {expect}", w.mean);
        }
        let f1 = covariance_fn(&e, 1.0).unwrap();
        assert!((eq.mean - f1).abs() < 3.0 * eq.stderr().unwrap());
    }

    #[test]
    fn point_values_are_gaussian() {
        let e = make_harmonic(2, 5).unwrap();
        let p = [0.0, 0.6, 0.8];
        let vals: Vec<f64> = (0..10_000u64).map(|t| sample_field(&e, 1000 + t).unwrap().eval(&p).unwrap()).collect();
        let n = vals.len() as f64;
        let mean = vals.iter().sum::<f64>() / n;
        let var = vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
        let skew = vals.iter().map(|v| (v - mean).powi(3)).sum::<f64>() / n / var.powf(1.5);
        let kurt = vals.iter().map(|v| (v - mean).powi(4)).sum::<f64>() / n / (var * var) - 3.0;
        assert!(skew.abs() < 4.0 * (6.0 / n).sqrt(), "skew {skew}");
        assert!(kurt.abs() < 4.0 * (24.0 / n).sqrt(), "kurt {kurt}");
    }

    #[test]
    fn circle_restriction() {
        let fs = sample_field(&make_rfs(2, 9).unwrap(), 2).unwrap();
        let c = fs.restrict_to_circle([1.0, 0.0, 0.0], [0.0, 1.0, 0.0]).unwrap();
        for &t in &[0.0, 0.7, 2.5, 5.9] {
            let (s, co) = f64::sin_cos(t);
            assert!((c.value(t) - fs.eval(&[co, s, 0.0]).unwrap()).abs() < 1e-12);
            assert!((c.value(t) - c.value(t + 2.0 * PI)).abs() < 1e-10);
        }
        assert!(fs.restrict_to_circle([1.0, 0.0, 0.0], [0.6, 0.8, 0.0]).is_err());
    }

    #[test]
    fn binary_round_trip() {
        let fs = sample_field(&make_kostlan(2, 6).unwrap(), 1234).unwrap();
        let mut buf = Vec::new();
        fs.write_binary(&mut buf).unwrap();
        assert_eq!(buf.len(), 8 + 4 + 4 + 8 + 8 + 8 + 8 * fs.coefficient_count());
        let dump = read_binary(buf.as_slice()).unwrap();
        assert_eq!(dump.n, 2);
        assert_eq!(dump.d, 6);
        assert_eq!(dump.kind, EnsembleKind::Kostlan);
        assert_eq!(dump.seed, 1234);
        assert_eq!(dump.coefficients, fs.coefficients());
        assert!(read_binary(&b"garbage!"[..]).is_err());
    }

    mod props {
        use super::*;
        use crate::ensemble::make_kostlan;
        use proptest::prelude::*;

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(32))]

            #[test]
            fn evaluation_is_linear(s1 in any::<u64>(), s2 in any::<u64>(), a in -3.0f64..3.0, phi in 0.0f64..6.28, z in -1.0f64..1.0) {
                let e = make_kostlan(2, 9).unwrap();
                let f = sample_field(&e, s1).unwrap();
                let g = sample_field(&e, s2).unwrap();
                let mix: Vec<f64> = f.coefficients().iter().zip(g.coefficients()).map(|(x, y)| a * x + y).collect();
                let h = FieldSample::from_coefficients(&e, mix).unwrap();
                let rho = (1.0 - z * z).sqrt();
                let p = [rho * phi.cos(), rho * phi.sin(), z];
                let lhs = h.eval(&p).unwrap();
                let rhs = a * f.eval(&p).unwrap() + g.eval(&p).unwrap();
                prop_assert!((lhs - rhs).abs() < 1e-12 * (1.0 + rhs.abs()));
            }

            #[test]
            fn sampling_is_deterministic(seed in any::<u64>()) {
                let e = make_kostlan(1, 11).unwrap();
                let a = sample_field(&e, seed).unwrap();
                let b = sample_field(&e, seed).unwrap();
                prop_assert_eq!(a.coefficients(), b.coefficients());
                prop_assert_eq!(a.coefficient_count() as u64, coefficient_count(1, 11).unwrap());
            }
        }
    }
}
