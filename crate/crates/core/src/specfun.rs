//! Special functions: harmonic-space dimensions, normalized Gegenbauer
//! polynomials, real spherical-harmonic bases on S¹ and S², zonal harmonics
//! and the Bessel functions needed by the barrier radius.

use std::f64::consts::PI;

use statrs::function::gamma::{gamma, ln_gamma};

use crate::error::{Error, Result};

/// Default maximum degree for full spherical-harmonic bases.
pub const DEFAULT_BASIS_CAP: usize = 512;

const ENDPOINT_SLACK: f64 = 1e-12;

fn binomial_u128(n: u128, k: u128) -> Option<u128> {
    let k = k.min(n - k.min(n));
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc.checked_mul(n - i)? / (i + 1);
    }
    Some(acc)
}

/// Dimension of the space of degree-`l` spherical harmonics on Sⁿ, exactly.
///
/// Uses d(n,ℓ) = C(n+ℓ−1, ℓ) + C(n+ℓ−2, ℓ−1), which equals
/// (n+2ℓ−1)(n+ℓ−2)!/(ℓ!(n−1)!) for ℓ ≥ 1.
pub fn harmonic_dim(n: u32, l: u32) -> Result<u64> {
    if n == 0 {
        return Err(Error::Domain("sphere dimension must be at least 1".into()));
    }
    if l == 0 {
        return Ok(1);
    }
    let (n, l) = (u128::from(n), u128::from(l));
    let overflow = || Error::Overflow(format!("d(n={n}, l={l}) does not fit in 64 bits"));
    let a = binomial_u128(n + l - 1, l).ok_or_else(overflow)?;
    let b = binomial_u128(n + l - 2, l - 1).ok_or_else(overflow)?;
    let total = a.checked_add(b).ok_or_else(overflow)?;
    u64::try_from(total).map_err(|_| overflow())
}

/// log d(n,ℓ), valid far beyond the range where the exact integer fits.
pub fn ln_harmonic_dim(n: u32, l: u32) -> f64 {
    if l == 0 {
        return 0.0;
    }
    let (nf, lf) = (f64::from(n), f64::from(l));
    (nf + 2.0 * lf - 1.0).ln() + ln_gamma(nf + lf - 1.0) - ln_gamma(lf + 1.0) - ln_gamma(nf)
}

/// d(n,ℓ) as a float: exact when it fits, log-space otherwise.
pub fn harmonic_dim_f64(n: u32, l: u32) -> f64 {
    match harmonic_dim(n, l) {
        Ok(v) => v as f64,
        Err(_) => ln_harmonic_dim(n, l).exp(),
    }
}

/// Surface measure |Sⁿ| = 2π^{(n+1)/2}/Γ((n+1)/2).
pub fn sphere_surface(n: u32) -> f64 {
    let h = 0.5 * (f64::from(n) + 1.0);
    2.0 * PI.powf(h) / gamma(h)
}

fn check_unit_interval(t: f64) -> Result<f64> {
    if t.is_nan() || t.abs() > 1.0 + ENDPOINT_SLACK {
        return Err(Error::Domain(format!("t = {t} outside [-1, 1]")));
    }
    Ok(t.clamp(-1.0, 1.0))
}

/// Values C̃_k^{(n−1)/2}(t) for k = 0..=lmax, normalized to 1 at t = 1.
///
/// Runs the ultraspherical recurrence directly on the normalized values:
/// C̃_k = (2t(k+m−1)C̃_{k−1} − (k−1)C̃_{k−2}) / (k+2m−1), with m = (n−1)/2.
/// At n = 1 this is the Chebyshev recurrence.
pub fn gegenbauer_normalized_table(n: u32, lmax: usize, t: f64) -> Result<Vec<f64>> {
    if n == 0 {
        return Err(Error::Domain("sphere dimension must be at least 1".into()));
    }
    let t = check_unit_interval(t)?;
    let m = 0.5 * (f64::from(n) - 1.0);
    let mut out = Vec::with_capacity(lmax + 1);
    out.push(1.0);
    if lmax >= 1 {
        out.push(t);
    }
    for k in 2..=lmax {
        let kf = k as f64;
        let next = (2.0 * t * (kf + m - 1.0) * out[k - 1] - (kf - 1.0) * out[k - 2]) / (kf + 2.0 * m - 1.0);
        out.push(next);
    }
    Ok(out)
}

/// Normalized Gegenbauer polynomial C̃_ℓ^{(n−1)/2}(t), with C̃(1) = 1.
pub fn gegenbauer_normalized(n: u32, l: usize, t: f64) -> Result<f64> {
    Ok(gegenbauer_normalized_table(n, l, t)?[l])
}

/// Classical (unnormalized) Gegenbauer C_ℓ^m(t) and its derivative, for m > 0.
pub fn gegenbauer_with_derivative(m: f64, l: usize, t: f64) -> (f64, f64) {
    let (mut c0, mut d0) = (1.0, 0.0);
    if l == 0 {
        return (c0, d0);
    }
    let (mut c1, mut d1) = (2.0 * m * t, 2.0 * m);
    for k in 2..=l {
        let kf = k as f64;
        let a = 2.0 * (kf + m - 1.0);
        let b = kf + 2.0 * m - 2.0;
        let c2 = (a * t * c1 - b * c0) / kf;
        let d2 = (a * (c1 + t * d1) - b * d0) / kf;
        (c0, d0, c1, d1) = (c1, d1, c2, d2);
    }
    (c1, d1)
}

/// d/dt C̃_ℓ^{(n−1)/2} at t = 1: (n+ℓ−1)ℓ/n.
pub fn gegenbauer_deriv1_at1(n: u32, l: usize) -> f64 {
    let (nf, lf) = (f64::from(n), l as f64);
    (nf + lf - 1.0) * lf / nf
}

/// d²/dt² C̃_ℓ^{(n−1)/2} at t = 1: (n+ℓ)(n+ℓ−1)ℓ(ℓ−1)/(n(n+2)).
pub fn gegenbauer_deriv2_at1(n: u32, l: usize) -> f64 {
    let (nf, lf) = (f64::from(n), l as f64);
    (nf + lf) * (nf + lf - 1.0) * lf * (lf - 1.0) / (nf * (nf + 2.0))
}

/// L²(Sⁿ)-normalized zonal harmonic of degree ℓ evaluated at polar cosine `cos_theta`.
pub fn zonal_harmonic(n: u32, l: usize, cos_theta: f64) -> Result<f64> {
    let c = gegenbauer_normalized(n, l, cos_theta)?;
    Ok(zonal_scale(n, l) * c)
}

/// √(d(n,ℓ)/|Sⁿ|), the value of the zonal harmonic at its pole.
pub fn zonal_scale(n: u32, l: usize) -> f64 {
    (harmonic_dim_f64(n, l as u32) / sphere_surface(n)).sqrt()
}

/// Fully normalized associated Legendre values p̄_ℓ^m(x) for 0 ≤ m ≤ ℓ ≤ lmax,
/// laid out at index ℓ(ℓ+1)/2 + m. Normalized so that p̄_ℓ^m(cosθ)·{1, √2 cos mφ,
/// √2 sin mφ} is L²(S²)-orthonormal. No Condon–Shortley phase.
#[derive(Debug, Clone)]
pub struct NormalizedLegendre {
    lmax: usize,
    values: Vec<f64>,
}

impl NormalizedLegendre {
    pub fn new(lmax: usize) -> Self {
        Self { lmax, values: vec![0.0; (lmax + 1) * (lmax + 2) / 2] }
    }

    #[inline]
    pub fn index(l: usize, m: usize) -> usize {
        l * (l + 1) / 2 + m
    }

    #[inline]
    pub fn get(&self, l: usize, m: usize) -> f64 {
        self.values[Self::index(l, m)]
    }

    pub fn lmax(&self) -> usize {
        self.lmax
    }

    /// Refill the table at `x = cos θ`.
    pub fn compute(&mut self, x: f64) {
        let lmax = self.lmax;
        let p = &mut self.values;
        let s = (1.0 - x * x).max(0.0).sqrt();
        p[0] = 0.5 / PI.sqrt();
        for m in 1..=lmax {
            let mf = m as f64;
            p[Self::index(m, m)] = ((2.0 * mf + 1.0) / (2.0 * mf)).sqrt() * s * p[Self::index(m - 1, m - 1)];
        }
        for m in 0..lmax {
            let mf = m as f64;
            p[Self::index(m + 1, m)] = (2.0 * mf + 3.0).sqrt() * x * p[Self::index(m, m)];
        }
        for m in 0..=lmax {
            let m2 = (m * m) as f64;
            for l in (m + 2)..=lmax {
                let lf = l as f64;
                let l1 = lf - 1.0;
                let a = ((4.0 * lf * lf - 1.0) / (lf * lf - m2)).sqrt();
                let b = ((l1 * l1 - m2) / (4.0 * l1 * l1 - 1.0)).sqrt();
                p[Self::index(l, m)] = a * (x * p[Self::index(l - 1, m)] - b * p[Self::index(l - 2, m)]);
            }
        }
    }
}

/// Real L²(Sⁿ)-orthonormal spherical-harmonic basis on S¹ or S² up to degree `lmax`.
///
/// Basis functions are ordered by degree ℓ ascending, then by label j:
/// on S¹, ℓ = 0 has the constant and ℓ ≥ 1 has (cos ℓθ, sin ℓθ)/√π;
/// on S², j = 0 is the m = 0 function and j = 2m−1, 2m are the cos mφ and sin mφ
/// functions of order m.
#[derive(Debug, Clone)]
pub struct SphericalHarmonicBasis {
    n: u32,
    lmax: usize,
}

impl SphericalHarmonicBasis {
    pub fn new(n: u32, lmax: usize) -> Result<Self> {
        Self::with_cap(n, lmax, DEFAULT_BASIS_CAP)
    }

    pub fn with_cap(n: u32, lmax: usize, cap: usize) -> Result<Self> {
        if !(1..=2).contains(&n) {
            return Err(Error::Capability(format!("full harmonic basis only on S^1 and S^2, got n = {n}")));
        }
        if lmax > cap {
            return Err(Error::Capability(format!("degree {lmax} exceeds basis cap {cap}")));
        }
        Ok(Self { n, lmax })
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn lmax(&self) -> usize {
        self.lmax
    }

    /// Index of the first basis function of degree `l`.
    pub fn degree_offset(&self, l: usize) -> usize {
        match (self.n, l) {
            (_, 0) => 0,
            (1, l) => 2 * l - 1,
            (_, l) => l * l,
        }
    }

    pub fn degree_len(&self, l: usize) -> usize {
        match (self.n, l) {
            (_, 0) => 1,
            (1, _) => 2,
            (_, l) => 2 * l + 1,
        }
    }

    pub fn len(&self) -> usize {
        self.degree_offset(self.lmax) + self.degree_len(self.lmax)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Evaluates every basis function at a unit vector of R^{n+1}.
    pub fn eval(&self, point: &[f64]) -> Result<Vec<f64>> {
        let mut out = vec![0.0; self.len()];
        self.eval_into(point, &mut out)?;
        Ok(out)
    }

    pub fn eval_into(&self, point: &[f64], out: &mut [f64]) -> Result<()> {
        check_unit_vector(point, self.n as usize + 1)?;
        assert_eq!(out.len(), self.len());
        match self.n {
            1 => {
                let theta = point[1].atan2(point[0]);
                out[0] = 1.0 / (2.0 * PI).sqrt();
                let c = 1.0 / PI.sqrt();
                for l in 1..=self.lmax {
                    let (s, co) = (l as f64 * theta).sin_cos();
                    out[2 * l - 1] = c * co;
                    out[2 * l] = c * s;
                }
            }
            _ => {
                let mut table = NormalizedLegendre::new(self.lmax);
                table.compute(point[2]);
                let phi = point[1].atan2(point[0]);
                let (cos_m, sin_m) = azimuthal_tables(self.lmax, phi);
                let r2 = std::f64::consts::SQRT_2;
                for l in 0..=self.lmax {
                    let base = l * l;
                    out[base] = table.get(l, 0);
                    for m in 1..=l {
                        let p = r2 * table.get(l, m);
                        out[base + 2 * m - 1] = p * cos_m[m];
                        out[base + 2 * m] = p * sin_m[m];
                    }
                }
            }
        }
        Ok(())
    }
}

/// cos(mφ), sin(mφ) for m = 0..=mmax by angle-addition recurrence.
pub fn azimuthal_tables(mmax: usize, phi: f64) -> (Vec<f64>, Vec<f64>) {
    let mut c = vec![1.0; mmax + 1];
    let mut s = vec![0.0; mmax + 1];
    let (s1, c1) = phi.sin_cos();
    for m in 1..=mmax {
        // resync every 32 steps to bound drift
        if m % 32 == 0 {
            let (sm, cm) = (m as f64 * phi).sin_cos();
            c[m] = cm;
            s[m] = sm;
        } else {
            c[m] = c[m - 1] * c1 - s[m - 1] * s1;
            s[m] = s[m - 1] * c1 + c[m - 1] * s1;
        }
    }
    (c, s)
}

pub(crate) fn check_unit_vector(point: &[f64], dim: usize) -> Result<()> {
    if point.len() != dim {
        return Err(Error::Domain(format!("expected a point in R^{dim}, got length {}", point.len())));
    }
    let norm = point.iter().map(|x| x * x).sum::<f64>().sqrt();
    if (norm - 1.0).abs() > 1e-9 {
        return Err(Error::Domain(format!("point is not on the unit sphere (norm {norm})")));
    }
    Ok(())
}

fn rgamma(z: f64) -> f64 {
    if z <= 0.0 && z == z.floor() {
        0.0
    } else {
        1.0 / gamma(z)
    }
}

fn bessel_j_series(nu: f64, x: f64) -> f64 {
    let h = 0.5 * x;
    let h2 = h * h;
    let mut sum = 0.0;
    let mut k = 0usize;
    // (x/2)^ν handled once; terms carry (−h²)^k/(k! Γ(k+ν+1))
    let mut power = 1.0;
    let mut kfact = 1.0;
    loop {
        let term = power / kfact * rgamma(k as f64 + nu + 1.0);
        sum += term;
        if k > 5 && term.abs() < 1e-17 * sum.abs().max(1e-300) {
            break;
        }
        if k > 300 {
            break;
        }
        k += 1;
        power *= -h2;
        kfact *= k as f64;
    }
    sum * h.powf(nu)
}

fn bessel_j_integer_miller(order: i64, x: f64) -> f64 {
    let n = order.unsigned_abs() as usize;
    let start = 2 * ((n.max(x as usize) + 30 + (x.sqrt() * 10.0) as usize) / 2);
    let (mut jp1, mut j) = (0.0_f64, 1e-30_f64);
    let mut norm = 0.0;
    let mut result = 0.0;
    for k in (1..=start).rev() {
        let jm1 = 2.0 * k as f64 / x * j - jp1;
        jp1 = j;
        j = jm1;
        if j.abs() > 1e250 {
            j *= 1e-250;
            jp1 *= 1e-250;
            norm *= 1e-250;
            result *= 1e-250;
        }
        let idx = k - 1;
        if idx == n {
            result = j;
        }
        if idx > 0 && idx % 2 == 0 {
            norm += 2.0 * j;
        }
    }
    norm += j;
    let v = result / norm;
    if order < 0 && n % 2 == 1 {
        -v
    } else {
        v
    }
}

fn bessel_j_half_integer(k: i64, x: f64) -> f64 {
    // J_{k+1/2}(x) = √(2x/π)·j_k(x), spherical Bessel j_k.
    let pref = (2.0 * x / PI).sqrt();
    match k {
        -1 => pref * x.cos() / x,
        0 => pref * x.sin() / x,
        _ => {
            let k = k as usize;
            let start = k + 30 + x as usize;
            let (mut jp1, mut j) = (0.0_f64, 1e-30_f64);
            let mut want = 0.0;
            let mut j1 = 0.0;
            for i in (1..=start).rev() {
                let jm1 = (2.0 * i as f64 + 1.0) / x * j - jp1;
                jp1 = j;
                j = jm1;
                if j.abs() > 1e250 {
                    j *= 1e-250;
                    jp1 *= 1e-250;
                    want *= 1e-250;
                    j1 *= 1e-250;
                }
                if i - 1 == k {
                    want = j;
                }
                if i - 1 == 1 {
                    j1 = j;
                }
            }
            let (s, c) = x.sin_cos();
            let exact0 = s / x;
            let exact1 = s / (x * x) - c / x;
            let scale = if exact0.abs() > exact1.abs() { exact0 / j } else { exact1 / j1 };
            pref * want * scale
        }
    }
}

/// Bessel function of the first kind J_ν(x), x > 0.
///
/// Ascending series below x = 12; backward recurrence above for integer and
/// half-integer orders. Accuracy target is about 1e−10 at modest arguments.
pub fn bessel_j(nu: f64, x: f64) -> f64 {
    if x == 0.0 {
        return if nu == 0.0 { 1.0 } else if nu > 0.0 { 0.0 } else { f64::INFINITY };
    }
    if nu < 0.0 && nu == nu.floor() {
        let sign = if (nu as i64) % 2 == 0 { 1.0 } else { -1.0 };
        return sign * bessel_j(-nu, x);
    }
    if x < 12.0 {
        return bessel_j_series(nu, x);
    }
    if nu == nu.floor() {
        return bessel_j_integer_miller(nu as i64, x);
    }
    let twice = 2.0 * nu;
    if twice == twice.floor() {
        return bessel_j_half_integer((nu - 0.5).round() as i64, x);
    }
    bessel_j_series(nu, x)
}

/// J_ν′(x) = (J_{ν−1}(x) − J_{ν+1}(x))/2.
pub fn bessel_j_prime(nu: f64, x: f64) -> f64 {
    0.5 * (bessel_j(nu - 1.0, x) - bessel_j(nu + 1.0, x))
}

fn bisect<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64, tol: f64) -> f64 {
    let mut flo = f(lo);
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        let fm = f(mid);
        if fm == 0.0 {
            return mid;
        }
        if (fm > 0.0) == (flo > 0.0) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// yₙ: the first local minimum of J_{(n−2)/2} on (0, ∞).
pub fn bessel_first_min(n: u32) -> f64 {
    let nu = 0.5 * (f64::from(n) - 2.0);
    let step = 1e-2;
    let j = |x: f64| bessel_j(nu, x);
    let jp = |x: f64| bessel_j_prime(nu, x);

    let mut x = step;
    while !(j(x) > 0.0 && j(x + step) <= 0.0) {
        x += step;
    }
    let zero = bisect(j, x, x + step, 1e-13);

    // past the first zero J decreases; the minimum is the first sign change of J′ to positive
    let mut x = zero;
    while !(jp(x) < 0.0 && jp(x + step) >= 0.0) {
        x += step;
    }
    bisect(jp, x, x + step, 1e-12)
}
