//! Covariance kernel F(t) = E[f(x)f(y)], t = ⟨x, y⟩, and the scalars derived from
//! its behaviour at t = 1.
//!
//! F carries the |Sⁿ|⁻¹ factor from the addition formula. B, δ and δ′ are
//! ratios and do not depend on that normalization.

use serde::{Deserialize, Serialize};

use crate::ensemble::EnsembleSpec;
use crate::error::{Error, Result};
use crate::quad;
use crate::specfun::{
    gegenbauer_deriv1_at1, gegenbauer_deriv2_at1, gegenbauer_normalized_table, harmonic_dim_f64, sphere_surface,
};
use crate::stats::compensated_sum;

/// Per-degree factor p² d(n,ℓ)/|Sⁿ|.
fn level_weight(e: &EnsembleSpec, l: usize, p: f64) -> f64 {
    p * p * harmonic_dim_f64(e.n(), l as u32) / sphere_surface(e.n())
}

/// F(t) = Σ p_d(ℓ)² (d(n,ℓ)/|Sⁿ|) C̃_ℓ(t).
pub fn covariance_fn(e: &EnsembleSpec, t: f64) -> Result<f64> {
    let table = gegenbauer_normalized_table(e.n(), e.max_degree(), t)?;
    Ok(compensated_sum(e.support().map(|(l, p)| level_weight(e, l, p) * table[l])))
}

/// (F′(1), F″(1)).
pub fn covariance_derivs(e: &EnsembleSpec) -> (f64, f64) {
    let n = e.n();
    let f1 = compensated_sum(e.support().map(|(l, p)| level_weight(e, l, p) * gegenbauer_deriv1_at1(n, l)));
    let f2 = compensated_sum(e.support().map(|(l, p)| level_weight(e, l, p) * gegenbauer_deriv2_at1(n, l)));
    (f1, f2)
}

fn checked_derivs(e: &EnsembleSpec) -> Result<(f64, f64)> {
    let (f1, f2) = covariance_derivs(e);
    if f1 <= 0.0 {
        return Err(Error::Degenerate("F′(1) = 0: all mass sits on ℓ = 0".into()));
    }
    Ok((f1, f2))
}

/// B = (F″(1) − F′(1))/(F″(1) + F′(1)).
pub fn rmt_b(e: &EnsembleSpec) -> Result<f64> {
    let (f1, f2) = checked_derivs(e)?;
    Ok((f2 - f1) / (f2 + f1))
}

/// (1 − B)⁻¹, evaluated as (F1 + F2)/(2 F1).
pub fn one_minus_b_inv(e: &EnsembleSpec) -> Result<f64> {
    let (f1, f2) = checked_derivs(e)?;
    Ok((f1 + f2) / (2.0 * f1))
}

/// δ = √(Σ ℓ(ℓ+n−1) d(n,ℓ) p² / (n Σ d(n,ℓ) p²)).
pub fn slice_parameter(e: &EnsembleSpec) -> f64 {
    let n = e.n();
    let nf = f64::from(n);
    let num = compensated_sum(e.support().map(|(l, p)| {
        let lf = l as f64;
        lf * (lf + nf - 1.0) * harmonic_dim_f64(n, l as u32) * p * p
    }));
    let den = compensated_sum(e.support().map(|(l, p)| harmonic_dim_f64(n, l as u32) * p * p));
    (num / (nf * den)).sqrt()
}

/// δ′ with 2δ′² = (1 − B)⁻¹.
pub fn slice_parameter_prime(e: &EnsembleSpec) -> Result<f64> {
    Ok((0.5 * one_minus_b_inv(e)?).sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CovarianceSummary {
    #[serde(rename = "F1")]
    pub f1: f64,
    #[serde(rename = "F2")]
    pub f2: f64,
    #[serde(rename = "B")]
    pub b: f64,
    pub one_minus_b_inv: f64,
    pub delta: f64,
    pub delta_prime: f64,
}

impl CovarianceSummary {
    pub fn compute(e: &EnsembleSpec) -> Result<Self> {
        let (f1, f2) = checked_derivs(e)?;
        let one_minus_b_inv = (f1 + f2) / (2.0 * f1);
        Ok(Self {
            f1,
            f2,
            b: (f2 - f1) / (f2 + f1),
            one_minus_b_inv,
            delta: slice_parameter(e),
            delta_prime: (0.5 * one_minus_b_inv).sqrt(),
        })
    }
}

/// r_{(d−ℓ)/2} = p_d(ℓ)·√(d(n,ℓ)/|Sⁿ|), indexed by i = (d−ℓ)/2.
pub fn weights_to_r(e: &EnsembleSpec) -> Vec<f64> {
    let s = sphere_surface(e.n());
    e.admissible_degrees().map(|l| e.weight(l) * (harmonic_dim_f64(e.n(), l as u32) / s).sqrt()).collect()
}

/// Inverse of [`weights_to_r`]: raw (unnormalized) weights indexed by ℓ = 0..=d.
pub fn r_to_weights(n: u32, d: usize, r: &[f64]) -> Result<Vec<f64>> {
    if r.len() != d / 2 + 1 {
        return Err(Error::InvalidInput(format!("expected {} coefficients r_i, got {}", d / 2 + 1, r.len())));
    }
    let s = sphere_surface(n);
    let mut w = vec![0.0; d + 1];
    for (i, &ri) in r.iter().enumerate() {
        let l = d - 2 * i;
        w[l] = ri * (s / harmonic_dim_f64(n, l as u32)).sqrt();
    }
    Ok(w)
}

#[derive(Debug, Clone, Serialize)]
pub struct KernelCheck {
    pub d: usize,
    pub lambda: f64,
    pub theta_max: f64,
    pub grid: usize,
    pub sup_distance: f64,
    pub worst_theta: f64,
}

/// Normalized cosine transform k(θ) = ∫ψ²cos(xθ) / ∫ψ².
pub fn cosine_transform(psi: &crate::ensemble::Psi, theta: f64) -> Result<f64> {
    let end = psi.integration_cutoff(0.0);
    let bp = psi.breakpoints();
    let mass = quad::integrate(|x| psi.eval(x).powi(2), 0.0, end, &bp, 1e-12)?.value;
    let v = quad::integrate(|x| psi.eval(x).powi(2) * (x * theta).cos(), 0.0, end, &bp, 1e-12)?.value;
    Ok(v / mass)
}

/// sup over θ ∈ [0, θ_max] of |F(cos(θ/d^λ))/F(1) − k(θ)| on the circle.
pub fn rescaled_kernel_check(e: &EnsembleSpec, theta_max: f64, grid: usize) -> Result<KernelCheck> {
    if e.n() != 1 {
        return Err(Error::Capability("the rescaled-kernel check is implemented on the circle only".into()));
    }
    let psi = match e.psi() {
        Some(psi) if e.is_coherent_kind() => psi,
        _ => return Err(Error::Capability(format!("{} ensemble has no rescaling limit", e.kind()))),
    };
    if grid == 0 || !(theta_max > 0.0) {
        return Err(Error::InvalidInput("need a positive θ range and grid size".into()));
    }
    let scale = (e.d() as f64).powf(e.lambda());
    let f0 = covariance_fn(e, 1.0)?;
    let mut sup = 0.0_f64;
    let mut worst = 0.0;
    for i in 0..=grid {
        let theta = theta_max * i as f64 / grid as f64;
        let kd = covariance_fn(e, (theta / scale).cos())? / f0;
        let diff = (kd - cosine_transform(psi, theta)?).abs();
        if diff > sup {
            sup = diff;
            worst = theta;
        }
    }
    Ok(KernelCheck { d: e.d(), lambda: e.lambda(), theta_max, grid, sup_distance: sup, worst_theta: worst })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensemble::{make_harmonic, make_kostlan, make_prescribed, make_rfs, EnsembleKind, EnsembleSpec, Psi};
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn close(a: f64, b: f64, rel: f64) -> bool {
        (a - b).abs() <= rel * b.abs().max(1e-300)
    }

    #[test]
    fn harmonic_kernel_is_single_zonal_term() {
        let e = make_harmonic(2, 6).unwrap();
        for &t in &[-0.9, -0.1, 0.4, 1.0] {
            let expect = 13.0 / (4.0 * PI) * crate::specfun::gegenbauer_normalized(2, 6, t).unwrap();
            assert!((covariance_fn(&e, t).unwrap() - expect).abs() < 1e-14);
        }
        assert!(covariance_fn(&e, 1.5).is_err());
    }

    #[test]
    fn harmonic_first_derivative_matches_factorial_form() {
        // |Sⁿ|⁻¹·(n+d−1)!(n+2d−1)/((d−1)! n!) at n = 2, d = 5: 6!·11/(4!·2!) = 165
        let e = make_harmonic(2, 5).unwrap();
        let (f1, _) = covariance_derivs(&e);
        assert!(close(f1, 165.0 / (4.0 * PI), 1e-13));
    }

    #[test]
    fn kostlan_power_law_and_delta() {
        for &(n, d) in &[(1u32, 20usize), (2, 11), (3, 8)] {
            let e = make_kostlan(n, d).unwrap();
            let f0 = covariance_fn(&e, 1.0).unwrap();
            for i in 0..200 {
                let t = -1.0 + 2.0 * i as f64 / 199.0;
                assert!((covariance_fn(&e, t).unwrap() / f0 - t.powi(d as i32)).abs() < 1e-8);
            }
            // F = c·t^d ⇒ F1 = c·d, F2 = c·d(d−1)
            let (f1, f2) = covariance_derivs(&e);
            assert!(close(f1 / f0, d as f64, 1e-12));
            assert!(close(f2 / f0, (d * (d - 1)) as f64, 1e-12));
        }
        for n in 1..=3 {
            for d in 1..=100 {
                let e = make_kostlan(n, d).unwrap();
                assert!((slice_parameter(&e) - (d as f64).sqrt()).abs() < 1e-10, "n={n} d={d}");
            }
        }
    }

    #[test]
    fn delta_for_rfs_circle_by_direct_sum() {
        // weights 1 at ℓ=0 (dimension 1) and 2 at ℓ>0 on the circle
        for d in 1..=100usize {
            let e = make_rfs(1, d).unwrap();
            let (mut num, mut den) = (0.0, 0.0);
            for l in (d % 2..=d).step_by(2) {
                let m = if l == 0 { 1.0 } else { 2.0 };
                num += m * (l * l) as f64;
                den += m;
            }
            let delta = slice_parameter(&e);
            assert!((delta - (num / den).sqrt()).abs() < 1e-10);
            assert!((delta * delta - (d * (d + 2)) as f64 / 3.0).abs() < 1e-9 * (d * d) as f64);
        }
    }

    #[test]
    fn harmonic_delta_closed_form() {
        for n in 1..=4u32 {
            for d in [1usize, 7, 30] {
                let e = make_harmonic(n, d).unwrap();
                let expect = ((d * (d + n as usize - 1)) as f64 / f64::from(n)).sqrt();
                assert!(close(slice_parameter(&e), expect, 1e-13));
            }
        }
    }

    /// G(θ) = F(cos θ) is even with G″(0) = −F1 and G⁗(0) = F1 + 3F2.
    fn fd_derivs(e: &EnsembleSpec) -> (f64, f64) {
        let g = |x: f64| covariance_fn(e, x.cos()).unwrap();
        let g0 = g(0.0);
        let d2 = |h: f64| 2.0 * (g(h) - g0) / (h * h);
        let d4 = |h: f64| (2.0 * g(2.0 * h) - 8.0 * g(h) + 6.0 * g0) / h.powi(4);
        let rich = |f: &dyn Fn(f64) -> f64, h: f64| {
            let (a, b, c) = (f(h), f(2.0 * h), f(4.0 * h));
            let r1 = (4.0 * a - b) / 3.0;
            let r2 = (4.0 * b - c) / 3.0;
            (16.0 * r1 - r2) / 15.0
        };
        let gpp = rich(&d2, 1e-3);
        let g4 = rich(&d4, 4e-3);
        let f1 = -gpp;
        (f1, (g4 - f1) / 3.0)
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let e = make_rfs(2, 40).unwrap();
        let (f1, f2) = covariance_derivs(&e);
        let (g1, g2) = fd_derivs(&e);
        assert!(close(g1, f1, 1e-5), "{g1} vs {f1}");
        assert!(close(g2, f2, 1e-5), "{g2} vs {f2}");
    }

    #[test]
    fn b_examples() {
        let lin = make_rfs(2, 1).unwrap();
        let (_, f2) = covariance_derivs(&lin);
        assert_eq!(f2, 0.0);
        assert!((rmt_b(&lin).unwrap() + 1.0).abs() < 1e-15);

        let w = vec![1.0, 0.0, 0.0];
        let e = EnsembleSpec::from_weights(EnsembleKind::Prescribed, 2, 2, 1.0, w, None).unwrap();
        assert_eq!(covariance_derivs(&e), (0.0, 0.0));
        assert!(matches!(rmt_b(&e), Err(Error::Degenerate(_))));
        assert!(slice_parameter_prime(&e).is_err());
    }

    #[test]
    fn b_asymptotics() {
        let e = make_harmonic(2, 500).unwrap();
        assert!(close(one_minus_b_inv(&e).unwrap() / 500f64.powi(2), 1.0 / 8.0, 0.01));
        let e = make_rfs(2, 500).unwrap();
        assert!(close(one_minus_b_inv(&e).unwrap() / 500f64.powi(2), 1.0 / 12.0, 0.02));
        // profile constant μ_{n+3}/(2(n+2)μ_{n+1})
        for n in [1u32, 2] {
            let d = 500;
            let k = make_kostlan(n, d).unwrap();
            let c = crate::ensemble::moment_ratio(&Psi::kostlan(), n).unwrap() / 2.0;
            assert!(close(one_minus_b_inv(&k).unwrap() / d as f64, c, 0.02));
            let r = make_rfs(n, d).unwrap();
            let c = crate::ensemble::moment_ratio(&Psi::indicator_unit(), n).unwrap() / 2.0;
            assert!(close(one_minus_b_inv(&r).unwrap() / (d * d) as f64, c, 0.02));
        }
        let e = make_rfs(1, 2000).unwrap();
        // (1−B)⁻¹ ~ d²/10, so δ′² ~ d²/20
        assert!(close(slice_parameter_prime(&e).unwrap().powi(2) / 2000f64.powi(2), 0.05, 0.01));
    }

    #[test]
    fn summary_identity_and_json() {
        let e = make_kostlan(2, 9).unwrap();
        let s = CovarianceSummary::compute(&e).unwrap();
        assert!((2.0 * s.delta_prime.powi(2) - s.one_minus_b_inv).abs() < 1e-10);
        assert!(s.b > -1.0 && s.b < 1.0);
        let json = serde_json::to_string(&s).unwrap();
        for key in ["\"F1\"", "\"F2\"", "\"B\"", "one_minus_b_inv", "\"delta\"", "delta_prime"] {
            assert!(json.contains(key), "{json}");
        }
    }

    #[test]
    fn r_conversion_round_trip() {
        let e = make_kostlan(2, 9).unwrap();
        let r = weights_to_r(&e);
        assert_eq!(r.len(), 5);
        let w = r_to_weights(2, 9, &r).unwrap();
        for (l, wl) in w.iter().enumerate() {
            assert!((wl - e.weight(l)).abs() < 1e-14);
        }
        assert!(r_to_weights(2, 9, &r[..3]).is_err());
    }

    #[test]
    fn rescaled_kernel_rfs_and_kostlan() {
        let e = make_rfs(1, 400).unwrap();
        let rep = rescaled_kernel_check(&e, 20.0, 400).unwrap();
        assert!(rep.sup_distance < 0.05, "{rep:?}");
        // ψ = χ_[0,1] ⇒ k(θ) = sin θ/θ
        let k = cosine_transform(&Psi::indicator_unit(), 3.0).unwrap();
        assert!((k - 3f64.sin() / 3.0).abs() < 1e-10);
        assert!((cosine_transform(&Psi::kostlan(), 0.0).unwrap() - 1.0).abs() < 1e-12);

        let e = make_kostlan(1, 400).unwrap();
        let rep = rescaled_kernel_check(&e, 20.0, 400).unwrap();
        assert!(rep.sup_distance < 0.05, "{rep:?}");

        assert!(rescaled_kernel_check(&make_harmonic(1, 40).unwrap(), 20.0, 10).is_err());
        assert!(rescaled_kernel_check(&make_rfs(2, 40).unwrap(), 20.0, 10).is_err());
    }

    proptest! {
        #[test]
        fn scalars_are_scale_invariant(n in 1u32..4, d in 2usize..60, factor in 1e-3f64..1e3) {
            let e = make_prescribed(Psi::kostlan(), 0.5, n, d).unwrap();
            let raw: Vec<f64> = e.weights().iter().map(|w| w * factor).collect();
            let f = EnsembleSpec::from_weights(EnsembleKind::Prescribed, n, d, 0.5, raw, None).unwrap();
            let (a, b) = (CovarianceSummary::compute(&e).unwrap(), CovarianceSummary::compute(&f).unwrap());
            prop_assert!(close(a.b, b.b, 1e-12) || (a.b - b.b).abs() < 1e-14);
            prop_assert!(close(a.delta, b.delta, 1e-12));
            prop_assert!(close(a.delta_prime, b.delta_prime, 1e-12));
        }

        #[test]
        fn b_in_open_interval(n in 1u32..5, d in 2usize..80, which in 0usize..3) {
            let e = match which {
                0 => make_kostlan(n, d).unwrap(),
                1 => make_rfs(n, d).unwrap(),
                _ => make_harmonic(n, d).unwrap(),
            };
            let s = CovarianceSummary::compute(&e).unwrap();
            prop_assert!(s.b > -1.0 && s.b < 1.0);
            prop_assert!(s.delta > 0.0);
            prop_assert!((2.0 * s.delta_prime.powi(2) - s.one_minus_b_inv).abs() <= 1e-10 * s.one_minus_b_inv);
        }
    }
}
