//! Acceptance checks, one function per criterion.
//!
//! Each check reports pass/fail with a one-line detail. `Scale::quick()`
//! shrinks sample counts for a fast smoke run; tolerances never change.

use std::time::Instant;

use serde::Serialize;

use crate::barrier::{barrier_margins, estimate_omega_probability, BarrierConfig};
use crate::census::{joint_census, run_census, GridParams, Observable};
use crate::covariance::{covariance_fn, one_minus_b_inv, rescaled_kernel_check, slice_parameter};
use crate::ensemble::{make_harmonic, make_kostlan, make_rfs, EnsembleFamily};
use crate::error::Result;
use crate::rmt::{expected_minima, i_asymptotic, i_integral, leading_coeff_bound, minima_power_law_check, ISource};

pub const CRITERIA: [u32; 13] = [1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12, 13];

/// Sample and trial counts used by the checks.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Scale {
    pub goe_samples: u64,
    pub circle_trials: u64,
    pub slice_trials: u64,
    pub census_trials: u64,
    pub barrier_trials: u64,
    pub power_law_samples: u64,
    /// Criterion 9 is skipped when false.
    pub run_census: bool,
}

impl Scale {
    pub fn full() -> Self {
        Self {
            goe_samples: 400_000,
            circle_trials: 2000,
            slice_trials: 1000,
            census_trials: 300,
            barrier_trials: 1000,
            power_law_samples: 100_000,
            run_census: true,
        }
    }

    pub fn quick() -> Self {
        Self {
            goe_samples: 100_000,
            circle_trials: 500,
            slice_trials: 200,
            census_trials: 0,
            barrier_trials: 300,
            power_law_samples: 30_000,
            run_census: false,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Outcome {
    pub id: u32,
    pub title: &'static str,
    /// None when the check was skipped at this scale.
    pub passed: Option<bool>,
    pub detail: String,
    pub seconds: f64,
}

impl Outcome {
    pub fn line(&self) -> String {
        let status = match self.passed {
            Some(true) => "PASS",
            Some(false) => "FAIL",
            None => "SKIP",
        };
        format!("[{status}] criterion {:>2} {}: {} ({:.1}s)", self.id, self.title, self.detail, self.seconds)
    }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn title(id: u32) -> &'static str {
    match id {
        1 => "GOE convention",
        2 => "Kostlan covariance",
        3 => "exact slice parameters",
        4 => "circle zero counts",
        5 => "slice identity on S^2",
        6 => "minima formula constants",
        7 => "B asymptotics",
        8 => "leading-coefficient bounds",
        9 => "nodal census properties",
        10 => "barrier lower bound",
        11 => "rescaled kernel",
        12 => "minima power law",
        13 => "asymptotic I formula",
        _ => "unknown",
    }
}

/// Runs criterion `id` at `scale` with base seed `seed`.
pub fn run_criterion(id: u32, scale: &Scale, seed: u64) -> Outcome {
    let start = Instant::now();
    let result = match id {
        1 => goe_convention(scale, seed),
        2 => kostlan_covariance(),
        3 => exact_slice_parameters(),
        4 => circle_zero_counts(scale, seed),
        5 => slice_identity(scale, seed),
        6 => minima_constants(scale, seed),
        7 => b_asymptotics(),
        8 => coefficient_bounds(scale, seed),
        9 if !scale.run_census => Ok((None, "skipped at this scale".to_string())),
        9 => census_properties(scale, seed),
        10 => barrier_lower_bound(scale, seed),
        11 => rescaled_kernel(),
        12 => power_law(scale, seed),
        13 => asymptotic_i(scale, seed),
        other => Ok((Some(false), format!("no criterion {other}"))),
    };
    let seconds = start.elapsed().as_secs_f64();
    let (passed, detail) = match result {
        Ok((passed, detail)) => (passed, detail),
        Err(e) => (Some(false), format!("error: {e}")),
    };
    let (passed, detail) = match (id, passed) {
        (1, Some(true)) if seconds >= 60.0 => (Some(false), format!("{detail}; runtime {seconds:.1}s ≥ 60s")),
        (4, Some(true)) if seconds >= 120.0 => (Some(false), format!("{detail}; runtime {seconds:.1}s ≥ 120s")),
        (9, Some(true)) if seconds >= 900.0 => (Some(false), format!("{detail}; runtime {seconds:.1}s ≥ 900s")),
        other => (other.1, detail),
    };
    Outcome { id, title: title(id), passed, detail, seconds }
}

pub fn run_all(scale: &Scale, seed: u64) -> Vec<Outcome> {
    CRITERIA.iter().map(|&id| run_criterion(id, scale, seed)).collect()
}

type Check = Result<(Option<bool>, String)>;

fn goe_convention(scale: &Scale, seed: u64) -> Check {
    let i2 = i_integral(2, 1.0, scale.goe_samples, seed)?;
    let i3 = i_integral(3, 1.0, scale.goe_samples, seed.wrapping_add(1))?;
    let t2 = 3f64.sqrt() / (2.0 * 2f64.sqrt());
    let t3 = 1.0 / 6f64.sqrt();
    let (e2, e3) = (rel(i2.value, t2), rel(i3.value, t3));
    Ok((
        Some(e2 < 0.01 && e3 < 0.01),
        format!("I2 = {:.5} (rel err {e2:.2e}), I3 = {:.5} (rel err {e3:.2e}), tol 1%", i2.value, i3.value),
    ))
}

fn kostlan_covariance() -> Check {
    let mut worst = 0.0_f64;
    for (n, d) in [(1u32, 20usize), (2, 11), (3, 8)] {
        let e = make_kostlan(n, d)?;
        let f1 = covariance_fn(&e, 1.0)?;
        for i in 0..200 {
            let t = -1.0 + 2.0 * i as f64 / 199.0;
            worst = worst.max((covariance_fn(&e, t)? / f1 - t.powi(d as i32)).abs());
        }
    }
    Ok((Some(worst < 1e-8), format!("max |F(t)/F(1) - t^d| = {worst:.2e}, tol 1e-8")))
}

fn exact_slice_parameters() -> Check {
    let mut rfs_worst = 0.0_f64;
    let mut kostlan_worst = 0.0_f64;
    for d in 1..=100usize {
        let df = d as f64;
        let two_delta = 2.0 * slice_parameter(&make_rfs(1, d)?);
        rfs_worst = rfs_worst.max(rel(two_delta, 2.0 * (df * (df + 1.0) / 3.0).sqrt()));
        for n in 1..=3u32 {
            kostlan_worst = kostlan_worst.max(rel(slice_parameter(&make_kostlan(n, d)?), df.sqrt()));
        }
    }
    Ok((
        Some(rfs_worst < 1e-10 && kostlan_worst < 1e-10),
        format!(
            "RFS n=1 2δ vs 2√(d(d+1)/3): max rel err {rfs_worst:.2e}; Kostlan δ vs √d: max rel err {kostlan_worst:.2e}; tol 1e-10"
        ),
    ))
}

fn circle_zero_counts(scale: &Scale, seed: u64) -> Check {
    let params = GridParams::default();
    let k = run_census(&make_kostlan(1, 25)?, Observable::CircleZeros, scale.circle_trials, seed, params)?;
    let r = run_census(&make_rfs(1, 25)?, Observable::CircleZeros, scale.circle_trials, seed.wrapping_add(1), params)?;
    let (ks, rs) = (k.stderr.unwrap_or(0.0), r.stderr.unwrap_or(0.0));
    let k_ok = (k.mean - 10.0).abs() <= 3.0 * ks;
    let r_ok = (r.mean - 29.44).abs() <= 3.0 * rs;
    Ok((
        Some(k_ok && r_ok),
        format!(
            "Kostlan mean {:.3} ± {ks:.3} vs 10 ({}); RFS mean {:.3} ± {rs:.3} vs 29.44 ({})",
            k.mean,
            if k_ok { "ok" } else { "off" },
            r.mean,
            if r_ok { "ok" } else { "off" }
        ),
    ))
}

fn slice_identity(scale: &Scale, seed: u64) -> Check {
    let e = make_rfs(2, 20)?;
    let rep = run_census(&e, Observable::SliceZeros, scale.slice_trials, seed, GridParams::default())?;
    let two_delta = 2.0 * slice_parameter(&e);
    let se = rep.stderr.unwrap_or(0.0);
    Ok((
        Some((rep.mean - two_delta).abs() <= 3.0 * se && !rep.unreliable),
        format!("equator zeros {:.3} ± {se:.3} vs 2δ = {two_delta:.4}, within 3 SE", rep.mean),
    ))
}

fn minima_constants(scale: &Scale, seed: u64) -> Check {
    let s = scale.goe_samples;
    let a = expected_minima(&make_rfs(2, 300)?, s, seed)?;
    let b = expected_minima(&make_harmonic(2, 300)?, s, seed)?;
    let c = expected_minima(&make_rfs(1, 300)?, s, seed)?;
    let h = expected_minima(&make_harmonic(1, 200)?, s, seed)?;
    let rows = [
        ("RFS n=2 minima/d²", a.minima_full / 300f64.powi(2), 1.0 / (3.0 * 3f64.sqrt()), 0.03),
        ("harmonic n=2 extrema/d²", b.extrema_full / 300f64.powi(2), 1.0 / 3f64.sqrt(), 0.03),
        ("RFS n=1 extrema/d", c.extrema_full / 300.0, 2.0 * 0.6f64.sqrt(), 0.03),
        ("harmonic n=1 extrema/d", h.extrema_full / 200.0, 2.0, 0.02),
    ];
    let ok = rows.iter().all(|(_, v, t, tol)| rel(*v, *t) < *tol);
    let detail = rows
        .iter()
        .map(|(name, v, t, tol)| format!("{name} {v:.4} vs {t:.4} (tol {:.0}%)", tol * 100.0))
        .collect::<Vec<_>>()
        .join("; ");
    Ok((Some(ok), detail))
}

fn b_asymptotics() -> Check {
    let d2 = 500f64.powi(2);
    let rfs = one_minus_b_inv(&make_rfs(2, 500)?)? / d2;
    let harm = one_minus_b_inv(&make_harmonic(2, 500)?)? / d2;
    let (er, eh) = (rel(rfs, 1.0 / 12.0), rel(harm, 1.0 / 8.0));
    Ok((
        Some(er < 0.02 && eh < 0.01),
        format!("RFS (1-B)^-1/d² = {rfs:.5} vs 1/12 (err {er:.2e}, tol 2%); harmonic {harm:.5} vs 1/8 (err {eh:.2e}, tol 1%)"),
    ))
}

fn coefficient_bounds(scale: &Scale, seed: u64) -> Check {
    let mc = ISource::MonteCarlo { samples: scale.goe_samples, seed };
    let targets = [(EnsembleFamily::Kostlan, 2.0 / 3f64.sqrt()), (EnsembleFamily::Rfs, 1.0 / (3.0 * 3f64.sqrt()))];
    let mut ok = true;
    let mut parts = Vec::new();
    for (family, target) in targets {
        let m = leading_coeff_bound(&family, 2, mc)?.bound_projective;
        let c = leading_coeff_bound(&family, 2, ISource::ClosedForm)?.bound_projective;
        let (em, ec) = (rel(m, target), rel(c, target));
        ok &= em < 0.015 && ec < 1e-12;
        parts.push(format!("{} MC {m:.5} (err {em:.2e}), closed {c:.10} (err {ec:.1e}) vs {target:.5}", family.kind()));
    }
    Ok((Some(ok), parts.join("; ")))
}

fn census_properties(scale: &Scale, seed: u64) -> Check {
    let params = GridParams::default();

    // (a) components ≤ minima + maxima
    let joint = joint_census(&make_rfs(2, 12)?, scale.census_trials, seed, params)?;
    let unflagged: Vec<_> = joint.iter().filter(|j| !j.flagged).collect();
    let violations = unflagged.iter().filter(|j| j.components > j.minima + j.maxima).count();
    let a_ok = violations == 0 && !unflagged.is_empty();

    // (b) grid doubling at paired seeds
    let e12 = make_rfs(2, 12)?;
    let trials_b = (scale.census_trials * 5 / 3).max(2);
    let coarse = run_census(&e12, Observable::NodalComponents, trials_b, seed.wrapping_add(1), params)?;
    let fine_params = GridParams { factor: 2 * params.factor, resolution: None };
    let fine = run_census(&e12, Observable::NodalComponents, trials_b, seed.wrapping_add(1), fine_params)?;
    let change = rel(fine.mean, coarse.mean);
    let b_ok = change < 0.02;

    // (c), (d) growth at d ∈ {8, 12, 16}
    let trials_c = (scale.census_trials * 2 / 3).max(2);
    let mut per_d2 = Vec::new();
    for d in [8usize, 12, 16] {
        let rep = run_census(&make_rfs(2, d)?, Observable::NodalComponents, trials_c, seed.wrapping_add(d as u64), params)?;
        per_d2.push(rep.mean / (d * d) as f64);
    }
    let c_ok = per_d2.windows(2).all(|w| rel(w[1], w[0]) < 0.3);
    let target = 2.0 * 0.0195;
    let ratio = per_d2[2] / target;
    let d_ok = (0.5..=2.0).contains(&ratio);

    Ok((
        Some(a_ok && b_ok && c_ok && d_ok),
        format!(
            "(a) {violations} violations in {} unflagged trials; (b) doubling change {:.2}% (tol 2%); (c) components/d² = {:.4}, {:.4}, {:.4}; (d) d=16 ratio to 0.039 = {ratio:.3}",
            unflagged.len(),
            change * 100.0,
            per_d2[0],
            per_d2[1],
            per_d2[2]
        ),
    ))
}

fn barrier_lower_bound(scale: &Scale, seed: u64) -> Check {
    let cfg = BarrierConfig::default();
    let mut probs = Vec::new();
    for d in [20usize, 40, 80] {
        let est = estimate_omega_probability(&make_rfs(2, d)?, &cfg, scale.barrier_trials, seed.wrapping_add(d as u64))?;
        probs.push(est.p_omega);
    }
    let margins = barrier_margins(|d| make_rfs(2, d), &cfg, &[20, 40, 80])?;
    let signs = margins.entries.iter().all(|m| m.m_plus > 0.0 && m.m_minus < 0.0);
    let p_ok = probs.iter().all(|&p| p >= 0.005);
    Ok((
        Some(p_ok && signs && margins.common_margin.is_some()),
        format!(
            "P(Ω) at d=20,40,80: {:.4}, {:.4}, {:.4} (need ≥ 0.005); common margin {}",
            probs[0],
            probs[1],
            probs[2],
            margins.common_margin.map_or("none".into(), |c| format!("{c:.4}"))
        ),
    ))
}

fn rescaled_kernel() -> Check {
    let k = rescaled_kernel_check(&make_rfs(1, 400)?, 20.0, 2000)?;
    Ok((
        Some(k.sup_distance < 0.05),
        format!("sup distance {:.4} at θ = {:.3} (tol 0.05)", k.sup_distance, k.worst_theta),
    ))
}

fn power_law(scale: &Scale, seed: u64) -> Check {
    let mut ok = true;
    let mut parts = Vec::new();
    for family in [EnsembleFamily::Rfs, EnsembleFamily::Kostlan] {
        let rep = minima_power_law_check(&family, 2, &[100, 200, 400], scale.power_law_samples, seed)?;
        ok &= rep.spread < 0.05;
        parts.push(format!("{} spread {:.2}%", family.kind(), rep.spread * 100.0));
    }
    Ok((Some(ok), format!("{} (tol 5%)", parts.join(", "))))
}

fn asymptotic_i(scale: &Scale, seed: u64) -> Check {
    let g = i_asymptotic(10);
    let mc = i_integral(10, 1.0, scale.goe_samples / 4, seed)?;
    let err = rel(g, mc.value);
    Ok((Some(err < 0.25), format!("g10 = {g:.4e}, MC I10 = {:.4e} (rel diff {err:.3}, tol 0.25)", mc.value)))
}
