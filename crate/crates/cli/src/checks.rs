//! Invariant battery behind `qescape crosscheck`.

use std::time::Instant;

use quadrant_escape::bvp::{ContourSide, PsiEvaluator};
use quadrant_escape::inversion::{Axis, InversionConfig, Inverter};
use quadrant_escape::kernel::{self, Branch};
use quadrant_escape::oracles::{mc_escape_prob, pde_solve, McConfig, PdeConfig};
use quadrant_escape::{model, Complex64, ModelParams};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use serde::Serialize;

#[derive(Debug, Clone, Serialize)]
pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
    pub seconds: f64,
}

const SKEWED: (f64, f64, f64, f64, f64) = (2.0, 3.0, -0.4, 2.0, 4.0);

fn params(t: (f64, f64, f64, f64, f64)) -> ModelParams {
    ModelParams::new(t.0, t.1, t.2, t.3, t.4).expect("valid fixed parameters")
}

/// Valid parameter sets drawn from a fixed seed.
pub fn random_params(n: usize, seed: u64) -> Vec<ModelParams> {
    let mut rng = StdRng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let r1: f64 = rng.random_range(0.2..5.0);
            let r2 = rng.random_range(1.0..5.0) / r1;
            ModelParams::new(
                rng.random_range(0.2..3.0),
                rng.random_range(0.2..3.0),
                rng.random_range(-0.9..0.9),
                r1,
                r2,
            )
            .expect("sampled inside the valid region")
        })
        .collect()
}

fn run(name: &'static str, f: impl FnOnce() -> Result<(bool, String), String>) -> CheckResult {
    let t = Instant::now();
    let (passed, detail) = f().unwrap_or_else(|e| (false, format!("error: {e}")));
    CheckResult { name, passed, detail, seconds: t.elapsed().as_secs_f64() }
}

fn validation() -> Result<(bool, String), String> {
    let bad = [
        (1.0, 1.0, 0.0, 1.0, 0.5),
        (0.0, 1.0, 0.0, 2.0, 1.0),
        (1.0, 1.0, 1.0, 2.0, 1.0),
        (1.0, 1.0, 0.0, -2.0, -1.0),
        (f64::NAN, 1.0, 0.0, 2.0, 1.0),
    ];
    let rejected = bad.iter().filter(|t| ModelParams::new(t.0, t.1, t.2, t.3, t.4).is_err()).count();
    Ok((rejected == bad.len(), format!("{rejected}/{} invalid sets rejected", bad.len())))
}

fn index_battery() -> Result<(bool, String), String> {
    let mut mismatches = 0;
    let mut worst: f64 = 0.0;
    let sets = random_params(200, 11);
    for p in &sets {
        let ev = PsiEvaluator::new(p).map_err(|e| e.to_string())?;
        let c = &ev.first.contour;
        if c.measured_kappa != ev.first.classification.kappa {
            mismatches += 1;
        }
        worst = worst.max((c.measured_d_plus_delta - ev.first.classification.d_plus_delta).abs());
    }
    Ok((mismatches == 0 && worst <= 1e-9, format!("{mismatches} index mismatches on {} sets, max identity error {worst:.1e}", sets.len())))
}

fn product_form() -> Result<(bool, String), String> {
    let p = params((1.0, 1.0, 0.0, 2.0, 0.5));
    let inv = Inverter::with_bvp(&p, InversionConfig::default()).map_err(|e| e.to_string())?;
    let mut worst: f64 = 0.0;
    for k in 1..=5 {
        let u = 0.5 * k as f64;
        let got = inv.absorption_prob_axis(u, Axis::Horizontal).map_err(|e| e.to_string())?;
        worst = worst.max((got.p_absorb - (-2.4 * u).exp()).abs());
    }
    Ok((worst <= 1e-6, format!("max |error| {worst:.1e} at 5 points")))
}

fn boundary_condition() -> Result<(bool, String), String> {
    let ev = PsiEvaluator::new(&params(SKEWED)).map_err(|e| e.to_string())?.first;
    let mut worst: f64 = 0.0;
    for k in 0..10 {
        let y = ev.kernel.y_plus + 0.05 + 0.6 * k as f64 * (1.0 + 0.4 * k as f64);
        let up = ev.psi1_on_contour(y, ContourSide::Upper).map_err(|e| e.to_string())?;
        let low = ev.psi1_on_contour(y, ContourSide::Lower).map_err(|e| e.to_string())?;
        let g = ev.g_at(y).map_err(|e| e.to_string())?;
        worst = worst.max((low - g * up).norm() / low.norm());
    }
    Ok((worst <= 1e-7, format!("max relative residual {worst:.1e} at 10 nodes")))
}

fn continuation() -> Result<(bool, String), String> {
    let p = params(SKEWED);
    let ev = PsiEvaluator::new(&p).map_err(|e| e.to_string())?;
    let mut worst: f64 = 0.0;
    let mut count = 0;
    for k in 0..10 {
        let x = Complex64::new(0.3 + 0.4 * k as f64, 0.5 * k as f64);
        let Ok(y) = kernel::branch_y(&p, x, Branch::Plus) else { continue };
        if y.re <= 0.0 || ev.first.depth(x) <= 0.0 || ev.second.depth(y) <= 0.0 {
            continue;
        }
        let a = ev.first.psi1_formula(x).map_err(|e| e.to_string())?;
        let b = ev.second.psi1_formula(y).map_err(|e| e.to_string())?;
        let kv = kernel::kernel_eval(&p, x, y);
        worst = worst.max((kv.k1 * a + kv.k2 * b).norm() / (kv.k1 * a).norm());
        count += 1;
    }
    Ok((count >= 5 && worst <= 1e-7, format!("max relative defect {worst:.1e} at {count} points")))
}

fn residue_and_symmetry() -> Result<(bool, String), String> {
    let ev = PsiEvaluator::new(&params(SKEWED)).map_err(|e| e.to_string())?;
    let x = 1e-3;
    let r = (ev.psi1(Complex64::new(x, 0.0)).map_err(|e| e.to_string())? * x - 1.0).norm();
    let z = Complex64::new(0.7, 2.3);
    let a = ev.psi1(z).map_err(|e| e.to_string())?;
    let b = ev.psi1(z.conj()).map_err(|e| e.to_string())?;
    let sym = (a.conj() - b).norm() / a.norm();
    Ok((r <= 10.0 * x && sym <= 1e-12, format!("|x psi1 - 1| = {r:.1e} at x = 1e-3, conjugation defect {sym:.1e}")))
}

fn complementarity() -> Result<(bool, String), String> {
    let p = params(SKEWED);
    let inv = Inverter::new(&p, InversionConfig::default()).map_err(|e| e.to_string())?;
    let mut prev = f64::INFINITY;
    let mut monotone = true;
    for k in 1..=6 {
        let u = 0.25 * k as f64;
        let pr = inv.absorption_prob_axis(u, Axis::Horizontal).map_err(|e| e.to_string())?;
        monotone &= pr.p_absorb < prev && pr.p_absorb + pr.p_escape == 1.0 && !pr.clamped;
        prev = pr.p_absorb;
    }
    Ok((monotone, "absorption decreasing in u, sums to one, unclamped".to_owned()))
}

fn pde_product() -> Result<(bool, String), String> {
    let p = params((1.0, 1.0, 0.0, 2.0, 0.5));
    let g = pde_solve(&p, &PdeConfig::for_params(&p, 80)).map_err(|e| e.to_string())?;
    let mut worst: f64 = 0.0;
    for j in 0..=g.n {
        for i in 0..=g.n {
            let (u, v) = (i as f64 * g.h, j as f64 * g.h);
            worst = worst.max((g.at(i, j) - (-2.4 * u - 1.2 * v).exp()).abs());
        }
    }
    let in_range = g.min_value >= -1e-12 && g.max_value <= 1.0 + 1e-12;
    Ok((worst <= 2e-2 && in_range, format!("max node error {worst:.1e} at h = {:.3}, range [{:.2e}, {:.2e}]", g.h, g.min_value, g.max_value)))
}

fn mc_reproducible() -> Result<(bool, String), String> {
    let p = params(SKEWED);
    let cfg = McConfig { dt: 1e-2, n_paths: 512, seed: 7, ..McConfig::for_params(&p) };
    let a = mc_escape_prob((0.3, 0.2), &p, &cfg).map_err(|e| e.to_string())?;
    let b = mc_escape_prob((0.3, 0.2), &p, &cfg).map_err(|e| e.to_string())?;
    Ok((a == b, format!("two runs with seed 7 identical: {}", a == b)))
}

fn classification_consistency() -> Result<(bool, String), String> {
    let mut bad = 0;
    let sets = random_params(500, 5);
    for p in &sets {
        let g = model::wedge_geometry(p);
        let c = model::classify(p, &g);
        let swap = model::wedge_geometry(&p.swapped());
        let dual = ModelParams::new(p.mu1, p.mu2, p.rho, p.r1, 1.0 / p.r1).map_err(|e| e.to_string())?;
        let ok = (swap.alpha - g.alpha).abs() <= 1e-9
            && model::classify(&p.swapped(), &swap).regime_h == c.regime_v
            && (model::wedge_geometry(&dual).alpha - 1.0).abs() <= 1e-9
            && g.alpha > 1.0;
        bad += usize::from(!ok);
    }
    Ok((bad == 0, format!("{bad} failures of the angle identities on {} sets", sets.len())))
}

/// Runs every check; cheap enough to finish in seconds in release builds.
pub fn run_all() -> Vec<CheckResult> {
    vec![
        run("parameter validation", validation),
        run("angle identities", classification_consistency),
        run("index battery", index_battery),
        run("product form through BVP", product_form),
        run("boundary condition", boundary_condition),
        run("continuation identity", continuation),
        run("residue and conjugation", residue_and_symmetry),
        run("probability complementarity", complementarity),
        run("PDE product form", pde_product),
        run("Monte Carlo reproducibility", mc_reproducible),
    ]
}
