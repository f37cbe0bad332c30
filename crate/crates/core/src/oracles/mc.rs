//! Monte Carlo simulation of the reflected process with corner absorption.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::OracleError;
use crate::model::ModelParams;

/// Rigorous upper bound on `P_(u,v)[T < inf]`.
///
/// Minimum of the free-motion bound `e^{-2 mu1 u} + e^{-2 mu2 v}` and the two
/// bounds obtained by letting the auxiliary margin tend to zero in the
/// escape-to-infinity argument.
pub fn absorption_bound(p: &ModelParams, u: f64, v: f64) -> f64 {
    let free = (-2.0 * p.mu1 * u).exp() + (-2.0 * p.mu2 * v).exp();
    let horizontal = (-u * p.mu1).exp() + (-(u / p.r2 + 2.0 * v) * p.mu2).exp();
    let vertical = (-v * p.mu2).exp() + (-(v / p.r1 + 2.0 * u) * p.mu1).exp();
    free.min(horizontal).min(vertical).min(1.0)
}

/// Largest [`absorption_bound`] on the quarter circle of radius `r`.
pub fn radius_bound(p: &ModelParams, r: f64) -> f64 {
    (0..=2000)
        .map(|k| {
            let phi = k as f64 / 2000.0 * std::f64::consts::FRAC_PI_2;
            absorption_bound(p, r * phi.cos(), r * phi.sin())
        })
        .fold(0.0, f64::max)
}

/// Smallest radius (up to 1%) whose [`radius_bound`] is at most `tol`.
pub fn radius_for_bound(p: &ModelParams, tol: f64) -> f64 {
    let mut hi = 1.0 / p.mu1.min(p.mu2);
    while radius_bound(p, hi) > tol {
        hi *= 2.0;
    }
    let mut lo = 0.0;
    while hi - lo > 0.01 * hi {
        let mid = 0.5 * (lo + hi);
        if radius_bound(p, mid) > tol {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    hi
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McConfig {
    pub dt: f64,
    pub eps_absorb: f64,
    pub r_escape: f64,
    /// Paths are also declared escaped once [`absorption_bound`] drops to this
    /// value (checked through sufficient linear conditions); 0 disables.
    pub escape_tol: f64,
    pub n_paths: u64,
    pub seed: u64,
    pub max_time: f64,
}

impl McConfig {
    pub fn for_params(p: &ModelParams) -> Self {
        let slow = p.mu1.min(p.mu2);
        Self {
            dt: 1e-3,
            eps_absorb: 1e-3 / p.mu1.max(p.mu2),
            r_escape: radius_for_bound(p, 1e-4),
            escape_tol: 1e-4,
            n_paths: 10_000,
            seed: 0,
            max_time: 50.0 / slow,
        }
    }

    pub fn validate(&self) -> Result<(), OracleError> {
        let ok = self.dt > 0.0
            && self.eps_absorb > 0.0
            && self.eps_absorb < self.r_escape
            && self.n_paths >= 1
            && self.max_time > 0.0
            && self.escape_tol >= 0.0;
        if ok {
            Ok(())
        } else {
            Err(OracleError::InvalidConfig(format!("{self:?}")))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum PathOutcome {
    Absorbed(f64),
    Escaped(f64),
    Censored,
}

/// Precomputed escape tests: each region guarantees the bound is below tol.
#[derive(Debug, Clone, Copy)]
struct EscapeRegion {
    r2: f64,
    free: (f64, f64),
    horizontal: (f64, f64),
    vertical: (f64, f64),
    enabled: bool,
    inv_r1: f64,
    inv_r2: f64,
}

impl EscapeRegion {
    fn new(p: &ModelParams, cfg: &McConfig) -> Self {
        let c = if cfg.escape_tol > 0.0 { (2.0 / cfg.escape_tol).ln() } else { f64::INFINITY };
        Self {
            r2: cfg.r_escape * cfg.r_escape,
            free: (c / (2.0 * p.mu1), c / (2.0 * p.mu2)),
            horizontal: (c / p.mu1, c / p.mu2),
            vertical: (c / p.mu2, c / p.mu1),
            enabled: cfg.escape_tol > 0.0,
            inv_r1: 1.0 / p.r1,
            inv_r2: 1.0 / p.r2,
        }
    }

    #[inline]
    fn contains(&self, z1: f64, z2: f64) -> bool {
        if z1 * z1 + z2 * z2 >= self.r2 {
            return true;
        }
        self.enabled
            && ((z1 >= self.free.0 && z2 >= self.free.1)
                || (z1 >= self.horizontal.0 && z1 * self.inv_r2 + 2.0 * z2 >= self.horizontal.1)
                || (z2 >= self.vertical.0 && z2 * self.inv_r1 + 2.0 * z1 >= self.vertical.1))
    }
}

/// Local time pushed into one coordinate over a step from `z` to the free
/// endpoint `x`, from the exact law of the Brownian bridge minimum.
#[inline]
fn bridge_push<R: Rng>(z: f64, x: f64, dt: f64, rng: &mut R) -> f64 {
    if x > 0.0 && 2.0 * z * x > 32.0 * dt {
        return 0.0;
    }
    let u: f64 = rng.random();
    let d = x - z;
    let m = 0.5 * (z + x - (d * d - 2.0 * dt * (1.0 - u).ln()).sqrt());
    (-m).max(0.0)
}

/// Least local-time increments `l >= lower` making the state nonnegative,
/// or `None` if the Skorokhod step has no solution.
#[inline]
fn skorokhod(x1: f64, x2: f64, lower: (f64, f64), r1: f64, r2: f64) -> Option<(f64, f64)> {
    let (l1, l2) = lower;
    let ok = |a: f64, b: f64| x1 + a - r2 * b >= -1e-14 && x2 + b - r1 * a >= -1e-14;
    if ok(l1, l2) {
        return Some((l1, l2));
    }
    let b = r1 * l1 - x2;
    if b > l2 && ok(l1, b) {
        return Some((l1, b));
    }
    let a = r2 * l2 - x1;
    if a > l1 && ok(a, l2) {
        return Some((a, l2));
    }
    None
}

/// One path of the projected Euler scheme with bridge-corrected local times.
pub fn simulate_path<R: Rng>(start: (f64, f64), p: &ModelParams, cfg: &McConfig, rng: &mut R) -> PathOutcome {
    let region = EscapeRegion::new(p, cfg);
    simulate_with(start, p, cfg, &region, rng)
}

fn simulate_with<R: Rng>(start: (f64, f64), p: &ModelParams, cfg: &McConfig, region: &EscapeRegion, rng: &mut R) -> PathOutcome {
    let (mut z1, mut z2) = start;
    let eps2 = cfg.eps_absorb * cfg.eps_absorb;
    let sdt = cfg.dt.sqrt();
    let (a, b) = (p.rho, (1.0 - p.rho * p.rho).sqrt());
    let (d1, d2) = (p.mu1 * cfg.dt, p.mu2 * cfg.dt);
    let mut t = 0.0;
    let mut steps: u64 = 0;
    loop {
        if z1 * z1 + z2 * z2 <= eps2 {
            return PathOutcome::Absorbed(t);
        }
        if region.contains(z1, z2) {
            return PathOutcome::Escaped(t);
        }
        if t >= cfg.max_time {
            return PathOutcome::Censored;
        }
        let n1: f64 = rng.sample(StandardNormal);
        let n2: f64 = rng.sample(StandardNormal);
        let x1 = z1 + d1 + sdt * n1;
        let x2 = z2 + d2 + sdt * (a * n1 + b * n2);
        let lower = (bridge_push(z1, x1, cfg.dt, rng), bridge_push(z2, x2, cfg.dt, rng));
        steps += 1;
        t = steps as f64 * cfg.dt;
        match skorokhod(x1, x2, lower, p.r1, p.r2) {
            Some((l1, l2)) => {
                z1 = (x1 + l1 - p.r2 * l2).max(0.0);
                z2 = (x2 + l2 - p.r1 * l1).max(0.0);
            }
            None => return PathOutcome::Absorbed(t),
        }
    }
}

/// Generator for path `index`: its own ChaCha stream under the run seed.
pub fn path_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub p_escape_hat: f64,
    pub std_err: f64,
    pub bias_bound: f64,
    pub n_absorbed: u64,
    pub n_escaped: u64,
    pub n_censored: u64,
    pub n_paths: u64,
}

pub fn mc_escape_prob(start: (f64, f64), p: &ModelParams, cfg: &McConfig) -> Result<McEstimate, OracleError> {
    cfg.validate()?;
    if !(start.0 >= 0.0 && start.1 >= 0.0) {
        return Err(OracleError::InvalidConfig(format!("start {start:?} outside the quadrant")));
    }
    let region = EscapeRegion::new(p, cfg);
    const CHUNK: u64 = 256;
    let chunks = cfg.n_paths.div_ceil(CHUNK);
    let counts = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut tally = [0u64; 3];
            for i in c * CHUNK..((c + 1) * CHUNK).min(cfg.n_paths) {
                let mut rng = path_rng(cfg.seed, i);
                match simulate_with(start, p, cfg, &region, &mut rng) {
                    PathOutcome::Absorbed(_) => tally[0] += 1,
                    PathOutcome::Escaped(_) => tally[1] += 1,
                    PathOutcome::Censored => tally[2] += 1,
                }
            }
            tally
        })
        .reduce(|| [0u64; 3], |x, y| [x[0] + y[0], x[1] + y[1], x[2] + y[2]]);
    let [n_absorbed, n_escaped, n_censored] = counts;
    if n_censored == cfg.n_paths {
        return Err(OracleError::AllCensored { n_paths: cfg.n_paths });
    }
    let n = cfg.n_paths as f64;
    let p_hat = n_escaped as f64 / n;
    let exit = radius_bound(p, cfg.r_escape).max(cfg.escape_tol);
    Ok(McEstimate {
        p_escape_hat: p_hat,
        std_err: (p_hat * (1.0 - p_hat) / n).sqrt(),
        bias_bound: exit + n_censored as f64 / n,
        n_absorbed,
        n_escaped,
        n_censored,
        n_paths: cfg.n_paths,
    })
}
