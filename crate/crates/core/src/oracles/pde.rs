//! Finite differences for the generator equation with oblique Neumann data.

use serde::{Deserialize, Serialize};

use super::mc::absorption_bound;
use super::sparse::{gmres, Csr, Ilu0};
use crate::error::OracleError;
use crate::model::ModelParams;

const GMRES_RESTART: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PdeConfig {
    /// Side of the square domain `[0, L]^2`.
    pub l: f64,
    pub h: f64,
    pub tol: f64,
    pub max_iter: usize,
}

impl PdeConfig {
    /// `L = 10 max(1/mu1, 1/mu2)` with `intervals` cells per side.
    pub fn for_params(p: &ModelParams, intervals: usize) -> Self {
        let l = 10.0 * (1.0 / p.mu1).max(1.0 / p.mu2);
        Self { l, h: l / intervals as f64, tol: 1e-10, max_iter: 5_000 }
    }
}

/// Absorption probability on the grid `(i h, j h)`, `0 <= i, j <= n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PdeGrid {
    pub l: f64,
    pub h: f64,
    pub n: usize,
    /// Row-major in `j` then `i`: `f[j * (n + 1) + i]`.
    pub f: Vec<f64>,
    pub residual: f64,
    pub iterations: usize,
    /// Largest rigorous absorption bound on the far edges, where `f = 0` is imposed.
    pub far_field_bound: f64,
    pub min_value: f64,
    pub max_value: f64,
}

impl PdeGrid {
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.f[j * (self.n + 1) + i]
    }

    /// Bilinear interpolation; zero outside the box.
    pub fn value(&self, u: f64, v: f64) -> f64 {
        if u < 0.0 || v < 0.0 || u > self.l || v > self.l {
            return 0.0;
        }
        let (su, sv) = (u / self.h, v / self.h);
        let i = (su.floor() as usize).min(self.n - 1);
        let j = (sv.floor() as usize).min(self.n - 1);
        let (a, b) = (su - i as f64, sv - j as f64);
        (1.0 - a) * (1.0 - b) * self.at(i, j)
            + a * (1.0 - b) * self.at(i + 1, j)
            + (1.0 - a) * b * self.at(i, j + 1)
            + a * b * self.at(i + 1, j + 1)
    }
}

pub fn pde_solve(p: &ModelParams, cfg: &PdeConfig) -> Result<PdeGrid, OracleError> {
    let n = (cfg.l / cfg.h).round() as usize;
    if n < 4 || !(cfg.h > 0.0) {
        return Err(OracleError::InvalidConfig(format!("grid too coarse: {n} cells")));
    }
    let h = cfg.l / n as f64;
    // Unknowns: 0 <= i, j < n except the pinned corner.
    let index = |i: usize, j: usize| -> Option<usize> {
        if i >= n || j >= n || (i == 0 && j == 0) {
            None
        } else {
            Some(j * n + i - 1)
        }
    };
    let size = n * n - 1;
    let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); size];
    let mut rhs = vec![0.0; size];

    let (hu, hv) = (0.5 * p.mu1 * h, 0.5 * p.mu2 * h);
    let c = 0.25 * p.rho;
    for j in 0..n {
        for i in 0..n {
            let Some(row) = index(i, j) else { continue };
            let stencil: Vec<(i64, i64, f64)> = if i > 0 && j > 0 {
                vec![
                    (0, 0, -2.0),
                    (1, 0, 0.5 + hu),
                    (-1, 0, 0.5 - hu),
                    (0, 1, 0.5 + hv),
                    (0, -1, 0.5 - hv),
                    (1, 1, c),
                    (-1, -1, c),
                    (1, -1, -c),
                    (-1, 1, -c),
                ]
            } else if i == 0 {
                // f_u - r1 f_v = 0, one-sided in u.
                vec![(0, 0, -3.0), (1, 0, 4.0), (2, 0, -1.0), (0, 1, -p.r1), (0, -1, p.r1)]
            } else {
                // -r2 f_u + f_v = 0, one-sided in v.
                vec![(0, 0, -3.0), (0, 1, 4.0), (0, 2, -1.0), (1, 0, -p.r2), (-1, 0, p.r2)]
            };
            for (di, dj, coef) in stencil {
                let (ii, jj) = (i as i64 + di, j as i64 + dj);
                let (ii, jj) = (ii as usize, jj as usize);
                if ii == 0 && jj == 0 {
                    rhs[row] -= coef;
                } else if let Some(col) = index(ii, jj) {
                    rows[row].push((col, coef));
                }
            }
        }
    }
    let a = Csr::from_rows(rows);
    let pre = Ilu0::new(&a).ok_or(OracleError::SolverDiverged { residual: f64::NAN, iterations: 0 })?;
    let mut x = vec![0.0; size];
    let stats = gmres(&a, &pre, &rhs, &mut x, cfg.tol, GMRES_RESTART, cfg.max_iter);
    if !stats.converged {
        return Err(OracleError::SolverDiverged { residual: stats.residual, iterations: stats.iterations });
    }

    let mut f = vec![0.0; (n + 1) * (n + 1)];
    for j in 0..=n {
        for i in 0..=n {
            f[j * (n + 1) + i] = if i == 0 && j == 0 {
                1.0
            } else {
                index(i, j).map_or(0.0, |k| x[k])
            };
        }
    }
    let (min_value, max_value) = f.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    let far_field_bound = (0..=n)
        .map(|k| {
            let s = k as f64 * h;
            absorption_bound(p, cfg.l, s).max(absorption_bound(p, s, cfg.l))
        })
        .fold(0.0, f64::max);
    Ok(PdeGrid {
        l: cfg.l,
        h,
        n,
        f,
        residual: stats.residual,
        iterations: stats.iterations,
        far_field_bound,
        min_value,
        max_value,
    })
}
