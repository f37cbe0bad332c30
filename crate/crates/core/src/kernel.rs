//! Kernel algebra: K, k1, k2, the algebraic branches and the hyperbola.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::KernelError;
use crate::model::{ModelParams, STRUCTURAL_TOL};

/// Width of the band around the negative real axis treated as the cut.
const CUT_BAND: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelValues {
    pub k: C64,
    pub k1: C64,
    pub k2: C64,
}

pub fn kernel_eval(p: &ModelParams, x: C64, y: C64) -> KernelValues {
    let k = 0.5 * (x * x + y * y + 2.0 * p.rho * x * y) + p.mu1 * x + p.mu2 * y;
    let k1 = 0.5 * (p.r2 * x + y) + p.rho * x + p.mu2;
    let k2 = 0.5 * (x + p.r1 * y) + p.rho * y + p.mu1;
    KernelValues { k, k1, k2 }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Branch {
    Plus,
    Minus,
}

/// Side from which a point on a cut is approached (`x ± i0`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Side {
    Upper,
    Lower,
}

/// Roots of `t^2 + 2 b t + c = 0` labelled `-b ± s`, `s^2 = disc`.
///
/// The smaller root is recovered from the product to avoid cancellation.
fn labelled_roots(b: C64, c: C64, s: C64) -> (C64, C64) {
    let plus = -b + s;
    let minus = -b - s;
    if plus.norm() >= minus.norm() {
        let other = if plus == C64::new(0.0, 0.0) { minus } else { c / plus };
        (plus, other)
    } else {
        (c / minus, minus)
    }
}

fn on_cut(d: C64) -> bool {
    d.re < 0.0 && d.im.abs() <= CUT_BAND * (1.0 + d.norm())
}

fn one_sided_sqrt(d: C64, side_sign: f64) -> C64 {
    if on_cut(d) {
        C64::new(0.0, side_sign * (-d.re).sqrt())
    } else {
        d.sqrt()
    }
}

/// Discriminant of `K(x, .) = 0` and its derivative in x.
fn disc_y(p: &ModelParams, x: C64) -> (C64, C64) {
    let d = x * x * (p.rho * p.rho - 1.0) + 2.0 * x * (p.mu2 * p.rho - p.mu1) + p.mu2 * p.mu2;
    let dd = 2.0 * x * (p.rho * p.rho - 1.0) + 2.0 * (p.mu2 * p.rho - p.mu1);
    (d, dd)
}

fn y_roots(p: &ModelParams, x: C64, s: C64) -> (C64, C64) {
    let b = p.rho * x + p.mu2;
    let c = x * x + 2.0 * p.mu1 * x;
    labelled_roots(b, c, s)
}

fn pick(roots: (C64, C64), branch: Branch) -> C64 {
    match branch {
        Branch::Plus => roots.0,
        Branch::Minus => roots.1,
    }
}

/// `Y±(x) = -(ρx+μ2) ± sqrt(disc)` with the principal square root.
pub fn branch_y(p: &ModelParams, x: C64, branch: Branch) -> Result<C64, KernelError> {
    let (d, _) = disc_y(p, x);
    if on_cut(d) {
        return Err(KernelError::OnBranchCut { re: x.re, im: x.im });
    }
    Ok(pick(y_roots(p, x, d.sqrt()), branch))
}

/// Limit of `Y±` as the argument tends to `x` from the given side.
pub fn branch_y_limit(p: &ModelParams, x: C64, branch: Branch, side: Side) -> C64 {
    let (d, dd) = disc_y(p, x);
    let sign = side_sign(side) * dd.re.signum();
    pick(y_roots(p, x, one_sided_sqrt(d, sign)), branch)
}

fn side_sign(side: Side) -> f64 {
    match side {
        Side::Upper => 1.0,
        Side::Lower => -1.0,
    }
}

fn disc_x(p: &ModelParams, y: C64) -> (C64, C64) {
    disc_y(&p.swapped(), y)
}

fn x_roots(p: &ModelParams, y: C64, s: C64) -> (C64, C64) {
    y_roots(&p.swapped(), y, s)
}

/// `X±(y) = -(ρy+μ1) ± sqrt(disc)`.
pub fn branch_x(p: &ModelParams, y: C64, branch: Branch) -> Result<C64, KernelError> {
    let (d, _) = disc_x(p, y);
    if on_cut(d) {
        return Err(KernelError::OnBranchCut { re: y.re, im: y.im });
    }
    Ok(pick(x_roots(p, y, d.sqrt()), branch))
}

pub fn branch_x_limit(p: &ModelParams, y: C64, branch: Branch, side: Side) -> C64 {
    let (d, dd) = disc_x(p, y);
    let sign = side_sign(side) * dd.re.signum();
    pick(x_roots(p, y, one_sided_sqrt(d, sign)), branch)
}

/// Both roots of `q t^2 - 2 b t - c^2 = 0`, returned as `(plus, minus)`.
fn branch_points(q: f64, b: f64, c: f64) -> (f64, f64) {
    let s = (b * b + q * c * c).sqrt();
    if b >= 0.0 {
        let plus = (b + s) / q;
        (plus, -c * c / (b + s))
    } else {
        let minus = (b - s) / q;
        (-c * c / (b - s), minus)
    }
}

/// Branch points, special points and the hyperbola parametrization.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelData {
    pub params: ModelParams,
    pub x_plus: f64,
    pub x_minus: f64,
    pub y_plus: f64,
    pub y_minus: f64,
    pub x0: f64,
    pub y0: f64,
    pub x1: f64,
    pub y1: f64,
    pub x2: f64,
    pub y2: f64,
    pub y_tilde: Option<f64>,
}

pub fn special_points(p: &ModelParams) -> KernelData {
    let q = 1.0 - p.rho * p.rho;
    let (x_plus, x_minus) = branch_points(q, p.mu2 * p.rho - p.mu1, p.mu2);
    let (y_plus, y_minus) = branch_points(q, p.mu1 * p.rho - p.mu2, p.mu1);

    let x1 = -2.0 * (p.r2 * p.mu2 + p.mu1) / (1.0 + p.r2 * p.r2 + 2.0 * p.rho * p.r2);
    let y2 = -2.0 * (p.r1 * p.mu1 + p.mu2) / (1.0 + p.r1 * p.r1 + 2.0 * p.rho * p.r1);
    // Companions on the lines k1 = 0 and k2 = 0 respectively.
    let y1 = -(p.r2 + 2.0 * p.rho) * x1 - 2.0 * p.mu2;
    let x2 = -(p.r1 + 2.0 * p.rho) * y2 - 2.0 * p.mu1;

    let denom = (p.r1 + 2.0 * p.rho) * (p.r2 + 2.0 * p.rho) - 1.0;
    let y_tilde = if denom.abs() <= STRUCTURAL_TOL {
        None
    } else {
        Some(2.0 * (p.mu2 - p.mu1 * (p.r2 + 2.0 * p.rho)) / denom)
    };

    KernelData {
        params: *p,
        x_plus,
        x_minus,
        y_plus,
        y_minus,
        x0: -2.0 * p.mu1,
        y0: -2.0 * p.mu2,
        x1,
        y1,
        x2,
        y2,
        y_tilde,
    }
}

/// A point of the upper half of the hyperbola, parametrized by y.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HyperbolaPoint {
    pub y: f64,
    pub x: C64,
    /// Infinite imaginary part at the vertex `y = y_plus`.
    pub dx_dy: C64,
}

impl KernelData {
    /// Point on the upper half of the hyperbola with `y = y_plus + tau^2`,
    /// together with `dx/dtau`. This is the parametrization used by the
    /// quadrature since it is smooth at the vertex.
    pub fn hyperbola_at_tau(&self, tau: f64) -> (C64, C64) {
        let p = &self.params;
        let sq = (1.0 - p.rho * p.rho).sqrt();
        let gap = self.y_plus - self.y_minus;
        let t2 = tau * tau;
        let y = self.y_plus + t2;
        let root = (t2 + gap).sqrt();
        let x = C64::new(-(p.rho * y + p.mu1), sq * tau * root);
        let dx = C64::new(-2.0 * p.rho * tau, sq * (root + t2 / root));
        (x, dx)
    }

    pub fn hyperbola_point(&self, y: f64) -> HyperbolaPoint {
        let tau = (y - self.y_plus).max(0.0).sqrt();
        let (x, dx_dtau) = self.hyperbola_at_tau(tau);
        let dx_dy = if tau > 0.0 {
            dx_dtau / (2.0 * tau)
        } else {
            C64::new(-self.params.rho, f64::INFINITY)
        };
        HyperbolaPoint { y, x, dx_dy }
    }

    /// Vertex of the hyperbola on the real axis.
    pub fn vertex(&self) -> f64 {
        -(self.params.rho * self.y_plus + self.params.mu1)
    }

    /// Residual of the real hyperbola equation at `x = a + ib`.
    pub fn hyperbola_residual(&self, x: C64) -> f64 {
        let p = &self.params;
        let (a, b) = (x.re, x.im);
        let r2 = p.rho * p.rho;
        (r2 - 1.0) * a * a + r2 * b * b
            - 2.0 * (p.mu1 - p.rho * p.mu2) * a
            - p.mu1 * (p.mu1 - 2.0 * p.rho * p.mu2)
    }

    /// Parameter y of the hyperbola point whose imaginary part is `|b|`.
    pub fn hyperbola_y_at_height(&self, b: f64) -> f64 {
        let q = 1.0 - self.params.rho * self.params.rho;
        let mid = 0.5 * (self.y_plus + self.y_minus);
        let half = 0.5 * (self.y_plus - self.y_minus);
        mid + (half * half + b * b / q).sqrt()
    }

    /// Horizontal signed distance from the hyperbola; positive inside the
    /// domain bounded by the hyperbola that contains `x_plus`.
    pub fn hyperbola_margin(&self, x: C64) -> f64 {
        let y = self.hyperbola_y_at_height(x.im);
        x.re + self.params.rho * y + self.params.mu1
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn skewed_set() -> ModelParams {
        ModelParams::new(2.0, 3.0, -0.4, 2.0, 4.0).unwrap()
    }

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn kernel_constant_terms() {
        let p = skewed_set();
        let v = kernel_eval(&p, c(0.0, 0.0), c(0.0, 0.0));
        assert_eq!(v.k, c(0.0, 0.0));
        assert_eq!(v.k1, c(3.0, 0.0));
        assert_eq!(v.k2, c(2.0, 0.0));
        assert_eq!(kernel_eval(&p, c(-4.0, 0.0), c(0.0, 0.0)).k, c(0.0, 0.0));
    }

    #[test]
    fn product_form_special_points() {
        let p = ModelParams::new(1.0, 1.0, 0.0, 2.0, 0.5).unwrap();
        let kd = special_points(&p);
        assert!((kd.x1 + 2.4).abs() < 1e-14);
        assert!((kd.y2 + 1.2).abs() < 1e-14);
        assert!((p.r1 - kd.x1 / kd.y2).abs() < 1e-14);
        assert!(kernel_eval(&p, c(-2.4, 0.0), c(-1.2, 0.0)).k.norm() < 1e-14);
    }

    #[test]
    fn skewed_parameter_points() {
        let kd = special_points(&skewed_set());
        assert!((kd.x_plus - 1.213_100_7).abs() < 1e-6);
        assert!((kd.x_minus + 8.832_148_4).abs() < 1e-6);
        assert!((kd.y_plus - 0.498_815_0).abs() < 1e-6);
        assert!((kd.y_minus + 9.546_434).abs() < 1e-5);
        assert_eq!(kd.x0, -4.0);
        assert_eq!(kd.y0, -6.0);
        assert!((kd.x1 + 28.0 / 13.8).abs() < 1e-14);
        assert!((kd.y2 + 14.0 / 3.4).abs() < 1e-14);
    }

    #[test]
    fn y_branches_at_zero() {
        let p = skewed_set();
        assert_eq!(branch_y(&p, c(0.0, 0.0), Branch::Plus).unwrap(), c(0.0, 0.0));
        assert!((branch_y(&p, c(0.0, 0.0), Branch::Minus).unwrap() - c(-6.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn cut_is_reported() {
        let p = skewed_set();
        assert!(branch_y(&p, c(5.0, 0.0), Branch::Plus).is_err());
        let up = branch_y_limit(&p, c(5.0, 0.0), Branch::Plus, Side::Upper);
        let near = branch_y(&p, c(5.0, 1e-9), Branch::Plus).unwrap();
        assert!((up - near).norm() < 1e-6);
    }

    #[test]
    fn vertex_is_real() {
        let kd = special_points(&skewed_set());
        let h = kd.hyperbola_point(kd.y_plus);
        assert_eq!(h.x.im, 0.0);
        assert!((h.x.re - kd.vertex()).abs() < 1e-15);
    }

    #[test]
    fn straight_line_when_uncorrelated() {
        let p = ModelParams::new(1.3, 0.7, 0.0, 1.5, 2.0).unwrap();
        let kd = special_points(&p);
        for y in [kd.y_plus, kd.y_plus + 1.0, kd.y_plus + 40.0] {
            assert_eq!(kd.hyperbola_point(y).x.re, -p.mu1);
        }
    }
}
