//! The boundary value problem on the hyperbola and the explicit transform.
//!
//! The contour is parametrized by `sigma` in `[0, 1)` through
//! `y = y_plus + (sigma / (1 - sigma))^2`, which is smooth at the vertex.

use std::f64::consts::PI;

use num_complex::Complex64 as C64;

use crate::error::BvpError;
use crate::gluing::GluingContext;
use crate::kernel::{self, Branch, KernelData};
use crate::model::{self, Classification, Degeneracy, ModelParams, WedgeGeometry};
use crate::quadrature::{gk15_rule, panel_nodes};

const I: C64 = C64 { re: 0.0, im: 1.0 };

/// Largest accepted jump of the tracked argument between neighbours.
const MAX_ARG_STEP: f64 = PI / 4.0;
const TRACK_GRID: usize = 256;
const MAX_TRACK_DEPTH: u32 = 40;
const BASE_PANELS: usize = 24;

/// Points with `depth` above this are evaluated without considering detours.
const COMFORTABLE_DEPTH: f64 = 0.25;
const MAX_ROUTE_DEPTH: u32 = 8;

fn tau_of(sigma: f64) -> f64 {
    sigma / (1.0 - sigma)
}

/// Boundary function from its four kernel coefficients at `(x, y)` and `(conj x, y)`.
fn g_from(p: &ModelParams, x: C64, y: f64) -> Result<C64, BvpError> {
    let yc = C64::new(y, 0.0);
    let a = kernel::kernel_eval(p, x, yc);
    let b = kernel::kernel_eval(p, x.conj(), yc);
    if b.k1.norm() < 1e-13 || a.k2.norm() < 1e-13 {
        return Err(BvpError::DivisionNearZero { y });
    }
    Ok(a.k1 * b.k2 / (a.k2 * b.k1))
}

/// `G(x) = k1/k2 (x, Y+(x)) * k2/k1 (conj x, Y+(x))` for x on the hyperbola.
pub fn g_eval(p: &ModelParams, x: C64) -> Result<C64, BvpError> {
    let y = kernel::branch_y_limit(p, x, Branch::Plus, kernel::Side::Upper);
    g_from(p, x, y.re)
}

/// Limit of G along the upper half of the hyperbola as `y -> infinity`.
pub fn g_at_infinity(p: &ModelParams) -> C64 {
    let beta = (-p.rho).acos();
    let dir = C64::from_polar(1.0, beta);
    let k1 = 0.5 * (p.r2 * dir + 1.0) + p.rho * dir;
    let k2 = 0.5 * (dir + p.r1) + p.rho;
    (k1 * k2.conj()) / (k2 * k1.conj())
}

/// A tracked sample of `log G` on the upper half of the hyperbola.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContourNode {
    pub sigma: f64,
    pub y: f64,
    pub x: C64,
    pub dx_dy: C64,
    /// `i * arg G` with a continuously tracked argument.
    pub log_g: C64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ContourDiscretization {
    pub nodes: Vec<ContourNode>,
    /// Largest finite y among the nodes.
    pub y_max: f64,
    /// Bound on the reference bracket integral beyond `y_max`.
    pub tail_bound: f64,
    pub d: f64,
    pub measured_d_plus_delta: f64,
    pub measured_kappa: i32,
    pub diagnostics: Vec<Degeneracy>,
}

impl ContourDiscretization {
    /// Continuous argument of G at `sigma`, snapped to the tracked table.
    pub fn arg_at(&self, p: &ModelParams, kd: &KernelData, sigma: f64) -> Result<f64, BvpError> {
        let n = &self.nodes;
        let k = n.partition_point(|nd| nd.sigma <= sigma);
        let guess = if k == 0 {
            n[0].log_g.im
        } else if k >= n.len() {
            n[n.len() - 1].log_g.im
        } else {
            let (a, b) = (&n[k - 1], &n[k]);
            let t = (sigma - a.sigma) / (b.sigma - a.sigma);
            a.log_g.im + t * (b.log_g.im - a.log_g.im)
        };
        if sigma <= 0.0 {
            return Ok(self.d);
        }
        if sigma >= 1.0 {
            return Ok(self.measured_d_plus_delta);
        }
        let (x, _) = kd.hyperbola_at_tau(tau_of(sigma));
        let principal = g_from(p, x, kd.y_plus + tau_of(sigma).powi(2))?.arg();
        Ok(unwrap_near(principal, guess))
    }
}

fn unwrap_near(principal: f64, reference: f64) -> f64 {
    principal + 2.0 * PI * ((reference - principal) / (2.0 * PI)).round()
}

/// Integer part of `v / 2pi`, rounding values within `tol` of an integer.
fn index_of(v: f64, tol: f64) -> i32 {
    let r = v / (2.0 * PI);
    if (r - r.round()).abs() <= tol {
        r.round() as i32
    } else {
        r.floor() as i32
    }
}

/// Tracks `arg G` from the vertex (value `d`) to infinity.
pub fn build_contour(p: &ModelParams, kd: &KernelData, cl: &Classification) -> Result<ContourDiscretization, BvpError> {
    let sample = |sigma: f64| -> Result<(f64, C64), BvpError> {
        if sigma >= 1.0 {
            return Ok((f64::INFINITY, g_at_infinity(p)));
        }
        let tau = tau_of(sigma);
        let (x, _) = kd.hyperbola_at_tau(tau);
        let y = kd.y_plus + tau * tau;
        Ok((y, g_from(p, x, y)?))
    };

    let mut tracked: Vec<(f64, f64)> = vec![(0.0, cl.d)];
    let mut pending: Vec<f64> = Vec::new();
    for j in 1..=TRACK_GRID {
        pending.push(j as f64 / TRACK_GRID as f64);
        while let Some(s) = pending.pop() {
            let (prev_s, prev_arg) = *tracked.last().unwrap();
            let principal = match sample(s) {
                Ok((_, g)) => g.arg(),
                // A kernel coefficient vanishes exactly on the node: nudge it.
                Err(_) => sample(s - 1e-9 * (s - prev_s))?.1.arg(),
            };
            let value = unwrap_near(principal, prev_arg);
            if (value - prev_arg).abs() <= MAX_ARG_STEP {
                tracked.push((s, value));
                continue;
            }
            if (1.0 / (s - prev_s)).log2() > f64::from(MAX_TRACK_DEPTH) {
                let y_lo = kd.y_plus + tau_of(prev_s).powi(2);
                let y_hi = if s >= 1.0 { f64::INFINITY } else { kd.y_plus + tau_of(s).powi(2) };
                return Err(BvpError::ArgTrackingFailed { y_lo, y_hi });
            }
            pending.push(s);
            pending.push(0.5 * (prev_s + s));
        }
    }

    let measured = tracked.last().unwrap().1;
    let mut nodes = Vec::with_capacity(tracked.len());
    for &(sigma, arg) in &tracked {
        if sigma >= 1.0 {
            continue;
        }
        let h = kd.hyperbola_point(kd.y_plus + tau_of(sigma).powi(2));
        nodes.push(ContourNode { sigma, y: h.y, x: h.x, dx_dy: h.dx_dy, log_g: C64::new(0.0, arg) });
    }
    // Terminal node at sigma = 1 carrying the limit value.
    nodes.push(ContourNode {
        sigma: 1.0,
        y: f64::INFINITY,
        x: C64::new(f64::NAN, f64::NAN),
        dx_dy: C64::new(f64::NAN, f64::NAN),
        log_g: C64::new(0.0, measured),
    });

    let y_max = nodes[nodes.len() - 2].y;
    let mut diagnostics = Vec::new();
    let measured_kappa = index_of(measured, 1e-9);
    if measured_kappa != cl.kappa {
        diagnostics.push(Degeneracy {
            quantity: format!("tracked index {} differs from table value {}", measured_kappa, cl.kappa),
            excess: measured - cl.d_plus_delta,
        });
    }
    Ok(ContourDiscretization {
        nodes,
        y_max,
        tail_bound: 0.0,
        d: cl.d,
        measured_d_plus_delta: measured,
        measured_kappa,
        diagnostics,
    })
}

/// Per-node data of the quadrature rule.
#[derive(Debug, Clone, Copy)]
struct Node {
    w: C64,
    dw: C64,
    log_g: C64,
}

#[derive(Debug, Clone)]
struct CachedPanel {
    a: f64,
    b: f64,
    nodes: [Node; 15],
}

/// Evaluates `psi1` for one parameter set by the explicit contour formula.
#[derive(Debug, Clone)]
pub struct Psi1Evaluator {
    pub params: ModelParams,
    pub geometry: WedgeGeometry,
    pub classification: Classification,
    pub kernel: KernelData,
    pub gluing: GluingContext,
    pub contour: ContourDiscretization,
    /// Normalization of the formula written relative to the reference value `w = 1`.
    pub c_prime: C64,
    w_prime_0: C64,
    w_x1: Option<C64>,
    panels: Vec<CachedPanel>,
    /// Absolute tolerance on the contour integral.
    abs_tol: f64,
}

/// Which copy of a contour point is meant by a one-sided evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ContourSide {
    /// The point `x` on the upper half.
    Upper,
    /// Its conjugate on the lower half.
    Lower,
}

impl Psi1Evaluator {
    pub fn new(p: &ModelParams) -> Result<Self, BvpError> {
        Self::with_tolerance(p, 1e-9)
    }

    /// `rel_tol` is the requested relative accuracy of `psi1`.
    pub fn with_tolerance(p: &ModelParams, rel_tol: f64) -> Result<Self, BvpError> {
        let geometry = model::wedge_geometry(p);
        let classification = model::classify(p, &geometry);
        let kd = kernel::special_points(p);
        let gluing = GluingContext::new(p, &kd)?;
        let contour = build_contour(p, &kd, &classification)?;
        let w_prime_0 = gluing.w_prime(C64::new(0.0, 0.0))?;
        let w_x1 = if classification.chi == -1 { Some(gluing.w(C64::new(kd.x1, 0.0))?) } else { None };
        let mut ev = Self {
            params: *p,
            geometry,
            classification,
            kernel: kd,
            gluing,
            contour,
            c_prime: C64::new(0.0, 0.0),
            w_prime_0,
            w_x1,
            panels: Vec::new(),
            abs_tol: 2.0 * PI * rel_tol * 0.1,
        };
        let mut panels = Vec::with_capacity(BASE_PANELS);
        for k in 0..BASE_PANELS {
            let a = k as f64 / BASE_PANELS as f64;
            let b = (k + 1) as f64 / BASE_PANELS as f64;
            panels.push(ev.make_panel(a, b)?);
        }
        ev.panels = panels;

        let one = C64::new(1.0, 0.0);
        let w0 = ev.gluing.w_at_0;
        let i_ref = ev.contour_integral(w0, one, None)?;
        let mut c = ev.w_prime_0 * (i_ref / (2.0 * PI * I)).exp().inv();
        if let Some(w1) = ev.w_x1 {
            c *= w0 - w1;
        }
        ev.c_prime = c;
        ev.contour.tail_bound = ev.tail_bound(w0, one);
        Ok(ev)
    }

    fn node(&self, sigma: f64) -> Result<Node, BvpError> {
        let tau = tau_of(sigma);
        let (x, dx_dtau) = self.kernel.hyperbola_at_tau(tau);
        let dx = dx_dtau / ((1.0 - sigma) * (1.0 - sigma));
        let w = self.gluing.w(x)?;
        let dw = self.gluing.w_prime(x)? * dx;
        let arg = self.contour.arg_at(&self.params, &self.kernel, sigma)?;
        Ok(Node { w, dw, log_g: C64::new(0.0, arg) })
    }

    fn make_panel(&self, a: f64, b: f64) -> Result<CachedPanel, BvpError> {
        let pts = panel_nodes(a, b);
        let mut nodes = [Node { w: C64::new(0.0, 0.0), dw: C64::new(0.0, 0.0), log_g: C64::new(0.0, 0.0) }; 15];
        for (n, s) in nodes.iter_mut().zip(pts) {
            *n = self.node(s)?;
        }
        Ok(CachedPanel { a, b, nodes })
    }

    /// Value of w at the contour point with parameter sigma (real up to rounding).
    fn w_on_contour(&self, sigma: f64) -> Result<f64, BvpError> {
        let (x, _) = self.kernel.hyperbola_at_tau(tau_of(sigma));
        Ok(self.gluing.w(x)?.re)
    }

    /// Contour parameter whose image under w is closest to `target`.
    fn nearest_sigma(&self, target: f64) -> Result<f64, BvpError> {
        let wb = self.gluing.w_at_branch.re;
        let w_far = self.w_on_contour(0.5)?;
        let decreasing = w_far < wb;
        let beyond = if decreasing { target >= wb } else { target <= wb };
        if beyond {
            return Ok(0.0);
        }
        let (mut lo, mut hi) = (0.0f64, 1.0f64);
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            let wm = self.w_on_contour(mid)?;
            let before = if decreasing { wm > target } else { wm < target };
            if before {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(0.5 * (lo + hi))
    }

    /// `int g [1/(w - omega) - 1/(w - reference)] dw` over the upper contour.
    ///
    /// `side` selects a one-sided limit when omega lies on the image of the
    /// contour: `Some(s)` means `omega + i0 s`.
    fn contour_integral(&self, omega: C64, reference: C64, side: Option<f64>) -> Result<C64, BvpError> {
        let sigma_star = self.nearest_sigma(omega.re)?;
        let g_star = C64::new(0.0, self.contour.arg_at(&self.params, &self.kernel, sigma_star)?);
        let diff = omega - reference;

        let panel_value = |nodes: &[Node; 15], a: f64, b: f64| -> (C64, f64) {
            let mut vals = [C64::new(0.0, 0.0); 15];
            for (v, n) in vals.iter_mut().zip(nodes.iter()) {
                let den = (n.w - omega) * (n.w - reference);
                *v = if den.norm() == 0.0 || !den.is_finite() {
                    C64::new(0.0, 0.0)
                } else {
                    (n.log_g - g_star) * diff / den * n.dw
                };
            }
            gk15_rule(&vals, 0.5 * (b - a))
        };

        let mut work: Vec<(f64, f64, C64, f64)> = Vec::with_capacity(BASE_PANELS + 64);
        for pnl in &self.panels {
            if sigma_star > pnl.a && sigma_star < pnl.b {
                for (a, b) in [(pnl.a, sigma_star), (sigma_star, pnl.b)] {
                    let fresh = self.make_panel(a, b)?;
                    let (v, e) = panel_value(&fresh.nodes, a, b);
                    work.push((a, b, v, e));
                }
            } else {
                let (v, e) = panel_value(&pnl.nodes, pnl.a, pnl.b);
                work.push((pnl.a, pnl.b, v, e));
            }
        }
        let max_panels = 4000;
        loop {
            let err: f64 = work.iter().map(|t| t.3).sum();
            if err <= self.abs_tol {
                break;
            }
            if work.len() >= max_panels {
                return Err(BvpError::QuadratureFailed { estimate: err });
            }
            let worst = work
                .iter()
                .enumerate()
                .max_by(|x, y| x.1 .3.total_cmp(&y.1 .3))
                .map(|(i, _)| i)
                .unwrap_or(0);
            let (a, b, _, _) = work.swap_remove(worst);
            let mid = 0.5 * (a + b);
            if mid <= a || mid >= b {
                return Err(BvpError::QuadratureFailed { estimate: err });
            }
            for (lo, hi) in [(a, mid), (mid, b)] {
                let fresh = self.make_panel(lo, hi)?;
                let (v, e) = panel_value(&fresh.nodes, lo, hi);
                work.push((lo, hi, v, e));
            }
        }
        let smooth: C64 = work.iter().map(|t| t.2).sum();

        // Exact integral of the bracket: -Log((w_b - omega)/(w_b - reference)).
        let wb = self.gluing.w_at_branch;
        let ratio = (wb - omega) / (wb - reference);
        let log_ratio = match side {
            Some(s) if ratio.re < 0.0 => {
                let im_sign = -s * (wb - reference).re.signum();
                C64::new(ratio.norm().ln(), PI * im_sign)
            }
            _ => ratio.ln(),
        };
        Ok(smooth - g_star * log_ratio)
    }

    fn tail_bound(&self, omega: C64, reference: C64) -> f64 {
        let sigma_last = self.contour.nodes[self.contour.nodes.len() - 2].sigma;
        match self.w_on_contour(sigma_last) {
            Ok(w) => {
                let gmax = self.contour.nodes.iter().map(|n| n.log_g.im.abs()).fold(0.0, f64::max);
                let w = C64::new(w, 0.0);
                gmax * ((w - omega) / (w - reference)).ln().norm()
            }
            Err(_) => f64::INFINITY,
        }
    }

    /// Depth of `x` inside the domain bounded by the hyperbola, in units
    /// comparable to an angle; negative outside.
    pub fn depth(&self, x: C64) -> f64 {
        let scale = self.kernel.x_plus - self.kernel.x_minus;
        self.kernel.hyperbola_margin(x) / (x.im.abs() + scale)
    }

    fn assemble(&self, omega: C64, integral: C64) -> C64 {
        let mut v = self.c_prime / (omega - self.gluing.w_at_0) * (integral / (2.0 * PI * I)).exp();
        if let Some(w1) = self.w_x1 {
            v /= omega - w1;
        }
        v
    }

    /// The explicit formula at a point of the domain.
    pub fn psi1_formula(&self, x: C64) -> Result<C64, BvpError> {
        if x.norm() == 0.0 {
            return Err(BvpError::PoleAtZero);
        }
        if self.classification.chi == -1 && (x - self.kernel.x1).norm() == 0.0 {
            return Err(BvpError::PoleAtX1 { x1: self.kernel.x1 });
        }
        let margin = self.kernel.hyperbola_margin(x);
        if margin <= 0.0 {
            return Err(BvpError::OutsideDomain { re: x.re, im: x.im });
        }
        let y_h = self.kernel.hyperbola_y_at_height(x.im);
        let t = self.kernel.hyperbola_point(y_h).dx_dy;
        let sine = if t.is_finite() { (t.im / t.norm()).abs() } else { 1.0 };
        let scale = self.kernel.x_plus - self.kernel.x_minus + x.norm();
        if margin * sine < 1e-6 * scale {
            return Err(BvpError::NearContour { re: x.re, im: x.im });
        }
        let omega = self.gluing.w(x)?;
        if (omega - self.gluing.w_at_0).norm() < 1e-15 * (1.0 + omega.norm()) {
            return Err(BvpError::PoleAtZero);
        }
        if let Some(w1) = self.w_x1 {
            if (omega - w1).norm() < 1e-15 * (1.0 + omega.norm()) {
                return Err(BvpError::PoleAtX1 { x1: self.kernel.x1 });
            }
        }
        let integral = self.contour_integral(omega, C64::new(1.0, 0.0), None)?;
        Ok(self.assemble(omega, integral))
    }

    /// One-sided boundary value at the contour point with parameter `y`
    /// (or its conjugate), approached from inside the domain.
    pub fn psi1_on_contour(&self, y: f64, which: ContourSide) -> Result<C64, BvpError> {
        let h = self.kernel.hyperbola_point(y);
        let w = self.gluing.w(h.x)?;
        let omega = C64::new(w.re, 0.0);
        // Inward normal of the upward oriented upper half is -i times the tangent.
        let dw = self.gluing.w_prime(h.x)? * h.dx_dy;
        let upper_side = (-dw.re).signum();
        let side = match which {
            ContourSide::Upper => upper_side,
            ContourSide::Lower => -upper_side,
        };
        let integral = self.contour_integral(omega, C64::new(1.0, 0.0), Some(side))?;
        Ok(self.assemble(omega, integral))
    }

    /// Boundary function at the contour point with parameter `y`.
    pub fn g_at(&self, y: f64) -> Result<C64, BvpError> {
        let h = self.kernel.hyperbola_point(y);
        g_from(&self.params, h.x, y)
    }

    /// Tracked `log G` at the contour point with parameter `y`.
    pub fn log_g_at(&self, y: f64) -> Result<C64, BvpError> {
        let tau = (y - self.kernel.y_plus).max(0.0).sqrt();
        let sigma = tau / (1.0 + tau);
        Ok(C64::new(0.0, self.contour.arg_at(&self.params, &self.kernel, sigma)?))
    }
}

/// Both boundary transforms with analytic continuation between them.
#[derive(Debug, Clone)]
pub struct PsiEvaluator {
    pub first: Psi1Evaluator,
    /// Evaluator of the mirrored problem; its psi1 is psi2 of the original.
    pub second: Psi1Evaluator,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Role {
    First,
    Second,
}

impl PsiEvaluator {
    pub fn new(p: &ModelParams) -> Result<Self, BvpError> {
        Self::with_tolerance(p, 1e-9)
    }

    pub fn with_tolerance(p: &ModelParams, rel_tol: f64) -> Result<Self, BvpError> {
        Ok(Self {
            first: Psi1Evaluator::with_tolerance(p, rel_tol)?,
            second: Psi1Evaluator::with_tolerance(&p.swapped(), rel_tol)?,
        })
    }

    pub fn params(&self) -> &ModelParams {
        &self.first.params
    }

    fn ev(&self, role: Role) -> &Psi1Evaluator {
        match role {
            Role::First => &self.first,
            Role::Second => &self.second,
        }
    }

    fn other(role: Role) -> Role {
        match role {
            Role::First => Role::Second,
            Role::Second => Role::First,
        }
    }

    /// Picks the evaluation route of largest depth, recursing through
    /// `psi1(x) = -k2(x, y) psi2(y) / k1(x, y)` on the kernel zero set.
    fn route(&self, role: Role, x: C64, level: u32) -> Result<C64, BvpError> {
        let ev = self.ev(role);
        let here = ev.depth(x);
        if here >= COMFORTABLE_DEPTH || level >= MAX_ROUTE_DEPTH {
            return ev.psi1_formula(x);
        }
        let other = self.ev(Self::other(role));
        let p = &ev.params;
        let mut best: Option<(f64, C64)> = None;
        for branch in [Branch::Plus, Branch::Minus] {
            if x.re <= 0.0 && branch == Branch::Minus {
                continue;
            }
            let Ok(y) = kernel::branch_y(p, x, branch) else { continue };
            if y.re <= 0.0 {
                continue;
            }
            let kv = kernel::kernel_eval(p, x, y);
            if kv.k1.norm() < 1e-8 * (1.0 + x.norm()) {
                continue;
            }
            let d = other.depth(y);
            if best.is_none_or(|b| d > b.0) {
                best = Some((d, y));
            }
        }
        match best {
            Some((d, y)) if d > here + 1e-3 => {
                let kv = kernel::kernel_eval(p, x, y);
                let v = self.route(Self::other(role), y, level + 1)?;
                Ok(-kv.k2 * v / kv.k1)
            }
            _ => ev.psi1_formula(x),
        }
    }

    pub fn psi1(&self, x: C64) -> Result<C64, BvpError> {
        self.route(Role::First, x, 0)
    }

    pub fn psi2(&self, y: C64) -> Result<C64, BvpError> {
        self.route(Role::Second, y, 0)
    }

    /// `psi = (k1 psi1 + k2 psi2) / K` for `Re x > 0`, `Re y > 0`.
    pub fn psi(&self, x: C64, y: C64) -> Result<C64, BvpError> {
        let a = self.psi1(x)?;
        let b = self.psi2(y)?;
        psi_from_parts(self.params(), x, y, a, b)
    }
}

/// Functional equation solved for psi given both boundary transforms.
pub fn psi_from_parts(p: &ModelParams, x: C64, y: C64, psi1: C64, psi2: C64) -> Result<C64, BvpError> {
    let kv = kernel::kernel_eval(p, x, y);
    if kv.k.norm() <= 1e-12 {
        return Err(BvpError::KernelZero { x_re: x.re, x_im: x.im, y_re: y.re, y_im: y.im });
    }
    Ok((kv.k1 * psi1 + kv.k2 * psi2) / kv.k)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn product_form_closed_form() {
        let p = ModelParams::new(1.0, 1.0, 0.0, 2.0, 0.5).unwrap();
        let ev = Psi1Evaluator::new(&p).unwrap();
        for x in [c(0.5, 0.0), c(1.0, 0.0), c(2.0, 0.0), c(1.0, 3.0)] {
            let exact = x.inv() - (x + 2.4).inv();
            let got = ev.psi1_formula(x).unwrap();
            assert!((got - exact).norm() < 1e-7 * exact.norm(), "x={x} got={got} exact={exact}");
        }
    }

    #[test]
    fn residue_at_origin() {
        let p = ModelParams::new(2.0, 3.0, -0.4, 2.0, 4.0).unwrap();
        let ev = Psi1Evaluator::new(&p).unwrap();
        for x in [1e-3, 1e-4] {
            let v = ev.psi1_formula(c(x, 0.0)).unwrap() * x;
            assert!((v - 1.0).norm() <= 10.0 * x, "x={x} v={v}");
        }
    }

    #[test]
    fn skewed_parameters_index() {
        let p = ModelParams::new(2.0, 3.0, -0.4, 2.0, 4.0).unwrap();
        let ev = Psi1Evaluator::new(&p).unwrap();
        assert_eq!(ev.contour.measured_kappa, 0);
        let closed = ev.classification.d_plus_delta;
        assert!((ev.contour.measured_d_plus_delta - closed).abs() < 1e-6);
        assert!(ev.contour.diagnostics.is_empty());
    }

    #[test]
    fn g_is_unimodular_and_antisymmetric() {
        let p = ModelParams::new(2.0, 3.0, -0.4, 2.0, 4.0).unwrap();
        let kd = kernel::special_points(&p);
        for y in [kd.y_plus + 0.1, kd.y_plus + 3.0, 40.0] {
            let x = kd.hyperbola_point(y).x;
            let g = g_eval(&p, x).unwrap();
            let gc = g_eval(&p, x.conj()).unwrap();
            assert!((g.norm() - 1.0).abs() < 1e-12);
            assert!((g * gc - 1.0).norm() < 1e-10);
        }
    }

    #[test]
    fn outside_is_rejected() {
        let p = ModelParams::new(2.0, 3.0, -0.4, 2.0, 4.0).unwrap();
        let ev = Psi1Evaluator::new(&p).unwrap();
        assert!(matches!(ev.psi1_formula(c(-6.0, 0.0)), Err(BvpError::OutsideDomain { .. })));
        assert!(matches!(ev.psi1_formula(c(0.0, 0.0)), Err(BvpError::PoleAtZero)));
    }
}
