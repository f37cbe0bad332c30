//! Laplace inversion of the boundary transforms and tail asymptotics.

use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::bvp::{psi_from_parts, PsiEvaluator};
use crate::error::{BvpError, InversionError};
use crate::kernel::{self, Branch};
use crate::model::{self, AxisRegime, ModelParams};

/// Parameters of the Euler-summed Bromwich inversion.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InversionConfig {
    /// Number of terms before Euler averaging starts.
    pub m: usize,
    /// Depth of the binomial averaging.
    pub e: usize,
    /// Abscissa multiplier; transform points have real part `a / (2u)`.
    pub a: f64,
    pub target_abs_tol: f64,
}

impl Default for InversionConfig {
    fn default() -> Self {
        Self { m: 40, e: 20, a: 18.4, target_abs_tol: 1e-6 }
    }
}

impl InversionConfig {
    pub fn validate(&self) -> Result<(), InversionError> {
        if self.m < 20 || self.e < 10 || !(self.a > 0.0) {
            return Err(InversionError::InvalidInput(format!(
                "need m >= 20, e >= 10, a > 0 (got m={}, e={}, a={})",
                self.m, self.e, self.a
            )));
        }
        Ok(())
    }

    fn binomial_weights(&self) -> Vec<f64> {
        let mut w = vec![0.0; self.e + 1];
        let mut c = 1.0f64;
        for (k, wk) in w.iter_mut().enumerate() {
            *wk = c;
            c = c * (self.e - k) as f64 / (k + 1) as f64;
        }
        let scale = 2f64.powi(-(self.e as i32));
        w.iter_mut().for_each(|v| *v *= scale);
        w
    }

    /// Transform arguments `(a + 2 pi i k) / (2u)` for `k = 0..=m+e+1`.
    fn points(&self, u: f64) -> Vec<C64> {
        (0..=self.m + self.e + 1)
            .map(|k| C64::new(self.a, 2.0 * PI * k as f64) / (2.0 * u))
            .collect()
    }

    /// Euler sums of the alternating series `terms[0]/2 + sum (-1)^k terms[k]`
    /// starting at `m` and `m + 1`.
    fn euler_pair<T>(&self, terms: &[T]) -> (T, T)
    where
        T: Copy + std::ops::Add<Output = T> + std::ops::Mul<f64, Output = T> + std::ops::Neg<Output = T>,
    {
        let mut partial = Vec::with_capacity(terms.len());
        let mut s = terms[0] * 0.5;
        partial.push(s);
        for (k, t) in terms.iter().enumerate().skip(1) {
            s = if k % 2 == 0 { s + *t } else { s + -*t };
            partial.push(s);
        }
        let w = self.binomial_weights();
        let avg = |start: usize| {
            let mut acc = partial[start] * w[0];
            for (j, wj) in w.iter().enumerate().skip(1) {
                acc = acc + partial[start + j] * *wj;
            }
            acc
        };
        (avg(self.m), avg(self.m + 1))
    }
}

/// Inverts a real-on-the-real-axis transform at `u > 0`.
///
/// Returns the estimate and the difference between two neighbouring Euler
/// sums, used as an error indicator.
pub fn invert_real<F>(f: F, u: f64, cfg: &InversionConfig) -> Result<(f64, f64), InversionError>
where
    F: Fn(C64) -> Result<C64, BvpError>,
{
    cfg.validate()?;
    if !(u > 0.0) {
        return Err(InversionError::InvalidInput(format!("u must be positive, got {u}")));
    }
    let mut terms = Vec::new();
    for x in cfg.points(u) {
        terms.push(f(x)?.re);
    }
    let (e0, e1) = cfg.euler_pair(&terms);
    let scale = (cfg.a / 2.0).exp() / u;
    Ok((scale * e0, scale * (e0 - e1).abs()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Axis {
    Horizontal,
    Vertical,
}

/// Where transform values come from.
#[derive(Debug, Clone)]
pub enum TransformSource {
    Bvp(Box<PsiEvaluator>),
    /// Product-form closed form with poles `x1`, `y2`.
    ClosedForm { x1: f64, y2: f64 },
}

impl TransformSource {
    fn psi1(&self, x: C64) -> Result<C64, BvpError> {
        match self {
            Self::Bvp(ev) => ev.psi1(x),
            Self::ClosedForm { x1, .. } => Ok(x.inv() - (x - *x1).inv()),
        }
    }

    fn psi2(&self, y: C64) -> Result<C64, BvpError> {
        match self {
            Self::Bvp(ev) => ev.psi2(y),
            Self::ClosedForm { y2, .. } => Ok(y.inv() - (y - *y2).inv()),
        }
    }
}

/// Probability pair at one start point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Probability {
    pub p_absorb: f64,
    pub p_escape: f64,
    /// Unclamped value of the directly inverted quantity.
    pub raw: f64,
    /// Whether the escape (rather than absorption) transform was inverted.
    pub inverted_escape: bool,
    pub spread: f64,
    /// Set when the raw value left `[-1e-6, 1 + 1e-6]` and was clamped.
    pub clamped: bool,
}

impl Probability {
    fn from_absorb(raw: f64, spread: f64) -> Self {
        let clamped = !(-1e-6..=1.0 + 1e-6).contains(&raw);
        let p = raw.clamp(0.0, 1.0);
        Self { p_absorb: p, p_escape: 1.0 - p, raw, inverted_escape: false, spread, clamped }
    }

    fn from_escape(raw: f64, spread: f64) -> Self {
        let clamped = !(-1e-6..=1.0 + 1e-6).contains(&raw);
        let p = raw.clamp(0.0, 1.0);
        Self { p_absorb: 1.0 - p, p_escape: p, raw, inverted_escape: true, spread, clamped }
    }
}

/// Absorption and escape probabilities from the boundary transforms.
#[derive(Debug, Clone)]
pub struct Inverter {
    pub params: ModelParams,
    pub source: TransformSource,
    pub config: InversionConfig,
}

impl Inverter {
    /// Uses the closed form in the product-form case, the BVP otherwise.
    pub fn new(p: &ModelParams, config: InversionConfig) -> Result<Self, InversionError> {
        if p.is_product_form() {
            let kd = kernel::special_points(p);
            return Ok(Self { params: *p, source: TransformSource::ClosedForm { x1: kd.x1, y2: kd.y2 }, config });
        }
        Self::with_bvp(p, config)
    }

    /// Always evaluates transforms through the contour formula.
    pub fn with_bvp(p: &ModelParams, config: InversionConfig) -> Result<Self, InversionError> {
        config.validate()?;
        let ev = PsiEvaluator::new(p)?;
        Ok(Self { params: *p, source: TransformSource::Bvp(Box::new(ev)), config })
    }

    pub fn from_evaluator(ev: PsiEvaluator, config: InversionConfig) -> Self {
        Self { params: *ev.params(), source: TransformSource::Bvp(Box::new(ev)), config }
    }

    fn boundary(&self, axis: Axis, x: C64) -> Result<C64, BvpError> {
        match axis {
            Axis::Horizontal => self.source.psi1(x),
            Axis::Vertical => self.source.psi2(x),
        }
    }

    fn check(&self, u: f64, value: f64, spread: f64) -> Result<(), InversionError> {
        if !value.is_finite() || spread > self.config.target_abs_tol {
            return Err(InversionError::InversionUnstable { u, spread });
        }
        Ok(())
    }

    /// `P[T < inf]` from `(u, 0)` (horizontal) or `(0, u)` (vertical).
    ///
    /// The smaller of the two probabilities is inverted directly and the
    /// other is its complement.
    pub fn absorption_prob_axis(&self, u: f64, axis: Axis) -> Result<Probability, InversionError> {
        let (absorb, spread) = invert_real(|x| Ok(x.inv() - self.boundary(axis, x)?), u, &self.config)?;
        self.check(u, absorb, spread)?;
        if absorb <= 0.5 {
            return Ok(Probability::from_absorb(absorb, spread));
        }
        let (escape, spread) = invert_real(|x| self.boundary(axis, x), u, &self.config)?;
        self.check(u, escape, spread)?;
        Ok(Probability::from_escape(escape, spread))
    }

    /// `P[T = inf]` from an interior point by iterated inversion of psi(x, y).
    ///
    /// Costs about `(m+e)^2` algebraic evaluations on top of `2(m+e)`
    /// boundary transform evaluations.
    pub fn escape_prob_interior(&self, u: f64, v: f64) -> Result<Probability, InversionError> {
        if !(u > 0.0 && v > 0.0) {
            return Err(InversionError::InvalidInput(format!("start ({u}, {v}) must be interior")));
        }
        if let TransformSource::ClosedForm { x1, y2 } = self.source {
            let absorb = (u * x1 + v * y2).exp();
            return Ok(Probability::from_absorb(absorb, 0.0));
        }
        let cfg = &self.config;
        cfg.validate()?;
        let xs = cfg.points(u);
        let ys = cfg.points(v);
        let mut psi1 = Vec::with_capacity(xs.len());
        for &x in &xs {
            psi1.push(self.source.psi1(x)?);
        }
        let mut psi2 = Vec::with_capacity(ys.len());
        for &y in &ys {
            psi2.push(self.source.psi2(y)?);
        }
        let absorb_t = |x: C64, y: C64, a: C64, b: C64| -> Result<C64, BvpError> {
            Ok((x * y).inv() - psi_from_parts(&self.params, x, y, a, b)?)
        };
        let escape_t = |x: C64, y: C64, a: C64, b: C64| psi_from_parts(&self.params, x, y, a, b);

        let run = |t: &dyn Fn(C64, C64, C64, C64) -> Result<C64, BvpError>| -> Result<(f64, f64), InversionError> {
            // Inner inversion over x for each y: pair k with -k (conjugate x).
            let mut outer = Vec::with_capacity(ys.len());
            let mut outer_alt = Vec::with_capacity(ys.len());
            for (j, &y) in ys.iter().enumerate() {
                let mut terms = Vec::with_capacity(xs.len());
                for (k, &x) in xs.iter().enumerate() {
                    let plus = t(x, y, psi1[k], psi2[j])?;
                    if k == 0 {
                        terms.push(plus);
                    } else {
                        let minus = t(x.conj(), y, psi1[k].conj(), psi2[j])?;
                        terms.push((plus + minus) * 0.5);
                    }
                }
                let (h0, h1) = cfg.euler_pair(&terms);
                let s = (cfg.a / 2.0).exp() / u;
                outer.push(h0 * s);
                outer_alt.push(h1 * s);
            }
            let re: Vec<f64> = outer.iter().map(|h| h.re).collect();
            let re_alt: Vec<f64> = outer_alt.iter().map(|h| h.re).collect();
            let (f0, f1) = cfg.euler_pair(&re);
            let (g0, _) = cfg.euler_pair(&re_alt);
            let s = (cfg.a / 2.0).exp() / v;
            let spread = ((f0 - f1).abs()).max((f0 - g0).abs()) * s;
            Ok((f0 * s, spread))
        };

        let (absorb, spread) = run(&absorb_t)?;
        self.check(u.min(v), absorb, spread)?;
        if absorb <= 0.5 {
            return Ok(Probability::from_absorb(absorb, spread));
        }
        let (escape, spread) = run(&escape_t)?;
        self.check(u.min(v), escape, spread)?;
        Ok(Probability::from_escape(escape, spread))
    }
}

/// Tail shape of the absorption probability along one axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticReport {
    pub axis: Axis,
    pub regime: AxisRegime,
    /// Exponential rate: the pole or the branch point.
    pub rate: f64,
    /// Polynomial correction exponent.
    pub power: f64,
    /// Exponent of the escape probability near the corner.
    pub origin_exponent: f64,
    /// False when `Re Y+(x_minus) <= 0`, outside the hypothesis of the tail law.
    pub x_minus_in_s: bool,
    /// Second root of `K(x, y2) = 0` when the other axis has its pole, `x_minus` is not
    /// in S and the root lies in `(rate, 0)`. The continuation carries the pole of the
    /// other transform there and it then dominates `rate`.
    pub continued_pole: Option<f64>,
}

impl AsymptoticReport {
    /// Un-normalized shape `u^power e^{rate u}`.
    pub fn evaluate(&self, u: f64) -> f64 {
        u.powf(self.power) * (self.rate * u).exp()
    }
}

pub fn asymptotics(p: &ModelParams, axis: Axis) -> AsymptoticReport {
    let q = match axis {
        Axis::Horizontal => *p,
        Axis::Vertical => p.swapped(),
    };
    let g = model::wedge_geometry(&q);
    let cl = model::classify(&q, &g);
    let kd = kernel::special_points(&q);
    let (rate, power) = match cl.regime_h {
        AxisRegime::PoleX1 => (kd.x1, 0.0),
        AxisRegime::BranchMinus32 => (kd.x_minus, -1.5),
        AxisRegime::BranchMinus12 => (kd.x_minus, -0.5),
    };
    let y_at_branch = kernel::branch_y_limit(&q, C64::new(kd.x_minus, 0.0), Branch::Plus, kernel::Side::Upper);
    let x_minus_in_s = y_at_branch.re > 0.0;
    let other = model::classify(&q.swapped(), &model::wedge_geometry(&q.swapped()));
    let continued_pole = if !x_minus_in_s && other.regime_h == AxisRegime::PoleX1 && kd.x2 != 0.0 {
        let x = (kd.y2 * kd.y2 + 2.0 * q.mu2 * kd.y2) / kd.x2;
        (x > rate && x < 0.0).then_some(x)
    } else {
        None
    };
    AsymptoticReport {
        axis,
        regime: cl.regime_h,
        rate,
        power,
        origin_exponent: g.alpha,
        x_minus_in_s,
        continued_pole,
    }
}
