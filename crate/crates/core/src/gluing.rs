//! Generalized Chebyshev function and the gluing maps w and W.

use num_complex::Complex64 as C64;

use crate::error::GluingError;
use crate::kernel::KernelData;
use crate::model::ModelParams;

/// Beyond this modulus only the growing power is kept.
const DOMINANT_ONLY: f64 = 1e8;

/// `u = z + sqrt(z-1) sqrt(z+1)` folded onto `|u| >= 1`, returned as `log u`.
fn acosh_like(z: C64) -> C64 {
    let r = (z - 1.0).sqrt() * (z + 1.0).sqrt();
    let (a, b) = (z + r, z - r);
    if a.norm_sqr() >= b.norm_sqr() { a.ln() } else { b.ln() }
}

fn check_cut(z: C64) -> Result<(), GluingError> {
    if z.im == 0.0 && z.re <= -1.0 {
        Err(GluingError::OnCut { z: z.re })
    } else {
        Ok(())
    }
}

/// `T_a(z) = cos(a arccos z)` continued to the plane cut along `(-inf, -1]`.
///
/// With `zeta = log u` this is `cosh(a zeta)`, an even function of zeta, so
/// the choice between `u` and `1/u` does not matter.
pub fn chebyshev_t(a: f64, z: C64) -> Result<C64, GluingError> {
    check_cut(z)?;
    let zeta = acosh_like(z);
    if zeta.re > DOMINANT_ONLY.ln() {
        return Ok(0.5 * (a * zeta).exp());
    }
    Ok((a * zeta).cosh())
}

/// Derivative `a sinh(a zeta) / sinh(zeta)`, equal to `a^2` at `z = 1`.
pub fn chebyshev_t_prime(a: f64, z: C64) -> Result<C64, GluingError> {
    check_cut(z)?;
    let zeta = acosh_like(z);
    if zeta.re > DOMINANT_ONLY.ln() {
        // sinh(zeta) ~ u/2 for large u.
        return Ok(a * (a * zeta).exp() / zeta.exp());
    }
    let s = zeta.sinh();
    if s.norm() < 1e-300 {
        return Ok(C64::new(a * a, 0.0));
    }
    Ok(a * (a * zeta).sinh() / s)
}

/// Gluing data for one parameter set.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GluingContext {
    pub a: f64,
    pub x_plus: f64,
    pub x_minus: f64,
    pub w_at_0: C64,
    pub w_at_branch: C64,
}

impl GluingContext {
    pub fn new(p: &ModelParams, kd: &KernelData) -> Result<Self, GluingError> {
        let beta = (-p.rho).acos();
        let mut ctx = Self {
            a: std::f64::consts::PI / beta,
            x_plus: kd.x_plus,
            x_minus: kd.x_minus,
            w_at_0: C64::new(0.0, 0.0),
            w_at_branch: C64::new(0.0, 0.0),
        };
        ctx.w_at_0 = ctx.w(C64::new(0.0, 0.0))?;
        ctx.w_at_branch = ctx.w(C64::new(kd.vertex(), 0.0))?;
        Ok(ctx)
    }

    /// Affine map sending `x_minus` to -1 and `x_plus` to 1.
    pub fn z(&self, x: C64) -> C64 {
        (2.0 * x - (self.x_plus + self.x_minus)) / (self.x_plus - self.x_minus)
    }

    pub fn w(&self, x: C64) -> Result<C64, GluingError> {
        chebyshev_t(self.a, self.z(x))
    }

    pub fn w_prime(&self, x: C64) -> Result<C64, GluingError> {
        Ok(chebyshev_t_prime(self.a, self.z(x))? * (2.0 / (self.x_plus - self.x_minus)))
    }

    #[allow(non_snake_case)]
    pub fn W(&self, x: C64) -> Result<C64, GluingError> {
        let wx = self.w(x)?;
        let den = wx - self.w_at_0;
        if den.norm() < 1e-13 * (1.0 + wx.norm()) {
            return Err(GluingError::PoleAtZero);
        }
        Ok((wx - self.w_at_branch) / den)
    }
}
