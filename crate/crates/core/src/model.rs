//! Parameters, wedge angles and regime classification.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::ModelError;

/// Tolerance for structural equalities between angle combinations.
pub const STRUCTURAL_TOL: f64 = 1e-12;
/// Tolerance used when comparing angle identities.
pub const ANGULAR_TOL: f64 = 1e-9;

/// Drift, correlation and reflection slopes of the process.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub mu1: f64,
    pub mu2: f64,
    pub rho: f64,
    pub r1: f64,
    pub r2: f64,
}

impl ModelParams {
    /// Validates a raw tuple, see [`validate_params`].
    pub fn new(mu1: f64, mu2: f64, rho: f64, r1: f64, r2: f64) -> Result<Self, ModelError> {
        validate_params(mu1, mu2, rho, r1, r2)
    }

    /// Parameters of the mirrored process (axes exchanged).
    pub fn swapped(&self) -> Self {
        Self {
            mu1: self.mu2,
            mu2: self.mu1,
            rho: self.rho,
            r1: self.r2,
            r2: self.r1,
        }
    }

    pub fn is_product_form(&self) -> bool {
        (self.r1 * self.r2 - 1.0).abs() <= STRUCTURAL_TOL
    }
}

/// Checks the admissibility constraints, reporting the first violated one.
///
/// NaN inputs fail the corresponding comparison and are rejected.
pub fn validate_params(mu1: f64, mu2: f64, rho: f64, r1: f64, r2: f64) -> Result<ModelParams, ModelError> {
    if !(mu1 > 0.0 && mu1.is_finite()) {
        return Err(ModelError::NonPositiveDrift { name: "mu1", value: mu1 });
    }
    if !(mu2 > 0.0 && mu2.is_finite()) {
        return Err(ModelError::NonPositiveDrift { name: "mu2", value: mu2 });
    }
    if !(rho.abs() < 1.0) {
        return Err(ModelError::CorrelationOutOfRange { rho });
    }
    if !(r1 > 0.0 && r1.is_finite()) {
        return Err(ModelError::NonPositiveReflection { name: "r1", value: r1 });
    }
    if !(r2 > 0.0 && r2.is_finite()) {
        return Err(ModelError::NonPositiveReflection { name: "r2", value: r2 });
    }
    let product = r1 * r2;
    if product < 1.0 - STRUCTURAL_TOL {
        return Err(ModelError::ReflectionProductBelowOne { product });
    }
    Ok(ModelParams { mu1, mu2, rho, r1, r2 })
}

/// Angles of the wedge obtained after decorrelating the process.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WedgeGeometry {
    pub beta: f64,
    pub delta: f64,
    pub epsilon: f64,
    pub theta: f64,
    pub alpha: f64,
}

pub fn wedge_geometry(p: &ModelParams) -> WedgeGeometry {
    let beta = (-p.rho).acos();
    let (sb, cb) = beta.sin_cos();
    let delta = sb.atan2(-p.r2 + cb);
    let epsilon = sb.atan2(-p.r1 + cb);
    let theta = sb.atan2(p.mu1 / p.mu2 + cb);
    let alpha = (delta + epsilon - PI) / beta;
    WedgeGeometry { beta, delta, epsilon, theta, alpha }
}

/// Shape of the absorption probability tail along one axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum AxisRegime {
    /// Simple pole (x1 on the horizontal axis, y2 on the vertical one).
    PoleX1,
    /// Branch point with a `u^{-3/2}` correction.
    BranchMinus32,
    /// Branch point with a `u^{-1/2}` correction.
    BranchMinus12,
}

/// A strict inequality that held with equality up to [`STRUCTURAL_TOL`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Degeneracy {
    pub quantity: String,
    pub excess: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Classification {
    pub pole_x1_in_s: bool,
    pub pole_x1_in_g: bool,
    pub chi: i32,
    pub kappa: i32,
    pub d: f64,
    pub d_plus_delta: f64,
    pub product_form: bool,
    pub regime_h: AxisRegime,
    pub regime_v: AxisRegime,
    pub degeneracies: Vec<Degeneracy>,
}

impl Classification {
    /// Row/column of the index table, e.g. `"chi=0, eps+delta+beta>=2pi"`.
    pub fn table_cell(&self) -> String {
        let ge = self.kappa == self.chi;
        format!(
            "chi={}, eps+delta+beta{}2pi",
            self.chi,
            if ge { ">=" } else { "<" }
        )
    }
}

/// Sign of `lhs - rhs` with a tolerance band; returns 0 inside the band and logs it.
fn compare(lhs: f64, rhs: f64, name: &str, out: &mut Vec<Degeneracy>) -> i32 {
    let excess = lhs - rhs;
    if excess.abs() <= STRUCTURAL_TOL {
        out.push(Degeneracy { quantity: name.to_string(), excess });
        0
    } else if excess > 0.0 {
        1
    } else {
        -1
    }
}

fn regime_from(sign: i32) -> AxisRegime {
    match sign {
        1 => AxisRegime::PoleX1,
        -1 => AxisRegime::BranchMinus32,
        _ => AxisRegime::BranchMinus12,
    }
}

pub fn classify(p: &ModelParams, g: &WedgeGeometry) -> Classification {
    let mut degeneracies = Vec::new();
    let two_pi = 2.0 * PI;
    let (beta, delta, eps, theta) = (g.beta, g.delta, g.epsilon, g.theta);

    let pole_h = compare(2.0 * delta - theta, PI, "2delta-theta vs pi", &mut degeneracies);
    let pole_v = compare(2.0 * eps + theta - beta, PI, "2eps+theta-beta vs pi", &mut degeneracies);
    let chi_cmp = compare(2.0 * delta - theta + beta, two_pi, "2delta-theta+beta vs 2pi", &mut degeneracies);
    let sum_cmp = compare(eps + delta + beta, two_pi, "eps+delta+beta vs 2pi", &mut degeneracies);

    let chi = if chi_cmp > 0 { -1 } else { 0 };
    let kappa = if sum_cmp >= 0 { chi } else { chi - 1 };
    let d = if chi_cmp == 0 { PI } else { 0.0 };
    let d_plus_delta = 2.0 * (eps + delta + beta + f64::from(chi - 2) * PI);

    Classification {
        pole_x1_in_s: pole_h > 0,
        pole_x1_in_g: chi == -1,
        chi,
        kappa,
        d,
        d_plus_delta,
        product_form: p.is_product_form(),
        regime_h: regime_from(pole_h),
        regime_v: regime_from(pole_v),
        degeneracies,
    }
}
