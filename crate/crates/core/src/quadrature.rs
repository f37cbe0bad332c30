//! Adaptive Gauss-Kronrod (7/15) quadrature for complex-valued integrands.

use num_complex::Complex64 as C64;

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];

const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// Kronrod abscissae on [-1, 1] in ascending order.
pub fn gk15_nodes() -> [f64; 15] {
    let mut out = [0.0; 15];
    for i in 0..7 {
        out[i] = -XGK[i];
        out[14 - i] = XGK[i];
    }
    out[7] = 0.0;
    out
}

/// Maps the reference nodes onto `[a, b]`.
pub fn panel_nodes(a: f64, b: f64) -> [f64; 15] {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    gk15_nodes().map(|t| c + h * t)
}

/// Kronrod estimate and QUADPACK-style error for values at [`panel_nodes`].
pub fn gk15_rule(vals: &[C64; 15], half: f64) -> (C64, f64) {
    let mut kron = vals[7] * WGK[7];
    let mut gauss = vals[7] * WG[3];
    for i in 0..7 {
        let pair = vals[i] + vals[14 - i];
        kron += pair * WGK[i];
        if i % 2 == 1 {
            gauss += pair * WG[i / 2];
        }
    }
    let mean = kron * 0.5;
    let mut asc = WGK[7] * (vals[7] - mean).norm();
    for i in 0..7 {
        asc += WGK[i] * ((vals[i] - mean).norm() + (vals[14 - i] - mean).norm());
    }
    let h = half.abs();
    let mut err = ((kron - gauss) * h).norm();
    let asc = asc * h;
    if asc != 0.0 && err != 0.0 {
        err = asc * (200.0 * err / asc).powf(1.5).min(1.0);
    }
    (kron * half, err)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadResult {
    pub value: C64,
    pub error: f64,
    pub panels: usize,
    pub converged: bool,
}

#[derive(Debug, Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
    value: C64,
    error: f64,
}

/// Globally adaptive integration over the union of `[breaks[i], breaks[i+1]]`.
///
/// Stops when the summed error estimate is below `max(abs_tol, rel_tol |I|)`
/// or when `max_panels` is reached.
pub fn integrate<F>(mut f: F, breaks: &[f64], abs_tol: f64, rel_tol: f64, max_panels: usize) -> QuadResult
where
    F: FnMut(f64) -> C64,
{
    let mut eval = |a: f64, b: f64| {
        let vals = panel_nodes(a, b).map(&mut f);
        let (value, error) = gk15_rule(&vals, 0.5 * (b - a));
        Panel { a, b, value, error }
    };
    let mut panels: Vec<Panel> = breaks.windows(2).map(|w| eval(w[0], w[1])).collect();
    loop {
        let value: C64 = panels.iter().map(|p| p.value).sum();
        let error: f64 = panels.iter().map(|p| p.error).sum();
        let target = abs_tol.max(rel_tol * value.norm());
        if error <= target || panels.len() >= max_panels {
            return QuadResult {
                value,
                error,
                panels: panels.len(),
                converged: error <= target,
            };
        }
        let worst = panels
            .iter()
            .enumerate()
            .max_by(|x, y| x.1.error.total_cmp(&y.1.error))
            .map(|(i, _)| i)
            .unwrap_or(0);
        let p = panels.swap_remove(worst);
        let mid = 0.5 * (p.a + p.b);
        if mid <= p.a || mid >= p.b {
            return QuadResult { value, error, panels: panels.len() + 1, converged: false };
        }
        panels.push(eval(p.a, mid));
        panels.push(eval(mid, p.b));
    }
}
