use std::f64::consts::PI;

use proptest::prelude::*;
use quadrant_escape::bvp::PsiEvaluator;
use quadrant_escape::gluing::{chebyshev_t, GluingContext};
use quadrant_escape::inversion::{Axis, InversionConfig, Inverter};
use quadrant_escape::kernel::{self, Branch};
use quadrant_escape::model::{classify, wedge_geometry};
use quadrant_escape::oracles::{mc_escape_prob, McConfig};
use quadrant_escape::{Complex64, ModelParams};

fn valid_params() -> impl Strategy<Value = ModelParams> {
    (0.1f64..5.0, 0.1f64..5.0, -0.95f64..0.95, 0.05f64..10.0, 1.0f64..10.0)
        .prop_map(|(mu1, mu2, rho, r1, k)| ModelParams::new(mu1, mu2, rho, r1, k / r1).unwrap())
}

fn close(a: Complex64, b: Complex64, rel: f64) -> bool {
    (a - b).norm() <= rel * a.norm().max(b.norm()).max(1.0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn angles_satisfy_their_cotangent_definitions(p in valid_params()) {
        let g = wedge_geometry(&p);
        let (s, c) = g.beta.sin_cos();
        prop_assert!((c + p.rho).abs() < 1e-12);
        for (angle, t) in [(g.delta, -p.r2 + c), (g.epsilon, -p.r1 + c), (g.theta, p.mu1 / p.mu2 + c)] {
            prop_assert!(angle > 0.0 && angle < PI);
            prop_assert!((angle.cos() * s - angle.sin() * t).abs() < 1e-9 * (1.0 + t.abs()));
        }
        prop_assert!((g.alpha - (g.delta + g.epsilon - PI) / g.beta).abs() < 1e-12);
        prop_assert!(g.alpha >= 1.0 - 1e-9);
    }

    #[test]
    fn dual_skew_symmetry_gives_unit_exponent(mu1 in 0.1f64..5.0, mu2 in 0.1f64..5.0, rho in -0.95f64..0.95, r1 in 0.05f64..10.0) {
        let p = ModelParams::new(mu1, mu2, rho, r1, 1.0 / r1).unwrap();
        let g = wedge_geometry(&p);
        prop_assert!((g.delta + g.epsilon - g.beta - PI).abs() < 1e-9);
        prop_assert!((g.alpha - 1.0).abs() < 1e-9);
        prop_assert!(classify(&p, &g).product_form);
    }

    #[test]
    fn classification_table_shape(p in valid_params()) {
        let g = wedge_geometry(&p);
        let c = classify(&p, &g);
        prop_assert!(c.chi == 0 || c.chi == -1);
        prop_assert!(c.kappa == c.chi || c.kappa == c.chi - 1);
        prop_assert_eq!(c.pole_x1_in_g, c.chi == -1);
        let s = wedge_geometry(&p.swapped());
        prop_assert!((s.alpha - g.alpha).abs() < 1e-9);
        prop_assert_eq!(classify(&p.swapped(), &s).regime_h, c.regime_v);
    }

    #[test]
    fn branch_roots_obey_vieta(p in valid_params(), re in -20.0f64..20.0, im in -20.0f64..20.0) {
        let x = Complex64::new(re, im);
        let (Ok(a), Ok(b)) = (kernel::branch_y(&p, x, Branch::Plus), kernel::branch_y(&p, x, Branch::Minus)) else {
            return Ok(());
        };
        let sum = -2.0 * (p.rho * x + p.mu2);
        let prod = x * x + 2.0 * p.mu1 * x;
        prop_assert!(close(a + b, sum, 1e-10));
        prop_assert!(close(a * b, prod, 1e-10));
        prop_assert!(kernel::kernel_eval(&p, x, a).k.norm() <= 1e-9 * (1.0 + x.norm_sqr()));
    }

    #[test]
    fn hyperbola_points_are_kernel_zeros(p in valid_params(), t in 0.0f64..30.0) {
        let kd = kernel::special_points(&p);
        let y = kd.y_plus + t * t;
        let h = kd.hyperbola_point(y);
        let k = kernel::kernel_eval(&p, h.x, Complex64::new(y, 0.0)).k;
        let scale = 1.0 + h.x.norm_sqr() + y * y;
        prop_assert!(k.norm() <= 1e-12 * scale);
        prop_assert!(kd.hyperbola_residual(h.x).abs() <= 1e-9 * scale);
        prop_assert!(h.x.im >= 0.0);
    }

    #[test]
    fn hyperbola_derivative_matches_differences(p in valid_params(), t in 0.5f64..10.0) {
        let kd = kernel::special_points(&p);
        let y = kd.y_plus + t * t;
        let e = 1e-5 * (1.0 + y.abs());
        let fd = (kd.hyperbola_point(y + e).x - kd.hyperbola_point(y - e).x) / (2.0 * e);
        prop_assert!(close(kd.hyperbola_point(y).dx_dy, fd, 1e-6));
    }

    #[test]
    fn gluing_identifies_conjugate_contour_points(p in valid_params(), t in 0.05f64..20.0) {
        let kd = kernel::special_points(&p);
        let gl = GluingContext::new(&p, &kd).unwrap();
        let x = kd.hyperbola_point(kd.y_plus + t * t).x;
        let (Ok(a), Ok(b)) = (gl.W(x), gl.W(x.conj())) else { return Ok(()); };
        prop_assert!(close(a, b, 1e-9));
        prop_assert!(a.im.abs() <= 1e-9 * a.norm().max(1.0));
    }

    #[test]
    fn gluing_derivative_is_holomorphic(p in valid_params(), s in 0.05f64..0.95, b in -5.0f64..5.0) {
        let kd = kernel::special_points(&p);
        let gl = GluingContext::new(&p, &kd).unwrap();
        let x = Complex64::new(kd.x_minus + s * (kd.x_plus - kd.x_minus), b);
        prop_assume!(kd.hyperbola_margin(x) > 1e-3);
        let e = 1e-6 * (kd.x_plus - kd.x_minus);
        let d = gl.w_prime(x).unwrap();
        let dr = (gl.w(x + e).unwrap() - gl.w(x - e).unwrap()) / (2.0 * e);
        let i = Complex64::new(0.0, e);
        let di = (gl.w(x + i).unwrap() - gl.w(x - i).unwrap()) / (2.0 * i);
        let scale = gl.w(x).unwrap().norm() / (kd.x_plus - kd.x_minus) + d.norm();
        prop_assert!((d - dr).norm() <= 1e-6 * scale);
        prop_assert!((d - di).norm() <= 1e-6 * scale);
    }

    #[test]
    fn chebyshev_matches_cosine(a in 0.2f64..8.0, t in 0.0f64..3.1) {
        let v = chebyshev_t(a, Complex64::new(t.cos(), 0.0)).unwrap();
        prop_assert!((v - (a * t).cos()).norm() < 1e-9);
    }

    #[test]
    fn params_serde_round_trip(p in valid_params()) {
        let text = serde_json::to_string(&p).unwrap();
        prop_assert_eq!(serde_json::from_str::<ModelParams>(&text).unwrap(), p);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn transforms_commute_with_conjugation(p in valid_params(), re in 0.05f64..10.0, im in 0.1f64..20.0) {
        let ev = PsiEvaluator::new(&p).unwrap();
        let x = Complex64::new(re, im);
        if let (Ok(a), Ok(b)) = (ev.psi1(x), ev.psi1(x.conj())) {
            prop_assert!(close(a.conj(), b, 1e-12));
        }
    }

    #[test]
    fn psi2_is_psi1_of_the_mirrored_problem(p in valid_params(), re in 0.05f64..10.0, im in 0.0f64..10.0) {
        let y = Complex64::new(re, im);
        let a = PsiEvaluator::new(&p).unwrap().psi2(y);
        let b = PsiEvaluator::new(&p.swapped()).unwrap().psi1(y);
        if let (Ok(a), Ok(b)) = (a, b) {
            prop_assert!((a - b).norm() <= 1e-9 * a.norm());
        }
    }

    #[test]
    fn probabilities_are_complementary(p in valid_params(), u in 0.05f64..4.0) {
        let inv = Inverter::new(&p, InversionConfig::default()).unwrap();
        let r = inv.absorption_prob_axis(u, Axis::Horizontal).unwrap();
        prop_assert_eq!(r.p_absorb + r.p_escape, 1.0);
        prop_assert!((0.0..=1.0).contains(&r.p_absorb));
        prop_assert!(r.raw > -1e-6 && r.raw < 1.0 + 1e-6);
    }

    #[test]
    fn monte_carlo_is_seed_reproducible(p in valid_params(), seed in 0u64..1000) {
        let cfg = McConfig { dt: 1e-2, n_paths: 300, seed, ..McConfig::for_params(&p) };
        let a = mc_escape_prob((0.4, 0.3), &p, &cfg).unwrap();
        let b = mc_escape_prob((0.4, 0.3), &p, &cfg).unwrap();
        prop_assert_eq!(a, b);
    }
}
