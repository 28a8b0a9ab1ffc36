use nalgebra::Matrix3 as NaMatrix;
use proptest::prelude::*;

use invitation_core::cubic::{cubic_discriminant, cubic_roots, routh_hurwitz_cubic, CubicPoly};
use invitation_core::fluid::{integrate, rhs_interior, FluidConfig};
use invitation_core::model::{lift_to_raw, scale_center, z_from_yw, CtmcState, FluidState, ModelParams};
use invitation_core::simulator::{apply_event, event_rates, EventKind};
use invitation_core::stability::{
    aminus_hurwitz, build_a_minus, build_a_plus, char_poly, product_char_poly, Matrix3,
};

fn rate() -> impl Strategy<Value = f64> {
    (0.05f64.ln()..5f64.ln()).prop_map(f64::exp)
}

fn params() -> impl Strategy<Value = ModelParams> {
    (0.0f64..0.95, rate(), rate(), rate(), rate()).prop_map(|(alpha, beta, mu, gamma, epsilon)| ModelParams {
        lambda: 1.0,
        alpha,
        beta,
        mu,
        gamma,
        epsilon,
        r: 1000.0,
    })
}

fn to_na(m: &Matrix3) -> NaMatrix<f64> {
    NaMatrix::from_fn(|i, j| m.0[i][j])
}

fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * (1.0 + a.abs().max(b.abs()))
}

proptest! {
    #[test]
    fn w_encodes_service_count(y in -10_000i64..10_000, z in 0i64..10_000) {
        let s = CtmcState::new(0, y, z);
        prop_assert_eq!(s.w(), y.abs() + 2 * z);
        prop_assert_eq!(z_from_yw(y as f64, s.w() as f64), z as f64);
    }

    #[test]
    fn agent_and_customer_queues_never_both_positive(y in -10_000i64..10_000) {
        let s = CtmcState::new(0, y, 0);
        prop_assert!(s.agent_queue() == 0 || s.customer_queue() == 0);
        prop_assert_eq!(s.agent_queue() - s.customer_queue(), y);
    }

    #[test]
    fn scale_center_is_affine(p in params(), x in 0i64..5000, y in -5000i64..5000, z in 0i64..5000, dx in 0i64..100, dy in -100i64..100, dz in 0i64..100) {
        let a = scale_center(&CtmcState::new(x, y, z), &p);
        let b = scale_center(&CtmcState::new(x + dx, y + dy, z + dz), &p);
        prop_assert!((b.x - a.x - dx as f64 / p.r).abs() < 1e-12);
        prop_assert!((b.y - a.y - dy as f64 / p.r).abs() < 1e-12);
        let dw = (y + dy).abs() - y.abs() + 2 * dz;
        prop_assert!((b.w - a.w - dw as f64 / p.r).abs() < 1e-12);
    }

    #[test]
    fn lifting_inverts_scaling(p in params(), x in 0i64..5000, y in -5000i64..5000, z in 0i64..5000) {
        let s = CtmcState::new(x, y, z);
        prop_assert_eq!(lift_to_raw(&scale_center(&s, &p), &p), s);
    }

    #[test]
    fn routh_hurwitz_matches_roots(a1 in -5.0f64..5.0, a2 in -5.0f64..5.0, a3 in -5.0f64..5.0) {
        let c = CubicPoly::new(1.0, a1, a2, a3);
        let roots = cubic_roots(&c).unwrap();
        let max_re = roots.iter().map(|r| r.re).fold(f64::NEG_INFINITY, f64::max);
        prop_assume!(max_re.abs() > 1e-6);
        prop_assert_eq!(routh_hurwitz_cubic(&c).unwrap(), max_re < 0.0);
    }

    #[test]
    fn discriminant_sign_matches_root_reality(a1 in -5.0f64..5.0, a2 in -5.0f64..5.0, a3 in -5.0f64..5.0) {
        let c = CubicPoly::new(1.0, a1, a2, a3);
        let disc = cubic_discriminant(&c).unwrap();
        prop_assume!(disc.abs() > 1e-6);
        let roots = cubic_roots(&c).unwrap();
        let n_real = roots.iter().filter(|r| r.im.abs() < 1e-7 * (1.0 + r.re.abs())).count();
        prop_assert_eq!(n_real == 3, disc > 0.0);
    }

    #[test]
    fn roots_satisfy_polynomial(a1 in -5.0f64..5.0, a2 in -5.0f64..5.0, a3 in -5.0f64..5.0) {
        let c = CubicPoly::new(1.0, a1, a2, a3);
        for r in cubic_roots(&c).unwrap() {
            prop_assert!(c.eval_complex(r).norm() < 1e-8 * (1.0 + r.norm().powi(3)));
        }
    }

    #[test]
    fn a_plus_is_always_hurwitz(p in params()) {
        let eig = to_na(&build_a_plus(&p)).complex_eigenvalues();
        prop_assert!(eig.iter().all(|l| l.re < 0.0));
        prop_assert!(routh_hurwitz_cubic(&char_poly(&build_a_plus(&p))).unwrap());
    }

    #[test]
    fn a_minus_closed_form_matches_eigenvalues(p in params()) {
        let eig = to_na(&build_a_minus(&p)).complex_eigenvalues();
        let max_re = eig.iter().map(|l| l.re).fold(f64::NEG_INFINITY, f64::max);
        prop_assume!(max_re.abs() > 1e-6);
        prop_assert_eq!(aminus_hurwitz(&p), max_re < 0.0);
    }

    #[test]
    fn a_minus_stability_is_lost_as_alpha_grows(p in params(), lo in 0.0f64..0.95, hi in 0.0f64..0.95) {
        let (lo, hi) = if lo <= hi { (lo, hi) } else { (hi, lo) };
        if aminus_hurwitz(&p.with_alpha(hi)) {
            prop_assert!(aminus_hurwitz(&p.with_alpha(lo)));
        }
    }

    #[test]
    fn char_poly_matches_eigenvalues(p in params()) {
        for m in [build_a_plus(&p), build_a_minus(&p), build_a_plus(&p).mul(&build_a_minus(&p))] {
            let c = char_poly(&m);
            for l in to_na(&m).complex_eigenvalues().iter() {
                let scale = 1.0 + l.norm().powi(3) + c.max_abs_coeff();
                prop_assert!(c.eval_complex(*l).norm() < 1e-9 * scale);
            }
        }
    }

    #[test]
    fn product_char_poly_matches_numeric_product(p in params()) {
        let closed = product_char_poly(&p);
        let numeric = char_poly(&build_a_plus(&p).mul(&build_a_minus(&p)));
        let scale = closed.max_abs_coeff();
        for (a, b) in closed.coeffs().iter().zip(numeric.coeffs()) {
            prop_assert!((a - b).abs() <= 1e-9 * scale, "{closed:?} vs {numeric:?}");
        }
    }

    #[test]
    fn rhs_is_linear_on_each_half_space(p in params(), x in 0.0f64..5.0, y in 0.0f64..5.0, w in -5.0f64..5.0) {
        let x = p.x_min() + x;
        for (y, m) in [(y, build_a_plus(&p)), (-y - 1e-9, build_a_minus(&p))] {
            let s = FluidState::new(x, y, w);
            let lhs = rhs_interior(&s, &p);
            let rhs = m.mul_vec(s.to_array());
            for i in 0..3 {
                prop_assert!(rel_close(lhs[i], rhs[i], 1e-12));
            }
        }
    }

    #[test]
    fn origin_is_a_fixed_point(p in params()) {
        prop_assert_eq!(rhs_interior(&FluidState::ORIGIN, &p), [0.0; 3]);
    }

    #[test]
    fn fluid_paths_respect_the_boundary(p in params(), x in 0.0f64..2.0, y in -2.0f64..2.0, w in -2.0f64..2.0) {
        let init = FluidState::new(p.x_min() + x, y, w);
        let cfg = FluidConfig { dt: 1e-2, t_end: 10.0, ..FluidConfig::default() };
        let (traj, _) = integrate(&init, &p, &cfg).unwrap();
        let x_min = p.x_min();
        prop_assert!(traj.states().iter().all(|s| s.x >= x_min));
    }

    #[test]
    fn events_keep_states_valid(
        x in 0i64..50, y in -50i64..50, z in 0i64..50, gamma in 1i64..4, k in 0usize..5,
    ) {
        let p = ModelParams { lambda: 1.0, alpha: 0.5, beta: 1.0, mu: 1.0, gamma: gamma as f64, epsilon: 1.0, r: 1.0 };
        let s = CtmcState::new(x, y, z);
        let e = EventKind::ALL[k];
        prop_assume!(event_rates(&s, &p).get(e) > 0.0);
        let next = apply_event(&s, e, gamma).unwrap();
        prop_assert!(next.is_valid());
        prop_assert!((next.y - s.y).abs() <= 1);
    }
}
