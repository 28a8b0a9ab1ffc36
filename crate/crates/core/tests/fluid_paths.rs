use invitation_core::fluid::{integrate, log_norm_slope, FluidConfig, VerdictKind};
use invitation_core::model::{scale_center, CtmcState, FluidState, ModelParams};
use invitation_core::presets::preset;
use invitation_core::stability::{check_condition_thm2, check_condition_thm3};

fn scaled(name: &str, x: i64, y: i64, z: i64) -> (ModelParams, FluidState) {
    let p = preset(name).unwrap().params();
    (p, scale_center(&CtmcState::new(x, y, z), &p))
}

#[test]
fn halving_the_step_barely_moves_the_path() {
    let (p, init) = scaled("ex1", 0, -1000, 0);
    let coarse = FluidConfig { dt: 1e-3, t_end: 20.0, ..FluidConfig::default() };
    let fine = FluidConfig { dt: 5e-4, ..coarse };
    let (a, _) = integrate(&init, &p, &coarse).unwrap();
    let (b, _) = integrate(&init, &p, &fine).unwrap();
    let peak = a.states().iter().map(FluidState::norm).fold(0.0, f64::max);
    for k in 1..=200 {
        let t = k as f64 * 0.1;
        let d = a.at(t).unwrap().distance(&b.at(t).unwrap());
        assert!(d <= 1e-4 * peak, "t={t}: {d}");
    }
}

#[test]
fn origin_converges_immediately() {
    let p = preset("ex1").unwrap().params();
    let (traj, v) = integrate(&FluidState::ORIGIN, &p, &FluidConfig::default()).unwrap();
    assert_eq!(v.kind, VerdictKind::ConvergedToOrigin { time: 0.0 });
    assert!(traj.states().iter().all(|s| *s == FluidState::ORIGIN));
}

#[test]
fn reflected_path_flags_the_boundary() {
    let (p, init) = scaled("ex2", 0, 2000, 0);
    let (traj, v) = integrate(&init, &p, &FluidConfig::default()).unwrap();
    assert!(v.converged());
    assert!(v.hit_boundary);
    assert!(traj.states().iter().all(|s| s.x >= p.x_min()));
}

#[test]
fn sustained_oscillation_does_not_converge() {
    let (p, init) = scaled("ex5b", 500, 1000, 500);
    let cfg = FluidConfig { t_end: 200.0, ..FluidConfig::default() };
    let (traj, v) = integrate(&init, &p, &cfg).unwrap();
    assert_eq!(v.kind, VerdictKind::NotConvergedWithinHorizon);
    let late = traj.iter().filter(|(t, _)| *t > 150.0).map(|(_, s)| s.norm()).fold(0.0, f64::max);
    assert!(late > 0.1, "late amplitude {late}");
}

#[test]
fn sufficient_conditions_give_exponential_decay() {
    let base = preset("ex1").unwrap().params();
    let mut checked = 0;
    for i in 0..12 {
        for j in 0..12 {
            let p = ModelParams { gamma: 0.5 + 0.3 * i as f64, epsilon: 0.1 + 0.3 * j as f64, ..base };
            if !(check_condition_thm2(&p).holds || check_condition_thm3(&p).holds) {
                continue;
            }
            for init in [FluidState::new(0.5, 0.5, 0.5), FluidState::new(0.0, -1.0, 0.0)] {
                let cfg = FluidConfig::default();
                let (traj, v) = integrate(&init, &p, &cfg).unwrap();
                assert!(!matches!(v.kind, VerdictKind::Diverged { .. }), "{p:?} from {init:?}: {v:?}");
                let slope = log_norm_slope(&traj, 0.0, cfg.t_end).unwrap();
                assert!(slope < 0.0, "{p:?} from {init:?}: slope {slope}");
                assert!(v.final_state.norm() < init.norm());
            }
            checked += 1;
        }
    }
    assert!(checked >= 10, "only {checked} grid points met a condition");
}
