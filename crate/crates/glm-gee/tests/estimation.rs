mod common;

use glm_gee::catalog;
use glm_gee::constructors::{build_extrapolation, run_exact_principal_error, solve_error_equation};
use glm_gee::experiments::CONVERGENCE_DTS;
use glm_gee::integrator::{
    convergence_study, convergence_study_with, dt_star, integrate, prescribed_tolerance_rerun, step, GeeState,
    PilotMeasure, StepController,
};
use glm_gee::problems;
use proptest::prelude::*;

#[test]
fn nonuniform_steps_keep_the_convergence_slopes() {
    let p = problems::prince42(1.0);
    for name in common::GEE_METHODS {
        let t = catalog::tableau(name).unwrap();
        let u = convergence_study(&t, &p, 0.0, &p.y0, 2.0, &CONVERGENCE_DTS).unwrap();
        let v = convergence_study_with(&t, &p, 0.0, &p.y0, 2.0, &CONVERGENCE_DTS, |dt| {
            StepController::pattern(dt, vec![0.5, 1.5])
        })
        .unwrap();
        for (a, b) in [(u.slope_y, v.slope_y), (u.slope_gap, v.slope_gap), (u.slope_yhat, v.slope_yhat)] {
            assert!((a - b).abs() < 0.2, "{name}: uniform {a} vs nonuniform {b}");
        }
    }
}

#[test]
fn halving_the_step_divides_the_error_by_two_to_the_p() {
    let p = common::exponential(1.0);
    for name in common::GEE_METHODS {
        let t = catalog::tableau(name).unwrap();
        let c = convergence_study(&t, &p, 0.0, &p.y0, 1.0, &[0.02, 0.01]).unwrap();
        let ratio = c.rows[0].err_y / c.rows[1].err_y;
        let want = 2f64.powi(t.p as i32);
        assert!((ratio / want - 1.0).abs() < 0.1, "{name}: {ratio} vs {want}");
    }
}

#[test]
fn extrapolated_midpoint_one_step_by_hand() {
    // Full step of the midpoint rule on y' = y: 1 + h + h²/2. Two half steps:
    // (1 + h/2 + h²/8)². Richardson with γ = 1/4: ε = (4/3)(y_half − y_full).
    let t = build_extrapolation(&catalog::midpoint(), 2).unwrap();
    let p = common::exponential(1.0);
    let s = step(&t, &p, &GeeState::initial(t.form, 0.0, &[1.0]), 0.1).unwrap();
    let y_full = 1.105;
    let y_half = 1.1051265625;
    assert!((s.y()[0] - y_full).abs() < 1e-15);
    let eps = s.eps(t.gamma_f64())[0];
    assert!((eps - 4.0 / 3.0 * (y_half - y_full)).abs() < 1e-15, "{eps}");
    // The estimate is close to the true error e^0.1 − 1.105.
    assert!((eps - (0.1f64.exp() - y_full)).abs() < 3e-6);
}

fn final_ratio(tr: &glm_gee::IntegrationTrace) -> f64 {
    let l = tr.last();
    let e = l.true_error.as_ref().unwrap()[0];
    (l.eps_global[0] - e).abs() / e.abs()
}

#[test]
fn error_equation_estimate_is_asymptotically_correct() {
    for lambda in [1.0, -1.0, -3.0] {
        let p = common::exponential(lambda);
        let r: Vec<f64> = [0.1, 0.05, 0.025, 0.0125]
            .iter()
            .map(|&dt| final_ratio(&solve_error_equation(&catalog::kutta3_mid2(), &p, 0.0, &p.y0, 1.0, dt).unwrap()))
            .collect();
        assert!(r.windows(2).all(|w| w[1] < w[0]), "lambda {lambda}: {r:?}");
        assert!(r[3] < 0.02, "lambda {lambda}: {r:?}");
    }
}

#[test]
fn triplet_converges_on_the_exponential() {
    let p = common::exponential(1.0);
    let dts = [0.1, 0.05, 0.025, 0.0125];
    let runs: Vec<_> = dts
        .iter()
        .map(|&dt| run_exact_principal_error(&catalog::triplet_smf(), &p, 0.0, &p.y0, 1.0, dt).unwrap())
        .collect();
    let errs: Vec<f64> = runs.iter().map(|t| t.last().true_error.as_ref().unwrap()[0].abs()).collect();
    let slope = glm_gee::integrator::loglog_slope(&dts, &errs);
    assert!((slope - 2.0).abs() < 0.15, "{slope}");
    let ratios: Vec<f64> = runs.iter().map(final_ratio).collect();
    assert!(ratios.windows(2).all(|w| w[1] < w[0]), "{ratios:?}");
    assert!(ratios[3] < 0.02);
}

#[test]
fn triplet_on_a_constant_problem_estimates_nothing() {
    let p = common::constant(vec![1.5]);
    let tr = run_exact_principal_error(&catalog::triplet_smf(), &p, 0.0, &p.y0, 1.0, 0.1).unwrap();
    assert!(tr.rows.iter().all(|r| r.eps_global[0] == 0.0 && r.y[0] == 1.5));
}

#[test]
fn tracking_on_prince42() {
    let t = catalog::tableau("GLM-A2").unwrap();
    let p = problems::prince42(0.0);
    let tr = integrate(&t, &p, 0.0, &p.y0, 2.0, &StepController::fixed(0.03)).unwrap();
    // The true error changes sign, so compare the gap with its overall size.
    let e: Vec<f64> = tr.rows.iter().map(|r| r.true_error.as_ref().unwrap()[0]).collect();
    let scale = e.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    for (r, e) in tr.rows.iter().zip(&e) {
        assert!((r.eps_global[0] - e).abs() < 0.05 * scale, "t={}", r.t);
    }
}

#[test]
fn rerun_meets_the_tolerance_on_the_exponential() {
    let t = catalog::tableau("GLM-A2").unwrap();
    let p = common::exponential(1.0);
    for tol in [1e-5, 1e-7] {
        for measure in [PilotMeasure::Final, PilotMeasure::Sup] {
            let r = prescribed_tolerance_rerun(&t, &p, 0.0, &p.y0, 1.0, 0.05, tol, measure).unwrap();
            let err = r.rerun.last().true_error.as_ref().unwrap()[0].abs();
            assert!(err <= 2.0 * tol && err >= tol / 2.0, "tol {tol}: {err}");
        }
    }
}

#[test]
fn local_error_controller_tracks_its_tolerance() {
    let t = catalog::tableau("GLM-s5-p3-g0").unwrap();
    let p = problems::kulikov2013i();
    let ctrl = StepController::local_error(1e-4, 1e-5, 1e-3, 1e-8);
    let tr = integrate(&t, &p, 0.0, &p.y0, 3.0, &ctrl).unwrap();
    assert_eq!(tr.last().t, 3.0);
    let dts: Vec<f64> = tr.rows.iter().skip(1).map(|r| r.dt).collect();
    assert!(dts.iter().all(|d| (1e-5..=1e-3).contains(d)));
    // With a tight tolerance the controller must actually vary the step.
    let lo = dts.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = dts.iter().copied().fold(0.0, f64::max);
    assert!(hi > 2.0 * lo, "{lo} {hi}");
}

proptest! {
    #[test]
    fn dt_star_does_not_refine_when_already_accurate(dt0 in 1e-4f64..1.0, est in 1e-12f64..1.0, k in 1.0f64..1e3, p in 1u32..5) {
        prop_assert!(dt_star(dt0, est * k, est, p) >= dt0);
        prop_assert!(dt_star(dt0, est / k, est, p) <= dt0);
    }

    #[test]
    fn fixed_steps_land_on_the_end(dt in 0.013f64..0.7, t_end in 0.5f64..3.0) {
        let t = catalog::tableau("GLM-A4").unwrap();
        let p = problems::prince42(0.0);
        let tr = integrate(&t, &p, 0.0, &p.y0, t_end, &StepController::fixed(dt)).unwrap();
        prop_assert_eq!(tr.last().t, t_end);
        for r in &tr.rows[1..] {
            prop_assert!(r.dt > 0.0 && r.dt <= dt * (1.0 + 1e-9));
        }
    }
}
