mod common;

use glm_gee::catalog;
use glm_gee::integrator::{integrate, StepController};
use glm_gee::linalg::{q, Mat, Q};
use glm_gee::problems;
use glm_gee::tableau::{Form, Tableau};
use glm_gee::verify_order;
use proptest::prelude::*;

fn small_q() -> impl Strategy<Value = Q> {
    (-6i64..=6, 1i64..=4).prop_map(|(n, d)| q(n, d))
}

/// Random explicit 3-stage, 2-value tableau in (y, ε) form.
fn random_tableau() -> impl Strategy<Value = Tableau> {
    (
        prop::collection::vec(small_q(), 3),
        prop::collection::vec(small_q(), 6),
        prop::collection::vec(small_q(), 6),
        small_q().prop_filter("gamma must differ from 1", |g| *g != q(1, 1)),
    )
        .prop_map(|(lower, u, b, gamma)| {
            let z = q(0, 1);
            let a = Mat::from_rows(vec![
                vec![z.clone(), z.clone(), z.clone()],
                vec![lower[0].clone(), z.clone(), z.clone()],
                vec![lower[1].clone(), lower[2].clone(), z],
            ])
            .unwrap();
            let u = Mat::from_rows(u.chunks(2).map(|c| c.to_vec()).collect()).unwrap();
            let b = Mat::from_rows(b.chunks(3).map(|c| c.to_vec()).collect()).unwrap();
            Tableau::new("random", Form::Yeps, gamma, 1, a, u, b).unwrap()
        })
}

fn same_coefficients(a: &Tableau, b: &Tableau) -> bool {
    a.form == b.form && a.a == b.a && a.u == b.u && a.b == b.b && a.v == b.v && a.gamma == b.gamma
}

proptest! {
    #[test]
    fn transform_round_trip_is_identity(t in random_tableau()) {
        let yy = t.to_yytilde().unwrap();
        prop_assert_eq!(yy.form, Form::Yytilde);
        prop_assert!(same_coefficients(&yy.to_yeps().unwrap(), &t));
    }

    #[test]
    fn transform_preserves_stage_matrix(t in random_tableau()) {
        prop_assert_eq!(&t.to_yytilde().unwrap().a, &t.a);
    }

    #[test]
    fn forms_integrate_identically(
        idx in 0usize..common::GEE_METHODS.len(),
        kappa in -1.0f64..1.0,
        dt in 0.01f64..0.2,
    ) {
        let name = common::GEE_METHODS[idx];
        let t = catalog::tableau(name).unwrap();
        let other = match t.form {
            Form::Yeps => t.to_yytilde().unwrap(),
            _ => t.to_yeps().unwrap(),
        };
        let p = problems::prince42(kappa);
        let a = integrate(&t, &p, 0.0, &p.y0, 1.0, &StepController::fixed(dt)).unwrap();
        let b = integrate(&other, &p, 0.0, &p.y0, 1.0, &StepController::fixed(dt)).unwrap();
        prop_assert_eq!(a.rows.len(), b.rows.len());
        for (x, y) in a.rows.iter().zip(&b.rows) {
            prop_assert!(common::max_diff(&x.y, &y.y) <= 1e-13, "{} y at t={}", name, x.t);
            prop_assert!(common::max_diff(&x.eps_global, &y.eps_global) <= 1e-13, "{} eps at t={}", name, x.t);
        }
    }

    #[test]
    fn yhat_is_y_plus_eps_exactly(idx in 0usize..common::GEE_METHODS.len(), dt in 0.05f64..0.3) {
        let t = catalog::tableau(common::GEE_METHODS[idx]).unwrap();
        let p = problems::kulikov2013i();
        let tr = integrate(&t, &p, 0.0, &p.y0, 1.0, &StepController::fixed(dt)).unwrap();
        for r in &tr.rows {
            for k in 0..r.y.len() {
                prop_assert_eq!(r.y_hat[k], r.y[k] + r.eps_global[k]);
            }
        }
    }
}

#[test]
fn order_is_form_invariant() {
    for name in common::GEE_METHODS {
        let t = catalog::tableau(name).unwrap();
        let a = verify_order(&t.as_yeps().unwrap()).unwrap();
        let b = verify_order(&t.as_yytilde().unwrap()).unwrap();
        assert_eq!((a.order_y, a.order_ytilde, a.order_companion), (b.order_y, b.order_ytilde, b.order_companion), "{name}");
        assert_eq!(a.gamma_relation_ok, b.gamma_relation_ok, "{name}");
    }
}

#[test]
fn gamma_one_cannot_be_transformed() {
    let t = catalog::tableau("GLM-A2").unwrap();
    let mut bad = t.clone();
    bad.gamma = q(1, 1);
    assert!(bad.to_yytilde().is_err());
}

#[test]
fn constant_problem_keeps_zero_estimates() {
    let p = common::constant(vec![2.0, -1.0]);
    for name in common::GEE_METHODS {
        let t = catalog::tableau(name).unwrap();
        let tr = integrate(&t, &p, 0.0, &p.y0, 1.0, &StepController::fixed(0.1)).unwrap();
        for r in &tr.rows {
            assert_eq!(r.y, vec![2.0, -1.0], "{name}");
            assert!(r.eps_global.iter().all(|e| e.abs() < 1e-15), "{name}");
        }
    }
}
