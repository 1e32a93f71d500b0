//! Elementary weights recomputed by stepping a polynomial system whose
//! components are the elementary differentials themselves.

mod common;

use std::sync::Arc;

use glm_gee::catalog;
use glm_gee::integrator::{step, GeeState};
use glm_gee::linalg::q_to_f64;
use glm_gee::order::{propagate_weights, InputWeights};
use glm_gee::problems::OdeProblem;
use glm_gee::tableau::PreconsistencyVectors;
use glm_gee::trees::Forest;

/// One component per tree up to `max_order`: y_τ' = ∏ y_child, y_τ(0) = 0.
/// Its exact solution is y_τ(t) = t^ρ(τ)/γ(τ) and one step of size 1 of an
/// explicit method returns the elementary weight of τ in each component.
fn tree_system(max_order: usize) -> OdeProblem {
    let forest = Forest::global();
    let n = forest.count_up_to(max_order);
    let children: Vec<Vec<usize>> = forest.trees[..n].iter().map(|t| t.children.clone()).collect();
    OdeProblem {
        name: "tree-system".into(),
        params: vec![],
        dim: n,
        y0: vec![0.0; n],
        t0: 0.0,
        t_end: 1.0,
        f: Arc::new(move |_, y, o| {
            for (i, ch) in children.iter().enumerate() {
                o[i] = ch.iter().map(|&c| y[c]).product();
            }
        }),
        exact: None,
        jacobian: None,
    }
}

#[test]
fn stepping_the_tree_system_reproduces_the_recurrence() {
    let max_order = 4;
    let p = tree_system(max_order);
    let n = p.dim;
    for name in common::GEE_METHODS.iter().copied().chain(["RK4", "Midpoint", "RK32G1"]) {
        let t = catalog::get(name).unwrap().integrable().unwrap();
        // Both slots carry the exact solution in (y, ỹ) form.
        let t = if t.r() == 2 { t.as_yytilde().unwrap() } else { t };
        let input = InputWeights::exact(&PreconsistencyVectors::standard(t.form).q0, n);
        let w = propagate_weights(&t, &input, max_order).unwrap();
        let out = step(&t, &p, &GeeState::initial(t.form, 0.0, &p.y0), 1.0).unwrap();
        for (k, slot) in out.slots.iter().enumerate() {
            for tree in 0..n {
                let want = q_to_f64(&w.xi_hat[tree][k]);
                let got = slot[tree];
                assert!((got - want).abs() <= 1e-12 * want.abs().max(1.0), "{name} slot {k} tree {tree}: {got} vs {want}");
            }
        }
    }
}

#[test]
fn tree_system_exact_solution_is_inverse_density() {
    // RK4 reproduces t^ρ/γ exactly for every tree up to its order.
    let p = tree_system(4);
    let t = catalog::rk4().to_gl();
    let out = step(&t, &p, &GeeState::initial(t.form, 0.0, &p.y0), 1.0).unwrap();
    for (i, tree) in Forest::global().trees[..p.dim].iter().enumerate() {
        assert!((out.slots[0][i] - 1.0 / tree.density as f64).abs() < 1e-14);
    }
}
