//! GL forms of classical global error strategies, and runners for the two
//! strategies that are used directly rather than as a single tableau.

use num::{One, Zero};

use crate::error::{Error, Result};
use crate::integrator::IntegrationTrace;
use crate::linalg::{q_to_f64, Mat, Q};
use crate::problems::OdeProblem;
use crate::rk::{RkF64, RkPair, RkTableau, RkTriplet, RkWithDenseOutput};
use crate::tableau::{Form, Tableau};

fn col_ones(n: usize) -> Mat<Q> {
    Mat::from_fn(n, 1, |_, _| Q::one())
}

/// Stage-by-stage interpolation operators: `ob[k][i] = b*_i(c_k)` and
/// `od[k][i] = d*_i(c_k)`, so that `ob·(Δt F)` is P(t_n + c_k Δt) − y_n and
/// `od·(Δt F)` is Δt·P'(t_n + c_k Δt).
pub fn interpolation_operators(rk: &RkWithDenseOutput) -> (Mat<Q>, Mat<Q>) {
    let s = rk.rk.s();
    let ob_rows: Vec<Vec<Q>> = rk.rk.c.iter().map(|c| rk.b_theta(c)).collect();
    let od_rows: Vec<Vec<Q>> = rk.rk.c.iter().map(|c| rk.d_theta(c)).collect();
    let ob = Mat::from_rows(ob_rows).expect("s rows");
    let od = Mat::from_rows(od_rows).expect("s rows");
    debug_assert_eq!((ob.rows(), ob.cols()), (s, s));
    (ob, od)
}

/// Runge-Kutta method plus solving for the correction, as one 2s-stage tableau in (y, ε) form.
pub fn build_solving_for_correction(rk: &RkWithDenseOutput) -> Result<Tableau> {
    let s = rk.rk.s();
    if rk.bstar.rows() != s || rk.dstar.rows() != s {
        return Err(Error::Dimension(format!("interpolation matrices need {s} rows")));
    }
    let a = &rk.rk.a;
    let bt = Mat::from_rows(vec![rk.rk.b.clone()]).expect("row");
    let (ob, od) = interpolation_operators(rk);
    let zero_ss = Mat::zeros(s, s);
    let zero_1s = Mat::zeros(1, s);
    let lower = ob.sub(&a.mul(&od));
    let big_a = Mat::block(&[vec![a, &zero_ss], vec![&lower, a]]);
    let ones = col_ones(s);
    let zeros = Mat::zeros(s, 1);
    let big_u = Mat::block(&[vec![&ones, &zeros], vec![&ones, &ones]]);
    let neg = bt.mul(&od).scale(&-Q::one());
    let big_b = Mat::block(&[vec![&bt, &zero_1s], vec![&neg, &bt]]);
    Tableau::new(format!("{}-GL", rk.rk.name), Form::Yeps, Q::zero(), rk.rk.p, big_a, big_u, big_b)
}

/// Step-doubling extrapolation of an order-`p` method as one 3s-stage tableau in (y, ε) form.
///
/// Stage blocks are (full step, first half step, second half step); the
/// half steps start from ỹ = y + (1 − γ)ε with γ = 2^−p.
pub fn build_extrapolation(rk: &RkTableau, p: u32) -> Result<Tableau> {
    if p < 1 {
        return Err(Error::InvalidArgument("extrapolation needs order p >= 1".into()));
    }
    let s = rk.s();
    let gamma = Q::one() / Q::from_integer(num::BigInt::from(2u32).pow(p));
    let beta = Q::one() / (Q::one() - gamma.clone());
    let half = Q::new(1.into(), 2.into());
    let a = &rk.a;
    let a2 = a.scale(&half);
    let bt = Mat::from_rows(vec![rk.b.clone()]).expect("row");
    let z = Mat::zeros(s, s);
    let coupling = col_ones(s).mul(&bt).scale(&half);
    let big_a = Mat::block(&[vec![a, &z, &z], vec![&z, &a2, &z], vec![&z, &coupling, &a2]]);
    let ones = col_ones(s);
    let inv_beta = col_ones(s).scale(&(Q::one() / beta.clone()));
    let zeros = Mat::zeros(s, 1);
    let big_u = Mat::block(&[vec![&ones, &zeros], vec![&ones, &inv_beta], vec![&ones, &inv_beta]]);
    let z1 = Mat::zeros(1, s);
    let e_full = bt.scale(&-beta.clone());
    let e_half = bt.scale(&(beta * half));
    let big_b = Mat::block(&[vec![&bt, &z1, &z1], vec![&e_full, &e_half, &e_half]]);
    Tableau::new(format!("Extrap-{}", rk.name), Form::Yeps, gamma, p, big_a, big_u, big_b)
}

/// Direct implementation of solving for the correction, used as an oracle for
/// the GL construction: the RK step, its dense output P, and the same RK
/// applied to ε' = f(t, P + ε) − P'.
pub fn solcor_direct_step(
    rk: &RkWithDenseOutput,
    problem: &OdeProblem,
    t: f64,
    y: &[f64],
    eps: &[f64],
    dt: f64,
) -> (Vec<f64>, Vec<f64>) {
    let f = &*problem.f;
    let m = rk.rk.to_f64();
    let k = m.stages(f, t, y, dt);
    let y_next = RkF64::combine(y, dt, &m.b, &k);
    let s = m.b.len();
    let mut g: Vec<Vec<f64>> = Vec::with_capacity(s);
    for i in 0..s {
        let theta = m.c[i];
        let bw = rk.b_theta_f64(theta);
        let dw = rk.d_theta_f64(theta);
        let p_val = RkF64::combine(y, dt, &bw, &k);
        let p_der = RkF64::combine(&vec![0.0; y.len()], 1.0, &dw, &k);
        let mut e_i = eps.to_vec();
        for (j, gj) in g.iter().enumerate() {
            let w = dt * m.a.get(i, j);
            for (x, d) in e_i.iter_mut().zip(gj) {
                *x += w * d;
            }
        }
        let arg: Vec<f64> = p_val.iter().zip(&e_i).map(|(a, b)| a + b).collect();
        let mut fv = vec![0.0; y.len()];
        f(t + theta * dt, &arg, &mut fv);
        g.push(fv.iter().zip(&p_der).map(|(a, b)| a - b).collect());
    }
    let eps_next = RkF64::combine(eps, dt, &m.b, &g);
    (y_next, eps_next)
}

fn uniform_steps(t0: f64, t_end: f64, dt: f64) -> Result<Vec<f64>> {
    if !(dt > 0.0) || !(t_end > t0) {
        return Err(Error::InvalidArgument("need dt > 0 and t_end > t0".into()));
    }
    let n = (((t_end - t0) / dt) - 1e-9).ceil().max(1.0) as usize;
    Ok((0..=n).map(|i| if i == n { t_end } else { t0 + i as f64 * dt }).collect())
}

fn finite_or_diverge(v: &[f64], step: usize, t: f64, trace: &IntegrationTrace) -> Result<()> {
    if v.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(Error::Divergence { step, stage: 0, t, partial: Box::new(trace.clone()) })
    }
}

/// Triplet strategy: y₁ = S(y₀), then y_n = M(y_{n−1}) with the estimate
/// F(y_{n−1}) − y_n (first step: F(y₀) − y₁).
pub fn run_exact_principal_error(
    triplet: &RkTriplet,
    problem: &OdeProblem,
    t0: f64,
    y0: &[f64],
    t_end: f64,
    dt: f64,
) -> Result<IntegrationTrace> {
    let times = uniform_steps(t0, t_end, dt)?;
    let (s, m, f) = (triplet.s.to_f64(), triplet.m.to_f64(), triplet.f.to_f64());
    let rhs = &*problem.f;
    let mut trace = IntegrationTrace::empty(&triplet.name, &problem.name);
    trace.push(t0, 0.0, y0.to_vec(), vec![0.0; y0.len()], problem.exact_at(t0));
    let mut y = y0.to_vec();
    for (n, w) in times.windows(2).enumerate() {
        let (ta, tb) = (w[0], w[1]);
        let h = tb - ta;
        let next = if n == 0 { s.step(rhs, ta, &y, h) } else { m.step(rhs, ta, &y, h) };
        let cmp = f.step(rhs, ta, &y, h);
        let eps: Vec<f64> = cmp.iter().zip(&next).map(|(a, b)| a - b).collect();
        finite_or_diverge(&next, n + 1, ta, &trace)?;
        trace.push(tb, h, next.clone(), eps, problem.exact_at(tb));
        y = next;
    }
    Ok(trace)
}

/// Error-equation strategy: the solution advances with the pair's order-p
/// weights; ε' = J ε + (ŷ − y)/Δt is advanced with the same stages, the
/// forcing frozen over each step and J taken at the solution stage values.
pub fn solve_error_equation(
    pair: &RkPair,
    problem: &OdeProblem,
    t0: f64,
    y0: &[f64],
    t_end: f64,
    dt: f64,
) -> Result<IntegrationTrace> {
    let jac = problem
        .jacobian
        .as_ref()
        .ok_or_else(|| Error::Capability(format!("{} has no Jacobian", problem.name)))?;
    let times = uniform_steps(t0, t_end, dt)?;
    let hi = pair.high.to_f64();
    let b_low: Vec<f64> = pair.b_low.iter().map(q_to_f64).collect();
    let rhs = &*problem.f;
    let dim = y0.len();
    let mut trace = IntegrationTrace::empty(&pair.high.name, &problem.name);
    trace.push(t0, 0.0, y0.to_vec(), vec![0.0; dim], problem.exact_at(t0));
    let mut y = y0.to_vec();
    let mut eps = vec![0.0; dim];
    let s = hi.b.len();
    for (n, w) in times.windows(2).enumerate() {
        let (ta, tb) = (w[0], w[1]);
        let h = tb - ta;
        let k = hi.stages(rhs, ta, &y, h);
        let y_low = RkF64::combine(&y, h, &b_low, &k);
        let y_high = RkF64::combine(&y, h, &hi.b, &k);
        let forcing: Vec<f64> = y_high.iter().zip(&y_low).map(|(a, b)| (a - b) / h).collect();
        // Stage values of the solution, for the Jacobian.
        let mut ys: Vec<Vec<f64>> = Vec::with_capacity(s);
        for i in 0..s {
            let w: Vec<f64> = (0..s).map(|j| if j < i { *hi.a.get(i, j) } else { 0.0 }).collect();
            ys.push(RkF64::combine(&y, h, &w, &k));
        }
        let mut g: Vec<Vec<f64>> = Vec::with_capacity(s);
        for i in 0..s {
            let mut e_i = eps.clone();
            for (j, gj) in g.iter().enumerate() {
                let a = h * hi.a.get(i, j);
                for (x, d) in e_i.iter_mut().zip(gj) {
                    *x += a * d;
                }
            }
            let j = jac(ta + hi.c[i] * h, &ys[i]);
            let mut gi = j.mul_vec(&e_i);
            for (x, fo) in gi.iter_mut().zip(&forcing) {
                *x += fo;
            }
            g.push(gi);
        }
        eps = RkF64::combine(&eps, h, &b_low, &g);
        finite_or_diverge(&y_low, n + 1, ta, &trace)?;
        finite_or_diverge(&eps, n + 1, ta, &trace)?;
        trace.push(tb, h, y_low.clone(), eps.clone(), problem.exact_at(tb));
        y = y_low;
    }
    Ok(trace)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;
    use crate::linalg::q;
    use crate::order::verify_order;
    use crate::problems::{prince42, tree_test};
    use crate::tableau::{validate, PreconsistencyVectors};
    use std::sync::Arc;

    #[test]
    fn rk32g1_construction_matches_stored_tableau() {
        let built = build_solving_for_correction(&catalog::rk32g1()).unwrap();
        let stored = catalog::rk32g1_gl();
        assert_eq!(built.a, stored.a);
        assert_eq!(built.u, stored.u);
        assert_eq!(built.b, stored.b);
        assert_eq!(built.name, stored.name);
    }

    #[test]
    fn extrapolated_midpoint_properties() {
        let t = build_extrapolation(&catalog::midpoint(), 2).unwrap();
        assert_eq!(t.gamma, q(1, 4));
        assert_eq!(t.s(), 6);
        let v = validate(&t, &PreconsistencyVectors::standard(Form::Yeps)).unwrap();
        assert!(v.consistency_ok && v.preconsistency_ok);
        let r = verify_order(&t).unwrap();
        assert_eq!(r.order_y, 2);
        assert_eq!(r.order_companion, 3);
    }

    #[test]
    fn extrapolation_rejects_order_zero() {
        assert!(build_extrapolation(&catalog::midpoint(), 0).is_err());
    }

    #[test]
    fn zero_rhs_gives_zero_estimates() {
        let mut p = prince42(0.0);
        p.f = Arc::new(|_, _, o| o[0] = 0.0);
        let (y, e) = solcor_direct_step(&catalog::rk32g1(), &p, 0.0, &[1.0], &[0.0], 0.1);
        assert_eq!((y, e), (vec![1.0], vec![0.0]));
        let tr = run_exact_principal_error(&catalog::triplet_smf(), &p, 0.0, &[1.0], 1.0, 0.1).unwrap();
        assert!(tr.rows.iter().all(|r| r.eps_global == vec![0.0]));
    }

    #[test]
    fn error_equation_is_exact_below_order() {
        // y' = (1, 2t) is integrated exactly by both weights, so the forcing vanishes.
        let mut p = tree_test(0.0, 0.0);
        p.f = Arc::new(|t, _, o| {
            o[0] = 1.0;
            o[1] = 2.0 * t;
            o[2] = 0.0;
        });
        let tr = solve_error_equation(&catalog::kutta3_mid2(), &p, 0.0, &[0.0; 3], 1.0, 0.1).unwrap();
        assert!(tr.rows.iter().all(|r| r.eps_global.iter().all(|x| x.abs() < 1e-15)));
    }

    #[test]
    fn error_equation_needs_jacobian() {
        let mut p = prince42(0.0);
        p.jacobian = None;
        assert!(matches!(
            solve_error_equation(&catalog::kutta3_mid2(), &p, 0.0, &[0.0], 1.0, 0.1),
            Err(Error::Capability(_))
        ));
    }
}
