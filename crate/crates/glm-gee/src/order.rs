//! Elementary weights of GL methods and order verification.
//!
//! Weights follow the Butcher normalization: the derivative weight of the
//! single node is 𝟙 and the exact solution has weight 1/γ(τ).

use num::{One, Signed, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{q_abs_f64, Q};
use crate::tableau::{validate, Decoupling, Form, PreconsistencyVectors, Tableau};
use crate::trees::{Forest, MAX_TREE_ORDER};

/// Weights of the carried inputs: `empty[k]` multiplies y(t), `trees[τ][k]`
/// multiplies Δt^ρ(τ) F(τ).
#[derive(Clone, Debug)]
pub struct InputWeights {
    pub empty: Vec<Q>,
    pub trees: Vec<Vec<Q>>,
}

impl InputWeights {
    /// Exact inputs: `q0` on the empty tree and nothing else.
    pub fn exact(q0: &[Q], n_trees: usize) -> Self {
        InputWeights { empty: q0.to_vec(), trees: vec![vec![Q::zero(); q0.len()]; n_trees] }
    }
}

#[derive(Clone, Debug)]
pub struct WeightTable {
    pub max_order: usize,
    pub eta: Vec<Vec<Q>>,
    pub eta_d: Vec<Vec<Q>>,
    pub xi_hat: Vec<Vec<Q>>,
    /// Exact-solution weight 1/γ(τ).
    pub exact: Vec<Q>,
}

/// Runs the stage and output recurrences over all trees up to `max_order`.
pub fn propagate_weights(t: &Tableau, input: &InputWeights, max_order: usize) -> Result<WeightTable> {
    t.check_structure()?;
    if max_order > MAX_TREE_ORDER {
        return Err(Error::TreeCeiling { requested: max_order, ceiling: MAX_TREE_ORDER });
    }
    let forest = Forest::global();
    let n = forest.count_up_to(max_order);
    if input.trees.len() < n || input.empty.len() != t.r() {
        return Err(Error::Dimension("input weights do not cover the requested trees".into()));
    }
    let s = t.s();
    let mut eta: Vec<Vec<Q>> = Vec::with_capacity(n);
    let mut eta_d = Vec::with_capacity(n);
    let mut xi_hat = Vec::with_capacity(n);
    let mut exact = Vec::with_capacity(n);
    for (i, tree) in forest.trees[..n].iter().enumerate() {
        let mut d = vec![Q::one(); s];
        for &c in &tree.children {
            for (dk, ek) in d.iter_mut().zip(&eta[c]) {
                *dk *= ek;
            }
        }
        let xi = &input.trees[i];
        let e: Vec<Q> = t.a.mul_vec(&d).into_iter().zip(t.u.mul_vec(xi)).map(|(x, y)| x + y).collect();
        let out: Vec<Q> = t.b.mul_vec(&d).into_iter().zip(t.v.mul_vec(xi)).map(|(x, y)| x + y).collect();
        eta.push(e);
        eta_d.push(d);
        xi_hat.push(out);
        exact.push(Q::new(1.into(), tree.density.into()));
    }
    Ok(WeightTable { max_order, eta, eta_d, xi_hat, exact })
}

#[derive(Clone, Debug, Serialize)]
pub struct OrderResiduals {
    pub order: usize,
    pub y: f64,
    pub ytilde: f64,
    pub yhat: f64,
    /// |γ(E − ξ̂₁) − (E − ξ̂₂)|
    pub gamma_relation: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct TreeResidual {
    pub tree: String,
    pub order: usize,
    pub y: f64,
    pub ytilde: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct OrderReport {
    pub name: String,
    pub order_y: usize,
    pub order_ytilde: usize,
    /// Order of ŷ = (ỹ − γy)/(1 − γ).
    pub order_companion: usize,
    pub gamma_relation_ok: bool,
    pub worst_residual_per_order: Vec<OrderResiduals>,
    /// Outputs decouple at leading order (BU diagonal in (y, ỹ) form).
    pub independence_ok: bool,
    pub decoupling: Decoupling,
    pub max_order_checked: usize,
    pub tolerance: f64,
    pub per_tree: Vec<TreeResidual>,
}

impl OrderReport {
    /// True when the order of y reached the highest order checked.
    pub fn order_saturated(&self) -> bool {
        self.order_y >= self.max_order_checked
    }
}

/// Orders of the y output, the second solution and the companion ŷ.
///
/// GEE tableaux are checked in (y, ỹ) form so both slots start from exact
/// solution inputs; the result is therefore the same for either stored form.
pub fn verify_order(t: &Tableau) -> Result<OrderReport> {
    let w = match t.form {
        Form::PlainRK => t.clone(),
        _ => t.as_yytilde()?,
    };
    let max_order = (t.p as usize + 3).min(MAX_TREE_ORDER);
    let forest = Forest::global();
    let n = forest.count_up_to(max_order);
    let q = PreconsistencyVectors::standard(w.form);
    let table = propagate_weights(&w, &InputWeights::exact(&q.q0, n), max_order)?;
    let tol = t.precision.order_tol();
    let g = t.gamma.clone();
    let one_minus_g = Q::one() - g.clone();

    let mut per_order: Vec<OrderResiduals> = (1..=max_order)
        .map(|order| OrderResiduals { order, y: 0.0, ytilde: 0.0, yhat: 0.0, gamma_relation: 0.0 })
        .collect();
    let mut per_tree = Vec::with_capacity(n);
    for (i, tree) in forest.trees[..n].iter().enumerate() {
        let e = &table.exact[i];
        let x = &table.xi_hat[i];
        let ry = (x[0].clone() - e).abs();
        let (rt, rh, rel) = if w.r() == 2 {
            let yhat = (x[1].clone() - g.clone() * x[0].clone()) / one_minus_g.clone();
            let rel = g.clone() * (e.clone() - x[0].clone()) - (e.clone() - x[1].clone());
            ((x[1].clone() - e).abs(), (yhat - e).abs(), rel.abs())
        } else {
            (ry.clone(), ry.clone(), Q::zero())
        };
        let slot = &mut per_order[tree.order - 1];
        slot.y = slot.y.max(q_abs_f64(&ry));
        slot.ytilde = slot.ytilde.max(q_abs_f64(&rt));
        slot.yhat = slot.yhat.max(q_abs_f64(&rh));
        slot.gamma_relation = slot.gamma_relation.max(q_abs_f64(&rel));
        per_tree.push(TreeResidual {
            tree: forest.notation(i),
            order: tree.order,
            y: q_abs_f64(&ry),
            ytilde: q_abs_f64(&rt),
        });
    }
    let order_of = |f: fn(&OrderResiduals) -> f64| {
        per_order.iter().take_while(|r| f(r) <= tol).count()
    };
    let order_y = order_of(|r| r.y);
    let order_ytilde = order_of(|r| r.ytilde);
    let order_companion = order_of(|r| r.yhat);
    let p = t.p as usize;
    let gamma_relation_ok = per_order.iter().take(p + 1).all(|r| r.gamma_relation <= tol);

    let (decoupling, independence_ok) = if w.r() == 2 {
        let v = validate(&w, &q)?;
        (v.decoupling, v.decoupling.bu_diagonal)
    } else {
        (Decoupling { bu_diagonal: true, bau_diagonal: true, bdiag_a1u_diagonal: true }, true)
    };
    Ok(OrderReport {
        name: t.name.clone(),
        order_y,
        order_ytilde,
        order_companion,
        gamma_relation_ok,
        worst_residual_per_order: per_order,
        independence_ok,
        decoupling,
        max_order_checked: max_order,
        tolerance: tol,
        per_tree,
    })
}
