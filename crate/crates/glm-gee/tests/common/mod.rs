#![allow(dead_code)]

use std::sync::Arc;

use glm_gee::linalg::Mat;
use glm_gee::problems::OdeProblem;

/// y' = λy, y(0) = 1.
pub fn exponential(lambda: f64) -> OdeProblem {
    OdeProblem {
        name: "exponential".into(),
        params: vec![("lambda".into(), lambda)],
        dim: 1,
        y0: vec![1.0],
        t0: 0.0,
        t_end: 1.0,
        f: Arc::new(move |_, y, o| o[0] = lambda * y[0]),
        exact: Some(Arc::new(move |t| vec![(lambda * t).exp()])),
        jacobian: Some(Arc::new(move |_, _| Mat::from_rows(vec![vec![lambda]]).unwrap())),
    }
}

/// y' = 0.
pub fn constant(y0: Vec<f64>) -> OdeProblem {
    let dim = y0.len();
    let keep = y0.clone();
    OdeProblem {
        name: "constant".into(),
        params: vec![],
        dim,
        y0,
        t0: 0.0,
        t_end: 1.0,
        f: Arc::new(|_, _, o| o.iter_mut().for_each(|x| *x = 0.0)),
        exact: Some(Arc::new(move |_| keep.clone())),
        jacobian: Some(Arc::new(move |_, _| Mat::zeros(dim, dim))),
    }
}

/// Names of the catalog methods stored as GL tableaux with error estimation.
pub const GEE_METHODS: [&str; 8] = [
    "GLM-s3-p2-g0",
    "GLM-s3-p2-g0-yy",
    "GLM-A2",
    "GLM-A4",
    "GLM-A9",
    "GLM-s5-p3-g0",
    "RK32G1-GL",
    "Extrap-Midpoint",
];

pub fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}
