//! Test problems with exact solutions where they exist, and a self-refining
//! reference oracle for those without.

use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, Mutex, OnceLock};

use crate::catalog;
use crate::error::{Error, Result};
use crate::linalg::Mat;
use crate::rk::RkF64;

pub type Rhs = Arc<dyn Fn(f64, &[f64], &mut [f64]) + Send + Sync>;
pub type Exact = Arc<dyn Fn(f64) -> Vec<f64> + Send + Sync>;
pub type Jacobian = Arc<dyn Fn(f64, &[f64]) -> Mat<f64> + Send + Sync>;

#[derive(Clone)]
pub struct OdeProblem {
    pub name: String,
    pub params: Vec<(String, f64)>,
    pub dim: usize,
    pub y0: Vec<f64>,
    pub t0: f64,
    pub t_end: f64,
    pub f: Rhs,
    pub exact: Option<Exact>,
    pub jacobian: Option<Jacobian>,
}

impl fmt::Debug for OdeProblem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("OdeProblem")
            .field("name", &self.name)
            .field("params", &self.params)
            .field("y0", &self.y0)
            .field("interval", &(self.t0, self.t_end))
            .finish_non_exhaustive()
    }
}

impl OdeProblem {
    pub fn eval(&self, t: f64, y: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.dim];
        (self.f)(t, y, &mut out);
        out
    }

    pub fn exact_at(&self, t: f64) -> Option<Vec<f64>> {
        self.exact.as_ref().map(|e| e(t))
    }

    /// Identifies the problem and its parameters, for memoization.
    pub fn key(&self) -> String {
        let mut k = self.name.clone();
        for (n, v) in &self.params {
            k.push_str(&format!(";{n}={v:e}"));
        }
        k.push_str(&format!(";y0={:?};t0={:e}", self.y0, self.t0));
        k
    }

    /// Exact solution if available, otherwise the reference oracle.
    pub fn truth(&self, t: f64) -> Result<Vec<f64>> {
        match &self.exact {
            Some(e) => Ok(e(t)),
            None => reference_solution(self, t),
        }
    }

    pub fn with_interval(mut self, t0: f64, t_end: f64) -> Self {
        if t0 != self.t0 {
            if let Some(e) = &self.exact {
                self.y0 = e(t0);
            }
        }
        self.t0 = t0;
        self.t_end = t_end;
        self
    }
}

/// y' = y − sin t + cos t, y(0) = κ, with solution κ eᵗ + sin t.
pub fn prince42(kappa: f64) -> OdeProblem {
    OdeProblem {
        name: "prince42".into(),
        params: vec![("kappa".into(), kappa)],
        dim: 1,
        y0: vec![kappa],
        t0: 0.0,
        t_end: 2.0,
        f: Arc::new(|t, y, o| o[0] = y[0] - t.sin() + t.cos()),
        exact: Some(Arc::new(move |t| vec![kappa * t.exp() + t.sin()])),
        jacobian: Some(Arc::new(|_, _| Mat::identity(1))),
    }
}

/// Four-component nonlinear problem with solution
/// (exp(sin t²), exp(5 sin t²), sin t² + 1, cos t²).
pub fn kulikov2013i() -> OdeProblem {
    OdeProblem {
        name: "kulikov2013i".into(),
        params: vec![],
        dim: 4,
        y0: vec![1.0; 4],
        t0: 0.0,
        t_end: 3.0,
        f: Arc::new(|t, y, o| {
            o[0] = 2.0 * t * y[1].powf(0.2) * y[3];
            o[1] = 10.0 * t * (5.0 * (y[2] - 1.0)).exp() * y[3];
            o[2] = 2.0 * t * y[3];
            o[3] = -2.0 * t * y[0].ln();
        }),
        exact: Some(Arc::new(|t| {
            let s = (t * t).sin();
            vec![s.exp(), (5.0 * s).exp(), s + 1.0, (t * t).cos()]
        })),
        jacobian: Some(Arc::new(|t, y| {
            let mut j = Mat::zeros(4, 4);
            j.set(0, 1, 0.4 * t * y[1].powf(-0.8) * y[3]);
            j.set(0, 3, 2.0 * t * y[1].powf(0.2));
            let e = (5.0 * (y[2] - 1.0)).exp();
            j.set(1, 2, 50.0 * t * e * y[3]);
            j.set(1, 3, 10.0 * t * e);
            j.set(2, 3, 2.0 * t);
            j.set(3, 0, -2.0 * t / y[0]);
            j
        })),
    }
}

/// Hull et al. problem B4 from y0 = (3, 0, 0). No exact solution is attached.
pub fn hull1972b4() -> OdeProblem {
    hull1972b4_from(vec![3.0, 0.0, 0.0]).expect("default start is regular")
}

/// Problem B4 from an arbitrary start; the right-hand side is singular where y1 = y2 = 0.
pub fn hull1972b4_from(y0: Vec<f64>) -> Result<OdeProblem> {
    if y0.len() != 3 {
        return Err(Error::Dimension(format!("B4 needs 3 components, got {}", y0.len())));
    }
    if y0[0] == 0.0 && y0[1] == 0.0 {
        return Err(Error::Singular("B4 right-hand side divides by sqrt(y1^2 + y2^2) = 0".into()));
    }
    Ok(OdeProblem {
        name: "hull1972b4".into(),
        params: vec![],
        dim: 3,
        y0,
        t0: 0.0,
        t_end: 20.0,
        f: Arc::new(|_, y, o| {
            let r = (y[0] * y[0] + y[1] * y[1]).sqrt();
            o[0] = -y[1] - y[0] * y[2] / r;
            o[1] = y[0] - y[1] * y[2] / r;
            o[2] = y[0] / r;
        }),
        exact: None,
        jacobian: Some(Arc::new(|_, y| {
            let (a, b, c) = (y[0], y[1], y[2]);
            let r2 = a * a + b * b;
            let r = r2.sqrt();
            let r3 = r2 * r;
            let mut j = Mat::zeros(3, 3);
            j.set(0, 0, -c * b * b / r3);
            j.set(0, 1, -1.0 + c * a * b / r3);
            j.set(0, 2, -a / r);
            j.set(1, 0, 1.0 + c * a * b / r3);
            j.set(1, 1, -c * a * a / r3);
            j.set(1, 2, -b / r);
            j.set(2, 0, b * b / r3);
            j.set(2, 1, -a * b / r3);
            j
        })),
    })
}

/// Long horizon used for the long-run tracking experiment.
pub const HULL_LONG_RUN_T: f64 = 1000.0;

/// Linear problem y' = [[a, −b], [b, a]] y with eigenvalues a ± ib.
pub fn lstab2(a: f64, b: f64, y0: [f64; 2]) -> OdeProblem {
    OdeProblem {
        name: "lstab2".into(),
        params: vec![("a".into(), a), ("b".into(), b), ("y1".into(), y0[0]), ("y2".into(), y0[1])],
        dim: 2,
        y0: y0.to_vec(),
        t0: 0.0,
        t_end: 10.0,
        f: Arc::new(move |_, y, o| {
            o[0] = a * y[0] - b * y[1];
            o[1] = b * y[0] + a * y[1];
        }),
        exact: Some(Arc::new(move |t| {
            let (c, s, g) = ((b * t).cos(), (b * t).sin(), (a * t).exp());
            vec![g * (y0[0] * c - y0[1] * s), g * (y0[0] * s + y0[1] * c)]
        })),
        jacobian: Some(Arc::new(move |_, _| {
            Mat::from_rows(vec![vec![a, -b], vec![b, a]]).expect("2x2")
        })),
    }
}

/// y1' = 1, y2' = κ₂ y1³, y3' = κ₃ y1⁴ from the origin.
pub fn tree_test(kappa2: f64, kappa3: f64) -> OdeProblem {
    OdeProblem {
        name: "tree_test".into(),
        params: vec![("kappa2".into(), kappa2), ("kappa3".into(), kappa3)],
        dim: 3,
        y0: vec![0.0; 3],
        t0: 0.0,
        t_end: 1.0,
        f: Arc::new(move |_, y, o| {
            o[0] = 1.0;
            o[1] = kappa2 * y[0].powi(3);
            o[2] = kappa3 * y[0].powi(4);
        }),
        exact: Some(Arc::new(move |t| vec![t, kappa2 * t.powi(4) / 4.0, kappa3 * t.powi(5) / 5.0])),
        jacobian: Some(Arc::new(move |_, y| {
            let mut j = Mat::zeros(3, 3);
            j.set(1, 0, 3.0 * kappa2 * y[0] * y[0]);
            j.set(2, 0, 4.0 * kappa3 * y[0].powi(3));
            j
        })),
    }
}

pub const PROBLEM_NAMES: [&str; 5] = ["prince42", "kulikov2013i", "hull1972b4", "lstab2", "tree_test"];

/// Builds a problem by name with `key=value` parameter overrides.
pub fn by_name(name: &str, params: &[(String, f64)]) -> Result<OdeProblem> {
    let get = |k: &str, d: f64| params.iter().find(|(n, _)| n == k).map_or(d, |(_, v)| *v);
    let known: &[&str] = match name.to_ascii_lowercase().as_str() {
        "prince42" => &["kappa"],
        "kulikov2013i" => &[],
        "hull1972b4" => &["y1", "y2", "y3"],
        "lstab2" => &["a", "b", "y1", "y2"],
        "tree_test" => &["kappa2", "kappa3"],
        _ => {
            return Err(Error::UnknownProblem {
                name: name.into(),
                available: PROBLEM_NAMES.iter().map(|s| s.to_string()).collect(),
            })
        }
    };
    if let Some((bad, _)) = params.iter().find(|(n, _)| !known.contains(&n.as_str())) {
        return Err(Error::InvalidArgument(format!(
            "problem {name} has no parameter `{bad}` (known: {})",
            known.join(", ")
        )));
    }
    Ok(match name.to_ascii_lowercase().as_str() {
        "prince42" => prince42(get("kappa", 0.0)),
        "kulikov2013i" => kulikov2013i(),
        "hull1972b4" => hull1972b4_from(vec![get("y1", 3.0), get("y2", 0.0), get("y3", 0.0)])?,
        "lstab2" => lstab2(get("a", -1.0), get("b", 1.0), [get("y1", 1.0), get("y2", 0.0)]),
        _ => tree_test(get("kappa2", 1.0 / 6.0), get("kappa3", 4.0)),
    })
}

/// A trajectory on a uniform grid, accurate to the agreement tolerance.
/// States are stored back to back, `dim` values per grid point.
#[derive(Debug)]
struct Reference {
    h: f64,
    t_end: f64,
    dim: usize,
    states: Vec<f64>,
}

impl Reference {
    fn len(&self) -> usize {
        self.states.len() / self.dim
    }

    fn state(&self, k: usize) -> &[f64] {
        &self.states[k * self.dim..(k + 1) * self.dim]
    }
}

const REFERENCE_AGREEMENT: f64 = 1e-11;
const REFERENCE_MAX_HALVINGS: u32 = 24;
/// Largest grid kept in memory, in stored values.
const REFERENCE_MAX_VALUES: usize = 1 << 27;

// Compensated summation of the increments keeps round-off well below the
// agreement tolerance over millions of steps.
fn rk4_grid(rk: &RkF64, p: &OdeProblem, h: f64, n: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity((n + 1) * p.dim);
    let mut y = p.y0.clone();
    let mut carry = vec![0.0; p.dim];
    out.extend_from_slice(&y);
    for i in 0..n {
        let k = rk.stages(&*p.f, p.t0 + i as f64 * h, &y, h);
        for d in 0..p.dim {
            let inc = h * rk.b.iter().zip(&k).map(|(b, kj)| b * kj[d]).sum::<f64>() - carry[d];
            let next = y[d] + inc;
            carry[d] = (next - y[d]) - inc;
            y[d] = next;
        }
        out.extend_from_slice(&y);
    }
    out
}

fn build_reference(p: &OdeProblem, t_end: f64) -> Result<Reference> {
    let rk = catalog::rk4().to_f64();
    let span = t_end - p.t0;
    let dim = p.dim;
    // Start near 1e-2 and halve until two successive grids agree at all shared points.
    let mut n = (span / 1e-2).ceil().max(16.0) as usize;
    let mut coarse = rk4_grid(&rk, p, span / n as f64, n);
    for _ in 0..REFERENCE_MAX_HALVINGS {
        if (2 * n + 1) * dim > REFERENCE_MAX_VALUES {
            break;
        }
        let fine = rk4_grid(&rk, p, span / (2 * n) as f64, 2 * n);
        let diff = coarse
            .chunks(dim)
            .enumerate()
            .map(|(i, c)| {
                let f = &fine[2 * i * dim..(2 * i + 1) * dim];
                c.iter().zip(f).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
            })
            .fold(0.0, |acc: f64, d| if d.is_nan() { f64::NAN } else { acc.max(d) });
        if !diff.is_finite() {
            return Err(Error::Oracle(format!("{} reference diverged", p.name)));
        }
        n *= 2;
        if diff <= REFERENCE_AGREEMENT {
            return Ok(Reference { h: span / n as f64, t_end, dim, states: fine });
        }
        coarse = fine;
    }
    Err(Error::Oracle(format!("{} reference did not reach {REFERENCE_AGREEMENT:e}", p.name)))
}

type Cache = Mutex<HashMap<String, Arc<Reference>>>;

fn cache() -> &'static Cache {
    static C: OnceLock<Cache> = OnceLock::new();
    C.get_or_init(|| Mutex::new(HashMap::new()))
}

// Reference horizons are rounded up so nearby queries share one trajectory.
fn horizon_for(p: &OdeProblem, t: f64) -> f64 {
    let need = t.max(p.t_end);
    let mut h = p.t_end.max(p.t0 + 1.0);
    while h < need {
        h = p.t0 + 2.0 * (h - p.t0);
    }
    h
}

/// High-accuracy solution at `t` from classical RK4 on grids refined until
/// two successive halvings agree to 1e-11. Trajectories are memoized.
pub fn reference_solution(p: &OdeProblem, t: f64) -> Result<Vec<f64>> {
    if t == p.t0 {
        return Ok(p.y0.clone());
    }
    if t < p.t0 {
        return Err(Error::InvalidArgument(format!("t = {t} precedes t0 = {}", p.t0)));
    }
    let horizon = horizon_for(p, t);
    let key = p.key();
    let existing = {
        let c = cache().lock().expect("reference cache");
        c.get(&key).filter(|r| r.t_end >= t).cloned()
    };
    let r = match existing {
        Some(r) => r,
        None => {
            let r = Arc::new(build_reference(p, horizon)?);
            cache().lock().expect("reference cache").insert(key, r.clone());
            r
        }
    };
    let k = (((t - p.t0) / r.h).floor() as usize).min(r.len() - 1);
    let tk = p.t0 + k as f64 * r.h;
    let rest = t - tk;
    if rest <= 0.0 {
        return Ok(r.state(k).to_vec());
    }
    Ok(catalog::rk4().to_f64().step(&*p.f, tk, r.state(k), rest))
}
