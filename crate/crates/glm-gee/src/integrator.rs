//! Time stepping with co-propagated global error estimates.

use std::io::Write;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{max_norm, Mat};
use crate::problems::OdeProblem;
use crate::tableau::{Form, Tableau};

/// Floating-point working copy of a tableau.
#[derive(Clone, Debug)]
pub struct Coefficients {
    pub name: String,
    pub form: Form,
    pub gamma: f64,
    pub p: u32,
    pub a: Mat<f64>,
    pub u: Mat<f64>,
    pub b: Mat<f64>,
    pub v: Mat<f64>,
    pub c: Vec<f64>,
}

impl Coefficients {
    pub fn new(t: &Tableau) -> Result<Self> {
        t.check_structure()?;
        if !t.is_explicit() {
            return Err(Error::Capability(format!("{} is not explicit", t.name)));
        }
        Ok(Coefficients {
            name: t.name.clone(),
            form: t.form,
            gamma: t.gamma_f64(),
            p: t.p,
            a: t.a.to_f64(),
            u: t.u.to_f64(),
            b: t.b.to_f64(),
            v: t.v.to_f64(),
            c: t.abscissae_f64(),
        })
    }

    pub fn s(&self) -> usize {
        self.a.rows()
    }

    pub fn r(&self) -> usize {
        self.u.cols()
    }
}

/// Carried values at time `t`: slot 0 is y, slot 1 is ε or ỹ.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GeeState {
    pub t: f64,
    pub slots: Vec<Vec<f64>>,
    pub form: Form,
}

impl GeeState {
    /// y(t0) = y0 with a zero error estimate.
    pub fn initial(form: Form, t0: f64, y0: &[f64]) -> Self {
        let slots = match form {
            Form::Yeps => vec![y0.to_vec(), vec![0.0; y0.len()]],
            Form::Yytilde => vec![y0.to_vec(), y0.to_vec()],
            Form::PlainRK => vec![y0.to_vec()],
        };
        GeeState { t: t0, slots, form }
    }

    pub fn y(&self) -> &[f64] {
        &self.slots[0]
    }

    /// Global error estimate ε ≈ y(t) − y.
    pub fn eps(&self, gamma: f64) -> Vec<f64> {
        match self.form {
            Form::Yeps => self.slots[1].clone(),
            Form::Yytilde => {
                self.slots[1].iter().zip(&self.slots[0]).map(|(yt, y)| (yt - y) / (1.0 - gamma)).collect()
            }
            Form::PlainRK => vec![0.0; self.slots[0].len()],
        }
    }
}

fn stage_error(step: usize, stage: usize, t: f64, partial: IntegrationTrace) -> Error {
    Error::Divergence { step, stage, t, partial: Box::new(partial) }
}

/// Internal step that reports the failing stage without a trace.
fn advance(
    c: &Coefficients,
    p: &OdeProblem,
    state: &GeeState,
    dt: f64,
) -> std::result::Result<GeeState, usize> {
    let (s, r, m) = (c.s(), c.r(), p.dim);
    let mut k: Vec<Vec<f64>> = Vec::with_capacity(s);
    let mut yi = vec![0.0; m];
    for i in 0..s {
        yi.iter_mut().for_each(|x| *x = 0.0);
        for (l, slot) in state.slots.iter().enumerate() {
            let w = *c.u.get(i, l);
            if w != 0.0 {
                for (x, v) in yi.iter_mut().zip(slot) {
                    *x += w * v;
                }
            }
        }
        for (j, kj) in k.iter().enumerate() {
            let w = dt * c.a.get(i, j);
            if w != 0.0 {
                for (x, d) in yi.iter_mut().zip(kj) {
                    *x += w * d;
                }
            }
        }
        let mut out = vec![0.0; m];
        (p.f)(state.t + c.c[i] * dt, &yi, &mut out);
        if !out.iter().chain(&yi).all(|v| v.is_finite()) {
            return Err(i);
        }
        k.push(out);
    }
    let mut slots = Vec::with_capacity(r);
    for row in 0..r {
        let mut y = vec![0.0; m];
        for (l, slot) in state.slots.iter().enumerate() {
            let w = *c.v.get(row, l);
            if w != 0.0 {
                for (x, v) in y.iter_mut().zip(slot) {
                    *x += w * v;
                }
            }
        }
        for (j, kj) in k.iter().enumerate() {
            let w = dt * c.b.get(row, j);
            if w != 0.0 {
                for (x, d) in y.iter_mut().zip(kj) {
                    *x += w * d;
                }
            }
        }
        slots.push(y);
    }
    Ok(GeeState { t: state.t + dt, slots, form: state.form })
}

/// One step of the method from `state`.
pub fn step(t: &Tableau, problem: &OdeProblem, state: &GeeState, dt: f64) -> Result<GeeState> {
    let c = Coefficients::new(t)?;
    step_with(&c, problem, state, dt)
}

/// [`step`] with precomputed coefficients.
pub fn step_with(c: &Coefficients, problem: &OdeProblem, state: &GeeState, dt: f64) -> Result<GeeState> {
    if !(dt > 0.0) {
        return Err(Error::InvalidArgument(format!("step size must be positive, got {dt}")));
    }
    if state.form != c.form || state.slots.len() != c.r() {
        return Err(Error::Dimension("state form does not match the tableau".into()));
    }
    if state.slots.iter().any(|s| s.len() != problem.dim) {
        return Err(Error::Dimension(format!("state dimension differs from problem dimension {}", problem.dim)));
    }
    advance(c, problem, state, dt).map_err(|stage| {
        stage_error(0, stage, state.t, IntegrationTrace::empty(&c.name, &problem.name))
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub enum StepMode {
    Fixed,
    /// Step sizes `dt0·factors[n mod len]`, for exercising nonuniform grids.
    Pattern(Vec<f64>),
    /// Adapts the step to keep the local error estimate near `tol_local`.
    LocalError,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StepController {
    pub mode: StepMode,
    pub dt0: f64,
    pub dt_min: f64,
    pub dt_max: f64,
    pub tol_local: f64,
    pub safety: f64,
    pub clip: (f64, f64),
}

impl StepController {
    pub fn fixed(dt: f64) -> Self {
        StepController {
            mode: StepMode::Fixed,
            dt0: dt,
            dt_min: dt,
            dt_max: dt,
            tol_local: 0.0,
            safety: 0.9,
            clip: (0.2, 5.0),
        }
    }

    pub fn pattern(dt: f64, factors: Vec<f64>) -> Self {
        StepController { mode: StepMode::Pattern(factors), ..Self::fixed(dt) }
    }

    pub fn local_error(dt0: f64, dt_min: f64, dt_max: f64, tol_local: f64) -> Self {
        StepController {
            mode: StepMode::LocalError,
            dt0,
            dt_min,
            dt_max,
            tol_local,
            safety: 0.9,
            clip: (0.2, 5.0),
        }
    }

    pub fn check(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidArgument(m.into()));
        if !(self.dt0 > 0.0) {
            return bad("dt0 must be positive");
        }
        if let StepMode::LocalError = self.mode {
            if !(self.dt_min > 0.0 && self.dt_min <= self.dt0 && self.dt0 <= self.dt_max) {
                return bad("need 0 < dt_min <= dt0 <= dt_max");
            }
            if !(self.tol_local > 0.0) {
                return bad("tol_local must be positive");
            }
            if !(self.safety > 0.0 && self.safety <= 1.0) {
                return bad("safety must lie in (0, 1]");
            }
        }
        if let StepMode::Pattern(f) = &self.mode {
            if f.is_empty() || f.iter().any(|x| !(*x > 0.0)) {
                return bad("pattern factors must be positive");
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TraceRow {
    pub step: usize,
    pub t: f64,
    pub dt: f64,
    pub y: Vec<f64>,
    pub eps_global: Vec<f64>,
    pub eps_local: Vec<f64>,
    pub y_hat: Vec<f64>,
    pub true_error: Option<Vec<f64>>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IntegrationTrace {
    pub method: String,
    pub problem: String,
    pub rows: Vec<TraceRow>,
}

impl IntegrationTrace {
    pub fn empty(method: &str, problem: &str) -> Self {
        IntegrationTrace { method: method.into(), problem: problem.into(), rows: Vec::new() }
    }

    pub fn last(&self) -> &TraceRow {
        self.rows.last().expect("trace has the initial row")
    }

    /// Appends a row, deriving ŷ and the local increment of ε.
    pub fn push(&mut self, t: f64, dt: f64, y: Vec<f64>, eps: Vec<f64>, truth: Option<Vec<f64>>) {
        let eps_local = match self.rows.last() {
            Some(prev) => eps.iter().zip(&prev.eps_global).map(|(a, b)| a - b).collect(),
            None => eps.clone(),
        };
        let y_hat: Vec<f64> = y.iter().zip(&eps).map(|(a, b)| a + b).collect();
        let true_error = truth.map(|x| x.iter().zip(&y).map(|(a, b)| a - b).collect());
        self.rows.push(TraceRow {
            step: self.rows.len(),
            t,
            dt,
            y,
            eps_global: eps,
            eps_local,
            y_hat,
            true_error,
        });
    }

    /// Fills `true_error` from the problem's exact or reference solution.
    pub fn attach_truth(&mut self, p: &OdeProblem) -> Result<()> {
        for r in &mut self.rows {
            let x = p.truth(r.t)?;
            r.true_error = Some(x.iter().zip(&r.y).map(|(a, b)| a - b).collect());
        }
        Ok(())
    }

    /// ‖ε − e‖/‖e‖ per row (max-norm), skipping rows where the true error is zero.
    pub fn estimator_ratios(&self) -> Vec<(f64, f64)> {
        self.rows
            .iter()
            .filter_map(|r| {
                let e = r.true_error.as_ref()?;
                let n = max_norm(e);
                if n == 0.0 {
                    return None;
                }
                let d: Vec<f64> = r.eps_global.iter().zip(e).map(|(a, b)| a - b).collect();
                Some((r.t, max_norm(&d) / n))
            })
            .collect()
    }

    pub fn write_csv(&self, w: &mut dyn Write) -> Result<()> {
        let m = self.rows.first().map_or(0, |r| r.y.len());
        let has_truth = self.rows.iter().any(|r| r.true_error.is_some());
        let mut header = vec!["step".to_string(), "t".into(), "dt".into()];
        for prefix in ["y", "eps_global", "eps_local", "yhat"] {
            header.extend((0..m).map(|k| format!("{prefix}_{k}")));
        }
        if has_truth {
            header.extend((0..m).map(|k| format!("true_err_{k}")));
        }
        writeln!(w, "{}", header.join(","))?;
        for r in &self.rows {
            let mut cells = vec![r.step.to_string(), fmt17(r.t), fmt17(r.dt)];
            for v in [&r.y, &r.eps_global, &r.eps_local, &r.y_hat] {
                cells.extend(v.iter().map(|x| fmt17(*x)));
            }
            if has_truth {
                match &r.true_error {
                    Some(e) => cells.extend(e.iter().map(|x| fmt17(*x))),
                    None => cells.extend((0..m).map(|_| String::new())),
                }
            }
            writeln!(w, "{}", cells.join(","))?;
        }
        Ok(())
    }

    pub fn to_csv(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("ascii")
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// Seventeen significant digits, enough to round-trip any `f64`.
pub fn fmt17(x: f64) -> String {
    format!("{x:.16e}")
}

/// Integrates from `t0` to `t_end`, recording every step.
pub fn integrate(
    t: &Tableau,
    problem: &OdeProblem,
    t0: f64,
    y0: &[f64],
    t_end: f64,
    ctrl: &StepController,
) -> Result<IntegrationTrace> {
    let c = Coefficients::new(t)?;
    ctrl.check()?;
    if !(t_end > t0) {
        return Err(Error::InvalidArgument(format!("t_end = {t_end} must exceed t0 = {t0}")));
    }
    if y0.len() != problem.dim {
        return Err(Error::Dimension(format!("y0 has {} components, problem has {}", y0.len(), problem.dim)));
    }
    let truth = |tt: f64| problem.exact_at(tt);
    let mut trace = IntegrationTrace::empty(&t.name, &problem.name);
    let mut state = GeeState::initial(c.form, t0, y0);
    trace.push(t0, 0.0, y0.to_vec(), state.eps(c.gamma), truth(t0));

    let span = t_end - t0;
    let n_fixed = ((span / ctrl.dt0) - 1e-9).ceil().max(1.0) as usize;
    let mut dt = ctrl.dt0;
    let mut n = 0usize;
    loop {
        let remaining = t_end - state.t;
        if remaining <= span * 1e-14 {
            break;
        }
        let (h, t_next) = match &ctrl.mode {
            StepMode::Fixed => {
                let t_next = if n + 1 >= n_fixed { t_end } else { t0 + (n + 1) as f64 * ctrl.dt0 };
                (t_next - state.t, t_next)
            }
            StepMode::Pattern(f) => {
                let h = ctrl.dt0 * f[n % f.len()];
                if h >= remaining * (1.0 - 1e-12) {
                    (remaining, t_end)
                } else {
                    (h, state.t + h)
                }
            }
            StepMode::LocalError => {
                let h = dt.clamp(ctrl.dt_min, ctrl.dt_max);
                if h >= remaining || remaining - h < ctrl.dt_min {
                    // Land on t_end without ever leaving [dt_min, dt_max].
                    if remaining <= ctrl.dt_max {
                        (remaining, t_end)
                    } else {
                        (remaining / 2.0, state.t + remaining / 2.0)
                    }
                } else {
                    (h, state.t + h)
                }
            }
        };
        n += 1;
        let next = match advance(&c, problem, &state, h) {
            Ok(s) => s,
            Err(stage) => {
                let t_fail = state.t;
                return Err(stage_error(n, stage, t_fail, trace));
            }
        };
        state = GeeState { t: t_next, ..next };
        let eps = state.eps(c.gamma);
        trace.push(t_next, h, state.y().to_vec(), eps, truth(t_next));
        if let StepMode::LocalError = ctrl.mode {
            let le = max_norm(&trace.last().eps_local);
            let fac = if le > 0.0 {
                ctrl.safety * (ctrl.tol_local / le).powf(1.0 / (c.p as f64 + 1.0))
            } else {
                ctrl.clip.1
            };
            dt = (h * fac.clamp(ctrl.clip.0, ctrl.clip.1)).clamp(ctrl.dt_min, ctrl.dt_max);
        }
    }
    Ok(trace)
}

#[derive(Clone, Debug, Serialize)]
pub struct ConvergenceRow {
    pub dt: f64,
    pub err_y: f64,
    /// |true error − estimated error|
    pub err_gap: f64,
    pub err_yhat: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct ConvergenceTable {
    pub method: String,
    pub problem: String,
    pub rows: Vec<ConvergenceRow>,
    pub slope_y: f64,
    pub slope_gap: f64,
    pub slope_yhat: f64,
}

impl ConvergenceTable {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("dt,err_y,err_gap,err_yhat\n");
        for r in &self.rows {
            s.push_str(&format!("{},{},{},{}\n", fmt17(r.dt), fmt17(r.err_y), fmt17(r.err_gap), fmt17(r.err_yhat)));
        }
        s.push_str(&format!(
            "slope,{},{},{}\n",
            fmt17(self.slope_y),
            fmt17(self.slope_gap),
            fmt17(self.slope_yhat)
        ));
        s
    }
}

/// Least-squares slope of log y against log x.
pub fn loglog_slope(x: &[f64], y: &[f64]) -> f64 {
    let pts: Vec<(f64, f64)> =
        x.iter().zip(y).filter(|(a, b)| **a > 0.0 && **b > 0.0).map(|(a, b)| (a.ln(), b.ln())).collect();
    let n = pts.len() as f64;
    if pts.len() < 2 {
        return f64::NAN;
    }
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    sxy / sxx
}

/// Final-time errors of y, of the estimate and of ŷ for each step size, with fitted slopes.
pub fn convergence_study(
    t: &Tableau,
    problem: &OdeProblem,
    t0: f64,
    y0: &[f64],
    t_end: f64,
    dt_list: &[f64],
) -> Result<ConvergenceTable> {
    convergence_study_with(t, problem, t0, y0, t_end, dt_list, StepController::fixed)
}

/// [`convergence_study`] with a custom controller per step size.
pub fn convergence_study_with(
    t: &Tableau,
    problem: &OdeProblem,
    t0: f64,
    y0: &[f64],
    t_end: f64,
    dt_list: &[f64],
    ctrl: impl Fn(f64) -> StepController + Sync,
) -> Result<ConvergenceTable> {
    if dt_list.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::InvalidArgument("dt list must be strictly descending".into()));
    }
    let truth = problem.truth(t_end)?;
    let rows = dt_list
        .par_iter()
        .map(|&dt| {
            let tr = integrate(t, problem, t0, y0, t_end, &ctrl(dt))?;
            let last = tr.last();
            let e: Vec<f64> = truth.iter().zip(&last.y).map(|(a, b)| a - b).collect();
            let gap: Vec<f64> = e.iter().zip(&last.eps_global).map(|(a, b)| a - b).collect();
            let eh: Vec<f64> = truth.iter().zip(&last.y_hat).map(|(a, b)| a - b).collect();
            Ok(ConvergenceRow { dt, err_y: max_norm(&e), err_gap: max_norm(&gap), err_yhat: max_norm(&eh) })
        })
        .collect::<Result<Vec<_>>>()?;
    let dts: Vec<f64> = rows.iter().map(|r| r.dt).collect();
    let col = |f: fn(&ConvergenceRow) -> f64| rows.iter().map(f).collect::<Vec<_>>();
    Ok(ConvergenceTable {
        method: t.name.clone(),
        problem: problem.name.clone(),
        slope_y: loglog_slope(&dts, &col(|r| r.err_y)),
        slope_gap: loglog_slope(&dts, &col(|r| r.err_gap)),
        slope_yhat: loglog_slope(&dts, &col(|r| r.err_yhat)),
        rows,
    })
}

/// How the pilot run's global error estimate is summarized.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum PilotMeasure {
    /// ‖ε‖ at the final time.
    Final,
    /// Largest ‖ε‖ along the pilot trajectory.
    Sup,
}

#[derive(Clone, Debug, Serialize)]
pub struct RerunResult {
    pub dt0: f64,
    pub pilot_estimate: f64,
    pub dt_star: f64,
    pub pilot: IntegrationTrace,
    pub rerun: IntegrationTrace,
}

/// Runs a pilot at `dt0`, then reruns at `dt0·(tol/‖ε‖)^(1/p)`.
#[allow(clippy::too_many_arguments)]
pub fn prescribed_tolerance_rerun(
    t: &Tableau,
    problem: &OdeProblem,
    t0: f64,
    y0: &[f64],
    t_end: f64,
    dt0: f64,
    tol_global: f64,
    measure: PilotMeasure,
) -> Result<RerunResult> {
    if !(tol_global > 0.0) {
        return Err(Error::InvalidArgument("tolerance must be positive".into()));
    }
    let pilot = integrate(t, problem, t0, y0, t_end, &StepController::fixed(dt0))?;
    let est = match measure {
        PilotMeasure::Final => max_norm(&pilot.last().eps_global),
        PilotMeasure::Sup => pilot.rows.iter().map(|r| max_norm(&r.eps_global)).fold(0.0, f64::max),
    };
    let dt_star = dt_star(dt0, tol_global, est, t.p);
    let rerun = integrate(t, problem, t0, y0, t_end, &StepController::fixed(dt_star))?;
    Ok(RerunResult { dt0, pilot_estimate: est, dt_star, pilot, rerun })
}

/// Asymptotic step size that brings an error `est` at `dt0` down to `tol`.
pub fn dt_star(dt0: f64, tol: f64, est: f64, p: u32) -> f64 {
    if est == 0.0 {
        return dt0;
    }
    dt0 * (tol / est).powf(1.0 / p as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;
    use crate::problems::{prince42, OdeProblem};
    use std::sync::Arc;

    fn constant_one() -> OdeProblem {
        let mut p = prince42(0.0);
        p.name = "one".into();
        p.f = Arc::new(|_, _, o| o[0] = 1.0);
        p.exact = Some(Arc::new(|t| vec![t]));
        p
    }

    #[test]
    fn constant_quadrature() {
        let t = catalog::glm_s3_p2_g0();
        let s = step(&t, &constant_one(), &GeeState::initial(Form::Yeps, 0.0, &[0.0]), 0.25).unwrap();
        assert!((s.slots[0][0] - 0.25).abs() < 1e-16);
        assert!(s.slots[1][0].abs() < 1e-16);
    }

    #[test]
    fn second_stage_uses_ten_times_eps() {
        // Y2 = y + 10 ε + Δt f(Y1); on y' = y the result is visible in the output.
        let t = catalog::glm_s3_p2_g0();
        let mut p = prince42(0.0);
        p.f = Arc::new(|_, y, o| o[0] = y[0]);
        let state = GeeState { t: 0.0, slots: vec![vec![1.0], vec![0.01]], form: Form::Yeps };
        let dt = 0.1;
        let y1 = 1.0;
        let y2 = 1.0 + 10.0 * 0.01 + dt * y1;
        let y3 = 1.0 - 0.01 + dt * (0.25 * y1 + 0.25 * y2);
        let want_y = 1.0 + dt * (y1 / 12.0 + y2 / 12.0 + 5.0 * y3 / 6.0);
        let want_e = 0.01 + dt * (y1 / 12.0 + y2 / 12.0 - y3 / 6.0);
        let s = step(&t, &p, &state, dt).unwrap();
        assert!((s.slots[0][0] - want_y).abs() < 1e-15);
        assert!((s.slots[1][0] - want_e).abs() < 1e-15);
    }

    #[test]
    fn zero_rhs_keeps_everything_still() {
        let mut p = prince42(0.0);
        p.f = Arc::new(|_, _, o| o[0] = 0.0);
        p.exact = None;
        let tr = integrate(&catalog::glm_a2(), &p, 0.0, &[2.5], 1.0, &StepController::fixed(0.1)).unwrap();
        assert!(tr.rows.iter().all(|r| r.y == vec![2.5] && r.eps_global == vec![0.0]));
    }

    #[test]
    fn fixed_steps_land_on_the_end() {
        let tr = integrate(&catalog::glm_a2(), &prince42(0.0), 0.0, &[0.0], 1.0, &StepController::fixed(0.3))
            .unwrap();
        assert_eq!(tr.last().t, 1.0);
        assert_eq!(tr.rows.len(), 5);
        assert!((tr.last().dt - 0.1).abs() < 1e-12);
    }

    #[test]
    fn divergence_carries_partial_trace() {
        let mut p = prince42(0.0);
        p.f = Arc::new(|_, y, o| o[0] = y[0] * y[0]);
        p.exact = None;
        let err = integrate(&catalog::glm_a2(), &p, 0.0, &[1.0], 10.0, &StepController::fixed(0.1)).unwrap_err();
        match err {
            Error::Divergence { partial, .. } => assert!(!partial.rows.is_empty()),
            e => panic!("unexpected {e}"),
        }
    }

    #[test]
    fn csv_header_and_width() {
        let tr = integrate(&catalog::glm_a2(), &prince42(0.0), 0.0, &[0.0], 0.1, &StepController::fixed(0.05))
            .unwrap();
        let csv = tr.to_csv();
        let mut lines = csv.lines();
        assert_eq!(lines.next().unwrap(), "step,t,dt,y_0,eps_global_0,eps_local_0,yhat_0,true_err_0");
        assert!(lines.all(|l| l.split(',').count() == 8));
    }

    #[test]
    fn rerun_formula_is_monotone() {
        assert!(dt_star(1e-3, 1e-2, 1e-3, 3) >= 1e-3);
        assert!(dt_star(1e-3, 1e-5, 1e-3, 3) < 1e-3);
    }
}
