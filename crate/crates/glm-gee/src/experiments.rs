//! The numerical experiments behind `glm reproduce`, shared with the acceptance suite.

use num::complex::Complex64;
use serde::Serialize;

use crate::catalog;
use crate::constructors::run_exact_principal_error;
use crate::error::{Error, Result};
use crate::integrator::{
    convergence_study, fmt17, integrate, prescribed_tolerance_rerun, ConvergenceTable, IntegrationTrace,
    PilotMeasure, RerunResult, StepController,
};
use crate::linalg::max_norm;
use crate::problems::{self, HULL_LONG_RUN_T};
use crate::stability::{scan_region, spectral_radius_at, StabilityScan};

pub const FIGURES: [&str; 9] = ["fig1", "fig2c", "fig3", "fig4a", "fig4b", "fig5", "fig7", "fig8", "fig9"];

/// Step sizes of the convergence plots.
pub const CONVERGENCE_DTS: [f64; 5] = [0.1, 0.05, 0.025, 0.0125, 0.00625];

/// Step sizes of the tree-test sweep.
pub const TREE_SWEEP_DTS: [f64; 6] = [0.1, 0.05, 0.025, 0.0125, 0.00625, 0.003125];

/// Second-order GEE methods drawn in the stability-region plot.
pub const SECOND_ORDER_METHODS: [&str; 4] = ["GLM-s3-p2-g0", "GLM-A2", "GLM-A4", "GLM-A9"];

/// Multiples of (−1 + i) used for the linear stability runs.
pub const LSTAB_MULTIPLES: [f64; 4] = [0.25, 0.5, 0.75, 1.0];
pub const LSTAB_STEPS: usize = 200;
pub const LSTAB_BOUND: f64 = 1e6;

/// One CSV produced by an experiment, keyed by a file-name suffix ("" for the main file).
#[derive(Clone, Debug)]
pub struct CsvFile {
    pub suffix: String,
    pub body: String,
}

#[derive(Clone, Debug)]
pub struct Reproduction {
    pub files: Vec<CsvFile>,
    /// Short human-readable findings, printed by the CLI.
    pub summary: Vec<String>,
}

fn main_file(body: String, summary: Vec<String>) -> Reproduction {
    Reproduction { files: vec![CsvFile { suffix: String::new(), body }], summary }
}

#[derive(Clone, Debug, Serialize)]
pub struct TreeSweepRow {
    pub dt: f64,
    pub true_y3: f64,
    pub est_y3: f64,
    /// |ε₃ − e₃| / |e₃| at the final time.
    pub ratio_y3: f64,
}

/// RK3(2)G1 in GL form on the tree-test problem: third-component errors at T.
pub fn tree_sweep(dts: &[f64]) -> Result<Vec<TreeSweepRow>> {
    let t = catalog::tableau("RK32G1-GL")?;
    let p = problems::tree_test(1.0 / 6.0, 4.0);
    dts.iter()
        .map(|&dt| {
            let tr = integrate(&t, &p, p.t0, &p.y0, p.t_end, &StepController::fixed(dt))?;
            let last = tr.last();
            let e = last.true_error.as_ref().expect("exact solution")[2];
            let est = last.eps_global[2];
            Ok(TreeSweepRow { dt, true_y3: e, est_y3: est, ratio_y3: (est - e).abs() / e.abs() })
        })
        .collect()
}

/// GLM-A2 on Prince42 at Δt = 0.03.
pub fn tracking_trace() -> Result<IntegrationTrace> {
    let t = catalog::tableau("GLM-A2")?;
    let p = problems::prince42(0.0);
    integrate(&t, &p, p.t0, &p.y0, p.t_end, &StepController::fixed(0.03))
}

/// GLM-A9 on Hull B4 to the long-run horizon, with reference errors attached.
pub fn long_run(dt: f64) -> Result<IntegrationTrace> {
    let t = catalog::tableau("GLM-A9")?;
    let p = problems::hull1972b4().with_interval(0.0, HULL_LONG_RUN_T);
    let mut tr = integrate(&t, &p, p.t0, &p.y0, p.t_end, &StepController::fixed(dt))?;
    tr.attach_truth(&p)?;
    Ok(tr)
}

pub fn convergence(method: &str) -> Result<ConvergenceTable> {
    let t = catalog::tableau(method)?;
    let p = problems::prince42(0.0);
    convergence_study(&t, &p, p.t0, &p.y0, p.t_end, &CONVERGENCE_DTS)
}

/// The exact-principal-error triplet on Prince42 at Δt = 0.03.
pub fn triplet_run(t_end: f64) -> Result<IntegrationTrace> {
    let tri = catalog::triplet_smf();
    let p = problems::prince42(0.0);
    run_exact_principal_error(&tri, &p, p.t0, &p.y0, t_end, 0.03)
}

/// True error over estimated error at the last row.
pub fn final_underestimate(tr: &IntegrationTrace) -> f64 {
    let last = tr.last();
    let e = max_norm(last.true_error.as_ref().expect("exact solution"));
    e / max_norm(&last.eps_global)
}

pub fn stability_scans(n: usize) -> Result<Vec<(String, StabilityScan)>> {
    SECOND_ORDER_METHODS
        .iter()
        .map(|m| Ok((m.to_string(), scan_region(&catalog::tableau(m)?, (-4.0, 1.0), (-3.0, 3.0), n, n)?)))
        .collect()
}

#[derive(Clone, Debug, Serialize)]
pub struct LinearRun {
    pub multiple: f64,
    pub z: (f64, f64),
    pub rho: f64,
    pub diverged: bool,
    /// ‖y‖ after each step until the run ends or leaves the bound.
    pub norms: Vec<f64>,
}

/// GLM-A2 on LStab2 (eigenvalues −1 ± i) with Δt = k, so λΔt = k(−1 ± i).
pub fn linear_runs() -> Result<Vec<LinearRun>> {
    let t = catalog::tableau("GLM-A2")?;
    let p = problems::lstab2(-1.0, 1.0, [1.0, 0.0]);
    LSTAB_MULTIPLES
        .iter()
        .map(|&k| {
            let z = Complex64::new(-k, k);
            let rho = spectral_radius_at(&t, z)?;
            let t_end = LSTAB_STEPS as f64 * k;
            let norms: Vec<f64> = match integrate(&t, &p, 0.0, &p.y0, t_end, &StepController::fixed(k)) {
                Ok(tr) => tr.rows.iter().map(|r| max_norm(&r.y)).collect(),
                Err(Error::Divergence { partial, .. }) => {
                    let mut v: Vec<f64> = partial.rows.iter().map(|r| max_norm(&r.y)).collect();
                    v.push(f64::INFINITY);
                    v
                }
                Err(e) => return Err(e),
            };
            let diverged = norms.iter().any(|x| !(*x <= LSTAB_BOUND));
            Ok(LinearRun { multiple: k, z: (z.re, z.im), rho, diverged, norms })
        })
        .collect()
}

/// Eq.-4.9-type third-order method on Kulikov2013I under the local-error controller.
pub fn local_error_run(tol: f64) -> Result<IntegrationTrace> {
    let t = catalog::tableau("GLM-s5-p3-g0")?;
    let p = problems::kulikov2013i();
    integrate(&t, &p, p.t0, &p.y0, p.t_end, &StepController::local_error(1e-4, 1e-5, 1e-3, tol))
}

/// Horizon of the prescribed-tolerance workflow on Kulikov2013I.
pub const RERUN_T: f64 = 5.0;

pub fn rerun(tol: f64) -> Result<RerunResult> {
    let t = catalog::tableau("GLM-s5-p3-g0")?;
    let p = problems::kulikov2013i().with_interval(0.0, RERUN_T);
    prescribed_tolerance_rerun(&t, &p, p.t0, &p.y0, p.t_end, 1e-3, tol, PilotMeasure::Sup)
}

/// Largest true error along a trace.
pub fn sup_true_error(tr: &IntegrationTrace) -> f64 {
    tr.rows.iter().filter_map(|r| r.true_error.as_ref()).map(|e| max_norm(e)).fold(0.0, f64::max)
}

fn scans_csv(scans: &[(String, StabilityScan)]) -> String {
    let mut s = String::from("method,re,im,rho,inside\n");
    for (name, scan) in scans {
        for line in scan.to_csv().lines().skip(1) {
            s.push_str(name);
            s.push(',');
            s.push_str(line);
            s.push('\n');
        }
    }
    s
}

fn linear_csv(runs: &[LinearRun]) -> String {
    let mut s = String::from("multiple,re_z,im_z,rho,step,norm\n");
    for r in runs {
        for (n, x) in r.norms.iter().enumerate() {
            s.push_str(&format!(
                "{},{},{},{},{n},{}\n",
                fmt17(r.multiple),
                fmt17(r.z.0),
                fmt17(r.z.1),
                fmt17(r.rho),
                fmt17(*x)
            ));
        }
    }
    s
}

/// Runs one named experiment.
pub fn reproduce(figure: &str) -> Result<Reproduction> {
    Ok(match figure {
        "fig1" => {
            let rows = tree_sweep(&TREE_SWEEP_DTS)?;
            let mut s = String::from("dt,true_err_y3,eps_global_y3,ratio_y3\n");
            for r in &rows {
                s.push_str(&format!("{},{},{},{}\n", fmt17(r.dt), fmt17(r.true_y3), fmt17(r.est_y3), fmt17(r.ratio_y3)));
            }
            let last = rows.last().expect("nonempty sweep");
            main_file(s, vec![format!("y3 estimator ratio at dt={}: {:.3}", last.dt, last.ratio_y3)])
        }
        "fig2c" => {
            let tr = tracking_trace()?;
            let worst = tr.estimator_ratios().iter().map(|r| r.1).fold(0.0, f64::max);
            main_file(tr.to_csv(), vec![format!("largest estimator ratio: {worst:.3e}")])
        }
        "fig3" => {
            let tr = long_run(0.05)?;
            let worst = tr.estimator_ratios().iter().map(|r| r.1).fold(0.0, f64::max);
            main_file(tr.to_csv(), vec![format!("largest estimator ratio to T={HULL_LONG_RUN_T}: {worst:.3}")])
        }
        "fig4a" | "fig4b" => {
            let m = if figure == "fig4a" { "GLM-A4" } else { "GLM-s5-p3-g0" };
            let c = convergence(m)?;
            let msg = format!("{m}: slopes y {:.2}, gap {:.2}, yhat {:.2}", c.slope_y, c.slope_gap, c.slope_yhat);
            main_file(c.to_csv(), vec![msg])
        }
        "fig5" => {
            let tr = triplet_run(2.0)?;
            let msg = format!("true/estimated error at T=2: {:.3}", final_underestimate(&tr));
            main_file(tr.to_csv(), vec![msg])
        }
        "fig7" => {
            let scans = stability_scans(200)?;
            let runs = linear_runs()?;
            let summary = runs
                .iter()
                .map(|r| format!("lambda*dt = {}(-1+i): rho {:.4}, diverged {}", r.multiple, r.rho, r.diverged))
                .collect();
            Reproduction {
                files: vec![
                    CsvFile { suffix: String::new(), body: scans_csv(&scans) },
                    CsvFile { suffix: "_lstab2".into(), body: linear_csv(&runs) },
                ],
                summary,
            }
        }
        "fig8" => {
            let tr = local_error_run(1e-5)?;
            let dts: Vec<f64> = tr.rows.iter().skip(1).map(|r| r.dt).collect();
            let lo = dts.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = dts.iter().copied().fold(0.0, f64::max);
            main_file(tr.to_csv(), vec![format!("{} steps, dt in [{lo:.3e}, {hi:.3e}]", dts.len())])
        }
        "fig9" => {
            let r = rerun(1e-4)?;
            let msg = vec![
                format!("pilot peak estimate {:.4e} at dt0 = {}", r.pilot_estimate, r.dt0),
                format!("dt_star = {:.4e}", r.dt_star),
                format!("rerun peak true error {:.3e}", sup_true_error(&r.rerun)),
            ];
            Reproduction {
                files: vec![
                    CsvFile { suffix: String::new(), body: r.rerun.to_csv() },
                    CsvFile { suffix: "_pilot".into(), body: r.pilot.to_csv() },
                ],
                summary: msg,
            }
        }
        other => {
            return Err(Error::InvalidArgument(format!(
                "unknown figure `{other}` (known: {})",
                FIGURES.join(", ")
            )))
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_figure_is_rejected() {
        assert!(matches!(reproduce("fig6"), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn tracking_run_follows_the_true_error() {
        let tr = tracking_trace().unwrap();
        let last = tr.last();
        let e = last.true_error.as_ref().unwrap()[0];
        assert!((last.eps_global[0] - e).abs() < 0.1 * e.abs());
    }

    #[test]
    fn linear_runs_diverge_only_outside() {
        for r in linear_runs().unwrap() {
            assert_eq!(r.diverged, r.rho > 1.0, "{r:?}");
        }
    }
}
