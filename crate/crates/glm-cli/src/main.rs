mod args;

use std::fs;
use std::io::Write;
use std::path::Path;
use std::process::ExitCode;

use clap::Parser;
use glm_gee::catalog::{self, Method};
use glm_gee::constructors::{build_extrapolation, build_solving_for_correction, run_exact_principal_error, solve_error_equation};
use glm_gee::experiments;
use glm_gee::integrator::{self, convergence_study, fmt17, IntegrationTrace, PilotMeasure, StepController};
use glm_gee::problems::{self, OdeProblem};
use glm_gee::stability::{scan_region, stability_order};
use glm_gee::tableau::{validate, PreconsistencyVectors, Tableau};
use glm_gee::{verify_order, Error, Result};
use serde_json::json;

use args::{Cli, Command, ConstructKind, Format, Output, ProblemArgs};

/// `println!` that reports a closed pipe as an error instead of panicking.
macro_rules! out {
    ($($arg:tt)*) => {
        writeln!(std::io::stdout().lock(), $($arg)*)?
    };
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Divergence { .. } | Error::Singular(_) | Error::Oracle(_) | Error::Io(_) => 1,
        _ => 2,
    }
}

fn emit(out: &Option<std::path::PathBuf>, body: &str) -> Result<()> {
    match out {
        Some(path) => fs::write(path, body)?,
        None => std::io::stdout().lock().write_all(body.as_bytes())?,
    }
    Ok(())
}

fn parse_params(raw: &[String]) -> Result<Vec<(String, f64)>> {
    raw.iter()
        .map(|kv| {
            let (k, v) = kv
                .split_once('=')
                .ok_or_else(|| Error::InvalidArgument(format!("--param expects KEY=VALUE, got `{kv}`")))?;
            let v: f64 = v
                .trim()
                .parse()
                .map_err(|_| Error::InvalidArgument(format!("--param {k}: `{v}` is not a number")))?;
            Ok((k.trim().to_string(), v))
        })
        .collect()
}

/// The problem, its start value and interval after applying --t0/--tend.
fn resolve_problem(a: &ProblemArgs) -> Result<(OdeProblem, Vec<f64>)> {
    let p = problems::by_name(&a.problem, &parse_params(&a.params)?)?;
    let t0 = a.t0.unwrap_or(p.t0);
    let y0 = if t0 == p.t0 {
        p.y0.clone()
    } else {
        p.exact_at(t0).ok_or_else(|| {
            Error::InvalidArgument(format!("{} has no exact solution to start from t0 = {t0}", p.name))
        })?
    };
    let t_end = a.tend.unwrap_or(p.t_end);
    if !(t_end > t0) {
        return Err(Error::InvalidArgument(format!("--tend {t_end} must exceed t0 = {t0}")));
    }
    Ok((p.with_interval(t0, t_end), y0))
}

fn load_tableau(method: &str) -> Result<Tableau> {
    if method.ends_with(".json") {
        return Tableau::from_json(&fs::read_to_string(method)?);
    }
    catalog::get(method)?
        .integrable()
        .ok_or_else(|| Error::Capability(format!("{method} is not a single tableau")))
}

fn list_methods(output: &Output) -> Result<()> {
    let items = catalog::list();
    let body = match output.format {
        Format::Json => serde_json::to_string_pretty(&items)? + "\n",
        Format::Csv => {
            let mut s = String::from("name,kind,p,gamma,form,stages\n");
            for i in &items {
                s.push_str(&format!("{},{},{},{},{},{}\n", i.name, i.kind, i.p, i.gamma, i.form, i.stages));
            }
            s
        }
    };
    emit(&output.out, &body)
}

fn list_problems(output: &Output) -> Result<()> {
    let rows: Vec<_> = problems::PROBLEM_NAMES
        .iter()
        .map(|n| {
            let p = problems::by_name(n, &[]).expect("default parameters are valid");
            (p.name.clone(), p.dim, p.t0, p.t_end, p.exact.is_some(), p.params.clone())
        })
        .collect();
    let body = match output.format {
        Format::Json => {
            let v: Vec<_> = rows
                .iter()
                .map(|(n, d, t0, t1, ex, ps)| {
                    json!({"name": n, "dim": d, "t0": t0, "t_end": t1, "exact": ex,
                           "params": ps.iter().map(|(k, v)| json!({k: v})).collect::<Vec<_>>()})
                })
                .collect();
            serde_json::to_string_pretty(&v)? + "\n"
        }
        Format::Csv => {
            let mut s = String::from("name,dim,t0,t_end,exact,params\n");
            for (n, d, t0, t1, ex, ps) in &rows {
                let ps: Vec<String> = ps.iter().map(|(k, v)| format!("{k}={v}")).collect();
                s.push_str(&format!("{n},{d},{t0},{t1},{ex},{}\n", ps.join(";")));
            }
            s
        }
    };
    emit(&output.out, &body)
}

fn yes(b: bool) -> &'static str {
    if b {
        "OK"
    } else {
        "FAILED"
    }
}

fn verify(method: &str, verbose: bool, format: Option<Format>) -> Result<bool> {
    let t = load_tableau(method)?;
    let v = validate(&t, &PreconsistencyVectors::standard(t.form))?;
    let r = verify_order(&t)?;
    let check = if method.ends_with(".json") { None } else { Some(catalog::self_check(catalog::get(method)?)?) };
    let ok = v.consistency_ok && v.preconsistency_ok && check.as_ref().map_or(true, |c| c.ok);
    if format == Some(Format::Json) {
        let doc = json!({"validation": v, "order": r, "self_check": check});
        out!("{}", serde_json::to_string_pretty(&doc)?);
        return Ok(ok);
    }
    out!("method {} ({:?} form, gamma {}, {} stages)", t.name, t.form, t.gamma, t.s());
    out!("consistency {}", yes(v.consistency_ok));
    out!("preconsistency {}", yes(v.preconsistency_ok));
    out!("order_y={}", r.order_y);
    out!("order_ytilde={}", r.order_ytilde);
    out!("companion={}", r.order_companion);
    out!("gamma relation {}", yes(r.gamma_relation_ok));
    out!(
        "decoupling BU {} BAU {} B·diag(A1)·U {}",
        r.decoupling.bu_diagonal, r.decoupling.bau_diagonal, r.decoupling.bdiag_a1u_diagonal
    );
    out!("orders checked up to {} (tolerance {:e})", r.max_order_checked, r.tolerance);
    if let Some(c) = &check {
        if c.ok {
            out!("declarations OK");
        } else {
            for f in &c.failures {
                out!("declaration mismatch: {f}");
            }
        }
    }
    if verbose {
        out!("tree,order,residual_y,residual_ytilde");
        for x in &r.per_tree {
            out!("{},{},{:e},{:e}", x.tree, x.order, x.y, x.ytilde);
        }
    }
    Ok(ok)
}

fn write_trace(tr: &IntegrationTrace, output: &Output) -> Result<()> {
    match output.format {
        Format::Csv => emit(&output.out, &tr.to_csv()),
        Format::Json => emit(&output.out, &(tr.to_json()? + "\n")),
    }
}

#[allow(clippy::too_many_arguments)]
fn integrate(
    method: &str,
    pa: &ProblemArgs,
    dt: f64,
    tol_local: Option<f64>,
    tol_global: Option<f64>,
    dt_min: Option<f64>,
    dt_max: Option<f64>,
    output: &Output,
) -> Result<()> {
    let (p, y0) = resolve_problem(pa)?;
    let entry = if method.ends_with(".json") { None } else { Some(catalog::get(method)?) };
    let fixed_only = |what: &str| {
        if tol_local.is_some() || tol_global.is_some() {
            Err(Error::Capability(format!("{what} runs support fixed steps only")))
        } else {
            Ok(())
        }
    };
    let result = match entry.map(|e| &e.method) {
        Some(Method::Triplet(tri)) => {
            fixed_only("triplet")?;
            run_exact_principal_error(tri, &p, p.t0, &y0, p.t_end, dt)
        }
        Some(Method::Pair(pair)) => {
            fixed_only("error-equation")?;
            solve_error_equation(pair, &p, p.t0, &y0, p.t_end, dt)
        }
        _ => {
            let t = load_tableau(method)?;
            if let Some(tol) = tol_global {
                let r = integrator::prescribed_tolerance_rerun(&t, &p, p.t0, &y0, p.t_end, dt, tol, PilotMeasure::Sup)?;
                eprintln!("pilot peak estimate {:e} at dt0 = {dt}; dt_star = {:e}", r.pilot_estimate, r.dt_star);
                Ok(r.rerun)
            } else {
                let ctrl = match tol_local {
                    Some(tol) => StepController::local_error(
                        dt,
                        dt_min.unwrap_or(dt / 100.0),
                        dt_max.unwrap_or((dt * 100.0).min(p.t_end - p.t0).max(dt)),
                        tol,
                    ),
                    None => StepController::fixed(dt),
                };
                integrator::integrate(&t, &p, p.t0, &y0, p.t_end, &ctrl)
            }
        }
    };
    match result {
        Ok(tr) => write_trace(&tr, output),
        Err(Error::Divergence { step, stage, t, partial }) => {
            // Keep what was computed before the blow-up.
            write_trace(&partial, output)?;
            Err(Error::Divergence { step, stage, t, partial })
        }
        Err(e) => Err(e),
    }
}

fn convergence(method: &str, pa: &ProblemArgs, dts: &[f64], output: &Output) -> Result<()> {
    let t = load_tableau(method)?;
    let (p, y0) = resolve_problem(pa)?;
    let c = convergence_study(&t, &p, p.t0, &y0, p.t_end, dts)?;
    match output.format {
        Format::Csv => emit(&output.out, &c.to_csv()),
        Format::Json => emit(&output.out, &(serde_json::to_string_pretty(&c)? + "\n")),
    }
}

fn construct(kind: ConstructKind, method: Option<&str>, out: &Option<std::path::PathBuf>) -> Result<()> {
    let t = match kind {
        ConstructKind::Solcor => {
            let name = method.unwrap_or("RK32G1");
            match &catalog::get(name)?.method {
                Method::Dense(d) => build_solving_for_correction(d)?,
                _ => return Err(Error::Capability(format!("{name} has no dense output"))),
            }
        }
        ConstructKind::Extrap => {
            let name = method.unwrap_or("Midpoint");
            let e = catalog::get(name)?;
            match &e.method {
                Method::Rk(r) => build_extrapolation(r, e.declared.p)?,
                Method::Dense(d) => build_extrapolation(&d.rk, e.declared.p)?,
                _ => return Err(Error::Capability(format!("{name} is not a single Runge-Kutta method"))),
            }
        }
    };
    emit(out, &(t.to_json()? + "\n"))
}

fn reproduce(figure: &str, dir: &Path) -> Result<()> {
    if !experiments::FIGURES.contains(&figure) {
        return Err(Error::InvalidArgument(format!(
            "unknown figure `{figure}` (known: {})",
            experiments::FIGURES.join(", ")
        )));
    }
    let r = experiments::reproduce(figure)?;
    fs::create_dir_all(dir)?;
    for f in &r.files {
        let path = dir.join(format!("{figure}{}.csv", f.suffix));
        fs::write(&path, &f.body)?;
        out!("wrote {}", path.display());
    }
    for line in &r.summary {
        out!("{line}");
    }
    Ok(())
}

fn run(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::ListMethods { output } => list_methods(&output)?,
        Command::ListProblems { output } => list_problems(&output)?,
        Command::Verify { method, verbose, format } => return verify(&method, verbose, format),
        Command::Integrate { method, problem, dt, tol_local, tol_global, dt_min, dt_max, output } => {
            integrate(&method, &problem, dt, tol_local, tol_global, dt_min, dt_max, &output)?
        }
        Command::Convergence { method, problem, dt_list, output } => {
            convergence(&method, &problem, &dt_list, &output)?
        }
        Command::StabilityRegion { method, re_min, re_max, im_min, im_max, n, output } => {
            let t = load_tableau(&method)?;
            let scan = scan_region(&t, (re_min, re_max), (im_min, im_max), n, n)?;
            match output.format {
                Format::Csv => emit(&output.out, &scan.to_csv())?,
                Format::Json => emit(&output.out, &(serde_json::to_string(&scan)? + "\n"))?,
            }
        }
        Command::StabilityOrder { method, format } => {
            let t = load_tableau(&method)?;
            let s = stability_order(&t)?;
            if format == Some(Format::Json) {
                out!("{}", serde_json::to_string_pretty(&s)?);
            } else {
                out!("stability_order={}", s.describe());
                out!("slope={}", fmt17(s.slope));
                out!("z,abs_phi_series,abs_phi_direct");
                for (z, a, b) in &s.samples {
                    out!("{},{},{}", fmt17(*z), fmt17(*a), fmt17(*b));
                }
            }
        }
        Command::Construct { kind, method, out } => construct(kind, method.as_deref(), &out)?,
        Command::Reproduce { figure, out } => reproduce(&figure, &out)?,
    }
    Ok(true)
}

fn init_threads() -> Result<()> {
    if let Ok(v) = std::env::var("GLM_GEE_THREADS") {
        let n: usize = v
            .parse()
            .ok()
            .filter(|n| *n > 0)
            .ok_or_else(|| Error::InvalidArgument(format!("GLM_GEE_THREADS must be a positive integer, got `{v}`")))?;
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::InvalidArgument(e.to_string()))?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match init_threads().and_then(|_| run(cli)) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(Error::Io(e)) if e.kind() == std::io::ErrorKind::BrokenPipe => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
