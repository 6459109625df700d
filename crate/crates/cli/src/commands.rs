//! One function per subcommand. Each writes its files into `cfg.out` and
//! returns the path of the JSON report.

use std::fs;
use std::path::{Path, PathBuf};

use serde_json::json;

use fplap_core::eigen::{embedding_constant, principal_eigenpair, sobolev_constant, EigenPair};
use fplap_core::fiber::{
    compare_m_at_t_max, critical_points, estimate_lambda1, evaluate_fiber, fiber_coeffs, lambda_bar, lambda_star,
    t_max,
};
use fplap_core::nehari::{
    barrier_eta, minimize_minus, minimize_plus, minus_norm_lower_bound, plus_norm_upper_bound, stated_barrier_eta,
    verify_solution, Problem, SolveOptions, SolveReport,
};
use fplap_core::nonlocal::load_or_build_kernel;
use fplap_core::ordermethod::{
    build_subsolution, lambda_sweep, log_grid, minimize_pure_singular, monotone_iterate, MonotoneOptions,
    OrderInterval, SweepOptions, SweepRow,
};
use fplap_core::{build_kernel, build_mesh, DiscreteFunction, Error, KernelWeights};

use crate::config::RunConfig;
use crate::output::{function_points, num, function_rows, read_function_csv, report, write_csv, write_json, write_plot};
use crate::CliError;

/// Residual tolerance of the independent check run on every solution.
pub const VERIFY_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveBranch {
    Plus,
    Minus,
    PureSingular,
}

fn kernel(cfg: &RunConfig) -> Result<KernelWeights, CliError> {
    let mesh = build_mesh(cfg.a, cfg.b, cfg.n)?;
    Ok(match &cfg.kernel_cache {
        Some(dir) => load_or_build_kernel(dir, mesh, cfg.s, cfg.p)?,
        None => build_kernel(mesh, cfg.s, cfg.p)?,
    })
}

fn out_dir(cfg: &RunConfig) -> Result<&Path, CliError> {
    fs::create_dir_all(&cfg.out).map_err(|e| CliError::Io(format!("{}: {e}", cfg.out.display())))?;
    Ok(&cfg.out)
}

fn io(path: &Path) -> impl Fn(std::io::Error) -> CliError + '_ {
    move |e| CliError::Io(format!("{}: {e}", path.display()))
}

fn solve_options(cfg: &RunConfig) -> SolveOptions {
    SolveOptions {
        residual_tol: cfg.tol,
        max_iter: cfg.max_iter,
        delta: cfg.delta,
        starts: cfg.starts,
        seed: cfg.seed,
        ..SolveOptions::default()
    }
}

fn eigen_json(e: &EigenPair) -> serde_json::Value {
    json!({
        "lambda1": e.lambda1,
        "residual": e.residual,
        "lambda2": e.lambda2,
        "iterations": e.iterations,
        "phi1_min": e.phi1.values().iter().copied().fold(f64::INFINITY, f64::min),
    })
}

pub fn eigen(cfg: &RunConfig) -> Result<PathBuf, CliError> {
    let dir = out_dir(cfg)?;
    let k = kernel(cfg)?;
    let e = principal_eigenpair(&k, cfg.eigen_tol)?;
    let path = dir.join("phi1.csv");
    write_csv(&path, &["x", "phi1"], function_rows(&e.phi1)).map_err(io(&path))?;
    let path = dir.join("phi1.dat");
    write_plot(&path, function_points(&e.phi1)).map_err(io(&path))?;
    if !e.quotient_trace.is_empty() {
        let path = dir.join("eigen_trace.dat");
        write_plot(&path, e.quotient_trace.iter().enumerate().map(|(i, q)| (i as f64, *q))).map_err(io(&path))?;
    }
    let path = dir.join("eigen.json");
    write_json(&path, &report("eigen", cfg, eigen_json(&e))).map_err(io(&path))?;
    Ok(path)
}

pub fn constants(cfg: &RunConfig) -> Result<PathBuf, CliError> {
    let dir = out_dir(cfg)?;
    let k = kernel(cfg)?;
    let params = cfg.params();
    let e = principal_eigenpair(&k, cfg.eigen_tol)?;
    // C_0 is the measure of the domain
    let c_1mq = if cfg.q < 1.0 {
        embedding_constant(&k, 1.0 - cfg.q, 1e-12, cfg.seed)?.value
    } else {
        k.mesh().measure()
    };
    let c_ap1 = embedding_constant(&k, cfg.alpha + 1.0, 1e-12, cfg.seed)?.value;
    let sob = sobolev_constant(&k)?;
    let ls = lambda_star(&params, c_1mq, c_ap1)?;
    let l1 = estimate_lambda1(&k, &params, cfg.samples, cfg.seed)?;
    let path = dir.join("lambda_bar_samples.dat");
    write_plot(&path, l1.sample_values.iter().enumerate().map(|(i, v)| (i as f64, *v))).map_err(io(&path))?;
    let results = json!({
        "eigen": eigen_json(&e),
        "c_one_minus_q": c_1mq,
        "c_alpha_plus_one": c_ap1,
        "sobolev_constant": sob.value,
        "lambda_star_printed": ls.printed,
        "lambda_star_corrected": ls.corrected,
        "lambda1_estimate": l1.value,
        "lambda1_sample_min": l1.sample_min,
        "lambda1_refined": l1.refined,
        "samples": l1.samples,
        "at_lambda": {
            "lambda": cfg.lambda,
            "eta": barrier_eta(&params, e.lambda1),
            "stated_eta": stated_barrier_eta(&params),
            "plus_norm_upper_bound": plus_norm_upper_bound(&params, c_1mq),
            "minus_norm_lower_bound": minus_norm_lower_bound(&params, c_ap1),
        },
    });
    let path = dir.join("constants.json");
    write_json(&path, &report("constants", cfg, results)).map_err(io(&path))?;
    Ok(path)
}

/// Fiber map of the ray through `phi_1`.
pub fn fiber(cfg: &RunConfig) -> Result<PathBuf, CliError> {
    let dir = out_dir(cfg)?;
    let k = kernel(cfg)?;
    let params = cfg.params();
    let e = principal_eigenpair(&k, cfg.eigen_tol)?;
    let c = fiber_coeffs(&k, &params, &e.phi1)?;
    let (tm, cmp, lb) = if c.b > 0.0 {
        (Some(t_max(&c)?), Some(compare_m_at_t_max(&c)?), lambda_bar(&c)?)
    } else {
        (None, None, f64::INFINITY)
    };
    let cp = if cfg.lambda > 0.0 && c.b > 0.0 { critical_points(&c, cfg.lambda)? } else { None };
    let scale = tm.unwrap_or(1.0);
    let mut pts = Vec::with_capacity(400);
    for i in 0..400 {
        let t = scale * 10f64.powf(-3.0 + 4.0 * i as f64 / 399.0);
        pts.push((t, evaluate_fiber(&c, cfg.lambda, t)?.value));
    }
    let path = dir.join("fiber.dat");
    write_plot(&path, pts).map_err(io(&path))?;
    let results = json!({
        "direction": "phi1",
        "coefficients": c,
        "t_max": tm,
        "m_at_t_max": cmp,
        "lambda_bar": lb,
        "critical_points": cp,
    });
    let path = dir.join("fiber.json");
    write_json(&path, &report("fiber", cfg, results)).map_err(io(&path))?;
    Ok(path)
}

fn write_solution(dir: &Path, u: &DiscreteFunction) -> Result<(), CliError> {
    let path = dir.join("solution.csv");
    write_csv(&path, &["x", "u"], function_rows(u)).map_err(io(&path))?;
    let path = dir.join("solution.dat");
    write_plot(&path, function_points(u)).map_err(io(&path))
}

fn solve_json(r: &SolveReport) -> serde_json::Value {
    json!({
        "energy": r.energy,
        "residual": r.residual,
        "nehari_class": r.nehari_class,
        "fiber_d1": r.fiber_d1,
        "fiber_d2": r.fiber_d2,
        "norm": r.norm,
        "sup_norm": r.u.sup_norm(),
        "eta": r.eta,
        "lower_bound_ok": r.lower_bound_ok,
        "stated_eta": r.stated_eta,
        "stated_lower_bound_ok": r.stated_lower_bound_ok,
        "iterations": r.iterations,
        "converged": r.converged,
    })
}

pub fn solve(cfg: &RunConfig, branch: SolveBranch) -> Result<PathBuf, CliError> {
    let dir = out_dir(cfg)?;
    let k = kernel(cfg)?;
    let params = cfg.params();
    let e = principal_eigenpair(&k, cfg.eigen_tol)?;
    let pb = Problem::new(&k, &params, &e);
    let opts = solve_options(cfg);
    let r = match branch {
        SolveBranch::Plus => minimize_plus(&pb, None, &opts)?,
        SolveBranch::Minus => minimize_minus(&pb, None, &opts)?,
        SolveBranch::PureSingular => minimize_pure_singular(&pb, &opts)?,
    };
    let v = verify_solution(&pb, &r.u, VERIFY_TOL)?;
    write_solution(dir, &r.u)?;
    let path = dir.join("trace.dat");
    write_plot(&path, r.t_projection_trace.iter().map(|t| (t.iteration as f64, t.energy))).map_err(io(&path))?;
    let name = match branch {
        SolveBranch::Plus => "plus",
        SolveBranch::Minus => "minus",
        SolveBranch::PureSingular => "pure_singular",
    };
    let results = json!({
        "branch": name,
        "lambda1": e.lambda1,
        "solution": solve_json(&r),
        "verify": v,
    });
    let path = dir.join("report.json");
    write_json(&path, &report("solve", cfg, results)).map_err(io(&path))?;
    Ok(path)
}

pub fn monotone(cfg: &RunConfig) -> Result<PathBuf, CliError> {
    let dir = out_dir(cfg)?;
    let k = kernel(cfg)?;
    let params = cfg.params();
    let e = principal_eigenpair(&k, cfg.eigen_tol)?;
    let super_lambda = cfg.super_lambda.unwrap_or(cfg.lambda);
    let sp = params.with_lambda(super_lambda);
    // the super-solution must be accurate well below the +1e-12 order check
    let tight = SolveOptions { residual_tol: 1e-13, ..solve_options(cfg) };
    let upper = minimize_plus(&Problem::new(&k, &sp, &e), None, &tight)?.u;
    let lower = build_subsolution(&params, &e, Some(&upper))?;
    let interval = OrderInterval::new(&k, &params, lower, upper, VERIFY_TOL)?;
    let pb = Problem::new(&k, &params, &e);
    let opts = MonotoneOptions { max_iter: cfg.max_iter.max(1), verify_tol: VERIFY_TOL, ..MonotoneOptions::default() };
    let m = monotone_iterate(&pb, &interval, &opts)?;
    write_solution(dir, &m.u)?;
    let path = dir.join("monotone_trace.dat");
    write_plot(&path, m.step_trace.iter().enumerate().map(|(i, s)| ((i + 1) as f64, *s))).map_err(io(&path))?;
    let results = json!({
        "super_lambda": super_lambda,
        "sub_residual": interval.sub_residual,
        "super_residual": interval.super_residual,
        "iterations": m.iterations,
        "converged": m.converged,
        "energy": m.energy,
        "sup_norm": m.u.sup_norm(),
        "max_decrease": m.max_decrease,
        "max_upper_excess": m.max_upper_excess,
        "verify": m.verify,
    });
    let path = dir.join("monotone.json");
    write_json(&path, &report("monotone", cfg, results)).map_err(io(&path))?;
    Ok(path)
}

fn sweep_rows(rows: &[SweepRow]) -> Vec<Vec<String>> {
    rows.iter()
        .map(|r| {
            vec![
                num(r.lambda),
                r.succeeded.to_string(),
                r.iterations.to_string(),
                num(r.energy),
                num(r.sup_norm),
                num(r.residual),
            ]
        })
        .collect()
}

pub fn sweep(cfg: &RunConfig) -> Result<PathBuf, CliError> {
    let dir = out_dir(cfg)?;
    let k = kernel(cfg)?;
    let params = cfg.params();
    let e = principal_eigenpair(&k, cfg.eigen_tol)?;
    let grid = log_grid(cfg.lambda_min, cfg.lambda_max, cfg.grid);
    let mut opts = SweepOptions { bisection_steps: cfg.bisection_steps, ..SweepOptions::default() };
    opts.solve.seed = cfg.seed;
    opts.solve.delta = cfg.delta;
    opts.solve.starts = cfg.starts;
    let sw = lambda_sweep(&k, &params, &e, &grid, &opts)?;
    let header = ["lambda", "succeeded", "iterations", "energy", "sup_norm", "residual"];
    let path = dir.join("sweep.csv");
    write_csv(&path, &header, sweep_rows(&sw.rows)).map_err(io(&path))?;
    let path = dir.join("sweep_bisection.csv");
    write_csv(&path, &header, sweep_rows(&sw.bisection)).map_err(io(&path))?;
    let path = dir.join("sweep.dat");
    write_plot(&path, sw.rows.iter().filter(|r| r.succeeded).map(|r| (r.lambda, r.sup_norm))).map_err(io(&path))?;
    let successes = sw.rows.iter().filter(|r| r.succeeded).count();
    let results = json!({
        "grid_points": grid.len(),
        "successes": successes,
        "transition": sw.bracket.is_some(),
        "lambda_hat": sw.lambda_hat,
        "bracket": sw.bracket,
        "lambda1": e.lambda1,
    });
    let path = dir.join("sweep.json");
    write_json(&path, &report("sweep", cfg, results)).map_err(io(&path))?;
    Ok(path)
}

/// Check a stored solution; fails with `CliError::VerifyFailed` when it does
/// not pass, after writing the report.
pub fn verify(cfg: &RunConfig, input: &Path) -> Result<PathBuf, CliError> {
    let dir = out_dir(cfg)?;
    let (xs, us) = read_function_csv(input).map_err(CliError::Input)?;
    let mesh = build_mesh(cfg.a, cfg.b, cfg.n)?;
    let tol = 1e-9 * (cfg.b - cfg.a);
    if xs.len() != mesh.len() || xs.iter().zip(mesh.nodes()).any(|(x, y)| (x - y).abs() > tol) {
        return Err(Error::MeshMismatch.into());
    }
    let u = DiscreteFunction::new(mesh, us)?;
    let k = kernel(cfg)?;
    let params = cfg.params();
    let e = principal_eigenpair(&k, cfg.eigen_tol)?;
    let pb = Problem::new(&k, &params, &e);
    let v = verify_solution(&pb, &u, VERIFY_TOL)?;
    let passed = v.passed;
    let results = json!({ "input": input, "verify": v });
    let path = dir.join("verify.json");
    write_json(&path, &report("verify", cfg, results)).map_err(io(&path))?;
    if !passed {
        return Err(CliError::VerifyFailed(format!(
            "residual {:e} (tolerance {VERIFY_TOL:e}), lower bound {}",
            v.residual,
            if v.lower_bound_ok { "holds" } else { "violated" }
        )));
    }
    Ok(path)
}
