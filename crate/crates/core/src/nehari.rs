//! Minimization of the energy on the two branches of the Nehari set.
//!
//! A positive direction `u` with `lambda < lambda_bar(u)` meets the Nehari set
//! twice along its ray: at `t1 u` (local minimum of the fiber map, the `plus`
//! branch) and at `t2 u` (local maximum, the `minus` branch). Both branch
//! solvers alternate a descent step on the energy with re-projection onto the
//! branch, and accept a step only when the projected energy does not increase.
//! Since the gradient of `u -> I(t(u) u)` at a branch point equals the energy
//! gradient there, a preconditioned energy gradient is a descent direction for
//! the reduced problem on either branch.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::domain::DiscreteFunction;
use crate::eigen::EigenPair;
use crate::error::{Error, Result};
use crate::fiber::{critical_points, evaluate_fiber, fiber_coeffs, lambda_bar, sample_direction};
use crate::linalg::{lu_solve, spd_solve};
use crate::nonlocal::{
    apply_fplap, energy, energy_gradient, energy_hessian, normalized_residual, seminorm_p,
    KernelWeights, Mode, ProblemParams,
};

/// Everything a solver needs: the discretization, the parameters and the
/// principal eigenpair (used for barriers and starting points).
#[derive(Debug, Clone, Copy)]
pub struct Problem<'a> {
    pub kernel: &'a KernelWeights,
    pub params: &'a ProblemParams,
    pub eigen: &'a EigenPair,
}

impl<'a> Problem<'a> {
    pub fn new(kernel: &'a KernelWeights, params: &'a ProblemParams, eigen: &'a EigenPair) -> Self {
        Problem { kernel, params, eigen }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Branch {
    Plus,
    Minus,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NehariClass {
    Plus,
    Minus,
    None,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceEntry {
    pub iteration: usize,
    /// Fiber parameter of the last projection.
    pub t: f64,
    pub energy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub u: DiscreteFunction,
    pub energy: f64,
    /// Normalized weak-form residual.
    pub residual: f64,
    pub nehari_class: NehariClass,
    /// `phi_u'(1)` and `phi_u''(1)` in the solution's own fiber coordinates.
    pub fiber_d1: f64,
    pub fiber_d2: f64,
    /// `||u||`.
    pub norm: f64,
    pub eta: f64,
    /// `u >= eta phi_1` at every node.
    pub lower_bound_ok: bool,
    pub stated_eta: f64,
    /// `u >= stated_eta phi_1` at every node.
    pub stated_lower_bound_ok: bool,
    pub t_projection_trace: Vec<TraceEntry>,
    pub iterations: usize,
    pub converged: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolveOptions {
    pub residual_tol: f64,
    pub energy_tol: f64,
    pub max_iter: usize,
    /// Under-relaxation of the positivity barrier `delta * eta * phi_1`.
    pub delta: f64,
    /// Number of starting directions for the minus branch.
    pub starts: usize,
    pub seed: u64,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions { residual_tol: 1e-8, energy_tol: 1e-10, max_iter: 10_000, delta: 0.5, starts: 8, seed: 0 }
    }
}

/// `(lambda q / alpha)^(1/(alpha+q))`: below this level `lambda t^-q + t^alpha`
/// is non-increasing in `t`.
pub fn stated_barrier_eta(params: &ProblemParams) -> f64 {
    match params.mode {
        Mode::Full => (params.lambda * params.q / params.alpha).powf(1.0 / (params.alpha + params.q)),
        Mode::PureSingular => f64::INFINITY,
    }
}

/// Largest `eta` for which `eta phi_1` is both a sub-solution
/// (`eta^(p-1+q) <= lambda / lambda_1`) and lies where the right-hand side is
/// non-increasing.
pub fn barrier_eta(params: &ProblemParams, lambda1: f64) -> f64 {
    let sub = (params.lambda / lambda1).powf(1.0 / (params.p - 1.0 + params.q));
    sub.min(stated_barrier_eta(params))
}

/// Upper bound for `||u||` on the plus branch given `C_{1-q}`.
pub fn plus_norm_upper_bound(params: &ProblemParams, c_one_minus_q: f64) -> f64 {
    let (p, q, al) = (params.p, params.q, params.alpha);
    (params.lambda * (al + q) * c_one_minus_q / (al + 1.0 - p)).powf(1.0 / (p + q - 1.0))
}

/// Lower bound for `||v||` on the minus branch given `C_{alpha+1}`.
pub fn minus_norm_lower_bound(params: &ProblemParams, c_alpha_plus_one: f64) -> f64 {
    let (p, q, al) = (params.p, params.q, params.alpha);
    ((p - 1.0 + q) / ((al + q) * c_alpha_plus_one)).powf(1.0 / (al + 1.0 - p))
}

/// Project a nonnegative direction onto a branch, returning the point and the
/// fiber parameter used.
pub fn project(
    k: &KernelWeights,
    params: &ProblemParams,
    u: &DiscreteFunction,
    branch: Branch,
) -> Result<(DiscreteFunction, f64)> {
    let c = fiber_coeffs(k, params, u)?;
    match critical_points(&c, params.lambda)? {
        Some(cp) => {
            let t = match branch {
                Branch::Plus => cp.t1,
                Branch::Minus => cp.t2,
            };
            Ok((u.scaled(t), t))
        }
        None => Err(Error::NoTwoRoots { lambda: params.lambda, threshold: lambda_bar(&c)? }),
    }
}

pub fn project_plus(k: &KernelWeights, params: &ProblemParams, u: &DiscreteFunction) -> Result<DiscreteFunction> {
    Ok(project(k, params, u, Branch::Plus)?.0)
}

pub fn project_minus(k: &KernelWeights, params: &ProblemParams, u: &DiscreteFunction) -> Result<DiscreteFunction> {
    Ok(project(k, params, u, Branch::Minus)?.0)
}

/// Fiber derivatives at `t = 1` and the resulting classification.
pub fn classify(
    k: &KernelWeights,
    params: &ProblemParams,
    u: &DiscreteFunction,
    tol: f64,
) -> Result<(NehariClass, f64, f64)> {
    let c = fiber_coeffs(k, params, u)?;
    let v = evaluate_fiber(&c, params.lambda, 1.0)?;
    let class = if v.d1.abs() > tol * c.norm_p.max(1.0) {
        NehariClass::None
    } else if v.d2 > 0.0 {
        NehariClass::Plus
    } else if v.d2 < 0.0 {
        NehariClass::Minus
    } else {
        NehariClass::None
    };
    Ok((class, v.d1, v.d2))
}

fn dominates(u: &DiscreteFunction, phi: &DiscreteFunction, eta: f64, tol: f64) -> bool {
    u.values().iter().zip(phi.values()).all(|(&x, &f)| x >= eta * f - tol)
}

fn build_report(
    pb: &Problem,
    u: DiscreteFunction,
    trace: Vec<TraceEntry>,
    iterations: usize,
    residual_tol: f64,
) -> Result<SolveReport> {
    let k = pb.kernel;
    let params = pb.params;
    let energy_value = energy(k, params, &u)?;
    let residual = normalized_residual(k, params, &u)?;
    let (nehari_class, fiber_d1, fiber_d2) = classify(k, params, &u, 1e-8)?;
    let norm = seminorm_p(k, &u)?.powf(1.0 / params.p);
    let eta = barrier_eta(params, pb.eigen.lambda1);
    let stated_eta = stated_barrier_eta(params);
    let lower_bound_ok = dominates(&u, &pb.eigen.phi1, eta, 1e-10);
    let stated_lower_bound_ok = dominates(&u, &pb.eigen.phi1, stated_eta, 1e-10);
    Ok(SolveReport {
        u,
        energy: energy_value,
        residual,
        nehari_class,
        fiber_d1,
        fiber_d2,
        norm,
        eta,
        lower_bound_ok,
        stated_eta,
        stated_lower_bound_ok,
        t_projection_trace: trace,
        iterations,
        converged: residual <= residual_tol,
    })
}

/// Descent on one branch from an initial direction.
pub fn minimize_on_branch(
    pb: &Problem,
    branch: Branch,
    u0: &DiscreteFunction,
    opts: &SolveOptions,
) -> Result<SolveReport> {
    let k = pb.kernel;
    let params = pb.params;
    let floor = pb.eigen.phi1.scaled(opts.delta * barrier_eta(params, pb.eigen.lambda1));
    let start = u0.zip_with(&floor, f64::max)?;
    let (mut v, mut t) = project(k, params, &start, branch)?;
    let mut e = energy(k, params, &v)?;
    let mut trace = vec![TraceEntry { iteration: 0, t, energy: e }];
    let mut iterations = 0;
    let mut stalled = 0;

    for it in 1..=opts.max_iter {
        let g = energy_gradient(k, params, &v)?;
        let residual = g.sup_norm() / apply_fplap(k, &v)?.sup_norm();
        if residual <= opts.residual_tol {
            break;
        }
        iterations = it;
        let rhs: Vec<f64> = g.values().iter().map(|x| -x).collect();
        let mut directions = Vec::with_capacity(2);
        if let Some(d) = lu_solve(energy_hessian(k, params, &v, false)?, &rhs) {
            directions.push(d);
        }
        if let Some(d) = spd_solve(energy_hessian(k, params, &v, true)?, &rhs) {
            directions.push(d);
        }

        let mut accepted = None;
        'dirs: for d in &directions {
            let mut tau = 1.0;
            for _ in 0..40 {
                let trial = DiscreteFunction::new(
                    *v.mesh(),
                    v.values().iter().zip(d).zip(floor.values()).map(|((x, dx), f)| (x + tau * dx).max(*f)).collect(),
                )?;
                if let Ok((w, tw)) = project(k, params, &trial, branch) {
                    if let Ok(ew) = energy(k, params, &w) {
                        if ew <= e + 1e-14 * e.abs() {
                            accepted = Some((w, tw, ew));
                            break 'dirs;
                        }
                    }
                }
                tau *= 0.5;
            }
        }
        match accepted {
            Some((w, tw, ew)) => {
                let change = (e - ew).abs() / e.abs().max(1e-300);
                v = w;
                t = tw;
                e = ew;
                trace.push(TraceEntry { iteration: it, t, energy: e });
                stalled = if change < opts.energy_tol * 1e-5 { stalled + 1 } else { 0 };
                if stalled >= 25 {
                    break;
                }
            }
            None => break,
        }
    }

    let report = build_report(pb, v, trace, iterations, opts.residual_tol)?;
    if !report.converged {
        return Err(Error::NotConverged { iterations, measure: report.residual });
    }
    Ok(report)
}

/// Minimizer of the energy on the plus branch, started from `u0` (or `phi_1`).
pub fn minimize_plus(pb: &Problem, u0: Option<&DiscreteFunction>, opts: &SolveOptions) -> Result<SolveReport> {
    let u0 = u0.unwrap_or(&pb.eigen.phi1);
    minimize_on_branch(pb, Branch::Plus, u0, opts)
}

/// Best minimizer found on the minus branch over several starting directions:
/// `u0` (or `phi_1`) followed by seeded positive modulations of it.
pub fn minimize_minus(pb: &Problem, u0: Option<&DiscreteFunction>, opts: &SolveOptions) -> Result<SolveReport> {
    let params = pb.params;
    let bound = params.p_star() - 1.0;
    if params.mode != Mode::Full || !(params.alpha < bound) {
        return Err(Error::SupercriticalAlpha { alpha: params.alpha, bound });
    }
    let base = u0.unwrap_or(&pb.eigen.phi1).clone();
    let starts: Vec<DiscreteFunction> = (0..opts.starts.max(1))
        .map(|i| {
            if i == 0 {
                base.clone()
            } else {
                let m = sample_direction(pb.kernel, opts.seed, i);
                let ms = m.sup_norm();
                base.zip_with(&m, |a, b| a * (0.6 + 0.8 * b / ms)).expect("same mesh")
            }
        })
        .collect();
    let runs: Vec<Result<SolveReport>> =
        starts.par_iter().map(|s| minimize_on_branch(pb, Branch::Minus, s, opts)).collect();
    let mut best: Option<SolveReport> = None;
    let mut first_err = None;
    for r in runs {
        match r {
            Ok(rep) if rep.nehari_class == NehariClass::Minus => {
                if best.as_ref().is_none_or(|b| rep.energy < b.energy) {
                    best = Some(rep);
                }
            }
            Ok(rep) => {
                first_err.get_or_insert(Error::NotConverged { iterations: rep.iterations, measure: rep.residual });
            }
            Err(e) => {
                first_err.get_or_insert(e);
            }
        }
    }
    best.ok_or_else(|| first_err.unwrap_or(Error::NotConverged { iterations: 0, measure: f64::NAN }))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    /// `max_i |g_i| h / max_i |(A u)_i| h`.
    pub residual: f64,
    /// `max_i |g_i| h`.
    pub raw_residual: f64,
    pub eta: f64,
    pub lower_bound_ok: bool,
    pub stated_eta: f64,
    pub stated_lower_bound_ok: bool,
    pub sup_norm: f64,
    pub sup_norm_finite: bool,
    pub passed: bool,
}

/// Check that a positive `u` solves the discrete problem to `tol` and
/// dominates the barrier `eta phi_1`.
pub fn verify_solution(pb: &Problem, u: &DiscreteFunction, tol: f64) -> Result<VerifyReport> {
    let k = pb.kernel;
    let params = pb.params;
    if let Some((node, value)) = u.first_nonpositive() {
        return Err(Error::NonPositiveValue { node, value });
    }
    let g = energy_gradient(k, params, u)?;
    let h = u.mesh().h();
    let raw_residual = g.sup_norm() * h;
    let residual = normalized_residual(k, params, u)?;
    let eta = barrier_eta(params, pb.eigen.lambda1);
    let stated_eta = stated_barrier_eta(params);
    let lower_bound_ok = dominates(u, &pb.eigen.phi1, eta, tol);
    let stated_lower_bound_ok = dominates(u, &pb.eigen.phi1, stated_eta, tol);
    let sup_norm = u.sup_norm();
    let sup_norm_finite = sup_norm.is_finite();
    Ok(VerifyReport {
        residual,
        raw_residual,
        eta,
        lower_bound_ok,
        stated_eta,
        stated_lower_bound_ok,
        sup_norm,
        sup_norm_finite,
        passed: residual <= tol && lower_bound_ok && sup_norm_finite,
    })
}
