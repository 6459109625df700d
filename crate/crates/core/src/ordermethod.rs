//! Sub/super-solution machinery: order intervals, monotone iteration,
//! minimization over an order interval, the purely singular problem and the
//! sweep over `lambda` that locates the end of the existence range.
//!
//! The right-hand side `f(u) = lambda u^-q + u^alpha` is decreasing for small
//! `u`, so the plain Picard map `u -> A^-1 f(u)` is not order preserving on
//! the interval. The iteration therefore adds a nodewise shift
//! `c_i >= max(0, -f'(lower_i))`:
//!
//! ```text
//! (A + C) u_{n+1} = f(u_n) + C u_n,
//! ```
//!
//! which makes `u -> f(u) + C u` non-decreasing on `[lower, upper]`. With the
//! comparison principle for `A + C` the iterates then increase monotonically
//! from the sub-solution towards the minimal solution in the interval.

use serde::{Deserialize, Serialize};

use crate::domain::DiscreteFunction;
use crate::eigen::EigenPair;
use crate::error::{Error, Result};
use crate::linalg::{lu_solve, max_abs, spd_solve, SpdFactor};
use crate::nehari::{
    barrier_eta, minimize_plus, verify_solution, Problem, SolveOptions, SolveReport, VerifyReport,
};
use crate::nonlocal::{
    apply_fplap, energy, energy_gradient, energy_hessian, KernelWeights, Mode, ProblemParams,
};

/// Ordered pair of a positive sub-solution and a super-solution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrderInterval {
    pub lower: DiscreteFunction,
    pub upper: DiscreteFunction,
    /// `max_i ((A lower)_i - f(lower_i))`; at most `tol` for a sub-solution.
    pub sub_residual: f64,
    /// `min_i ((A upper)_i - f(upper_i))`; at least `-tol` for a super-solution.
    pub super_residual: f64,
}

fn rhs(params: &ProblemParams, x: f64) -> f64 {
    let mut v = params.lambda * x.powf(-params.q);
    if params.mode == Mode::Full {
        v += x.powf(params.alpha);
    }
    v
}

impl OrderInterval {
    /// Validate ordering, positivity and the residual signs. The residual
    /// tolerance is relative to `max |A upper|`.
    pub fn new(
        k: &KernelWeights,
        params: &ProblemParams,
        lower: DiscreteFunction,
        upper: DiscreteFunction,
        tol: f64,
    ) -> Result<Self> {
        lower.check_mesh(&upper)?;
        if let Some((i, v)) = lower.first_nonpositive() {
            return Err(Error::EmptyInterval(format!("lower bound is {v} at node {i}")));
        }
        if let Some(i) = lower.values().iter().zip(upper.values()).position(|(l, u)| l > u) {
            return Err(Error::EmptyInterval(format!("lower exceeds upper at node {i}")));
        }
        let gl = energy_gradient(k, params, &lower)?;
        let gu = energy_gradient(k, params, &upper)?;
        let sub_residual = gl.values().iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let super_residual = gu.values().iter().copied().fold(f64::INFINITY, f64::min);
        let scale = apply_fplap(k, &upper)?.sup_norm().max(1.0);
        if sub_residual > tol * scale {
            return Err(Error::EmptyInterval(format!("lower is not a sub-solution (residual {sub_residual:e})")));
        }
        if super_residual < -tol * scale {
            return Err(Error::EmptyInterval(format!("upper is not a super-solution (residual {super_residual:e})")));
        }
        Ok(OrderInterval { lower, upper, sub_residual, super_residual })
    }
}

/// `t phi_1` with `t = 0.99 min((lambda/lambda_1)^(1/(p+q-1)), min_i upper_i / phi_1(x_i))`.
pub fn build_subsolution(
    params: &ProblemParams,
    eig: &EigenPair,
    upper: Option<&DiscreteFunction>,
) -> Result<DiscreteFunction> {
    if !(params.lambda > 0.0) {
        return Err(Error::EmptyInterval(format!("requires lambda > 0, got {}", params.lambda)));
    }
    let mut t = (params.lambda / eig.lambda1).powf(1.0 / (params.p + params.q - 1.0));
    if let Some(up) = upper {
        up.check_mesh(&eig.phi1)?;
        let cap = up
            .values()
            .iter()
            .zip(eig.phi1.values())
            .map(|(u, f)| u / f)
            .fold(f64::INFINITY, f64::min);
        t = t.min(cap);
    }
    t *= 0.99;
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::EmptyInterval(format!("sub-solution scale t = {t}")));
    }
    Ok(eig.phi1.scaled(t))
}

/// Solver for `A u + c u = f` (`c >= 0` nodewise), i.e. the minimizer of the
/// strictly convex `(1/p) ||u||^p + (h/2) sum c u^2 - h sum f u`.
pub struct InnerSolver<'a> {
    kernel: &'a KernelWeights,
    shift: Vec<f64>,
    linear: Option<SpdFactor>,
    pub tol: f64,
    pub max_iter: usize,
}

impl<'a> InnerSolver<'a> {
    pub fn new(kernel: &'a KernelWeights, shift: Vec<f64>) -> Result<Self> {
        if shift.len() != kernel.len() {
            return Err(Error::MeshMismatch);
        }
        let linear = if kernel.p() == 2.0 {
            let mut m = kernel.linear_operator_matrix();
            for (i, c) in shift.iter().enumerate() {
                m[(i, i)] += c;
            }
            Some(SpdFactor::new(m)?)
        } else {
            None
        };
        Ok(InnerSolver { kernel, shift, linear, tol: 1e-13, max_iter: 200 })
    }

    fn objective(&self, u: &DiscreteFunction, f: &[f64]) -> Result<f64> {
        let h = u.mesh().h();
        let e = crate::nonlocal::seminorm_p(self.kernel, u)? / self.kernel.p();
        let quad: f64 = u.values().iter().zip(&self.shift).map(|(x, c)| 0.5 * c * x * x).sum();
        let lin: f64 = u.values().iter().zip(f).map(|(x, g)| x * g).sum();
        Ok(e + h * (quad - lin))
    }

    fn residual(&self, u: &DiscreteFunction, f: &[f64]) -> Result<Vec<f64>> {
        let au = apply_fplap(self.kernel, u)?;
        Ok(au
            .values()
            .iter()
            .zip(u.values())
            .zip(&self.shift)
            .zip(f)
            .map(|(((a, x), c), g)| a + c * x - g)
            .collect())
    }

    /// Solve with an optional warm start (only used when `p > 2`).
    pub fn solve(&self, f: &DiscreteFunction, warm: Option<&DiscreteFunction>) -> Result<DiscreteFunction> {
        let mesh = *self.kernel.mesh();
        if *f.mesh() != mesh {
            return Err(Error::MeshMismatch);
        }
        if let Some(factor) = &self.linear {
            return DiscreteFunction::new(mesh, factor.solve(f.values()));
        }
        if f.is_zero() {
            return Ok(DiscreteFunction::zeros(mesh));
        }
        let fv = f.values();
        let mut u = match warm {
            Some(w) if !w.is_zero() => w.clone(),
            _ => {
                let mut m = self.kernel.linear_operator_matrix();
                for (i, c) in self.shift.iter().enumerate() {
                    m[(i, i)] += c;
                }
                let v = spd_solve(m, fv).ok_or_else(|| Error::LinearAlgebra("linear start".into()))?;
                DiscreteFunction::new(mesh, v)?
            }
        };
        let scale = max_abs(fv).max(1e-300);
        let mut obj = self.objective(&u, fv)?;
        for it in 0..self.max_iter {
            let r = self.residual(&u, fv)?;
            let rn = max_abs(&r);
            if rn <= self.tol * scale {
                return Ok(u);
            }
            let mut hess = self.kernel.seminorm_hessian(&u)?;
            let mut diag_max = 0.0f64;
            for (i, c) in self.shift.iter().enumerate() {
                hess[(i, i)] += c;
                diag_max = diag_max.max(hess[(i, i)]);
            }
            let neg: Vec<f64> = r.iter().map(|x| -x).collect();
            let d = match spd_solve(hess.clone(), &neg) {
                Some(d) => d,
                None => {
                    for i in 0..hess.nrows() {
                        hess[(i, i)] += 1e-10 * diag_max;
                    }
                    spd_solve(hess, &neg).ok_or_else(|| Error::LinearAlgebra("inner Hessian".into()))?
                }
            };
            let mut tau = 1.0;
            let mut moved = false;
            for _ in 0..50 {
                let trial = DiscreteFunction::new(
                    mesh,
                    u.values().iter().zip(&d).map(|(x, dx)| x + tau * dx).collect(),
                )?;
                let o = self.objective(&trial, fv)?;
                if o <= obj + 1e-15 * obj.abs() {
                    u = trial;
                    obj = o;
                    moved = true;
                    break;
                }
                tau *= 0.5;
            }
            if !moved {
                let rn = max_abs(&self.residual(&u, fv)?);
                if rn <= 1e3 * self.tol * scale {
                    return Ok(u);
                }
                return Err(Error::NotConverged { iterations: it + 1, measure: rn / scale });
            }
        }
        Err(Error::NotConverged { iterations: self.max_iter, measure: max_abs(&self.residual(&u, fv)?) / scale })
    }
}

/// Minimizer of `(1/p) ||u||^p - h sum f u`, i.e. the solution of `A u = f`.
pub fn inner_solve(k: &KernelWeights, f: &DiscreteFunction) -> Result<DiscreteFunction> {
    InnerSolver::new(k, vec![0.0; k.len()])?.solve(f, None)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MonotoneOptions {
    /// Stop once `max |u_{n+1} - u_n|` falls below this.
    pub step_tol: f64,
    pub max_iter: usize,
    /// Allowed decrease between consecutive iterates.
    pub monotonicity_slack: f64,
    /// Residual tolerance of the final verification.
    pub verify_tol: f64,
}

impl Default for MonotoneOptions {
    fn default() -> Self {
        MonotoneOptions { step_tol: 1e-13, max_iter: 100_000, monotonicity_slack: 1e-12, verify_tol: 1e-6 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonotoneReport {
    pub u: DiscreteFunction,
    pub energy: f64,
    pub iterations: usize,
    pub converged: bool,
    /// `max |u_{n+1} - u_n|` per iteration.
    pub step_trace: Vec<f64>,
    /// Largest observed decrease `max_i (u_n - u_{n+1})_i` (negative or zero
    /// when the sequence is non-decreasing).
    pub max_decrease: f64,
    /// Largest observed `max_i (u_n - upper)_i`.
    pub max_upper_excess: f64,
    pub verify: VerifyReport,
}

/// Nodewise shift that makes `f(u) + c u` non-decreasing on `[lower, inf)`.
pub fn monotone_shift(params: &ProblemParams, lower: &DiscreteFunction) -> Vec<f64> {
    lower
        .values()
        .iter()
        .map(|&l| {
            let mut c = params.q * params.lambda * l.powf(-params.q - 1.0);
            if params.mode == Mode::Full {
                c -= params.alpha * l.powf(params.alpha - 1.0);
            }
            c.max(0.0)
        })
        .collect()
}

/// Shifted monotone iteration from `interval.lower`.
pub fn monotone_iterate(pb: &Problem, interval: &OrderInterval, opts: &MonotoneOptions) -> Result<MonotoneReport> {
    let k = pb.kernel;
    let params = pb.params;
    let shift = monotone_shift(params, &interval.lower);
    let solver = InnerSolver::new(k, shift.clone())?;
    let mut u = interval.lower.clone();
    let mut trace = Vec::new();
    let mut max_decrease = f64::NEG_INFINITY;
    let mut max_upper_excess = f64::NEG_INFINITY;
    let mut converged = false;
    let mut iterations = 0;
    for it in 1..=opts.max_iter {
        iterations = it;
        let f = DiscreteFunction::new(
            *u.mesh(),
            u.values().iter().zip(&shift).map(|(&x, c)| rhs(params, x) + c * x).collect(),
        )?;
        let next = solver.solve(&f, Some(&u))?;
        let mut step = 0.0f64;
        for (i, ((&a, &b), &up)) in u.values().iter().zip(next.values()).zip(interval.upper.values()).enumerate() {
            let dec = a - b;
            max_decrease = max_decrease.max(dec);
            step = step.max(dec.abs());
            if dec > opts.monotonicity_slack {
                return Err(Error::MonotonicityViolation { node: i, magnitude: dec, iteration: it });
            }
            let excess = b - up;
            max_upper_excess = max_upper_excess.max(excess);
            if excess > opts.monotonicity_slack {
                return Err(Error::MonotonicityViolation { node: i, magnitude: excess, iteration: it });
            }
        }
        trace.push(step);
        u = next;
        if step < opts.step_tol {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::NotConverged { iterations, measure: *trace.last().unwrap_or(&f64::NAN) });
    }
    let verify = verify_solution(pb, &u, opts.verify_tol)?;
    Ok(MonotoneReport {
        energy: energy(k, params, &u)?,
        u,
        iterations,
        converged: verify.residual <= opts.verify_tol,
        step_trace: trace,
        max_decrease,
        max_upper_excess,
        verify,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoxOptions {
    /// Exit when the normalized gradient on free nodes is below this.
    /// A node is held when it sits on a bound and the gradient points out.
    pub kkt_tol: f64,
    pub max_iter: usize,
}

impl Default for BoxOptions {
    fn default() -> Self {
        BoxOptions { kkt_tol: 1e-11, max_iter: 10_000 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoxReport {
    pub u: DiscreteFunction,
    pub energy: f64,
    pub energy_trace: Vec<f64>,
    /// Normalized gradient on nodes not held by an active bound.
    pub kkt_residual: f64,
    pub active_lower: usize,
    pub active_upper: usize,
    pub iterations: usize,
    pub converged: bool,
}

fn clip(v: f64, lo: f64, hi: f64) -> f64 {
    v.max(lo).min(hi)
}

/// Projected Newton descent of the energy over `[lower, upper]`.
pub fn box_minimize(pb: &Problem, interval: &OrderInterval, opts: &BoxOptions) -> Result<BoxReport> {
    let k = pb.kernel;
    let params = pb.params;
    let lo = interval.lower.values();
    let hi = interval.upper.values();
    let el = energy(k, params, &interval.lower)?;
    let eu = energy(k, params, &interval.upper)?;
    let (mut u, mut e) = if el <= eu { (interval.lower.clone(), el) } else { (interval.upper.clone(), eu) };
    let mut trace = vec![e];
    let n = u.len();
    let mut iterations = 0;
    let mut kkt = f64::INFINITY;
    let mut free = vec![true; n];

    for it in 0..opts.max_iter {
        let g = energy_gradient(k, params, &u)?;
        let scale = apply_fplap(k, &u)?.sup_norm().max(1e-300);
        let gap = 1e-14;
        kkt = 0.0;
        for i in 0..n {
            let x = u.values()[i];
            let gi = g.values()[i];
            let at_lo = x <= lo[i] + gap * lo[i].abs().max(1.0);
            let at_hi = x >= hi[i] - gap * hi[i].abs().max(1.0);
            free[i] = !((at_lo && gi > 0.0) || (at_hi && gi < 0.0));
            if free[i] {
                kkt = kkt.max(gi.abs() / scale);
            }
        }
        if kkt <= opts.kkt_tol {
            break;
        }
        iterations = it + 1;
        let idx: Vec<usize> = (0..n).filter(|&i| free[i]).collect();
        let rhs: Vec<f64> = idx.iter().map(|&i| -g.values()[i]).collect();
        let mut dirs: Vec<Vec<f64>> = Vec::new();
        for drop in [false, true] {
            let hfull = energy_hessian(k, params, &u, drop)?;
            let hsub = hfull.select_rows(&idx).select_columns(&idx);
            let sol = if drop { spd_solve(hsub, &rhs) } else { lu_solve(hsub, &rhs) };
            if let Some(ds) = sol {
                let mut d = vec![0.0; n];
                for (j, &i) in idx.iter().enumerate() {
                    d[i] = ds[j];
                }
                dirs.push(d);
            }
        }
        let mut accepted = false;
        'dirs: for d in &dirs {
            let mut tau = 1.0;
            for _ in 0..50 {
                let trial = DiscreteFunction::new(
                    *u.mesh(),
                    (0..n).map(|i| clip(u.values()[i] + tau * d[i], lo[i], hi[i])).collect(),
                )?;
                let et = energy(k, params, &trial)?;
                if et <= e {
                    let moved = trial.max_abs_diff(&u)?;
                    u = trial;
                    e = et;
                    trace.push(e);
                    accepted = moved > 0.0;
                    break 'dirs;
                }
                tau *= 0.5;
            }
        }
        if !accepted {
            break;
        }
    }
    let active_lower = (0..n).filter(|&i| u.values()[i] <= lo[i]).count();
    let active_upper = (0..n).filter(|&i| u.values()[i] >= hi[i]).count();
    let converged = kkt <= opts.kkt_tol;
    if !converged {
        return Err(Error::NotConverged { iterations, measure: kkt });
    }
    Ok(BoxReport { u, energy: e, energy_trace: trace, kkt_residual: kkt, active_lower, active_upper, iterations, converged })
}

/// Global minimizer of `J(u) = (1/p) ||u||^p - lambda int G_q(u)` for the
/// purely singular problem, by damped Newton on the positive cone kept above
/// `delta t phi_1` with `t = (lambda / lambda_1)^(1/(p-1+q))`.
pub fn minimize_pure_singular(pb: &Problem, opts: &SolveOptions) -> Result<SolveReport> {
    let k = pb.kernel;
    let params = pb.params;
    if params.mode != Mode::PureSingular {
        return Err(Error::InvalidMode("minimize_pure_singular requires mode = pure_singular".into()));
    }
    if !(params.q > 0.0 && params.q < 1.0) {
        return Err(Error::InvalidMode(format!("pure singular problem requires 0 < q < 1, got {}", params.q)));
    }
    if !(params.lambda > 0.0) {
        return Err(Error::InvalidParams(format!("requires lambda > 0, got {}", params.lambda)));
    }
    let t = barrier_eta(params, pb.eigen.lambda1);
    let floor = pb.eigen.phi1.scaled(opts.delta * t);
    let mut u = pb.eigen.phi1.scaled(t);
    let mut e = energy(k, params, &u)?;
    let mut trace = vec![crate::nehari::TraceEntry { iteration: 0, t: 1.0, energy: e }];
    let mut iterations = 0;
    // Newton converges quadratically here; the final verification uses the
    // caller's tolerance, the loop itself runs to round-off.
    let target = opts.residual_tol.min(1e-13);
    for it in 1..=opts.max_iter {
        let g = energy_gradient(k, params, &u)?;
        let res = g.sup_norm() / apply_fplap(k, &u)?.sup_norm();
        if res <= target {
            break;
        }
        iterations = it;
        let hess = energy_hessian(k, params, &u, false)?;
        let neg: Vec<f64> = g.values().iter().map(|x| -x).collect();
        let d = spd_solve(hess, &neg).ok_or_else(|| Error::LinearAlgebra("pure singular Hessian".into()))?;
        let mut tau = 1.0;
        let mut moved = false;
        for _ in 0..50 {
            let trial = DiscreteFunction::new(
                *u.mesh(),
                u.values().iter().zip(&d).zip(floor.values()).map(|((x, dx), f)| (x + tau * dx).max(*f)).collect(),
            )?;
            let et = energy(k, params, &trial)?;
            if et <= e + 1e-15 * e.abs() {
                moved = trial != u;
                u = trial;
                e = et;
                trace.push(crate::nehari::TraceEntry { iteration: it, t: tau, energy: e });
                break;
            }
            tau *= 0.5;
        }
        if !moved {
            break;
        }
    }
    let residual = crate::nonlocal::normalized_residual(k, params, &u)?;
    if residual > opts.residual_tol {
        return Err(Error::NotConverged { iterations, measure: residual });
    }
    let (nehari_class, fiber_d1, fiber_d2) = crate::nehari::classify(k, params, &u, 1e-8)?;
    let eta = t;
    let lower_bound_ok = u.values().iter().zip(pb.eigen.phi1.values()).all(|(x, f)| *x >= eta * f - 1e-10);
    Ok(SolveReport {
        norm: crate::nonlocal::seminorm_p(k, &u)?.powf(1.0 / params.p),
        u,
        energy: e,
        residual,
        nehari_class,
        fiber_d1,
        fiber_d2,
        eta,
        lower_bound_ok,
        stated_eta: f64::INFINITY,
        stated_lower_bound_ok: false,
        t_projection_trace: trace,
        iterations,
        converged: true,
    })
}

// ---------------------------------------------------------------------------
// sweep over lambda

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub lambda: f64,
    pub succeeded: bool,
    pub iterations: usize,
    pub energy: f64,
    pub sup_norm: f64,
    pub residual: f64,
}

impl SweepRow {
    fn failed(lambda: f64) -> Self {
        SweepRow { lambda, succeeded: false, iterations: 0, energy: f64::NAN, sup_norm: f64::NAN, residual: f64::NAN }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepOptions {
    pub bisection_steps: usize,
    pub solve: SolveOptions,
    pub monotone: MonotoneOptions,
}

impl Default for SweepOptions {
    fn default() -> Self {
        SweepOptions {
            bisection_steps: 20,
            solve: SolveOptions { residual_tol: 1e-13, max_iter: 100, ..SolveOptions::default() },
            // near the fold the contraction rate tends to one; an attempt that
            // needs more than this budget is recorded as a failure
            monotone: MonotoneOptions { max_iter: 5000, ..MonotoneOptions::default() },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    /// One row per grid value, in grid order.
    pub rows: Vec<SweepRow>,
    /// Rows of the bisection refinement, in evaluation order.
    pub bisection: Vec<SweepRow>,
    /// Largest `lambda` with a verified solution after refinement, when the
    /// grid shows a success/failure transition.
    pub lambda_hat: Option<f64>,
    /// Final `(largest success, smallest failure)` bracket.
    pub bracket: Option<(f64, f64)>,
}

/// One existence attempt at `lambda`. The super-solution is `super_from` when
/// given (a solution at a larger `lambda`), otherwise the plus-branch
/// minimizer at `lambda` itself, started from `warm` and then from `phi_1`.
fn attempt(
    k: &KernelWeights,
    base: &ProblemParams,
    eig: &EigenPair,
    lambda: f64,
    warm: Option<&DiscreteFunction>,
    super_from: Option<&DiscreteFunction>,
    opts: &SweepOptions,
) -> Option<(SweepRow, DiscreteFunction)> {
    let params = base.with_lambda(lambda);
    let pb = Problem::new(k, &params, eig);
    let upper = match super_from {
        Some(u) => u.clone(),
        None => {
            let first = minimize_plus(&pb, warm, &opts.solve);
            let rep = match (first, warm) {
                (Ok(r), _) => r,
                (Err(_), Some(_)) => minimize_plus(&pb, None, &opts.solve).ok()?,
                (Err(_), None) => return None,
            };
            rep.u
        }
    };
    let lower = build_subsolution(&params, eig, Some(&upper)).ok()?;
    let interval = OrderInterval::new(k, &params, lower, upper, 1e-6).ok()?;
    let mono = monotone_iterate(&pb, &interval, &opts.monotone).ok()?;
    if !(mono.verify.residual <= opts.monotone.verify_tol) {
        return None;
    }
    let row = SweepRow {
        lambda,
        succeeded: true,
        iterations: mono.iterations,
        energy: mono.energy,
        sup_norm: mono.u.sup_norm(),
        residual: mono.verify.residual,
    };
    Some((row, mono.u))
}

/// Attempt every grid value (increasing order, continuation from the last
/// success), retry failures below a success with that solution as the
/// super-solution, then bisect the success/failure transition.
pub fn lambda_sweep(
    k: &KernelWeights,
    base: &ProblemParams,
    eig: &EigenPair,
    grid: &[f64],
    opts: &SweepOptions,
) -> Result<SweepResult> {
    if grid.is_empty() || grid.iter().any(|&l| !(l > 0.0)) || grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidParams("lambda grid must be positive and strictly increasing".into()));
    }
    let mut rows: Vec<SweepRow> = Vec::with_capacity(grid.len());
    let mut sols: Vec<Option<DiscreteFunction>> = Vec::with_capacity(grid.len());
    let mut warm: Option<DiscreteFunction> = None;
    for &lambda in grid {
        match attempt(k, base, eig, lambda, warm.as_ref(), None, opts) {
            Some((row, u)) => {
                rows.push(row);
                warm = Some(u.clone());
                sols.push(Some(u));
            }
            None => {
                rows.push(SweepRow::failed(lambda));
                sols.push(None);
            }
        }
    }
    // a solution at lambda_0 super-solves every smaller lambda
    for i in 0..grid.len() {
        if rows[i].succeeded {
            continue;
        }
        if let Some(j) = (i + 1..grid.len()).find(|&j| rows[j].succeeded) {
            let sup = sols[j].clone();
            if let Some((row, u)) = attempt(k, base, eig, grid[i], None, sup.as_ref(), opts) {
                rows[i] = row;
                sols[i] = Some(u);
            }
        }
    }

    let mut bisection = Vec::new();
    let last_success = rows.iter().rposition(|r| r.succeeded);
    let (lambda_hat, bracket) = match last_success {
        Some(i) if i + 1 < rows.len() => {
            let mut lo = grid[i];
            let mut hi = grid[i + 1];
            let mut u_lo = sols[i].clone();
            for _ in 0..opts.bisection_steps {
                let mid = 0.5 * (lo + hi);
                match attempt(k, base, eig, mid, u_lo.as_ref(), None, opts) {
                    Some((row, u)) => {
                        bisection.push(row);
                        lo = mid;
                        u_lo = Some(u);
                    }
                    None => {
                        bisection.push(SweepRow::failed(mid));
                        hi = mid;
                    }
                }
            }
            (Some(lo), Some((lo, hi)))
        }
        _ => (None, None),
    };
    Ok(SweepResult { rows, bisection, lambda_hat, bracket })
}

/// `n` logarithmically spaced values from `min` to `max` inclusive.
pub fn log_grid(min: f64, max: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![min];
    }
    let (a, b) = (min.ln(), max.ln());
    (0..n).map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp()).collect()
}
