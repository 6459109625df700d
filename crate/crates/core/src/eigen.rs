//! Principal eigenpair of the discrete operator and the embedding constants
//! `C_beta = sup { |u|_beta^beta : ||u|| = 1 }` and
//! `S = inf { ||u||^p : |u|_{p*} = 1 }`.
//!
//! The eigenvalue is the minimum of the p-homogeneous quotient
//! `||u||^p / |u|_p^p`, so that `A phi_1 = lambda_1 phi_1^(p-1)` for the
//! operator `A` of [`crate::nonlocal`]. Quotients built on `||u||` instead of
//! `||u||^p` give the same eigenfunction.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::domain::DiscreteFunction;
use crate::error::{Error, Result};
use crate::fiber::sample_direction;
use crate::linalg::{max_abs, SpdFactor};
use crate::nonlocal::{abs_pow, apply_fplap, seminorm_p, signed_pow, KernelWeights};

/// Number of descent starts for the nonlinear (`p > 2`) eigenproblem.
pub const EIGEN_STARTS: usize = 5;
/// Number of ascent starts for the embedding constants.
pub const EMBEDDING_STARTS: usize = 5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EigenPair {
    pub lambda1: f64,
    /// Positive at every node, sup-norm one.
    pub phi1: DiscreteFunction,
    /// `max_i |(A phi)_i - lambda_1 phi_i^(p-1)| / lambda_1`.
    pub residual: f64,
    /// Second eigenvalue (linear case only).
    pub lambda2: Option<f64>,
    /// Rayleigh quotient after every accepted step of the winning start.
    pub quotient_trace: Vec<f64>,
    pub iterations: usize,
}

/// `||u||^p / |u|_p^p`.
pub fn rayleigh_quotient(k: &KernelWeights, u: &DiscreteFunction) -> Result<f64> {
    let num = seminorm_p(k, u)?;
    let den = u.mesh().h() * u.values().iter().map(|&x| abs_pow(x, k.p())).sum::<f64>();
    Ok(num / den)
}

/// Relative eigen-residual of a sup-normalized `phi`.
pub fn eigen_residual(k: &KernelWeights, lambda: f64, phi: &DiscreteFunction) -> Result<f64> {
    let a = apply_fplap(k, phi)?;
    let r = a
        .values()
        .iter()
        .zip(phi.values())
        .fold(0.0f64, |m, (&ai, &x)| m.max((ai - lambda * signed_pow(x, k.p()) ).abs()));
    Ok(r / lambda)
}

fn normalize_sup_positive(v: Vec<f64>, mesh: crate::domain::Mesh) -> Result<DiscreteFunction> {
    let sum: f64 = v.iter().sum();
    let sign = if sum < 0.0 { -1.0 } else { 1.0 };
    let sup = max_abs(&v);
    let phi = DiscreteFunction::new(mesh, v.into_iter().map(|x| sign * x / sup).collect())?;
    if phi.values().iter().any(|&x| !(x > 0.0)) {
        return Err(Error::NonPositiveEigenvector);
    }
    Ok(phi)
}

/// Principal eigenpair. For `p = 2` this is inverse iteration with the
/// Cholesky factor of the operator; for `p > 2` a preconditioned descent on
/// the Rayleigh quotient from several starts, the first being the linear
/// eigenvector.
pub fn principal_eigenpair(k: &KernelWeights, tol: f64) -> Result<EigenPair> {
    let linear = linear_eigenpair(k, tol)?;
    if k.p() == 2.0 {
        return Ok(linear);
    }
    nonlinear_eigenpair(k, &linear.phi1, tol)
}

fn linear_eigenpair(k: &KernelWeights, tol: f64) -> Result<EigenPair> {
    let mesh = *k.mesh();
    let a = k.linear_operator_matrix();
    let n = k.len();
    let factor = SpdFactor::new(a.clone())?;
    let apply = |v: &[f64]| -> Vec<f64> { (&a * nalgebra::DVector::from_column_slice(v)).as_slice().to_vec() };
    let rq = |v: &[f64], av: &[f64]| -> f64 {
        v.iter().zip(av).map(|(x, y)| x * y).sum::<f64>() / v.iter().map(|x| x * x).sum::<f64>()
    };

    let max_iter = 2000;
    let mut v: Vec<f64> = sample_direction(k, 0, 0).into_values();
    let mut mu = 0.0;
    let mut trace = Vec::new();
    let mut iterations = 0;
    let mut converged = false;
    for it in 0..max_iter {
        let w = factor.solve(&v);
        let s = max_abs(&w);
        v = w.into_iter().map(|x| x / s).collect();
        let av = apply(&v);
        mu = rq(&v, &av);
        trace.push(mu);
        iterations = it + 1;
        let res = av.iter().zip(&v).fold(0.0f64, |m, (y, x)| m.max((y - mu * x).abs()));
        if res <= tol * mu * max_abs(&v) {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::NotConverged { iterations, measure: mu });
    }
    let phi1 = normalize_sup_positive(v, mesh)?;

    // second eigenvalue by deflated inverse iteration
    let phi_norm2: f64 = phi1.values().iter().map(|x| x * x).sum();
    let deflate = |w: &mut Vec<f64>| {
        let c = w.iter().zip(phi1.values()).map(|(x, y)| x * y).sum::<f64>() / phi_norm2;
        for (x, y) in w.iter_mut().zip(phi1.values()) {
            *x -= c * y;
        }
    };
    let mut w: Vec<f64> = (0..n).map(|i| ((2 * (i + 1)) as f64 * std::f64::consts::PI / (n + 1) as f64).sin()).collect();
    deflate(&mut w);
    let mut mu2 = f64::NAN;
    for _ in 0..max_iter {
        let mut z = factor.solve(&w);
        deflate(&mut z);
        let s = max_abs(&z);
        w = z.into_iter().map(|x| x / s).collect();
        let aw = apply(&w);
        let next = rq(&w, &aw);
        let res = aw.iter().zip(&w).fold(0.0f64, |m, (y, x)| m.max((y - next * x).abs()));
        mu2 = next;
        if res <= tol.max(1e-12) * next {
            break;
        }
    }

    let lambda1 = rayleigh_quotient(k, &phi1)?;
    let residual = eigen_residual(k, lambda1, &phi1)?;
    Ok(EigenPair { lambda1, phi1, residual, lambda2: Some(mu2), quotient_trace: trace, iterations })
}

struct DescentRun {
    quotient: f64,
    u: DiscreteFunction,
    trace: Vec<f64>,
    iterations: usize,
}

fn normalize_p(u: DiscreteFunction, p: f64) -> DiscreteFunction {
    let h = u.mesh().h();
    let norm = (h * u.values().iter().map(|&x| abs_pow(x, p)).sum::<f64>()).powf(1.0 / p);
    u.scaled(1.0 / norm)
}

fn rayleigh_descent(k: &KernelWeights, start: DiscreteFunction, tol: f64) -> Result<DescentRun> {
    let p = k.p();
    let h = k.mesh().h();
    let mut u = normalize_p(start.map(|x| x.abs().max(1e-12)), p);
    let mut quotient = rayleigh_quotient(k, &u)?;
    let mut trace = vec![quotient];
    let mut tau = (p - 1.0) / p;
    let max_iter = 5000;
    let mut iterations = 0;
    for it in 0..max_iter {
        iterations = it + 1;
        let au = apply_fplap(k, &u)?;
        let den = h * u.values().iter().map(|&x| abs_pow(x, p)).sum::<f64>();
        let grad: Vec<f64> = au
            .values()
            .iter()
            .zip(u.values())
            .map(|(&a, &x)| p * (a - quotient * signed_pow(x, p)) / den)
            .collect();
        let sup = u.sup_norm();
        let res = au
            .values()
            .iter()
            .zip(u.values())
            .fold(0.0f64, |m, (&a, &x)| m.max((a - quotient * signed_pow(x, p)).abs()))
            / sup.powf(p - 1.0);
        if res <= tol * quotient {
            break;
        }
        let hess = k.seminorm_hessian(&u)?;
        let dir = SpdFactor::new(hess)?.solve(&grad);
        let mut accepted = false;
        for _ in 0..60 {
            let trial = DiscreteFunction::new(
                *u.mesh(),
                u.values().iter().zip(&dir).map(|(x, d)| (x - tau * d).abs().max(1e-300)).collect(),
            )?;
            let trial = normalize_p(trial, p);
            let q = rayleigh_quotient(k, &trial)?;
            if q < quotient {
                u = trial;
                quotient = q;
                trace.push(q);
                accepted = true;
                tau = (tau * 1.5).min(4.0);
                break;
            }
            tau *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    Ok(DescentRun { quotient, u, trace, iterations })
}

fn nonlinear_eigenpair(k: &KernelWeights, linear_phi: &DiscreteFunction, tol: f64) -> Result<EigenPair> {
    let starts: Vec<DiscreteFunction> = (0..EIGEN_STARTS)
        .map(|i| {
            if i == 0 {
                linear_phi.clone()
            } else {
                let pert = sample_direction(k, 0xE16E, i);
                let ps = pert.sup_norm();
                linear_phi.zip_with(&pert, |a, b| a * (0.75 + 0.5 * b / ps)).unwrap()
            }
        })
        .collect();
    let runs = starts
        .into_par_iter()
        .map(|s| rayleigh_descent(k, s, tol))
        .collect::<Result<Vec<_>>>()?;
    let best = runs
        .into_iter()
        .reduce(|a, b| if b.quotient < a.quotient { b } else { a })
        .expect("at least one start");
    let phi1 = normalize_sup_positive(best.u.into_values(), *k.mesh())?;
    let lambda1 = rayleigh_quotient(k, &phi1)?;
    let residual = eigen_residual(k, lambda1, &phi1)?;
    if residual > tol.max(1e-6) * 10.0 {
        return Err(Error::NotConverged { iterations: best.iterations, measure: residual });
    }
    Ok(EigenPair { lambda1, phi1, residual, lambda2: None, quotient_trace: best.trace, iterations: best.iterations })
}

/// Best value found for an embedding constant, with the function attaining it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingConstant {
    pub beta: f64,
    /// Largest `|u|_beta^beta / ||u||^beta` found; a lower bound for the sup.
    pub value: f64,
    /// Maximizer scaled to `||u|| = 1`.
    pub maximizer: DiscreteFunction,
    pub iterations: usize,
}

/// `|u|_beta^beta / ||u||^beta` for `u != 0`.
pub fn embedding_ratio(k: &KernelWeights, beta: f64, u: &DiscreteFunction) -> Result<f64> {
    let e = seminorm_p(k, u)?;
    let s = u.mesh().h() * u.values().iter().map(|x| x.abs().powf(beta)).sum::<f64>();
    Ok(s / e.powf(beta / k.p()))
}

struct AscentRun {
    value: f64,
    u: DiscreteFunction,
    iterations: usize,
}

fn embedding_ascent(k: &KernelWeights, beta: f64, start: DiscreteFunction, tol: f64) -> Result<AscentRun> {
    let h = k.mesh().h();
    let mut u = start.map(|x| x.abs());
    let sup = u.sup_norm();
    u = u.map(|x| (x / sup).max(1e-10));
    let mut value = embedding_ratio(k, beta, &u)?;
    let mut tau = 1.0;
    let mut iterations = 0;
    let mut small_steps = 0;
    for it in 0..20000 {
        iterations = it + 1;
        let e = seminorm_p(k, &u)?;
        let s = h * u.values().iter().map(|x| x.powf(beta)).sum::<f64>();
        let au = apply_fplap(k, &u)?;
        // gradient of ln(ratio) divided by beta, nodal scaling
        let grad: Vec<f64> = u
            .values()
            .iter()
            .zip(au.values())
            .map(|(&x, &a)| x.powf(beta - 1.0) / s - a / e)
            .collect();
        let hess = k.seminorm_hessian(&u)?;
        let dir: Vec<f64> = SpdFactor::new(hess)?.solve(&grad).into_iter().map(|d| d * e).collect();
        let mut accepted = false;
        for _ in 0..60 {
            let trial: Vec<f64> = u.values().iter().zip(&dir).map(|(x, d)| x + tau * d).collect();
            let tsup = max_abs(&trial);
            if tsup > 0.0 && tsup.is_finite() {
                let trial = DiscreteFunction::new(*u.mesh(), trial.into_iter().map(|x| (x / tsup).max(1e-10)).collect())?;
                let v = embedding_ratio(k, beta, &trial)?;
                if v > value {
                    let rel = (v - value) / value;
                    u = trial;
                    value = v;
                    accepted = true;
                    tau = (tau * 1.5).min(8.0);
                    small_steps = if rel < tol { small_steps + 1 } else { 0 };
                    break;
                }
            }
            tau *= 0.5;
        }
        if !accepted || small_steps >= 3 {
            break;
        }
    }
    Ok(AscentRun { value, u, iterations })
}

fn best_ratio(k: &KernelWeights, beta: f64, tol: f64, seed: u64) -> Result<AscentRun> {
    let runs = (0..EMBEDDING_STARTS)
        .into_par_iter()
        .map(|i| embedding_ascent(k, beta, sample_direction(k, seed, i), tol))
        .collect::<Result<Vec<_>>>()?;
    Ok(runs.into_iter().reduce(|a, b| if b.value > a.value { b } else { a }).expect("starts"))
}

/// Multi-start projected ascent for `C_beta`, `0 < beta <= p*`.
pub fn embedding_constant(k: &KernelWeights, beta: f64, tol: f64, seed: u64) -> Result<EmbeddingConstant> {
    if !(beta > 0.0) {
        return Err(Error::InvalidExponent(beta));
    }
    let p_star = k.p() / (1.0 - k.s() * k.p());
    if beta > p_star * (1.0 + 1e-12) {
        return Err(Error::InvalidParams(format!("requires beta <= p*_s = {p_star}, got {beta}")));
    }
    let run = best_ratio(k, beta, tol, seed)?;
    let norm = seminorm_p(k, &run.u)?.powf(1.0 / k.p());
    Ok(EmbeddingConstant { beta, value: run.value, maximizer: run.u.scaled(1.0 / norm), iterations: run.iterations })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SobolevConstant {
    /// Smallest `||u||^p / |u|_{p*}^p` found; mesh dependent.
    pub value: f64,
    /// Minimizer scaled to `|u|_{p*} = 1`.
    pub minimizer: DiscreteFunction,
}

/// Best constant of the critical embedding on this mesh, `S = (sup ratio_{p*})^(-p/p*)`.
pub fn sobolev_constant(k: &KernelWeights) -> Result<SobolevConstant> {
    let p = k.p();
    let p_star = p / (1.0 - k.s() * p);
    let run = best_ratio(k, p_star, 1e-12, 0x5EB0)?;
    let h = k.mesh().h();
    let lp = (h * run.u.values().iter().map(|x| x.abs().powf(p_star)).sum::<f64>()).powf(1.0 / p_star);
    Ok(SobolevConstant { value: run.value.powf(-p / p_star), minimizer: run.u.scaled(1.0 / lp) })
}
