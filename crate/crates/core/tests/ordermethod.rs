use nalgebra::{DMatrix, DVector};

use fplap_core::eigen::{principal_eigenpair, EigenPair};
use fplap_core::fiber::estimate_lambda1;
use fplap_core::nehari::{minimize_plus, Problem, SolveOptions};
use fplap_core::ordermethod::{
    box_minimize, build_subsolution, inner_solve, lambda_sweep, log_grid, minimize_pure_singular,
    monotone_iterate, BoxOptions, MonotoneOptions, OrderInterval, SweepOptions,
};
use fplap_core::{
    apply_fplap, build_kernel, build_mesh, energy, energy_gradient, DiscreteFunction, KernelWeights, Mode,
    ProblemParams,
};

fn setup(n: usize) -> (KernelWeights, EigenPair) {
    let k = build_kernel(build_mesh(0.0, 1.0, n).unwrap(), 0.4, 2.0).unwrap();
    let e = principal_eigenpair(&k, 1e-12).unwrap();
    (k, e)
}

fn params(lambda: f64) -> ProblemParams {
    ProblemParams::new(0.4, 2.0, 0.5, 3.0, lambda, Mode::Full).unwrap()
}

#[test]
fn inner_solve_matches_dense_lu() {
    let (k, _) = setup(60);
    let f = DiscreteFunction::from_fn(*k.mesh(), |x| (3.0 * x).cos() + 0.5);
    let u = inner_solve(&k, &f).unwrap();
    let m: DMatrix<f64> = k.linear_operator_matrix();
    let oracle = m.lu().solve(&DVector::from_column_slice(f.values())).unwrap();
    let d = u.values().iter().zip(oracle.iter()).fold(0.0f64, |a, (x, y)| a.max((x - y).abs()));
    assert!(d <= 1e-12 * oracle.amax().max(1.0), "difference {d:e}");
}

#[test]
fn maximum_principle() {
    let (k, _) = setup(40);
    let f = DiscreteFunction::from_fn(*k.mesh(), |x| if x < 0.3 { 1.0 } else { 0.0 });
    let u = inner_solve(&k, &f).unwrap();
    assert!(u.values().iter().all(|&x| x >= 0.0));
}

#[test]
fn subsolution_residual_sign() {
    let (k, e) = setup(80);
    let l1 = estimate_lambda1(&k, &params(1.0), 20, 3).unwrap().value;
    let pr = params(0.1 * l1);
    let lower = build_subsolution(&pr, &e, None).unwrap();
    let g = energy_gradient(&k, &pr, &lower).unwrap();
    let scale = apply_fplap(&k, &lower).unwrap().sup_norm();
    assert!(g.values().iter().all(|&r| r <= 1e-10 * scale));
}

#[test]
fn fixed_point_returns_immediately() {
    let (k, e) = setup(64);
    let pr = params(4.0);
    let pb = Problem::new(&k, &pr, &e);
    let tight = SolveOptions { residual_tol: 1e-13, ..SolveOptions::default() };
    let sol = minimize_plus(&pb, None, &tight).unwrap().u;
    let iv = OrderInterval::new(&k, &pr, sol.clone(), sol.clone(), 1e-6).unwrap();
    let m = monotone_iterate(&pb, &iv, &MonotoneOptions { monotonicity_slack: 1e-10, ..MonotoneOptions::default() })
        .unwrap();
    assert!(m.iterations <= 2, "took {} iterations", m.iterations);
    assert!(m.u.max_abs_diff(&sol).unwrap() < 1e-10);
}

#[test]
fn monotone_limit_inside_interval_and_box_agrees() {
    let (k, e) = setup(96);
    let tight = SolveOptions { residual_tol: 1e-13, ..SolveOptions::default() };
    let p0 = params(8.0);
    let upper = minimize_plus(&Problem::new(&k, &p0, &e), None, &tight).unwrap().u;
    let pr = params(4.0);
    let pb = Problem::new(&k, &pr, &e);
    let lower = build_subsolution(&pr, &e, Some(&upper)).unwrap();
    let iv = OrderInterval::new(&k, &pr, lower, upper, 1e-6).unwrap();
    let m = monotone_iterate(&pb, &iv, &MonotoneOptions::default()).unwrap();
    assert!(m.max_decrease <= 1e-12);
    assert!(m.u.values().iter().zip(iv.lower.values()).all(|(a, b)| a >= b));
    assert!(m.u.values().iter().zip(iv.upper.values()).all(|(a, b)| *a <= b + 1e-12));
    assert!(m.verify.residual < 1e-6);

    let b = box_minimize(&pb, &iv, &BoxOptions::default()).unwrap();
    assert!(b.energy <= energy(&k, &pr, &iv.lower).unwrap());
    assert!(b.energy <= energy(&k, &pr, &iv.upper).unwrap());
    assert!(b.energy_trace.windows(2).all(|w| w[1] <= w[0]));
    assert!(b.u.max_abs_diff(&m.u).unwrap() < 1e-4);

    assert!(b.kkt_residual <= BoxOptions::default().kkt_tol);
}

#[test]
fn pure_singular_energy_decreases_with_lambda() {
    let (k, e) = setup(64);
    let p1 = ProblemParams::new(0.4, 2.0, 0.5, 0.0, 1.0, Mode::PureSingular).unwrap();
    let p2 = p1.with_lambda(2.0);
    let opts = SolveOptions::default();
    let a = minimize_pure_singular(&Problem::new(&k, &p1, &e), &opts).unwrap();
    let b = minimize_pure_singular(&Problem::new(&k, &p2, &e), &opts).unwrap();
    assert!(b.energy < a.energy);
    assert!(a.residual < 1e-6 && b.residual < 1e-6);
}

#[test]
fn sweep_on_coarse_mesh() {
    let (k, e) = setup(48);
    let grid = log_grid(1.0, 200.0, 10);
    let sw = lambda_sweep(&k, &params(1.0), &e, &grid, &SweepOptions { bisection_steps: 8, ..SweepOptions::default() })
        .unwrap();
    let first_fail = sw.rows.iter().position(|r| !r.succeeded).unwrap();
    assert!(first_fail > 0);
    assert!(sw.rows[first_fail..].iter().all(|r| !r.succeeded));
    let (lo, hi) = sw.bracket.unwrap();
    assert!(lo < hi && sw.lambda_hat == Some(lo));
    assert!(sw.rows.iter().filter(|r| r.succeeded).all(|r| r.residual <= 1e-6));
}
