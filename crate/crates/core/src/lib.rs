//! Discretization of the fractional p-Laplacian Dirichlet problem with a
//! singular nonlinearity,
//!
//! ```text
//! (-Delta_p)^s u = lambda u^-q + u^alpha  in (a, b),   u = 0 outside,
//! ```
//!
//! together with the variational machinery around it: fibering maps,
//! minimization on the two Nehari branches, the principal eigenpair and
//! embedding constants, sub/super-solution iteration and exploration of the
//! range of `lambda` for which positive solutions exist.
//!
//! Conventions: `||u||^p` denotes the discrete Gagliardo energy
//! [`nonlocal::seminorm_p`], the operator `A` is its gradient divided by `p h`,
//! and `lambda_1` is the minimum of the p-homogeneous Rayleigh quotient
//! `||u||^p / |u|_p^p`.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod domain;
pub mod eigen;
pub mod error;
pub mod fiber;
pub mod linalg;
pub mod nehari;
pub mod nonlocal;
pub mod ordermethod;

pub use domain::{build_mesh, integrate, norm_lp, DiscreteFunction, Mesh};
pub use error::{Error, Result};
pub use nonlocal::{
    apply_fplap, build_kernel, energy, energy_gradient, seminorm_p, KernelWeights, Mode,
    ProblemParams,
};
