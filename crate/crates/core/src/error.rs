use thiserror::Error;

/// Errors produced by the discretization and the solvers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid domain: {0}")]
    InvalidDomain(String),
    #[error("invalid exponent {0}: must be positive")]
    InvalidExponent(f64),
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("functions live on different meshes")]
    MeshMismatch,
    #[error("non-finite value at node {node}")]
    NonFiniteValue { node: usize },
    #[error("non-positive value {value} at node {node}")]
    NonPositiveValue { node: usize, value: f64 },
    #[error("logarithm of zero at node {node} (q = 1 requires u != 0)")]
    SingularLog { node: usize },
    #[error("zero function has no fiber map")]
    ZeroFunction,
    #[error("fiber parameter t must be positive, got {0}")]
    NonPositiveT(f64),
    #[error("B(u) = 0: the fiber derivative has at most one root")]
    DegenerateB,
    #[error("root bracketing failed after {0} doublings")]
    BracketFail(usize),
    #[error("embedding constants must be positive and finite")]
    InvalidConstants,
    #[error("lambda = {lambda} is not below the fiber threshold {threshold}: no two critical points")]
    NoTwoRoots { lambda: f64, threshold: f64 },
    #[error("not converged after {iterations} iterations (last measure {measure:e})")]
    NotConverged { iterations: usize, measure: f64 },
    #[error("principal eigenvector has mixed signs")]
    NonPositiveEigenvector,
    #[error("alpha = {alpha} is not subcritical (requires alpha < p*_s - 1 = {bound})")]
    SupercriticalAlpha { alpha: f64, bound: f64 },
    #[error("order interval is empty: {0}")]
    EmptyInterval(String),
    #[error("monotone iteration left the order interval at node {node} (violation {magnitude:e}, iteration {iteration})")]
    MonotonicityViolation { node: usize, magnitude: f64, iteration: usize },
    #[error("operation not available in this mode: {0}")]
    InvalidMode(String),
    #[error("linear algebra failure: {0}")]
    LinearAlgebra(String),
    #[error("kernel cache: {0}")]
    Cache(String),
}

pub type Result<T> = std::result::Result<T, Error>;
