//! Uniform interior mesh on an interval and nodal functions extended by zero.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Smallest admissible number of interior nodes.
pub const MIN_NODES: usize = 8;

/// Uniform mesh of `n` interior nodes on `(a, b)`; node `i` (0-based) sits at
/// `a + (i + 1) h` with `h = (b - a) / (n + 1)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Mesh {
    a: f64,
    b: f64,
    n: usize,
    h: f64,
}

impl Mesh {
    pub fn new(a: f64, b: f64, n: usize) -> Result<Self> {
        if !(a.is_finite() && b.is_finite()) || b <= a {
            return Err(Error::InvalidDomain(format!("requires a < b, got ({a}, {b})")));
        }
        if n < MIN_NODES {
            return Err(Error::InvalidDomain(format!(
                "requires at least {MIN_NODES} interior nodes, got {n}"
            )));
        }
        Ok(Mesh { a, b, n, h: (b - a) / (n as f64 + 1.0) })
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    /// Number of interior nodes.
    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// Cell width.
    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn node(&self, i: usize) -> f64 {
        self.a + (i as f64 + 1.0) * self.h
    }

    pub fn nodes(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n).map(move |i| self.node(i))
    }

    /// Lebesgue measure of the domain.
    pub fn measure(&self) -> f64 {
        self.b - self.a
    }

    /// Mesh with `2n + 1` nodes whose odd-indexed nodes coincide with this one.
    pub fn refined(&self) -> Mesh {
        Mesh::new(self.a, self.b, 2 * self.n + 1).expect("refinement of a valid mesh is valid")
    }
}

/// Build a uniform mesh; see [`Mesh::new`].
pub fn build_mesh(a: f64, b: f64, n: usize) -> Result<Mesh> {
    Mesh::new(a, b, n)
}

/// Nodal values on the interior nodes of a mesh. The function is zero on the
/// complement of the domain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscreteFunction {
    mesh: Mesh,
    values: Vec<f64>,
}

impl DiscreteFunction {
    pub fn new(mesh: Mesh, values: Vec<f64>) -> Result<Self> {
        if values.len() != mesh.len() {
            return Err(Error::MeshMismatch);
        }
        Ok(DiscreteFunction { mesh, values })
    }

    pub fn zeros(mesh: Mesh) -> Self {
        DiscreteFunction { mesh, values: vec![0.0; mesh.len()] }
    }

    pub fn constant(mesh: Mesh, c: f64) -> Self {
        DiscreteFunction { mesh, values: vec![c; mesh.len()] }
    }

    /// Sample `f` at the nodes.
    pub fn from_fn(mesh: Mesh, f: impl Fn(f64) -> f64) -> Self {
        DiscreteFunction { mesh, values: mesh.nodes().map(f).collect() }
    }

    pub fn mesh(&self) -> &Mesh {
        &self.mesh
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn scaled(&self, c: f64) -> Self {
        self.map(|v| c * v)
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        DiscreteFunction { mesh: self.mesh, values: self.values.iter().map(|&v| f(v)).collect() }
    }

    /// Pointwise combination with another function on the same mesh.
    pub fn zip_with(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        self.check_mesh(other)?;
        Ok(DiscreteFunction {
            mesh: self.mesh,
            values: self.values.iter().zip(&other.values).map(|(&x, &y)| f(x, y)).collect(),
        })
    }

    pub fn check_mesh(&self, other: &Self) -> Result<()> {
        if self.mesh != other.mesh || self.values.len() != other.values.len() {
            return Err(Error::MeshMismatch);
        }
        Ok(())
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Largest pointwise difference to `other`.
    pub fn max_abs_diff(&self, other: &Self) -> Result<f64> {
        self.check_mesh(other)?;
        Ok(self.values.iter().zip(&other.values).fold(0.0, |m, (x, y)| m.max((x - y).abs())))
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|&v| v == 0.0)
    }

    /// Index and value of the first node where `u_i <= 0`, if any.
    pub fn first_nonpositive(&self) -> Option<(usize, f64)> {
        self.values.iter().copied().enumerate().find(|&(_, v)| !(v > 0.0))
    }

    /// Piecewise-linear interpolant (zero at both endpoints) sampled on `target`.
    pub fn interpolate_to(&self, target: Mesh) -> Self {
        let h = self.mesh.h();
        let n = self.values.len();
        let at = |k: usize| if k == 0 || k > n { 0.0 } else { self.values[k - 1] };
        DiscreteFunction::from_fn(target, |x| {
            let s = ((x - self.mesh.a()) / h).clamp(0.0, (n + 1) as f64);
            let k = (s.floor() as usize).min(n);
            let frac = s - k as f64;
            (1.0 - frac) * at(k) + frac * at(k + 1)
        })
    }
}

/// Midpoint rule `h * sum g(u_i)`; the zero boundary values contribute nothing.
pub fn integrate(u: &DiscreteFunction, g: impl Fn(f64) -> f64) -> Result<f64> {
    let mut acc = 0.0;
    for (i, &v) in u.values().iter().enumerate() {
        let gv = g(v);
        if !gv.is_finite() {
            return Err(Error::NonFiniteValue { node: i });
        }
        acc += gv;
    }
    Ok(u.mesh().h() * acc)
}

/// `|u|_beta = (h * sum |u_i|^beta)^(1/beta)`.
pub fn norm_lp(u: &DiscreteFunction, beta: f64) -> Result<f64> {
    if !(beta > 0.0) {
        return Err(Error::InvalidExponent(beta));
    }
    let s = integrate(u, |v| v.abs().powf(beta))?;
    Ok(s.powf(1.0 / beta))
}
