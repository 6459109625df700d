//! Discrete Gagliardo energy, its gradient (the discrete fractional
//! p-Laplacian) and the full functional `I_lambda`.
//!
//! With nodes `x_i` and cell width `h` the kernel weights are
//!
//! ```text
//! w_ij = h^2 / |x_i - x_j|^(1 + s p)      (i != j),   w_ii = 0
//! zeta_i = ((x_i - a)^(-s p) + (b - x_i)^(-s p)) / (s p)
//! ```
//!
//! `zeta_i` is the exact integral of the kernel over the complement of the
//! domain. The discrete energy
//!
//! ```text
//! E(u) = sum_{i<j} 2 w_ij |u_i - u_j|^p + 2 h sum_i zeta_i |u_i|^p
//! ```
//!
//! approximates the double integral over `R^2 \ (C Omega x C Omega)` and the
//! operator `A` satisfies `h <A u, v> = (1/p) dE(u)[v]`. The self-interaction
//! of each cell is dropped; it vanishes like `h^(p - s p)` under refinement.

use std::fs;
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::domain::{DiscreteFunction, Mesh};
use crate::error::{Error, Result};

/// Which problem is being solved: the full problem with the convex term
/// `u^alpha`, or the purely singular one without it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Full,
    PureSingular,
}

/// Parameters of `(-Delta_p)^s u = lambda u^-q + u^alpha` in one space dimension.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProblemParams {
    pub s: f64,
    pub p: f64,
    pub q: f64,
    pub alpha: f64,
    pub lambda: f64,
    pub mode: Mode,
}

/// Space dimension of the discretization.
pub const DIM: f64 = 1.0;

impl ProblemParams {
    pub fn new(s: f64, p: f64, q: f64, alpha: f64, lambda: f64, mode: Mode) -> Result<Self> {
        let params = ProblemParams { s, p, q, alpha, lambda, mode };
        params.validate()?;
        Ok(params)
    }

    /// Check the standing assumptions; the message names the violated one.
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParams(msg));
        if !(self.s > 0.0 && self.s < 1.0) {
            return bad(format!("requires s in (0, 1), got s = {}", self.s));
        }
        if !(self.p >= 2.0) || !self.p.is_finite() {
            return bad(format!("requires p >= 2, got p = {}", self.p));
        }
        if !(self.s * self.p < DIM) {
            return bad(format!("requires n > sp (n = 1), got sp = {}", self.s * self.p));
        }
        if !(self.q > 0.0 && self.q <= 1.0) {
            return bad(format!("requires 0 < q <= 1, got q = {}", self.q));
        }
        if !(self.lambda >= 0.0) || !self.lambda.is_finite() {
            return bad(format!("requires lambda >= 0, got lambda = {}", self.lambda));
        }
        if self.mode == Mode::Full {
            let upper = self.p_star() - 1.0;
            if !(self.alpha > self.p - 1.0 && self.alpha <= upper) {
                return bad(format!(
                    "requires p - 1 < alpha <= p*_s - 1 = {upper}, got alpha = {}",
                    self.alpha
                ));
            }
        }
        Ok(())
    }

    /// Critical Sobolev exponent `n p / (n - s p)`.
    pub fn p_star(&self) -> f64 {
        DIM * self.p / (DIM - self.s * self.p)
    }

    pub fn with_lambda(&self, lambda: f64) -> Self {
        ProblemParams { lambda, ..*self }
    }

    fn has_convex_term(&self) -> bool {
        self.mode == Mode::Full
    }
}

/// Precomputed pairwise weights and complement interactions.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelWeights {
    mesh: Mesh,
    s: f64,
    p: f64,
    /// Row-major `n x n`.
    w: Vec<f64>,
    zeta: Vec<f64>,
}

/// `|t|^(p-2) t`.
#[inline]
pub(crate) fn signed_pow(t: f64, p: f64) -> f64 {
    if p == 2.0 {
        t
    } else {
        t.abs().powf(p - 2.0) * t
    }
}

#[inline]
pub(crate) fn abs_pow(t: f64, p: f64) -> f64 {
    if p == 2.0 {
        t * t
    } else {
        t.abs().powf(p)
    }
}

/// `|t|^(p-2)`, the derivative of `signed_pow` up to the factor `p - 1`.
#[inline]
fn abs_pow_m2(t: f64, p: f64) -> f64 {
    if p == 2.0 {
        1.0
    } else {
        t.abs().powf(p - 2.0)
    }
}

/// Integral of `|x - y|^-(1 + sp)` over `y` outside `(a, b)`.
pub fn complement_interaction(a: f64, b: f64, x: f64, sp: f64) -> f64 {
    ((x - a).powf(-sp) + (b - x).powf(-sp)) / sp
}

/// Assemble the kernel weights on `mesh`.
pub fn build_kernel(mesh: Mesh, s: f64, p: f64) -> Result<KernelWeights> {
    if !(s > 0.0 && s < 1.0) {
        return Err(Error::InvalidParams(format!("requires s in (0, 1), got s = {s}")));
    }
    if !(p >= 2.0) {
        return Err(Error::InvalidParams(format!("requires p >= 2, got p = {p}")));
    }
    let sp = s * p;
    if !(sp < DIM) {
        return Err(Error::InvalidParams(format!("requires n > sp (n = 1), got sp = {sp}")));
    }
    let n = mesh.len();
    let h = mesh.h();
    let mut w = vec![0.0; n * n];
    for i in 0..n {
        for j in (i + 1)..n {
            // |x_i - x_j| = |i - j| h exactly on a uniform mesh
            let d = (j - i) as f64 * h;
            let wij = h * h / d.powf(1.0 + sp);
            w[i * n + j] = wij;
            w[j * n + i] = wij;
        }
    }
    let zeta = mesh.nodes().map(|x| complement_interaction(mesh.a(), mesh.b(), x, sp)).collect();
    Ok(KernelWeights { mesh, s, p, w, zeta })
}

impl KernelWeights {
    pub fn mesh(&self) -> &Mesh {
        &self.mesh
    }

    pub fn s(&self) -> f64 {
        self.s
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn len(&self) -> usize {
        self.mesh.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mesh.is_empty()
    }

    #[inline]
    pub fn weight(&self, i: usize, j: usize) -> f64 {
        self.w[i * self.mesh.len() + j]
    }

    pub fn weights(&self) -> &[f64] {
        &self.w
    }

    pub fn zeta(&self) -> &[f64] {
        &self.zeta
    }

    fn check(&self, u: &DiscreteFunction) -> Result<()> {
        if *u.mesh() != self.mesh {
            return Err(Error::MeshMismatch);
        }
        Ok(())
    }

    fn seminorm_raw(&self, u: &[f64]) -> f64 {
        let n = u.len();
        let h = self.mesh.h();
        let p = self.p;
        let mut pairs = 0.0;
        for i in 0..n {
            let row = &self.w[i * n..(i + 1) * n];
            let ui = u[i];
            let mut acc = 0.0;
            for j in (i + 1)..n {
                acc += row[j] * abs_pow(ui - u[j], p);
            }
            pairs += acc;
        }
        let exterior: f64 = u.iter().zip(&self.zeta).map(|(&ui, &z)| z * abs_pow(ui, p)).sum();
        2.0 * pairs + 2.0 * h * exterior
    }

    fn apply_raw(&self, u: &[f64], out: &mut [f64]) {
        let n = u.len();
        let h = self.mesh.h();
        let p = self.p;
        for i in 0..n {
            let row = &self.w[i * n..(i + 1) * n];
            let ui = u[i];
            let mut acc = 0.0;
            for j in 0..n {
                if j != i {
                    acc += row[j] * signed_pow(ui - u[j], p);
                }
            }
            out[i] = (2.0 / h) * (acc + h * self.zeta[i] * signed_pow(ui, p));
        }
    }

    /// Nodal Hessian of `(1/p) E` at `u`, scaled so that `h v^T H w` is the
    /// second derivative. For `p = 2` this is the operator matrix itself.
    pub fn seminorm_hessian(&self, u: &DiscreteFunction) -> Result<DMatrix<f64>> {
        self.check(u)?;
        let n = self.len();
        let h = self.mesh.h();
        let p = self.p;
        let c = 2.0 * (p - 1.0) / h;
        let v = u.values();
        let mut m = DMatrix::zeros(n, n);
        for i in 0..n {
            let mut diag = h * self.zeta[i] * abs_pow_m2(v[i], p);
            for j in 0..n {
                if j != i {
                    let e = self.weight(i, j) * abs_pow_m2(v[i] - v[j], p);
                    diag += e;
                    m[(i, j)] = -c * e;
                }
            }
            m[(i, i)] = c * diag;
        }
        Ok(m)
    }

    /// Matrix of the linear (`p = 2`) operator on this mesh, whatever `p` the
    /// kernel was built for. Off-diagonal entries are `-(2/h) w_ij`.
    pub fn linear_operator_matrix(&self) -> DMatrix<f64> {
        let n = self.len();
        let h = self.mesh.h();
        let mut m = DMatrix::zeros(n, n);
        for i in 0..n {
            let mut diag = h * self.zeta[i];
            for j in 0..n {
                if j != i {
                    let wij = self.weight(i, j);
                    diag += wij;
                    m[(i, j)] = -2.0 / h * wij;
                }
            }
            m[(i, i)] = 2.0 / h * diag;
        }
        m
    }
}

/// The discrete `||u||^p`.
pub fn seminorm_p(k: &KernelWeights, u: &DiscreteFunction) -> Result<f64> {
    k.check(u)?;
    Ok(k.seminorm_raw(u.values()))
}

/// The discrete fractional p-Laplacian.
pub fn apply_fplap(k: &KernelWeights, u: &DiscreteFunction) -> Result<DiscreteFunction> {
    k.check(u)?;
    let mut out = vec![0.0; u.len()];
    k.apply_raw(u.values(), &mut out);
    DiscreteFunction::new(*u.mesh(), out)
}

/// Primitive `G_q` of `x^-q`: `|x|^(1-q)/(1-q)` for `q < 1`, `ln|x|` for `q = 1`.
pub fn g_q(x: f64, q: f64) -> f64 {
    if q == 1.0 {
        x.abs().ln()
    } else {
        x.abs().powf(1.0 - q) / (1.0 - q)
    }
}

/// `I_lambda(u) = (1/p) ||u||^p - lambda int G_q(u) - 1/(alpha+1) int |u|^(alpha+1)`.
/// The last term is absent in pure singular mode.
pub fn energy(k: &KernelWeights, params: &ProblemParams, u: &DiscreteFunction) -> Result<f64> {
    k.check(u)?;
    let h = k.mesh.h();
    let v = u.values();
    let mut singular = 0.0;
    if params.lambda != 0.0 || params.q < 1.0 {
        for (i, &x) in v.iter().enumerate() {
            if params.q == 1.0 && x == 0.0 {
                return Err(Error::SingularLog { node: i });
            }
            singular += g_q(x, params.q);
        }
    }
    let convex = if params.has_convex_term() {
        v.iter().map(|x| x.abs().powf(params.alpha + 1.0)).sum::<f64>() / (params.alpha + 1.0)
    } else {
        0.0
    };
    Ok(k.seminorm_raw(v) / k.p - params.lambda * h * singular - h * convex)
}

/// Nodal residual `(A u)_i - lambda u_i^-q - u_i^alpha`; `h <g, v>` is the
/// derivative of the energy in direction `v`.
pub fn energy_gradient(
    k: &KernelWeights,
    params: &ProblemParams,
    u: &DiscreteFunction,
) -> Result<DiscreteFunction> {
    k.check(u)?;
    if let Some((node, value)) = u.first_nonpositive() {
        return Err(Error::NonPositiveValue { node, value });
    }
    let mut g = vec![0.0; u.len()];
    k.apply_raw(u.values(), &mut g);
    for (gi, &x) in g.iter_mut().zip(u.values()) {
        *gi -= params.lambda * x.powf(-params.q);
        if params.has_convex_term() {
            *gi -= x.powf(params.alpha);
        }
    }
    DiscreteFunction::new(*u.mesh(), g)
}

/// Nodal Hessian of the energy at a positive `u`. With `drop_concave` the
/// `-alpha u^(alpha-1)` diagonal is left out, which keeps the matrix positive
/// definite.
pub fn energy_hessian(
    k: &KernelWeights,
    params: &ProblemParams,
    u: &DiscreteFunction,
    drop_concave: bool,
) -> Result<DMatrix<f64>> {
    if let Some((node, value)) = u.first_nonpositive() {
        return Err(Error::NonPositiveValue { node, value });
    }
    let mut m = k.seminorm_hessian(u)?;
    for (i, &x) in u.values().iter().enumerate() {
        let mut d = params.lambda * params.q * x.powf(-params.q - 1.0);
        if params.has_convex_term() && !drop_concave {
            d -= params.alpha * x.powf(params.alpha - 1.0);
        }
        m[(i, i)] += d;
    }
    Ok(m)
}

/// Weak-form residual `max_i |g_i| h / max_i |(A u)_i| h`.
pub fn normalized_residual(
    k: &KernelWeights,
    params: &ProblemParams,
    u: &DiscreteFunction,
) -> Result<f64> {
    let g = energy_gradient(k, params, u)?;
    let au = apply_fplap(k, u)?;
    let scale = au.sup_norm().max(f64::MIN_POSITIVE);
    Ok(g.sup_norm() / scale)
}

// ---------------------------------------------------------------------------
// binary cache

const CACHE_MAGIC: &[u8; 8] = b"FPLKERN\0";
const CACHE_VERSION: u32 = 1;

/// File name under which the kernel for `(a, b, n, s, p)` is cached. The
/// floating-point keys are encoded by their bit patterns.
pub fn cache_file_name(mesh: &Mesh, s: f64, p: f64) -> String {
    format!(
        "kernel_{:016x}_{:016x}_{}_{:016x}_{:016x}.bin",
        mesh.a().to_bits(),
        mesh.b().to_bits(),
        mesh.len(),
        s.to_bits(),
        p.to_bits()
    )
}

/// Write `k` in the little-endian cache layout: magic, version, `a`, `b`, `n`,
/// `s`, `p`, the row-major weights, then `zeta`.
pub fn write_kernel<W: Write>(k: &KernelWeights, mut out: W) -> io::Result<()> {
    out.write_all(CACHE_MAGIC)?;
    out.write_all(&CACHE_VERSION.to_le_bytes())?;
    out.write_all(&k.mesh.a().to_le_bytes())?;
    out.write_all(&k.mesh.b().to_le_bytes())?;
    out.write_all(&(k.mesh.len() as u64).to_le_bytes())?;
    out.write_all(&k.s.to_le_bytes())?;
    out.write_all(&k.p.to_le_bytes())?;
    for v in k.w.iter().chain(&k.zeta) {
        out.write_all(&v.to_le_bytes())?;
    }
    Ok(())
}

fn read_f64<R: Read>(r: &mut R) -> io::Result<f64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(f64::from_le_bytes(b))
}

/// Read a kernel written by [`write_kernel`].
pub fn read_kernel<R: Read>(mut r: R) -> Result<KernelWeights> {
    let io_err = |e: io::Error| Error::Cache(e.to_string());
    let mut magic = [0u8; 8];
    r.read_exact(&mut magic).map_err(io_err)?;
    if &magic != CACHE_MAGIC {
        return Err(Error::Cache("bad magic".into()));
    }
    let mut ver = [0u8; 4];
    r.read_exact(&mut ver).map_err(io_err)?;
    let version = u32::from_le_bytes(ver);
    if version != CACHE_VERSION {
        return Err(Error::Cache(format!("unsupported version {version}")));
    }
    let a = read_f64(&mut r).map_err(io_err)?;
    let b = read_f64(&mut r).map_err(io_err)?;
    let mut nb = [0u8; 8];
    r.read_exact(&mut nb).map_err(io_err)?;
    let n = u64::from_le_bytes(nb) as usize;
    let s = read_f64(&mut r).map_err(io_err)?;
    let p = read_f64(&mut r).map_err(io_err)?;
    let mesh = Mesh::new(a, b, n).map_err(|e| Error::Cache(e.to_string()))?;
    let mut w = Vec::with_capacity(n * n);
    for _ in 0..n * n {
        w.push(read_f64(&mut r).map_err(io_err)?);
    }
    let mut zeta = Vec::with_capacity(n);
    for _ in 0..n {
        zeta.push(read_f64(&mut r).map_err(io_err)?);
    }
    Ok(KernelWeights { mesh, s, p, w, zeta })
}

/// Load the kernel from `dir` if cached there, otherwise build and store it.
pub fn load_or_build_kernel(dir: &Path, mesh: Mesh, s: f64, p: f64) -> Result<KernelWeights> {
    let path: PathBuf = dir.join(cache_file_name(&mesh, s, p));
    if let Ok(bytes) = fs::read(&path) {
        let k = read_kernel(bytes.as_slice())?;
        if k.mesh == mesh && k.s == s && k.p == p {
            return Ok(k);
        }
    }
    let k = build_kernel(mesh, s, p)?;
    fs::create_dir_all(dir).map_err(|e| Error::Cache(e.to_string()))?;
    let mut buf = Vec::with_capacity(8 * (k.w.len() + k.zeta.len()) + 64);
    write_kernel(&k, &mut buf).map_err(|e| Error::Cache(e.to_string()))?;
    fs::write(&path, buf).map_err(|e| Error::Cache(e.to_string()))?;
    Ok(k)
}
