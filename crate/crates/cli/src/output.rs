//! Report and data-file writers.

use std::fs;
use std::io::Write;
use std::path::Path;

use serde_json::{json, Value};

use fplap_core::DiscreteFunction;

use crate::config::RunConfig;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// The discrete operator and energy conventions every report refers to.
pub const OPERATOR_CONVENTION: &str = "(A u)_i = (2/h) [ sum_j w_ij |u_i - u_j|^(p-2) (u_i - u_j) + h zeta_i |u_i|^(p-2) u_i ], \
w_ij = h^2 / |x_i - x_j|^(1+sp), zeta_i = ((x_i - a)^(-sp) + (b - x_i)^(-sp)) / (sp); \
energy I(u) = (1/p) ||u||^p - lambda h sum G_q(u_i) - h sum |u_i|^(alpha+1) / (alpha+1); \
lambda_1 = min ||u||^p / |u|_p^p";

/// Wrap a command's results with the resolved config, version and conventions.
pub fn report(command: &str, cfg: &RunConfig, results: Value) -> Value {
    json!({
        "command": command,
        "version": VERSION,
        "operator_convention": OPERATOR_CONVENTION,
        "config": cfg,
        "results": results,
    })
}

pub fn write_json(path: &Path, value: &Value) -> std::io::Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(std::io::Error::other)?;
    text.push('\n');
    fs::write(path, text)
}

/// CSV with a header line; floats use the shortest round-trip representation.
pub fn write_csv(path: &Path, header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> std::io::Result<()> {
    let mut f = std::io::BufWriter::new(fs::File::create(path)?);
    writeln!(f, "{}", header.join(","))?;
    for row in rows {
        writeln!(f, "{}", row.join(","))?;
    }
    f.flush()
}

/// Two whitespace-separated columns, no header, for plotting tools.
pub fn write_plot(path: &Path, points: impl IntoIterator<Item = (f64, f64)>) -> std::io::Result<()> {
    let mut f = std::io::BufWriter::new(fs::File::create(path)?);
    for (x, y) in points {
        writeln!(f, "{} {}", num(x), num(y))?;
    }
    f.flush()
}

/// Shortest round-trip text for `x`, in exponent form when very small or large.
pub fn num(x: f64) -> String {
    let a = x.abs();
    if x == 0.0 || !x.is_finite() || (1e-4..1e15).contains(&a) {
        x.to_string()
    } else {
        format!("{x:e}")
    }
}

pub fn function_rows(u: &DiscreteFunction) -> Vec<Vec<String>> {
    u.mesh().nodes().zip(u.values()).map(|(x, v)| vec![num(x), num(*v)]).collect()
}

pub fn function_points(u: &DiscreteFunction) -> Vec<(f64, f64)> {
    u.mesh().nodes().zip(u.values().iter().copied()).collect()
}

/// Read a `x,u` CSV as written by [`write_csv`] for a solution.
pub fn read_function_csv(path: &Path) -> Result<(Vec<f64>, Vec<f64>), String> {
    let text = fs::read_to_string(path).map_err(|e| format!("cannot read {}: {e}", path.display()))?;
    let mut xs = Vec::new();
    let mut us = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if i == 0 || line.is_empty() {
            continue;
        }
        let (x, u) = line.split_once(',').ok_or_else(|| format!("line {}: expected `x,u`", i + 1))?;
        let x: f64 = x.trim().parse().map_err(|_| format!("line {}: bad x", i + 1))?;
        let u: f64 = u.trim().parse().map_err(|_| format!("line {}: bad u", i + 1))?;
        xs.push(x);
        us.push(u);
    }
    Ok((xs, us))
}
