//! Run configuration: defaults, an optional `key = value` file, then flags.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use thiserror::Error;

use fplap_core::domain::MIN_NODES;
use fplap_core::{Mode, ProblemParams};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    /// Line 0 refers to the file as a whole.
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("invalid value for `{field}`: {message}")]
    Validation { field: String, message: String },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub s: f64,
    pub p: f64,
    pub q: f64,
    pub alpha: f64,
    pub lambda: f64,
    pub mode: Mode,
    pub a: f64,
    pub b: f64,
    pub n: usize,
    pub out: PathBuf,
    pub seed: u64,
    /// Residual tolerance of the nonlinear solvers.
    pub tol: f64,
    pub eigen_tol: f64,
    pub max_iter: usize,
    pub starts: usize,
    pub delta: f64,
    /// Directions sampled for the fibering threshold estimate.
    pub samples: usize,
    pub lambda_min: f64,
    pub lambda_max: f64,
    pub grid: usize,
    pub bisection_steps: usize,
    /// Super-solution parameter for `monotone`; defaults to `lambda`.
    pub super_lambda: Option<f64>,
    pub kernel_cache: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            s: 0.4,
            p: 2.0,
            q: 0.5,
            alpha: 3.0,
            lambda: 1.0,
            mode: Mode::Full,
            a: 0.0,
            b: 1.0,
            n: 160,
            out: PathBuf::from("out"),
            seed: 0,
            tol: 1e-8,
            eigen_tol: 1e-11,
            max_iter: 10_000,
            starts: 8,
            delta: 0.5,
            samples: 100,
            lambda_min: 0.01,
            lambda_max: 10.0,
            grid: 20,
            bisection_steps: 20,
            super_lambda: None,
            kernel_cache: None,
        }
    }
}

fn parse_num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T, String> {
    value.parse().map_err(|_| format!("cannot parse `{value}` as a value for `{key}`"))
}

impl RunConfig {
    /// Set one field by its file key (`max_iter` and `max-iter` both work).
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), String> {
        let key = key.replace('-', "_");
        match key.as_str() {
            "s" => self.s = parse_num(&key, value)?,
            "p" => self.p = parse_num(&key, value)?,
            "q" => self.q = parse_num(&key, value)?,
            "alpha" => self.alpha = parse_num(&key, value)?,
            "lambda" => self.lambda = parse_num(&key, value)?,
            "mode" => {
                self.mode = match value {
                    "full" => Mode::Full,
                    "pure_singular" | "pure-singular" => Mode::PureSingular,
                    _ => return Err(format!("unknown mode `{value}` (expected full or pure_singular)")),
                }
            }
            "a" => self.a = parse_num(&key, value)?,
            "b" => self.b = parse_num(&key, value)?,
            "n" => self.n = parse_num(&key, value)?,
            "out" => self.out = PathBuf::from(value),
            "seed" => self.seed = parse_num(&key, value)?,
            "tol" => self.tol = parse_num(&key, value)?,
            "eigen_tol" => self.eigen_tol = parse_num(&key, value)?,
            "max_iter" => self.max_iter = parse_num(&key, value)?,
            "starts" => self.starts = parse_num(&key, value)?,
            "delta" => self.delta = parse_num(&key, value)?,
            "samples" => self.samples = parse_num(&key, value)?,
            "lambda_min" => self.lambda_min = parse_num(&key, value)?,
            "lambda_max" => self.lambda_max = parse_num(&key, value)?,
            "grid" => self.grid = parse_num(&key, value)?,
            "bisection_steps" => self.bisection_steps = parse_num(&key, value)?,
            "super_lambda" => self.super_lambda = Some(parse_num(&key, value)?),
            "kernel_cache" => self.kernel_cache = Some(PathBuf::from(value)),
            _ => return Err(format!("unknown key `{key}`")),
        }
        Ok(())
    }

    /// Apply the lines of a config file on top of `self`.
    pub fn apply_text(&mut self, text: &str) -> Result<(), ConfigError> {
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let (key, value) = content.split_once('=').ok_or_else(|| ConfigError::Parse {
                line,
                message: format!("expected `key = value`, found `{content}`"),
            })?;
            let (key, value) = (key.trim(), value.trim());
            if key.is_empty() || value.is_empty() {
                return Err(ConfigError::Parse { line, message: "empty key or value".into() });
            }
            self.set(key, value).map_err(|message| ConfigError::Parse { line, message })?;
        }
        Ok(())
    }

    pub fn params(&self) -> ProblemParams {
        ProblemParams { s: self.s, p: self.p, q: self.q, alpha: self.alpha, lambda: self.lambda, mode: self.mode }
    }

    /// Check every field; the error names the field and, for the problem
    /// parameters, the violated standing assumption.
    pub fn validate(&self) -> Result<(), ConfigError> {
        let bad = |field: &str, message: String| Err(ConfigError::Validation { field: field.into(), message });
        if let Err(e) = self.params().validate() {
            let message = match e {
                fplap_core::Error::InvalidParams(m) => m,
                other => other.to_string(),
            };
            let field = if message.contains("n > sp") || message.contains("s in") {
                "s"
            } else if message.contains("p >=") {
                "p"
            } else if message.contains("q") && !message.contains("alpha") {
                "q"
            } else if message.contains("lambda") {
                "lambda"
            } else {
                "alpha"
            };
            return bad(field, message);
        }
        if !(self.a.is_finite() && self.b.is_finite() && self.a < self.b) {
            return bad("b", format!("requires a < b, got a = {}, b = {}", self.a, self.b));
        }
        if self.n < MIN_NODES {
            return bad("n", format!("requires at least {MIN_NODES} interior nodes, got {}", self.n));
        }
        for (field, v) in [("tol", self.tol), ("eigen_tol", self.eigen_tol), ("delta", self.delta)] {
            if !(v > 0.0 && v.is_finite()) {
                return bad(field, format!("must be positive, got {v}"));
            }
        }
        if self.delta >= 1.0 {
            return bad("delta", format!("must be below 1, got {}", self.delta));
        }
        for (field, v) in [("max_iter", self.max_iter), ("starts", self.starts), ("samples", self.samples), ("grid", self.grid)] {
            if v == 0 {
                return bad(field, "must be at least 1".into());
            }
        }
        if !(self.lambda_min > 0.0) {
            return bad("lambda_min", format!("must be positive, got {}", self.lambda_min));
        }
        if !(self.lambda_max > self.lambda_min) || !self.lambda_max.is_finite() {
            return bad("lambda_max", format!("must exceed lambda_min = {}, got {}", self.lambda_min, self.lambda_max));
        }
        if let Some(l) = self.super_lambda {
            if !(l >= self.lambda) || !l.is_finite() {
                return bad("super_lambda", format!("must be at least lambda = {}, got {l}", self.lambda));
            }
        }
        Ok(())
    }
}

/// Defaults overridden by the file at `path`, validated.
pub fn load_config(path: &Path) -> Result<RunConfig, ConfigError> {
    let text = fs::read_to_string(path)
        .map_err(|e| ConfigError::Parse { line: 0, message: format!("cannot read {}: {e}", path.display()) })?;
    let mut cfg = RunConfig::default();
    cfg.apply_text(&text)?;
    cfg.validate()?;
    Ok(cfg)
}
