//! Run configuration: a flat `key = value` text format layered on named presets.
//!
//! ```text
//! # comments start with '#'
//! alpha = 0.75
//! rho = -0.02
//! maturities = 0.00005, 0.005
//! ```
//!
//! Unknown keys and malformed values are rejected with the offending line number.

use std::fmt::Write as _;
use std::path::PathBuf;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::ModelParams;
use crate::pricing::QuadratureSpec;

/// Model parameters plus every command-specific option.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub params: ModelParams,
    /// maturities for `smile`, `mc` and the evolved-curve horizon
    pub maturities: Vec<f64>,
    /// log-moneyness grid x_min, x_min + x_step, …, x_max
    pub x_min: f64,
    pub x_max: f64,
    pub x_step: f64,
    /// points per side of the p grid in `rate` and `largetime`
    pub p_points: usize,
    /// series terms for the leading-order smile
    pub series_terms: usize,
    /// series terms used to locate the saddlepoint for the higher-order smile
    pub saddle_terms: usize,
    /// Adams steps for the Λ table and explosion times
    pub table_steps: usize,
    pub quad: QuadratureSpec,
    pub mc: bool,
    pub paths: usize,
    pub steps: usize,
    pub seed: u64,
    pub antithetic: bool,
    /// binary sample dump written by `mc`
    pub samples: Option<PathBuf>,
    /// add the long-horizon Adams cross-check to `largetime`
    pub verify: bool,
    pub verify_horizon: f64,
    pub verify_steps: usize,
    /// forward variance curve CSV (`u,xi`) for `calibrate-theta` and `calibrate-rho`
    pub variance_curve: Option<PathBuf>,
    pub theta_horizon: f64,
    pub theta_steps: usize,
    /// target third moments m₃(T) for `calibrate-rho`
    pub skew_maturities: Vec<f64>,
    pub skew_moments: Vec<f64>,
}

/// Named parameter sets shipped with the binary.
pub const PRESETS: [&str; 4] = ["table", "fig3", "fig4", "fig5"];

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            params: ModelParams {
                alpha: 0.75,
                lambda: 0.0,
                theta: 0.04,
                nu: 0.15,
                rho: -0.02,
                v0: 0.04,
            },
            maturities: vec![0.00005, 0.005],
            x_min: -0.1,
            x_max: 0.1,
            x_step: 0.02,
            p_points: 40,
            series_terms: 15,
            saddle_terms: 60,
            table_steps: 2000,
            quad: QuadratureSpec::default(),
            mc: true,
            paths: 10_000,
            steps: 500,
            seed: 2024,
            antithetic: false,
            samples: None,
            verify: false,
            verify_horizon: 50.0,
            verify_steps: 4000,
            variance_curve: None,
            theta_horizon: 1.0,
            theta_steps: 200,
            skew_maturities: Vec::new(),
            skew_moments: Vec::new(),
        }
    }
}

impl RunConfig {
    /// A named preset: `table` (the numerical table), `fig3` (its T = 0.00005
    /// smile on a finer grid), `fig4` (T = 0.005 with α = 0.6) or `fig5` (H = 0).
    pub fn preset(name: &str) -> Result<Self> {
        let base = RunConfig::default();
        let cfg = match name {
            "table" => base,
            "fig3" => RunConfig {
                maturities: vec![0.00005],
                x_min: -0.2,
                x_max: 0.2,
                x_step: 0.01,
                ..base
            },
            "fig4" => RunConfig {
                params: ModelParams {
                    alpha: 0.6,
                    ..base.params
                },
                maturities: vec![0.005],
                ..base
            },
            "fig5" => RunConfig {
                params: ModelParams {
                    alpha: 0.5,
                    nu: 0.2,
                    rho: -0.1,
                    ..base.params
                },
                maturities: vec![1.0],
                x_min: -0.3,
                x_max: 0.3,
                x_step: 0.05,
                quad: QuadratureSpec {
                    n_points: 1600,
                    u_max: 40.0,
                },
                mc: false,
                ..base
            },
            other => {
                return Err(Error::Config {
                    line: 0,
                    reason: format!("unknown preset `{other}` (expected one of {})", PRESETS.join(", ")),
                })
            }
        };
        Ok(cfg)
    }

    /// Apply `key = value` lines on top of `self`.
    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| Error::Config {
                line: i + 1,
                reason: format!("expected `key = value`, got `{line}`"),
            })?;
            self.set(key.trim(), value.trim())
                .map_err(|reason| Error::Config { line: i + 1, reason })?;
        }
        Ok(())
    }

    /// Apply a single `key=value` override (line 0 in error messages).
    pub fn apply_override(&mut self, assignment: &str) -> Result<()> {
        let (key, value) = assignment.split_once('=').ok_or_else(|| Error::Config {
            line: 0,
            reason: format!("override `{assignment}` is not of the form key=value"),
        })?;
        self.set(key.trim(), value.trim())
            .map_err(|reason| Error::Config { line: 0, reason })
    }

    fn set(&mut self, key: &str, value: &str) -> std::result::Result<(), String> {
        match key {
            "alpha" => self.params.alpha = real(key, value)?,
            "lambda" => self.params.lambda = real(key, value)?,
            "theta" => self.params.theta = real(key, value)?,
            "nu" => self.params.nu = real(key, value)?,
            "rho" => self.params.rho = real(key, value)?,
            "v0" => self.params.v0 = real(key, value)?,
            "maturities" => self.maturities = reals(key, value)?,
            "x_min" => self.x_min = real(key, value)?,
            "x_max" => self.x_max = real(key, value)?,
            "x_step" => self.x_step = real(key, value)?,
            "p_points" => self.p_points = count(key, value)?,
            "series_terms" => self.series_terms = count(key, value)?,
            "saddle_terms" => self.saddle_terms = count(key, value)?,
            "table_steps" => self.table_steps = count(key, value)?,
            "quad_points" => self.quad.n_points = count(key, value)?,
            "quad_umax" => self.quad.u_max = real(key, value)?,
            "mc" => self.mc = flag(key, value)?,
            "paths" => self.paths = count(key, value)?,
            "steps" => self.steps = count(key, value)?,
            "seed" => {
                self.seed = value
                    .parse()
                    .map_err(|_| format!("`{key}` expects an unsigned integer, got `{value}`"))?
            }
            "antithetic" => self.antithetic = flag(key, value)?,
            "samples" => self.samples = Some(PathBuf::from(value)),
            "verify" => self.verify = flag(key, value)?,
            "verify_horizon" => self.verify_horizon = real(key, value)?,
            "verify_steps" => self.verify_steps = count(key, value)?,
            "variance_curve" => self.variance_curve = Some(PathBuf::from(value)),
            "theta_horizon" => self.theta_horizon = real(key, value)?,
            "theta_steps" => self.theta_steps = count(key, value)?,
            "skew_maturities" => self.skew_maturities = reals(key, value)?,
            "skew_moments" => self.skew_moments = reals(key, value)?,
            _ => return Err(format!("unknown key `{key}`")),
        }
        Ok(())
    }

    /// Check cross-field invariants once all layers are applied.
    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        self.quad.validate()?;
        if self.maturities.iter().any(|t| !(*t > 0.0)) {
            return Err(Error::param("maturities", "must be positive"));
        }
        if !(self.x_step > 0.0) || !(self.x_max >= self.x_min) {
            return Err(Error::param("x_step", "grid needs x_step > 0 and x_max >= x_min"));
        }
        if self.p_points < 2 {
            return Err(Error::param("p_points", "must be at least 2"));
        }
        if self.series_terms < 2 || self.saddle_terms < 2 {
            return Err(Error::param("series_terms", "must be at least 2"));
        }
        Ok(())
    }

    /// The log-moneyness grid, rounded to 12 decimals so that grid points print
    /// cleanly and x = 0 is exactly zero when it lies on the grid.
    pub fn x_grid(&self) -> Vec<f64> {
        let n = ((self.x_max - self.x_min) / self.x_step + 1e-9).floor() as usize;
        (0..=n)
            .map(|i| {
                let x = ((self.x_min + i as f64 * self.x_step) * 1e12).round() / 1e12;
                if x == 0.0 {
                    0.0
                } else {
                    x
                }
            })
            .collect()
    }

    /// Render the configuration back into the key-value format.
    pub fn to_text(&self) -> String {
        let p = &self.params;
        let list = |v: &[f64]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(", ");
        let mut s = String::new();
        let _ = writeln!(s, "alpha = {}", p.alpha);
        let _ = writeln!(s, "lambda = {}", p.lambda);
        let _ = writeln!(s, "theta = {}", p.theta);
        let _ = writeln!(s, "nu = {}", p.nu);
        let _ = writeln!(s, "rho = {}", p.rho);
        let _ = writeln!(s, "v0 = {}", p.v0);
        let _ = writeln!(s, "maturities = {}", list(&self.maturities));
        let _ = writeln!(s, "x_min = {}", self.x_min);
        let _ = writeln!(s, "x_max = {}", self.x_max);
        let _ = writeln!(s, "x_step = {}", self.x_step);
        let _ = writeln!(s, "p_points = {}", self.p_points);
        let _ = writeln!(s, "series_terms = {}", self.series_terms);
        let _ = writeln!(s, "saddle_terms = {}", self.saddle_terms);
        let _ = writeln!(s, "table_steps = {}", self.table_steps);
        let _ = writeln!(s, "quad_points = {}", self.quad.n_points);
        let _ = writeln!(s, "quad_umax = {}", self.quad.u_max);
        let _ = writeln!(s, "mc = {}", self.mc);
        let _ = writeln!(s, "paths = {}", self.paths);
        let _ = writeln!(s, "steps = {}", self.steps);
        let _ = writeln!(s, "seed = {}", self.seed);
        let _ = writeln!(s, "antithetic = {}", self.antithetic);
        if let Some(path) = &self.samples {
            let _ = writeln!(s, "samples = {}", path.display());
        }
        let _ = writeln!(s, "verify = {}", self.verify);
        let _ = writeln!(s, "verify_horizon = {}", self.verify_horizon);
        let _ = writeln!(s, "verify_steps = {}", self.verify_steps);
        if let Some(path) = &self.variance_curve {
            let _ = writeln!(s, "variance_curve = {}", path.display());
        }
        let _ = writeln!(s, "theta_horizon = {}", self.theta_horizon);
        let _ = writeln!(s, "theta_steps = {}", self.theta_steps);
        if !self.skew_maturities.is_empty() {
            let _ = writeln!(s, "skew_maturities = {}", list(&self.skew_maturities));
            let _ = writeln!(s, "skew_moments = {}", list(&self.skew_moments));
        }
        s
    }
}

fn real(key: &str, value: &str) -> std::result::Result<f64, String> {
    value
        .parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| format!("`{key}` expects a finite number, got `{value}`"))
}

fn reals(key: &str, value: &str) -> std::result::Result<Vec<f64>, String> {
    value.split(',').map(|v| real(key, v.trim())).collect()
}

fn count(key: &str, value: &str) -> std::result::Result<usize, String> {
    value
        .parse::<usize>()
        .map_err(|_| format!("`{key}` expects a non-negative integer, got `{value}`"))
}

fn flag(key: &str, value: &str) -> std::result::Result<bool, String> {
    match value {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => Err(format!("`{key}` expects true or false, got `{value}`")),
    }
}
