//! Model parameters, the forward-variance curve, and the variance kernel.

use std::io::Read;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::special::{frac_derivative, gamma_fn, mittag_leffler, rgamma, FracGrid};

/// Parameters of the rough Heston model
///
/// dX = −½V dt + √V dB,  V_t = V₀ + (1/Γ(α)) ∫₀ᵗ (t−s)^{α−1} [λ(θ − V_s) ds + ν√V_s dW_s],
/// with d⟨B, W⟩ = ρ dt. The roughness order is α = H + ½; α = ½ is the
/// hyper-rough limit and α = 1 recovers the classical Heston model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub alpha: f64,
    pub lambda: f64,
    pub theta: f64,
    pub nu: f64,
    pub rho: f64,
    pub v0: f64,
}

impl ModelParams {
    pub fn new(alpha: f64, lambda: f64, theta: f64, nu: f64, rho: f64, v0: f64) -> Result<Self> {
        let p = ModelParams {
            alpha,
            lambda,
            theta,
            nu,
            rho,
            v0,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha >= 0.5 && self.alpha <= 1.0) {
            return Err(Error::param(
                "alpha",
                format!("must lie in [0.5, 1], got {}", self.alpha),
            ));
        }
        if !(self.lambda >= 0.0 && self.lambda.is_finite()) {
            return Err(Error::param("lambda", format!("must be >= 0, got {}", self.lambda)));
        }
        if !(self.theta > 0.0 && self.theta.is_finite()) {
            return Err(Error::param("theta", format!("must be > 0, got {}", self.theta)));
        }
        if !(self.nu >= 0.0 && self.nu.is_finite()) {
            return Err(Error::param("nu", format!("must be >= 0, got {}", self.nu)));
        }
        if !(self.rho > -1.0 && self.rho < 1.0) {
            return Err(Error::param("rho", format!("must lie in (-1, 1), got {}", self.rho)));
        }
        if !(self.v0 > 0.0 && self.v0.is_finite()) {
            return Err(Error::param("v0", format!("must be > 0, got {}", self.v0)));
        }
        Ok(())
    }

    /// Hurst exponent H = α − ½.
    pub fn hurst(&self) -> f64 {
        self.alpha - 0.5
    }

    /// √(1 − ρ²).
    pub fn rho_bar(&self) -> f64 {
        (1.0 - self.rho * self.rho).sqrt()
    }

    pub fn with_alpha(mut self, alpha: f64) -> Result<Self> {
        self.alpha = alpha;
        self.validate()?;
        Ok(self)
    }

    pub fn with_rho(mut self, rho: f64) -> Result<Self> {
        self.rho = rho;
        self.validate()?;
        Ok(self)
    }

    pub fn with_lambda(mut self, lambda: f64) -> Result<Self> {
        self.lambda = lambda;
        self.validate()?;
        Ok(self)
    }
}

/// A tabulated initial forward-variance curve ξ₀(u), linearly interpolated
/// and held flat beyond the last tenor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VarianceCurve {
    u: Vec<f64>,
    xi: Vec<f64>,
}

impl VarianceCurve {
    pub fn new(u: Vec<f64>, xi: Vec<f64>) -> Result<Self> {
        if u.is_empty() || u.len() != xi.len() {
            return Err(Error::domain("variance curve needs matching, non-empty columns"));
        }
        if u[0] != 0.0 {
            return Err(Error::domain("variance curve must start at u = 0"));
        }
        if u.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::domain("variance curve tenors must be strictly increasing"));
        }
        if xi.iter().any(|x| !(*x > 0.0 && x.is_finite())) {
            return Err(Error::domain("variance curve values must be positive"));
        }
        Ok(VarianceCurve { u, xi })
    }

    pub fn flat(v: f64) -> Result<Self> {
        Self::new(vec![0.0], vec![v])
    }

    /// Sample a function of time on `grid` (values must be positive).
    pub fn from_fn(grid: &FracGrid, f: impl Fn(f64) -> f64) -> Result<Self> {
        let u = grid.nodes();
        let xi = u.iter().map(|&t| f(t)).collect();
        Self::new(u, xi)
    }

    pub fn tenors(&self) -> &[f64] {
        &self.u
    }

    pub fn values(&self) -> &[f64] {
        &self.xi
    }

    pub fn eval(&self, t: f64) -> f64 {
        let n = self.u.len();
        if t <= 0.0 || n == 1 {
            return self.xi[0];
        }
        if t >= self.u[n - 1] {
            return self.xi[n - 1];
        }
        let k = self.u.partition_point(|&x| x <= t);
        let (u0, u1) = (self.u[k - 1], self.u[k]);
        let w = (t - u0) / (u1 - u0);
        self.xi[k - 1] * (1.0 - w) + self.xi[k] * w
    }

    /// Read a two-column CSV `(u, xi)` with a header row.
    pub fn from_csv_reader<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(true)
            .trim(csv::Trim::All)
            .from_reader(reader);
        let mut u = Vec::new();
        let mut xi = Vec::new();
        for (i, rec) in rdr.records().enumerate() {
            let rec = rec?;
            if rec.len() != 2 {
                return Err(Error::Config {
                    line: i + 2,
                    reason: format!("expected 2 columns, found {}", rec.len()),
                });
            }
            let parse = |s: &str| {
                s.parse::<f64>().map_err(|e| Error::Config {
                    line: i + 2,
                    reason: format!("bad number `{s}`: {e}"),
                })
            };
            u.push(parse(&rec[0])?);
            xi.push(parse(&rec[1])?);
        }
        Self::new(u, xi)
    }

    pub fn from_csv_path(path: &Path) -> Result<Self> {
        Self::from_csv_reader(std::fs::File::open(path)?)
    }

    pub fn write_csv<W: std::io::Write>(&self, w: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(w);
        wtr.write_record(["u", "xi"])?;
        for (u, x) in self.u.iter().zip(&self.xi) {
            wtr.write_record([u.to_string(), x.to_string()])?;
        }
        wtr.flush()?;
        Ok(())
    }
}

/// E(V_t) = V₀ − (V₀ − θ)(1 − E_{α,1}(−λt^α)).
pub fn expected_variance(params: &ModelParams, t: f64) -> Result<f64> {
    if !(t >= 0.0) {
        return Err(Error::domain(format!("time must be non-negative, got {t}")));
    }
    if t == 0.0 || params.lambda == 0.0 {
        return Ok(params.v0);
    }
    let z = -params.lambda * t.powf(params.alpha);
    // 1 − E_{α,1}(z) = −z E_{α,α+1}(z), the latter avoids cancellation for small |z|
    let one_minus = if z.abs() <= 1.0 {
        -z * mittag_leffler(params.alpha, params.alpha + 1.0, z)?
    } else {
        1.0 - mittag_leffler(params.alpha, 1.0, z)?
    };
    Ok(params.v0 - (params.v0 - params.theta) * one_minus)
}

/// The variance kernel κ(x) = ν x^{α−1} E_{α,α}(−λx^α), the resolvent that
/// turns the mean-reverting equation for V into V_t = ξ₀(t) + ∫κ(t−s)√V_s dW_s.
pub fn resolvent_kernel(params: &ModelParams, x: f64) -> Result<f64> {
    if !(x > 0.0) {
        return Err(Error::domain(format!("kernel lag must be positive, got {x}")));
    }
    let a = params.alpha;
    let ml = if params.lambda == 0.0 {
        rgamma(a)
    } else {
        mittag_leffler(a, a, -params.lambda * x.powf(a))?
    };
    Ok(params.nu * x.powf(a - 1.0) * ml)
}

/// ∫₀ˣ κ(s) ds = ν x^α E_{α,α+1}(−λx^α) = (ν/λ)(1 − E_{α,1}(−λx^α)).
pub fn kernel_integral(params: &ModelParams, x: f64) -> Result<f64> {
    if !(x >= 0.0) {
        return Err(Error::domain(format!("kernel lag must be non-negative, got {x}")));
    }
    if x == 0.0 {
        return Ok(0.0);
    }
    let a = params.alpha;
    let xa = x.powf(a);
    if params.lambda == 0.0 {
        return Ok(params.nu * xa * rgamma(a + 1.0));
    }
    let z = -params.lambda * xa;
    if z.abs() <= 1.0 {
        Ok(params.nu * xa * mittag_leffler(a, a + 1.0, z)?)
    } else {
        Ok(params.nu / params.lambda * (1.0 - mittag_leffler(a, 1.0, z)?))
    }
}

/// Time-dependent mean-reversion level θ(t) = (1/λ) D^α(ξ₀ − V₀)(t) + ξ₀(t)
/// that makes the model consistent with a given initial variance curve.
pub fn theta_from_curve(params: &ModelParams, curve: &VarianceCurve, grid: &FracGrid) -> Result<Vec<f64>> {
    if params.lambda <= 0.0 {
        return Err(Error::domain("fitting theta(t) requires lambda > 0"));
    }
    let xi: Vec<f64> = grid.nodes().iter().map(|&t| curve.eval(t)).collect();
    let excess: Vec<f64> = xi.iter().map(|x| x - params.v0).collect();
    let d = if params.alpha == 1.0 {
        // ordinary derivative
        let h = grid.step();
        let n = grid.n_steps;
        let mut out = vec![0.0; n + 1];
        out[0] = (-3.0 * excess[0] + 4.0 * excess[1] - excess[2]) / (2.0 * h);
        for k in 1..n {
            out[k] = (excess[k + 1] - excess[k - 1]) / (2.0 * h);
        }
        out[n] = (3.0 * excess[n] - 4.0 * excess[n - 1] + excess[n - 2]) / (2.0 * h);
        out
    } else {
        frac_derivative(&excess, grid, params.alpha)?
    };
    Ok(d.iter().zip(&xi).map(|(d, x)| d / params.lambda + x).collect())
}

/// Γ(α), exposed for callers that build kernels by hand.
pub fn gamma_alpha(params: &ModelParams) -> f64 {
    gamma_fn(params.alpha).expect("alpha is positive")
}
