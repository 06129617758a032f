//! Log moment generating functions assembled from Riccati solutions, and the
//! scaled small-time cumulant generating function Λ̄(p).

use std::io::Write;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::ModelParams;
use crate::riccati::{explosion_hint, explosion_time, solve_adams, solve_series, RiccatiRhs, SeriesSolution};
use crate::special::{frac_integral, frac_integral_at_end, gamma_ratio, FracGrid, Scalar};

/// log E(e^{pX_t}); `finite` is false when the Riccati solution exploded before t.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MgfValue<S> {
    pub log_mgf: S,
    pub p: S,
    pub t: f64,
    pub finite: bool,
}

/// log E(e^{pX_t}) = V₀·I^{1−α}f(p,·)(t) + λθ·I¹f(p,·)(t) with f from an
/// `n_steps` Adams solve of the full Riccati equation.
pub fn log_mgf<S: Scalar>(params: &ModelParams, p: S, t: f64, n_steps: usize) -> Result<MgfValue<S>> {
    if !(t > 0.0) {
        return Err(Error::domain(format!("horizon must be positive, got {t}")));
    }
    if n_steps < 64 {
        return Err(Error::domain(format!("log-mgf needs at least 64 steps, got {n_steps}")));
    }
    let grid = FracGrid::new(t, n_steps)?;
    let sol = solve_adams(&RiccatiRhs::full(params, p), params.alpha, &grid)?;
    if !sol.is_complete() {
        return Ok(MgfValue {
            log_mgf: S::from_f64(f64::INFINITY),
            p,
            t,
            finite: false,
        });
    }
    let rough = frac_integral_at_end(&sol.values, &grid, 1.0 - params.alpha)?;
    let mut value = rough * params.v0;
    if params.lambda != 0.0 {
        value += frac_integral_at_end(&sol.values, &grid, 1.0)? * (params.lambda * params.theta);
    }
    Ok(MgfValue {
        log_mgf: value,
        p,
        t,
        finite: true,
    })
}

/// A convex cumulant generating function on an open interval (p₋, p₊),
/// returning +∞ outside.
pub trait Cgf: Sync {
    fn lambda_bar(&self, p: f64) -> f64;
    fn p_minus(&self) -> f64;
    fn p_plus(&self) -> f64;
}

/// Λ(p, 1) = I^{1−α}ψ(p, ·)(1) as a power series in p:
/// Λ(p,1) = Σ aₙ(1) Γ(αn+1)/Γ(αn+2−α) p^{n+1}, using aₙ(p) = aₙ(1)p^{n+1}
/// for the driftless equation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SeriesCgf {
    pub v0: f64,
    pub alpha: f64,
    /// kₙ, coefficient of p^{n+1} in Λ(p, 1) (index 0 holds k₁)
    pub coeffs: Vec<f64>,
    /// estimated radius of convergence in p
    pub radius: f64,
}

impl SeriesCgf {
    pub fn new(params: &ModelParams, n_terms: usize) -> Result<Self> {
        let s = solve_series(&RiccatiRhs::driftless(params, 1.0), params.alpha, n_terms)?;
        let a = params.alpha;
        let coeffs: Vec<f64> = s
            .coeffs
            .iter()
            .enumerate()
            .map(|(i, c)| {
                let n = (i + 1) as f64;
                c * gamma_ratio(a * n + 1.0, 1.0 - a)
            })
            .collect();
        // the p-series radius is governed by the nearer critical moment, which
        // the t-series of ψ(1, ·) sees through τ = t^α
        let radius = s.radius_tau;
        Ok(SeriesCgf {
            v0: params.v0,
            alpha: a,
            coeffs,
            radius,
        })
    }

    /// Λ(p, 1) for complex p.
    pub fn lambda_complex(&self, p: Complex64) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for c in self.coeffs.iter().rev() {
            acc = acc * p + *c;
        }
        acc * p * p
    }

    /// Λ(p, 1) for real p (no domain check).
    pub fn lambda(&self, p: f64) -> f64 {
        let mut acc = 0.0;
        for c in self.coeffs.iter().rev() {
            acc = acc * p + c;
        }
        acc * p * p
    }
}

impl Cgf for SeriesCgf {
    fn lambda_bar(&self, p: f64) -> f64 {
        if p <= self.p_minus() || p >= self.p_plus() {
            return f64::INFINITY;
        }
        self.v0 * self.lambda(p)
    }

    fn p_minus(&self) -> f64 {
        -crate::riccati::SERIES_SAFETY * self.radius
    }

    fn p_plus(&self) -> f64 {
        crate::riccati::SERIES_SAFETY * self.radius
    }
}

/// Monotone piecewise-cubic Hermite interpolant (Fritsch-Carlson) on a uniform grid.
#[derive(Debug, Clone, PartialEq)]
pub struct MonotoneCubic {
    x0: f64,
    h: f64,
    y: Vec<f64>,
    d: Vec<f64>,
}

impl MonotoneCubic {
    pub fn new(x0: f64, h: f64, y: Vec<f64>) -> Result<Self> {
        let n = y.len();
        if n < 2 || !(h > 0.0) {
            return Err(Error::domain(
                "monotone cubic needs at least two nodes and a positive step",
            ));
        }
        let delta: Vec<f64> = y.windows(2).map(|w| (w[1] - w[0]) / h).collect();
        let mut d = vec![0.0; n];
        if n == 2 {
            d[0] = delta[0];
            d[1] = delta[0];
        } else {
            for k in 1..n - 1 {
                d[k] = if delta[k - 1] * delta[k] <= 0.0 {
                    0.0
                } else {
                    // harmonic mean (equal spacing)
                    2.0 * delta[k - 1] * delta[k] / (delta[k - 1] + delta[k])
                };
            }
            d[0] = end_slope(delta[0], delta[1]);
            d[n - 1] = end_slope(delta[n - 2], delta[n - 3]);
        }
        Ok(MonotoneCubic { x0, h, y, d })
    }

    pub fn x_max(&self) -> f64 {
        self.x0 + self.h * (self.y.len() - 1) as f64
    }

    fn locate(&self, x: f64) -> (usize, f64) {
        let n = self.y.len();
        let u = ((x - self.x0) / self.h).max(0.0);
        let k = (u.floor() as usize).min(n - 2);
        (k, u - k as f64)
    }

    pub fn eval(&self, x: f64) -> f64 {
        let (k, s) = self.locate(x);
        let (y0, y1) = (self.y[k], self.y[k + 1]);
        let (d0, d1) = (self.d[k] * self.h, self.d[k + 1] * self.h);
        let s2 = s * s;
        let s3 = s2 * s;
        (2.0 * s3 - 3.0 * s2 + 1.0) * y0 + (s3 - 2.0 * s2 + s) * d0 + (-2.0 * s3 + 3.0 * s2) * y1 + (s3 - s2) * d1
    }

    pub fn derivative(&self, x: f64) -> f64 {
        let (k, s) = self.locate(x);
        let (y0, y1) = (self.y[k], self.y[k + 1]);
        let (d0, d1) = (self.d[k] * self.h, self.d[k + 1] * self.h);
        let s2 = s * s;
        ((6.0 * s2 - 6.0 * s) * y0
            + (3.0 * s2 - 4.0 * s + 1.0) * d0
            + (-6.0 * s2 + 6.0 * s) * y1
            + (3.0 * s2 - 2.0 * s) * d1)
            / self.h
    }
}

fn end_slope(d0: f64, d1: f64) -> f64 {
    // three-point end condition, limited to preserve monotonicity
    let s = (3.0 * d0 - d1) / 2.0;
    if s * d0 <= 0.0 {
        0.0
    } else if d0 * d1 <= 0.0 && s.abs() > 3.0 * d0.abs() {
        3.0 * d0
    } else {
        s
    }
}

/// One branch σ ∈ {+1, −1} of Λ(σ, s) = I^{1−α}ψ(σ, ·)(s).
#[derive(Debug, Clone)]
pub struct LambdaBranch {
    pub sign: f64,
    pub t_star: f64,
    alpha: f64,
    series: SeriesSolution<f64>,
    /// series used alone below `blend_lo`, table alone above `blend_hi`
    blend_lo: f64,
    blend_hi: f64,
    table: MonotoneCubic,
    /// start of the fitted wing Λ ≈ C(T* − s)^{−(2α−1)} + D
    pub wing_start: f64,
    pub wing_c: f64,
    pub wing_d: f64,
}

impl LambdaBranch {
    fn build(params: &ModelParams, sign: f64, n_steps: usize) -> Result<Self> {
        let alpha = params.alpha;
        let rhs = RiccatiRhs::driftless(params, sign);
        let series = solve_series(&rhs, alpha, 200)?;
        let hint = explosion_hint(&rhs, alpha)?;
        let t_star = explosion_time(&rhs, alpha, hint, n_steps)?;
        if !t_star.is_finite() {
            return Err(Error::domain(format!("no explosion found for the p = {sign} branch")));
        }
        let grid = FracGrid::new(t_star, n_steps)?;
        let h = grid.step();
        let sol = solve_adams(&rhs, alpha, &grid)?;
        let delta_res = 20.0 * h;
        let k_cut = (((t_star - delta_res) / h).floor() as usize).min(sol.values.len() - 1);
        if k_cut < 8 {
            return Err(Error::domain("explosion too early for the table resolution"));
        }
        let sub = FracGrid::new(k_cut as f64 * h, k_cut)?;
        let lam = frac_integral(&sol.values[..=k_cut], &sub, 1.0 - alpha)?;
        let table = MonotoneCubic::new(0.0, h, lam)?;

        let wing_start = sub.t_max;
        let delta = t_star - wing_start;
        let l_c = table.eval(wing_start);
        let slope = table.derivative(wing_start);
        let beta = 2.0 * alpha - 1.0;
        let (wing_c, wing_d) = if beta > 1e-12 {
            let c = slope * delta.powf(beta + 1.0) / beta;
            (c, l_c - c * delta.powf(-beta))
        } else {
            let c = slope * delta;
            (c, l_c + c * delta.ln())
        };

        let r_t = series.radius_tau.powf(1.0 / alpha);
        let mut blend_hi = (0.8f64).powf(1.0 / alpha) * r_t;
        if !(blend_hi < 0.9 * wing_start) {
            blend_hi = 0.9 * wing_start;
        }
        let blend_lo = (0.7f64 / 0.8).powf(1.0 / alpha) * blend_hi;
        Ok(LambdaBranch {
            sign,
            t_star,
            alpha,
            series,
            blend_lo,
            blend_hi,
            table,
            wing_start,
            wing_c,
            wing_d,
        })
    }

    fn series_value(&self, s: f64) -> f64 {
        self.series.frac_integral(s, 1.0 - self.alpha)
    }

    /// Λ(σ, s); +∞ for s ≥ T*(σ).
    pub fn eval(&self, s: f64) -> f64 {
        if s <= 0.0 {
            return 0.0;
        }
        if s >= self.t_star {
            return f64::INFINITY;
        }
        if s <= self.blend_lo {
            return self.series_value(s);
        }
        if s < self.blend_hi {
            let u = (s - self.blend_lo) / (self.blend_hi - self.blend_lo);
            let w = u * u * (3.0 - 2.0 * u);
            return (1.0 - w) * self.series_value(s) + w * self.table.eval(s);
        }
        if s <= self.wing_start {
            return self.table.eval(s);
        }
        let beta = 2.0 * self.alpha - 1.0;
        let gap = self.t_star - s;
        if beta > 1e-12 {
            self.wing_c * gap.powf(-beta) + self.wing_d
        } else {
            -self.wing_c * gap.ln() + self.wing_d
        }
    }
}

/// Dense representation of Λ(±1, s) on [0, T*(±1)), giving Λ̄ on (p₋, p₊) through
/// the space-time scaling Λ(p, 1) = |p|^{2H/α} Λ(sgn p, |p|^{1/α}).
///
/// Values come from the fractional power series where it converges, blended
/// into an Adams + product-quadrature table, and continued by a fitted wing law
/// in the last few grid cells before the explosion time.
#[derive(Debug, Clone)]
pub struct LambdaTable {
    pub alpha: f64,
    pub v0: f64,
    pub n_steps: usize,
    pub plus: LambdaBranch,
    pub minus: LambdaBranch,
}

impl LambdaTable {
    /// Build the table for the driftless small-time equation (λ is ignored).
    pub fn build(params: &ModelParams, n_steps: usize) -> Result<Self> {
        if n_steps < 100 {
            return Err(Error::domain("lambda table needs at least 100 steps"));
        }
        Ok(LambdaTable {
            alpha: params.alpha,
            v0: params.v0,
            n_steps,
            plus: LambdaBranch::build(params, 1.0, n_steps)?,
            minus: LambdaBranch::build(params, -1.0, n_steps)?,
        })
    }

    /// Λ(σ, s) for σ = sign.
    pub fn lambda(&self, sign: f64, s: f64) -> f64 {
        if sign >= 0.0 {
            self.plus.eval(s)
        } else {
            self.minus.eval(s)
        }
    }

    /// Λ(p, 1), without the V₀ factor.
    pub fn lambda_unit(&self, p: f64) -> f64 {
        if p == 0.0 {
            return 0.0;
        }
        let a = self.alpha;
        let q = p.abs();
        let s = q.powf(1.0 / a);
        q.powf((2.0 * a - 1.0) / a) * self.lambda(p.signum(), s)
    }

    /// Write `s, lambda_plus, lambda_minus` rows on a uniform grid of `rows` points.
    pub fn write_csv<W: Write>(&self, w: W, rows: usize) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(w);
        wtr.write_record(["s", "lambda_plus", "lambda_minus"])?;
        let s_max = self.plus.t_star.max(self.minus.t_star);
        for k in 0..rows {
            let s = s_max * k as f64 / rows as f64;
            wtr.write_record([fmt_num(s), fmt_num(self.plus.eval(s)), fmt_num(self.minus.eval(s))])?;
        }
        wtr.flush()?;
        Ok(())
    }
}

pub(crate) fn fmt_num(x: f64) -> String {
    if x.is_finite() {
        // adding zero maps −0 to +0
        format!("{:.12e}", x + 0.0)
    } else if x > 0.0 {
        "inf".into()
    } else if x < 0.0 {
        "-inf".into()
    } else {
        "nan".into()
    }
}

/// Λ̄(p) = V₀ |p|^{2H/α} Λ(sgn p, |p|^{1/α}); +∞ outside (p₋, p₊).
pub fn lambda_bar(table: &LambdaTable, v0: f64, p: f64) -> f64 {
    let l = table.lambda_unit(p);
    if l.is_finite() {
        v0 * l
    } else {
        f64::INFINITY
    }
}

impl Cgf for LambdaTable {
    fn lambda_bar(&self, p: f64) -> f64 {
        lambda_bar(self, self.v0, p)
    }

    fn p_minus(&self) -> f64 {
        -self.minus.t_star.powf(self.alpha)
    }

    fn p_plus(&self) -> f64 {
        self.plus.t_star.powf(self.alpha)
    }
}
