//! Small-time large deviations: rate function, asymptotic smile, its series
//! expansion around the money, saddlepoint quantities and the moderate regime.

use std::io::Write;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::mgf::{fmt_num, Cgf};
use crate::model::ModelParams;
use crate::riccati::{explosion_hint, explosion_time, solve_adams, solve_psi1, RiccatiRhs};
use crate::special::{frac_integral_at_end, gamma_fn, FracGrid};

/// Adams steps used for explosion-time searches.
pub const EXPLOSION_STEPS: usize = 2000;

/// Critical moments p± = ±T*(±1)^α of the driftless small-time equation.
pub fn critical_moments(params: &ModelParams) -> Result<(f64, f64)> {
    critical_moments_with(params, EXPLOSION_STEPS)
}

pub fn critical_moments_with(params: &ModelParams, n_steps: usize) -> Result<(f64, f64)> {
    if !(params.nu > 0.0) {
        return Err(Error::domain("critical moments need ν > 0"));
    }
    let t = |sign: f64| -> Result<f64> {
        let rhs = RiccatiRhs::driftless(params, sign);
        let hint = explosion_hint(&rhs, params.alpha)?;
        explosion_time(&rhs, params.alpha, hint, n_steps)
    };
    let tp = t(1.0)?;
    let tm = t(-1.0)?;
    Ok((-tm.powf(params.alpha), tp.powf(params.alpha)))
}

/// Golden-section maximisation of a unimodal function on (lo, hi).
pub(crate) fn golden_max<F: FnMut(f64) -> f64>(mut f: F, lo: f64, hi: f64, tol: f64) -> (f64, f64) {
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let (mut a, mut b) = (lo, hi);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    for _ in 0..200 {
        if b - a <= tol {
            break;
        }
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
    }
    if fc >= fd {
        (c, fc)
    } else {
        (d, fd)
    }
}

/// I(x) together with the maximiser p*(x).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RatePoint {
    pub x: f64,
    pub rate: f64,
    pub p_star: f64,
}

/// I(x) = sup_{p∈(p₋,p₊)} (px − Λ̄(p)) by golden section (bracket tolerance 1e-10).
pub fn rate_function<C: Cgf + ?Sized>(cgf: &C, x: f64) -> RatePoint {
    if x == 0.0 {
        return RatePoint {
            x,
            rate: 0.0,
            p_star: 0.0,
        };
    }
    let (lo, hi) = if x > 0.0 {
        (0.0, cgf.p_plus())
    } else {
        (cgf.p_minus(), 0.0)
    };
    let (p, v) = golden_max(|p| p * x - cgf.lambda_bar(p), lo, hi, 1e-10);
    RatePoint {
        x,
        rate: v.max(0.0),
        p_star: p,
    }
}

/// The rate function sampled on a grid of log-moneyness values.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RateFunction {
    pub p_minus: f64,
    pub p_plus: f64,
    pub points: Vec<RatePoint>,
}

impl RateFunction {
    pub fn tabulate<C: Cgf + ?Sized>(cgf: &C, xs: &[f64]) -> Self {
        RateFunction {
            p_minus: cgf.p_minus(),
            p_plus: cgf.p_plus(),
            points: xs.iter().map(|&x| rate_function(cgf, x)).collect(),
        }
    }

    /// Write `x, I, p_star, sigma_hat` rows.
    pub fn write_csv<W: Write>(&self, w: W, v0: f64) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(w);
        wtr.write_record(["x", "I", "p_star", "sigma_hat"])?;
        for pt in &self.points {
            let s = if pt.x == 0.0 {
                Ok(v0.sqrt())
            } else {
                vol_from_rate(pt.x, pt.rate)
            };
            wtr.write_record([
                fmt_num(pt.x),
                fmt_num(pt.rate),
                fmt_num(pt.p_star),
                s.map(fmt_num).unwrap_or_else(|_| "nan".into()),
            ])?;
        }
        wtr.flush()?;
        Ok(())
    }
}

/// σ̂ = |x|/√(2I).
pub fn vol_from_rate(x: f64, rate: f64) -> Result<f64> {
    if !(rate > 0.0) {
        return Err(Error::Degenerate(format!("rate function vanishes at x = {x}")));
    }
    Ok(x.abs() / (2.0 * rate).sqrt())
}

/// Below this |x| the smile is taken from the quadratic series expansion.
pub const SERIES_CROSSOVER: f64 = 0.01;

/// Leading-order small-time implied volatility σ̂(x), using the around-the-money
/// series for |x| < 0.01 and the Fenchel-Legendre transform elsewhere.
pub fn asymptotic_smile<C: Cgf + ?Sized>(cgf: &C, params: &ModelParams, x: f64) -> Result<f64> {
    if x.abs() < SERIES_CROSSOVER {
        return Ok(smile_series_coeffs(params).eval(x));
    }
    transform_smile(cgf, params, x)
}

/// σ̂(x) from the Fenchel-Legendre transform alone (√V₀ at x = 0).
pub fn transform_smile<C: Cgf + ?Sized>(cgf: &C, params: &ModelParams, x: f64) -> Result<f64> {
    if x == 0.0 {
        return Ok(params.v0.sqrt());
    }
    vol_from_rate(x, rate_function(cgf, x).rate)
}

/// Level, skew and convexity of σ̂ at the money.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SmileSeries {
    pub sigma0: f64,
    pub skew: f64,
    pub convexity: f64,
}

impl SmileSeries {
    pub fn eval(&self, x: f64) -> f64 {
        self.sigma0 + self.skew * x + self.convexity * x * x
    }
}

/// σ̂(x) = √V₀ + ρν x/(2Γ(2+α)√V₀)
///      + ν²[Γ(1+2α) + 2ρ²Γ(1+α)²(2 − 3Γ(2+2α)/Γ(2+α)²)] x² / (8V₀^{3/2}Γ(1+α)²Γ(2+2α)) + O(x³).
pub fn smile_series_coeffs(params: &ModelParams) -> SmileSeries {
    let a = params.alpha;
    let (v0, nu, rho) = (params.v0, params.nu, params.rho);
    let g = |x: f64| gamma_fn(x).expect("gamma argument is positive");
    let g1a = g(1.0 + a);
    let g2a = g(2.0 + a);
    let g22a = g(2.0 + 2.0 * a);
    let sigma0 = v0.sqrt();
    let skew = rho * nu / (2.0 * g2a * sigma0);
    let convexity = nu * nu * (g(1.0 + 2.0 * a) + 2.0 * rho * rho * g1a * g1a * (2.0 - 3.0 * g22a / (g2a * g2a)))
        / (8.0 * v0.powf(1.5) * g1a * g1a * g22a);
    SmileSeries {
        sigma0,
        skew,
        convexity,
    }
}

/// Saddlepoint quantities at log-moneyness x.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SaddleData {
    pub x: f64,
    pub p_star: f64,
    pub rate: f64,
    /// Λ̄''(p*)
    pub curvature: f64,
    /// A(x) = 1/((p*)²√Λ̄''(p*))
    pub a: f64,
    /// A₁(x) = 2A(x)I(x)^{3/2}/|x|
    pub a1: f64,
    /// Σ₁(x) = x² log A₁(x)/(2I(x)²); formal, σ² ≈ σ̂² + t^{2H}Σ₁
    pub sigma1: f64,
    /// V₀·I^{1−α}ψ₁(p*, ·)(1)
    pub g: f64,
    /// I¹ψ(p*, ·)(1)
    pub f1: f64,
    pub formal: bool,
}

/// Saddlepoint data: p* from the rate function, Λ̄'' by central differences
/// with step 1e-4·p₊, and G, F₁ from `n_steps` Adams solves at p*.
pub fn saddle_data<C: Cgf + ?Sized>(cgf: &C, params: &ModelParams, x: f64, n_steps: usize) -> Result<SaddleData> {
    if x == 0.0 {
        return Err(Error::domain("saddlepoint data needs x ≠ 0"));
    }
    let rp = rate_function(cgf, x);
    let p = rp.p_star;
    let d = 1e-4 * cgf.p_plus();
    let curvature = (cgf.lambda_bar(p + d) - 2.0 * cgf.lambda_bar(p) + cgf.lambda_bar(p - d)) / (d * d);
    if !(curvature > 0.0) || !curvature.is_finite() {
        return Err(Error::NumericalFailure {
            what: format!("non-positive curvature {curvature} of the cumulant function at p* = {p}"),
            last_good: 0,
            t: 0.0,
        });
    }
    let a = 1.0 / (p * p * curvature.sqrt());
    let a1 = 2.0 * a * rp.rate.powf(1.5) / x.abs();
    let sigma1 = x * x * a1.ln() / (2.0 * rp.rate * rp.rate);

    let grid = FracGrid::new(1.0, n_steps)?;
    let psi = solve_adams(&RiccatiRhs::driftless(params, p), params.alpha, &grid)?;
    if !psi.is_complete() {
        return Err(Error::domain(format!("ψ({p}, ·) explodes before t = 1")));
    }
    let psi1 = solve_psi1(&psi, params, p, &grid)?;
    let g = params.v0 * frac_integral_at_end(&psi1.values, &grid, 1.0 - params.alpha)?;
    let f1 = frac_integral_at_end(&psi.values, &grid, 1.0)?;
    Ok(SaddleData {
        x,
        p_star: p,
        rate: rp.rate,
        curvature,
        a,
        a1,
        sigma1,
        g,
        f1,
        formal: true,
    })
}

/// Formal higher-order vol √(σ̂² + t^{2H}Σ₁).
pub fn formal_corrected_vol(data: &SaddleData, params: &ModelParams, t: f64) -> Result<f64> {
    let s = vol_from_rate(data.x, data.rate)?;
    let v = s * s + t.powf(2.0 * params.hurst()) * data.sigma1;
    if v <= 0.0 {
        return Err(Error::Degenerate(
            "formal correction drives the variance negative".into(),
        ));
    }
    Ok(v.sqrt())
}

/// Moderate-deviations rate x²/(2V₀), valid for β ∈ (2H/3, H).
pub fn moderate_rate(params: &ModelParams, x: f64, beta: f64) -> Result<f64> {
    let h = params.hurst();
    if !(h > 0.0 && h < 0.5) {
        return Err(Error::domain(format!("moderate regime needs H ∈ (0, 1/2), got {h}")));
    }
    let (lo, hi) = (2.0 * h / 3.0, h);
    if !(beta > lo && beta < hi) {
        return Err(Error::domain(format!(
            "β = {beta} outside the admissible interval ({lo}, {hi})"
        )));
    }
    Ok(x * x / (2.0 * params.v0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mgf::{LambdaTable, SeriesCgf};
    use approx::assert_relative_eq;

    fn table_params() -> ModelParams {
        ModelParams::new(0.75, 0.0, 0.04, 0.15, -0.02, 0.04).unwrap()
    }

    #[test]
    fn golden_section_finds_parabola_peak() {
        let (p, v) = golden_max(|p| -(p - 1.3) * (p - 1.3) + 2.0, -5.0, 5.0, 1e-10);
        assert!((p - 1.3).abs() < 1e-7);
        assert_relative_eq!(v, 2.0, max_relative = 1e-14);
    }

    #[test]
    fn rate_basics() {
        let cgf = SeriesCgf::new(&table_params(), 15).unwrap();
        let r0 = rate_function(&cgf, 0.0);
        assert_eq!((r0.rate, r0.p_star), (0.0, 0.0));
        let rp = rate_function(&cgf, 0.05);
        let rm = rate_function(&cgf, -0.05);
        assert!(rp.p_star > 0.0 && rm.p_star < 0.0);
        assert!(rp.rate > 0.0 && rm.rate > 0.0);
    }

    #[test]
    fn rate_is_convex_with_monotone_maximiser() {
        let p = table_params();
        let table = LambdaTable::build(&p, 1000).unwrap();
        let xs: Vec<f64> = (-20..=20).map(|k| k as f64 * 0.05).collect();
        let rf = RateFunction::tabulate(&table, &xs);
        for w in rf.points.windows(3) {
            assert!(w[0].rate - 2.0 * w[1].rate + w[2].rate >= -1e-9);
        }
        for w in rf.points.windows(2) {
            assert!(w[1].p_star >= w[0].p_star);
        }
    }

    #[test]
    fn small_x_rate_is_gaussian() {
        let p = table_params();
        let cgf = SeriesCgf::new(&p, 40).unwrap();
        let x = 1e-3;
        let r = rate_function(&cgf, x).rate;
        assert!(((r / (x * x)) * 2.0 * p.v0 - 1.0).abs() < 0.02);
    }

    #[test]
    fn series_coefficients() {
        let p = table_params();
        let s = smile_series_coeffs(&p);
        assert_eq!(s.sigma0, 0.2);
        let c = smile_series_coeffs(&p.with_rho(0.0).unwrap());
        assert_eq!(c.skew, 0.0);
        let classic = smile_series_coeffs(&p.with_alpha(1.0).unwrap());
        assert!((classic.skew - p.rho * p.nu / (4.0 * 0.2)).abs() < 1e-15);
    }

    #[test]
    fn flip_symmetry() {
        let p = table_params();
        let q = p.with_rho(0.02).unwrap();
        let a = SeriesCgf::new(&p, 40).unwrap();
        let b = SeriesCgf::new(&q, 40).unwrap();
        let s1 = asymptotic_smile(&a, &p, 0.07).unwrap();
        let s2 = asymptotic_smile(&b, &q, -0.07).unwrap();
        assert!((s1 - s2).abs() < 1e-9);
    }

    #[test]
    fn saddle_data_is_positive() {
        let p = table_params();
        let cgf = SeriesCgf::new(&p, 40).unwrap();
        for x in [-0.1, -0.05, 0.05, 0.1] {
            let d = saddle_data(&cgf, &p, x, 400).unwrap();
            assert!(d.a > 0.0 && d.curvature > 0.0);
            assert!(d.formal);
        }
        assert!(saddle_data(&cgf, &p, 0.0, 400).is_err());
    }

    #[test]
    fn formal_correction_moves_vol_down_at_positive_x() {
        let p = table_params();
        let cgf = SeriesCgf::new(&p, 40).unwrap();
        let d = saddle_data(&cgf, &p, 0.1, 400).unwrap();
        let lead = vol_from_rate(0.1, d.rate).unwrap();
        let corr = formal_corrected_vol(&d, &p, 5e-5).unwrap();
        assert!(corr < lead);
    }

    #[test]
    fn moderate_regime() {
        let p = table_params();
        assert_eq!(moderate_rate(&p, 0.0, 0.2).unwrap(), 0.0);
        assert_relative_eq!(moderate_rate(&p, 0.1, 0.2).unwrap(), 0.125, max_relative = 1e-15);
        assert!(moderate_rate(&p, 0.1, 0.1).is_err());
        assert!(moderate_rate(&p, 0.1, 0.3).is_err());
    }
}
