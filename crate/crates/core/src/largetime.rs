//! Large-time behaviour: the stable root U₁(p) of the Riccati quadratic, the
//! limiting cumulant generating function V(p) = λθU₁(p), its Legendre transform,
//! the large-time smile and the first correction U₂.

use std::io::Write;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::mgf::fmt_num;
use crate::model::ModelParams;
use crate::smalltime::golden_max;
use crate::special::gamma_fn;

fn check_assumptions(params: &ModelParams) -> Result<()> {
    if !(params.lambda > 0.0) {
        return Err(Error::domain(format!(
            "large-time limit needs λ > 0, got {}",
            params.lambda
        )));
    }
    if params.rho > 0.0 {
        return Err(Error::domain(format!(
            "large-time limit needs ρ ≤ 0, got {}",
            params.rho
        )));
    }
    Ok(())
}

/// Discriminant (λ − pρν)² − ν²(p² − p) of H(p, w) = ½(p²−p) + (pρν−λ)w + ½ν²w².
pub fn discriminant(params: &ModelParams, p: f64) -> f64 {
    let b = params.lambda - p * params.rho * params.nu;
    b * b - params.nu * params.nu * (p * p - p)
}

/// H(p, w).
pub fn riccati_quadratic(params: &ModelParams, p: f64, w: f64) -> f64 {
    0.5 * (p * p - p) + (p * params.rho * params.nu - params.lambda) * w + 0.5 * params.nu * params.nu * w * w
}

/// Real-root interval [p, p̄] where the discriminant is non-negative:
/// p̄, p = ((ν − 2λρ) ± √(4λ² + ν² − 4λρν)) / (2ν(1 − ρ²)).
pub fn domain_endpoints(params: &ModelParams) -> Result<(f64, f64)> {
    check_assumptions(params)?;
    let (l, n, r) = (params.lambda, params.nu, params.rho);
    let s = (4.0 * l * l + n * n - 4.0 * l * r * n).sqrt();
    let den = 2.0 * n * (1.0 - r * r);
    Ok(((n - 2.0 * l * r - s) / den, (n - 2.0 * l * r + s) / den))
}

fn in_domain(params: &ModelParams, p: f64) -> Result<bool> {
    let (lo, hi) = domain_endpoints(params)?;
    let slack = 1e-12 * (1.0 + p.abs());
    Ok(p >= lo - slack && p <= hi + slack)
}

/// Smallest root U₁(p) = (λ − pρν − √disc)/ν² of H(p, ·).
pub fn u1(params: &ModelParams, p: f64) -> Result<f64> {
    if !in_domain(params, p)? {
        return Err(Error::domain(format!("p = {p} outside the real-root interval")));
    }
    let b = params.lambda - p * params.rho * params.nu;
    let sq = discriminant(params, p).max(0.0).sqrt();
    let nu2 = params.nu * params.nu;
    // cancellation-free form when b > 0: (b − √D)/ν² = (p² − p)/(b + √D)
    Ok(if b > 0.0 {
        (p * p - p) / (b + sq)
    } else {
        (b - sq) / nu2
    })
}

/// V(p) = λθU₁(p) on the real-root interval, +∞ outside.
pub fn limiting_cgf(params: &ModelParams, p: f64) -> f64 {
    match u1(params, p) {
        Ok(u) => params.lambda * params.theta * u,
        Err(_) => f64::INFINITY,
    }
}

/// V*(x) = sup_p (px − V(p)) and its maximiser.
pub fn rate_function_large(params: &ModelParams, x: f64) -> Result<(f64, f64)> {
    let (lo, hi) = domain_endpoints(params)?;
    let (p, v) = golden_max(|p| p * x - limiting_cgf(params, p), lo, hi, 1e-12);
    Ok((v, p))
}

/// Large-time, large-moneyness smile σ∞(x) = √((ω₁/2)(1 + ω₂ρx + √((ω₂x + ρ)² + ρ̄²))).
pub fn smile_infinity(params: &ModelParams, x: f64) -> Result<f64> {
    check_assumptions(params)?;
    let (l, th, n, r) = (params.lambda, params.theta, params.nu, params.rho);
    let rb2 = 1.0 - r * r;
    let k = 2.0 * l - r * n;
    let w1 = 4.0 * l * th / (n * n * rb2) * ((k * k + n * n * rb2).sqrt() - k);
    let w2 = n / (l * th);
    let v = 0.5 * w1 * (1.0 + w2 * r * x + ((w2 * x + r).powi(2) + rb2).sqrt());
    Ok(v.sqrt())
}

/// First correction U₂(p) = −U₁(p)/((λ − U₁(p)ν² − pρν)Γ(1−α)) in f(p,t) ≈ U₁ + U₂t^{−α}.
pub fn u2(params: &ModelParams, p: f64) -> Result<f64> {
    let u = u1(params, p)?;
    if params.alpha >= 1.0 {
        return Ok(0.0);
    }
    let den = params.lambda - u * params.nu * params.nu - p * params.rho * params.nu;
    if den.abs() < 1e-12 {
        return Err(Error::Degenerate(format!("U₂ denominator vanishes at p = {p}")));
    }
    Ok(-u / (den * gamma_fn(1.0 - params.alpha)?))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum RiccatiCase {
    /// no real root: explosion
    A,
    /// real roots, none attracting from 0: explosion
    B,
    /// positive stable root, solution increases to it
    C,
    /// non-positive constant term, solution decreases to the non-positive root
    D,
}

impl RiccatiCase {
    pub fn is_explosive(self) -> bool {
        matches!(self, RiccatiCase::A | RiccatiCase::B)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CaseReport {
    pub case: RiccatiCase,
    pub explosive: bool,
    pub discriminant: f64,
    /// constant term ½(p² − p)
    pub c0: f64,
    /// linear coefficient pρν − λ
    pub c1: f64,
    pub u1: Option<f64>,
}

/// Classify the full Riccati equation at real p.
pub fn classify_case(params: &ModelParams, p: f64) -> CaseReport {
    let c0 = 0.5 * (p * p - p);
    let c1 = p * params.rho * params.nu - params.lambda;
    let disc = discriminant(params, p);
    let nu2 = params.nu * params.nu;
    let root = if disc >= 0.0 {
        let b = -c1;
        let sq = disc.sqrt();
        Some(if b > 0.0 {
            (p * p - p) / (b + sq)
        } else {
            (b - sq) / nu2
        })
    } else {
        None
    };
    let case = if c0 <= 0.0 {
        RiccatiCase::D
    } else if disc < 0.0 {
        RiccatiCase::A
    } else if c1 < 0.0 {
        RiccatiCase::C
    } else {
        RiccatiCase::B
    };
    CaseReport {
        case,
        explosive: case.is_explosive(),
        discriminant: disc,
        c0,
        c1,
        u1: root,
    }
}

/// One row of the large-time export.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LargeTimeRow {
    pub x: f64,
    pub v_star: f64,
    pub sigma_infinity: f64,
}

pub fn large_time_rows(params: &ModelParams, xs: &[f64]) -> Result<Vec<LargeTimeRow>> {
    xs.iter()
        .map(|&x| {
            Ok(LargeTimeRow {
                x,
                v_star: rate_function_large(params, x)?.0,
                sigma_infinity: smile_infinity(params, x)?,
            })
        })
        .collect()
}

pub fn write_large_time_csv<W: Write>(rows: &[LargeTimeRow], w: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    wtr.write_record(["x", "V_star", "sigma_infinity"])?;
    for r in rows {
        wtr.write_record([fmt_num(r.x), fmt_num(r.v_star), fmt_num(r.sigma_infinity)])?;
    }
    wtr.flush()?;
    Ok(())
}
