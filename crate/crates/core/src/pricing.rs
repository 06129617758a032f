//! Fourier pricing (Lewis half-line and shifted-contour forms), Black-Scholes
//! and Bachelier utilities, implied-volatility inversion and the H = 0 smile.
//!
//! Conventions: spot and forward equal 1, zero rates, strikes e^k.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc;

use crate::error::{Error, Result};
use crate::mgf::{log_mgf, Cgf};
use crate::model::ModelParams;
use crate::quadrature::GaussLegendre;
use crate::riccati::{solve_adams, solve_psi1, solve_series, solve_series_psi1, RiccatiRhs};
use crate::smalltime::{critical_moments, rate_function};
use crate::special::{frac_integral_at_end, FracGrid};

const SQRT_2PI: f64 = 2.506_628_274_631_000_7;

pub fn norm_cdf(x: f64) -> f64 {
    0.5 * erfc(-x / std::f64::consts::SQRT_2)
}

pub fn norm_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / SQRT_2PI
}

/// Gauss-Legendre rule on [0, u_max].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSpec {
    pub n_points: usize,
    pub u_max: f64,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        QuadratureSpec {
            n_points: 1600,
            u_max: 40.0,
        }
    }
}

impl QuadratureSpec {
    pub fn new(n_points: usize, u_max: f64) -> Result<Self> {
        let q = QuadratureSpec { n_points, u_max };
        q.validate()?;
        Ok(q)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_points < 16 {
            return Err(Error::param(
                "n_points",
                format!("must be at least 16, got {}", self.n_points),
            ));
        }
        if !(self.u_max > 0.0 && self.u_max.is_finite()) {
            return Err(Error::param("u_max", format!("must be positive, got {}", self.u_max)));
        }
        Ok(())
    }

    pub fn doubled(&self) -> Self {
        QuadratureSpec {
            n_points: 2 * self.n_points,
            u_max: self.u_max,
        }
    }

    fn nodes(&self) -> Vec<(f64, f64)> {
        GaussLegendre::new(self.n_points).on_interval(0.0, self.u_max).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OptionKind {
    Call,
    Put,
}

/// A European option quote with unit forward and zero rates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OptionQuote {
    pub price: f64,
    pub log_strike: f64,
    pub maturity: f64,
    pub kind: OptionKind,
}

impl OptionQuote {
    /// (lower, upper) no-arbitrage bounds.
    pub fn bounds(&self) -> (f64, f64) {
        let strike = self.log_strike.exp();
        match self.kind {
            OptionKind::Call => ((1.0 - strike).max(0.0), 1.0),
            OptionKind::Put => ((strike - 1.0).max(0.0), strike),
        }
    }
}

/// Black-Scholes price with unit forward.
pub fn bs_price(kind: OptionKind, k: f64, t: f64, sigma: f64) -> f64 {
    let sd = sigma * t.sqrt();
    let strike = k.exp();
    if sd <= 0.0 {
        return match kind {
            OptionKind::Call => (1.0 - strike).max(0.0),
            OptionKind::Put => (strike - 1.0).max(0.0),
        };
    }
    let d1 = -k / sd + 0.5 * sd;
    let d2 = d1 - sd;
    match kind {
        OptionKind::Call => norm_cdf(d1) - strike * norm_cdf(d2),
        OptionKind::Put => strike * norm_cdf(-d2) - norm_cdf(-d1),
    }
}

/// ∂price/∂σ (identical for calls and puts).
pub fn bs_vega(k: f64, t: f64, sigma: f64) -> f64 {
    let sd = sigma * t.sqrt();
    let d1 = -k / sd + 0.5 * sd;
    norm_pdf(d1) * t.sqrt()
}

/// Black-Scholes implied volatility by Newton on the log of the out-of-the-money
/// price, safeguarded by a bisection bracket.
pub fn implied_vol(quote: &OptionQuote) -> Result<f64> {
    let (lo_b, hi_b) = quote.bounds();
    let (k, t) = (quote.log_strike, quote.maturity);
    if !(t > 0.0) {
        return Err(Error::domain(format!("maturity must be positive, got {t}")));
    }
    if !(quote.price > lo_b && quote.price < hi_b) {
        return Err(Error::domain(format!(
            "price {} outside the no-arbitrage interval ({lo_b}, {hi_b})",
            quote.price
        )));
    }
    // work with the out-of-the-money option, whose price carries full relative precision
    let strike = k.exp();
    let (kind, target) = match quote.kind {
        OptionKind::Call if k < 0.0 => (OptionKind::Put, quote.price - 1.0 + strike),
        OptionKind::Put if k > 0.0 => (OptionKind::Call, quote.price + 1.0 - strike),
        other => (other, quote.price),
    };
    if !(target > 0.0) {
        return Err(Error::domain("price indistinguishable from intrinsic value"));
    }
    let ln_target = target.ln();
    let f = |s: f64| bs_price(kind, k, t, s);

    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    let mut guard = 0;
    while f(hi) < target {
        lo = hi;
        hi *= 2.0;
        guard += 1;
        if guard > 60 {
            return Err(Error::domain("implied volatility bracket not found"));
        }
    }
    let mut s = if k != 0.0 {
        (2.0 * k.abs() / t).sqrt()
    } else {
        target * (2.0 * std::f64::consts::PI / t).sqrt()
    };
    if !(s > lo && s < hi) {
        s = 0.5 * (lo + hi);
    }
    for _ in 0..200 {
        let p = f(s);
        if p > target {
            hi = s;
        } else {
            lo = s;
        }
        let g = if p > 0.0 { p.ln() - ln_target } else { f64::NEG_INFINITY };
        let dg = bs_vega(k, t, s) / p;
        let mut next = if g.is_finite() && dg > 0.0 && dg.is_finite() {
            s - g / dg
        } else {
            f64::NAN
        };
        if !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        let done = (next - s).abs() <= 1e-15 * s || hi - lo <= 1e-15 * hi;
        s = next;
        if done {
            break;
        }
    }
    let resid = (f(s) - target).abs();
    if resid > 1e-12 {
        return Err(Error::Accuracy {
            what: "implied volatility price residual".into(),
            achieved: resid,
        });
    }
    Ok(s)
}

/// Bachelier put E(x − σW₁)⁺ = xΦ(x/σ) + σφ(x/σ).
pub fn bachelier_put(x: f64, sigma: f64) -> f64 {
    if sigma <= 0.0 {
        return x.max(0.0);
    }
    let d = x / sigma;
    x * norm_cdf(d) + sigma * norm_pdf(d)
}

/// Inverse of σ ↦ bachelier_put(x, σ) by bisection (relative tolerance 1e-14).
pub fn bachelier_inverse(x: f64, price: f64) -> Result<f64> {
    if !(price > x.max(0.0)) || !price.is_finite() {
        return Err(Error::domain(format!(
            "Bachelier price {price} not above intrinsic value {}",
            x.max(0.0)
        )));
    }
    let mut lo = 0.0;
    let mut hi = price.max(x.abs()).max(1e-300) * SQRT_2PI;
    while bachelier_put(x, hi) < price {
        lo = hi;
        hi *= 2.0;
    }
    for _ in 0..400 {
        let mid = 0.5 * (lo + hi);
        if bachelier_put(x, mid) < price {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-14 * hi {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// A log moment generating function q ↦ log E(e^{qX}) on complex arguments.
pub trait LogMgf: Sync {
    fn log_mgf(&self, q: Complex64) -> Result<Complex64>;
}

/// log E(e^{qX_t}) from an Adams solve of the full Riccati equation.
#[derive(Debug, Clone)]
pub struct ExactMgf {
    pub params: ModelParams,
    pub t: f64,
    pub n_steps: usize,
}

impl LogMgf for ExactMgf {
    fn log_mgf(&self, q: Complex64) -> Result<Complex64> {
        let m = log_mgf(&self.params, q, self.t, self.n_steps)?;
        if !m.finite {
            return Err(Error::domain(format!(
                "moment of order {q} explodes before t = {}",
                self.t
            )));
        }
        Ok(m.log_mgf)
    }
}

/// Small-time approximation of log E(e^{qX_t}) through the scaled variable p = qt^α:
/// t^{−2H}[V₀(Λ(p) + t^α Λ₁(p)) + λθ t^α F₁(p)], the bracketed corrections only when
/// `corrected` is set. Λ, Λ₁, F₁ come from the fractional power series inside 80% of
/// its radius of convergence and from complex Adams solves on [0, 1] outside.
#[derive(Debug, Clone)]
pub struct SmallTimeMgf {
    pub params: ModelParams,
    pub t: f64,
    pub corrected: bool,
    pub series_terms: usize,
    pub adams_steps: usize,
    /// radius of convergence of the p-series
    pub radius: f64,
}

impl SmallTimeMgf {
    pub fn new(params: &ModelParams, t: f64, corrected: bool) -> Result<Self> {
        if !(t > 0.0) {
            return Err(Error::domain(format!("maturity must be positive, got {t}")));
        }
        let s = solve_series(&RiccatiRhs::driftless(params, 1.0), params.alpha, 200)?;
        Ok(SmallTimeMgf {
            params: *params,
            t,
            corrected,
            series_terms: 160,
            adams_steps: 1000,
            radius: s.radius_tau,
        })
    }

    /// (Λ(p,1), Λ₁(p,1), F₁(p)) = (I^{1−α}ψ, I^{1−α}ψ₁, I¹ψ) at time 1.
    pub fn unit_terms(&self, p: Complex64) -> Result<(Complex64, Complex64, Complex64)> {
        let a = self.params.alpha;
        let zero = Complex64::new(0.0, 0.0);
        if p.norm() < 0.8 * self.radius {
            if self.corrected {
                let (s0, s1) = solve_series_psi1(&self.params, p, self.series_terms)?;
                Ok((
                    s0.frac_integral(1.0, 1.0 - a),
                    s1.frac_integral(1.0, 1.0 - a),
                    s0.frac_integral(1.0, 1.0),
                ))
            } else {
                let s0 = solve_series(&RiccatiRhs::driftless(&self.params, p), a, self.series_terms)?;
                Ok((s0.frac_integral(1.0, 1.0 - a), zero, zero))
            }
        } else {
            let grid = FracGrid::new(1.0, self.adams_steps)?;
            let psi = solve_adams(&RiccatiRhs::driftless(&self.params, p), a, &grid)?;
            if !psi.is_complete() {
                return Err(Error::domain(format!("scaled moment {p} explodes before time 1")));
            }
            let lam = frac_integral_at_end(&psi.values, &grid, 1.0 - a)?;
            if !self.corrected {
                return Ok((lam, zero, zero));
            }
            let psi1 = solve_psi1(&psi, &self.params, p, &grid)?;
            Ok((
                lam,
                frac_integral_at_end(&psi1.values, &grid, 1.0 - a)?,
                frac_integral_at_end(&psi.values, &grid, 1.0)?,
            ))
        }
    }

    /// log E(e^{(p/t^α) X_t}).
    pub fn scaled_log_mgf(&self, p: Complex64) -> Result<Complex64> {
        let prm = &self.params;
        let ta = self.t.powf(prm.alpha);
        let scale = self.t.powf(-2.0 * prm.hurst());
        let (lam, lam1, f1) = self.unit_terms(p)?;
        let mut inner = lam * prm.v0;
        if self.corrected {
            inner += lam1 * (prm.v0 * ta) + f1 * (prm.lambda * prm.theta * ta);
        }
        Ok(inner * scale)
    }
}

impl LogMgf for SmallTimeMgf {
    fn log_mgf(&self, q: Complex64) -> Result<Complex64> {
        self.scaled_log_mgf(q * self.t.powf(self.params.alpha))
    }
}

/// A Fourier price with a crude estimate of the truncated tail.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PriceResult {
    pub price: f64,
    pub tail_estimate: f64,
    pub warning: Option<String>,
}

/// Lewis call price C = 1 − (e^{k/2}/π)∫₀^{u_max} Re[e^{−iuk}φ(u − i/2)] du/(u² + ¼),
/// with φ(u − i/2) = E(e^{(½+iu)X}) and Gauss-Legendre quadrature.
pub fn lewis_call<M: LogMgf + ?Sized>(mgf: &M, k: f64, quad: &QuadratureSpec) -> Result<PriceResult> {
    quad.validate()?;
    let integrand = |u: f64| -> Result<f64> {
        let q = Complex64::new(0.5, u);
        let l = mgf.log_mgf(q)?;
        Ok((l - Complex64::new(0.0, u * k)).exp().re / (u * u + 0.25))
    };
    let mut acc = 0.0;
    for (u, w) in quad.nodes() {
        acc += w * integrand(u)?;
    }
    let scale = (0.5 * k).exp() / std::f64::consts::PI;
    let tail = scale * integrand(quad.u_max)?.abs() * quad.u_max;
    let warning = (tail > 1e-8).then(|| format!("Fourier tail estimate {tail:.2e} exceeds 1e-8"));
    Ok(PriceResult {
        price: 1.0 - scale * acc,
        tail_estimate: tail,
        warning,
    })
}

/// Lewis put price, from the same integral as the call.
pub fn lewis_put<M: LogMgf + ?Sized>(mgf: &M, k: f64, quad: &QuadratureSpec) -> Result<PriceResult> {
    let mut r = lewis_call(mgf, k, quad)?;
    r.price += k.exp() - 1.0;
    Ok(r)
}

/// (1/π)∫₀^{v_max} Re[exp(L(c+iv) + (1−c−iv)k)/((c+iv)(c+iv−1))] dv.
///
/// Equals the call price for c > 1, the call price minus 1 for 0 < c < 1 and
/// the put price for c < 0.
pub fn contour_integral<M: LogMgf + ?Sized>(mgf: &M, k: f64, c: f64, v_max: f64, n_points: usize) -> Result<f64> {
    contour_integral_on(mgf, k, c, 0.0, v_max, n_points)
}

/// The same integrand as [`contour_integral`] restricted to v ∈ [v_lo, v_hi].
pub fn contour_integral_on<M: LogMgf + ?Sized>(
    mgf: &M,
    k: f64,
    c: f64,
    v_lo: f64,
    v_hi: f64,
    n_points: usize,
) -> Result<f64> {
    if c == 0.0 || c == 1.0 {
        return Err(Error::domain("contour passes through a pole"));
    }
    let gl = GaussLegendre::new(n_points);
    let mut acc = 0.0;
    for (v, w) in gl.on_interval(v_lo, v_hi) {
        let q = Complex64::new(c, v);
        let l = mgf.log_mgf(q)?;
        acc += w * ((l + (1.0 - q) * k).exp() / (q * (q - 1.0))).re;
    }
    Ok(acc / std::f64::consts::PI)
}

/// Convert a contour integral at real part c into an out-of-the-money quote.
pub fn contour_quote(integral: f64, c: f64, k: f64, t: f64) -> OptionQuote {
    let (price, kind) = if c > 1.0 {
        (integral, OptionKind::Call)
    } else if c > 0.0 {
        (integral + 1.0, OptionKind::Call)
    } else {
        (integral, OptionKind::Put)
    };
    OptionQuote {
        price,
        log_strike: k,
        maturity: t,
        kind,
    }
}

/// Result of pricing along the saddlepoint contour.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SaddlePrice {
    pub x: f64,
    pub t: f64,
    pub p_star: f64,
    pub log_strike: f64,
    pub quote: OptionQuote,
    pub implied_vol: f64,
}

/// Gauss-Legendre points on the saddlepoint contour.
pub const SADDLE_POINTS: usize = 200;

/// Price the option with log-strike k = x·t^{½−H} by integrating along the
/// horizontal contour through the saddlepoint q* = p*(x)/t^α, with the
/// small-time mgf (plus the ψ₁ correction when `use_psi1`), and return the
/// exact implied volatility of that price. At the money the saddlepoint is
/// q* = 0, a pole of the integrand, so the Lewis line Re q = ½ is used instead.
pub fn saddle_contour_call<C: Cgf + ?Sized>(
    cgf: &C,
    params: &ModelParams,
    x: f64,
    t: f64,
    use_psi1: bool,
) -> Result<SaddlePrice> {
    let p_star = if x == 0.0 { 0.0 } else { rate_function(cgf, x).p_star };
    let (pm, pp) = (cgf.p_minus(), cgf.p_plus());
    let gap = pp - pm;
    if p_star - pm < 0.01 * gap || pp - p_star < 0.01 * gap {
        return Err(Error::domain(format!(
            "saddlepoint {p_star} within 1% of a critical moment; use a smaller |x|"
        )));
    }
    let mgf = SmallTimeMgf::new(params, t, use_psi1)?;
    let ta = t.powf(params.alpha);
    let k = x * t.powf(0.5 - params.hurst());
    let c = if x == 0.0 { 0.5 } else { p_star / ta };
    // in scaled units the integrand decays like exp(−V₀v²/(2t^{2H}))
    let v_max = 8.0 * t.powf(params.hurst()) / params.v0.sqrt() / ta;
    let integral = if x == 0.0 {
        // the pole factor 1/(q(q − 1)) varies on the scale ½ ≪ v_max: geometric panels
        let mut acc = 0.0;
        let mut lo = 0.0;
        let mut hi = 2.0_f64.min(v_max);
        while lo < v_max {
            acc += contour_integral_on(&mgf, k, c, lo, hi, SADDLE_POINTS)?;
            lo = hi;
            hi = (hi * 8.0).min(v_max);
        }
        acc
    } else {
        contour_integral(&mgf, k, c, v_max, SADDLE_POINTS)?
    };
    let quote = contour_quote(integral, c, k, t);
    let implied_vol = implied_vol(&quote)?;
    Ok(SaddlePrice {
        x,
        t,
        p_star,
        log_strike: k,
        quote,
        implied_vol,
    })
}

/// Limit smile σ̂₀(x) at H = 0 in the Edgeworth regime: the Bachelier inverse of
/// P(x) = E(x − Z)⁺, where E(e^{pZ}) = exp(V₀ I^{1/2}φ(p, ·)(1)).
///
/// The mgf of Z is evaluated once per quadrature node on two vertical contours,
/// Re p = a₊ > 0 (out-of-the-money calls, x > 0) and Re p = a₋ < 0 (puts, x < 0),
/// with |a±| = min(1, 0.4|p±⁰|).
#[derive(Debug, Clone)]
pub struct EdgeworthPricer {
    pub params: ModelParams,
    pub quad: QuadratureSpec,
    /// estimated critical moments (p₋⁰, p₊⁰)
    pub critical: (f64, f64),
    pub a_plus: f64,
    pub a_minus: f64,
    nodes: Vec<(f64, f64)>,
    mgf_plus: Vec<Complex64>,
    mgf_minus: Vec<Complex64>,
}

impl EdgeworthPricer {
    pub fn new(params: &ModelParams, quad: &QuadratureSpec) -> Result<Self> {
        if (params.alpha - 0.5).abs() > 1e-12 {
            return Err(Error::domain(format!(
                "the H = 0 smile needs α = 1/2, got {}",
                params.alpha
            )));
        }
        quad.validate()?;
        let critical = critical_moments(params)?;
        let a_plus = (0.4 * critical.1).min(1.0);
        let a_minus = -(0.4 * critical.0.abs()).min(1.0);
        let mut m = SmallTimeMgf::new(params, 1.0, false)?;
        m.adams_steps = 600;
        let nodes = quad.nodes();
        let eval = |a: f64| -> Result<Vec<Complex64>> {
            nodes
                .iter()
                .map(|&(u, _)| m.scaled_log_mgf(Complex64::new(a, u)))
                .collect()
        };
        let mgf_plus = eval(a_plus)?;
        let mgf_minus = eval(a_minus)?;
        Ok(EdgeworthPricer {
            params: *params,
            quad: *quad,
            critical,
            a_plus,
            a_minus,
            nodes,
            mgf_plus,
            mgf_minus,
        })
    }

    fn integral(&self, x: f64, a: f64, logm: &[Complex64]) -> f64 {
        let mut acc = 0.0;
        for (&(u, w), l) in self.nodes.iter().zip(logm) {
            let p = Complex64::new(a, u);
            acc += w * ((*l - p * x).exp() / (p * p)).re;
        }
        acc / std::f64::consts::PI
    }

    /// E(x − Z)⁺ for x < 0 or E(Z − x)⁺ for x ≥ 0 (the out-of-the-money side).
    pub fn otm_price(&self, x: f64) -> Result<f64> {
        Ok(if x >= 0.0 {
            self.integral(x, self.a_plus, &self.mgf_plus)
        } else {
            self.integral(x, self.a_minus, &self.mgf_minus)
        })
    }

    /// P(x) = E(x − Z)⁺.
    pub fn put(&self, x: f64) -> Result<f64> {
        let v = self.otm_price(x)?;
        Ok(if x > 0.0 { v + x } else { v })
    }

    /// σ̂₀(x) = P_B(x, ·)^{−1}(P(x)), inverted on the out-of-the-money side.
    pub fn smile(&self, x: f64) -> Result<f64> {
        let v = self.otm_price(x)?;
        let res = if x >= 0.0 {
            bachelier_inverse(-x, v)
        } else {
            bachelier_inverse(x, v)
        };
        res.map_err(|e| Error::NumericalFailure {
            what: format!("contour price {v} at x = {x} not invertible: {e}"),
            last_good: 0,
            t: 1.0,
        })
    }

    /// log E(e^{pZ}) for real p near 0 (series region).
    pub fn log_mgf_real(&self, p: f64) -> Result<f64> {
        let m = SmallTimeMgf::new(&self.params, 1.0, false)?;
        Ok(m.scaled_log_mgf(Complex64::new(p, 0.0))?.re)
    }
}

/// σ̂₀ on a grid of x values.
pub fn edgeworth_smile_h0(params: &ModelParams, xs: &[f64], quad: &QuadratureSpec) -> Result<Vec<f64>> {
    let pricer = EdgeworthPricer::new(params, quad)?;
    xs.iter().map(|&x| pricer.smile(x)).collect()
}
