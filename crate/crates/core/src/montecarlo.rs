//! Euler-type Monte Carlo for the rough Heston model in its Volterra form
//! V_t = ξ₀(t) + ∫₀ᵗ κ(t−s)√V_s dW_s, with conditional (mixing) estimators for
//! option prices and the third moment, variance-curve evolution and ρ(T)
//! calibration to a skewness term structure.

use std::io::Write;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{expected_variance, kernel_integral, ModelParams, VarianceCurve};
use crate::pricing::{bs_vega, implied_vol, norm_cdf, OptionKind, OptionQuote};
use crate::quadrature::integrate_adaptive;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub n_paths: usize,
    pub n_steps: usize,
    pub maturity: f64,
    pub seed: u64,
    pub antithetic: bool,
    /// simulate dX = √V dB (no −½V dt drift), as used for the skewness formula
    pub driftless: bool,
}

impl SimConfig {
    pub fn new(n_paths: usize, n_steps: usize, maturity: f64, seed: u64) -> Result<Self> {
        let c = SimConfig {
            n_paths,
            n_steps,
            maturity,
            seed,
            antithetic: false,
            driftless: false,
        };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_paths < 1 {
            return Err(Error::param("n_paths", "must be at least 1"));
        }
        if self.n_steps < 2 {
            return Err(Error::param(
                "n_steps",
                format!("must be at least 2, got {}", self.n_steps),
            ));
        }
        if !(self.maturity > 0.0 && self.maturity.is_finite()) {
            return Err(Error::param(
                "maturity",
                format!("must be positive, got {}", self.maturity),
            ));
        }
        Ok(())
    }
}

/// Terminal per-path quantities.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct SimOutput {
    /// X_T
    pub x: Vec<f64>,
    /// ∫₀ᵀ V⁺ dt
    pub int_v: Vec<f64>,
    /// V_T
    pub v_t: Vec<f64>,
    /// E(X_T | W)
    pub cond_mean: Vec<f64>,
    /// Var(X_T | W) = ρ̄² ∫V⁺ dt
    pub cond_var: Vec<f64>,
}

impl SimOutput {
    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    /// Write the samples as a binary column file: the 8-byte magic `RHSAMP01`,
    /// u64 row count, u64 column count, one 16-byte NUL-padded ASCII name per
    /// column, then each column as little-endian f64 values.
    pub fn write_binary<W: Write>(&self, mut w: W) -> Result<()> {
        let cols: [(&str, &Vec<f64>); 5] = [
            ("x", &self.x),
            ("int_v", &self.int_v),
            ("v_t", &self.v_t),
            ("cond_mean", &self.cond_mean),
            ("cond_var", &self.cond_var),
        ];
        w.write_all(b"RHSAMP01")?;
        w.write_all(&(self.len() as u64).to_le_bytes())?;
        w.write_all(&(cols.len() as u64).to_le_bytes())?;
        for (name, _) in &cols {
            let mut buf = [0u8; 16];
            buf[..name.len()].copy_from_slice(name.as_bytes());
            w.write_all(&buf)?;
        }
        for (_, c) in &cols {
            for v in c.iter() {
                w.write_all(&v.to_le_bytes())?;
            }
        }
        Ok(())
    }
}

/// Panel-averaged kernel weights wₘ = (K(mh) − K((m−1)h))/h with K(x) = ∫₀ˣκ,
/// so the singular lag-0 panel is integrated exactly.
fn kernel_weights(params: &ModelParams, h: f64, n: usize, shift: f64) -> Result<Vec<f64>> {
    let mut w = vec![0.0; n + 1];
    let mut prev = kernel_integral(params, shift)?;
    for (m, wm) in w.iter_mut().enumerate().skip(1) {
        let cur = kernel_integral(params, shift + m as f64 * h)?;
        *wm = (cur - prev) / h;
        prev = cur;
    }
    Ok(w)
}

struct Path {
    v: Vec<f64>,
    /// √V⁺_j ΔW_j
    g: Vec<f64>,
    out: (f64, f64, f64, f64, f64),
}

struct Engine {
    params: ModelParams,
    cfg: SimConfig,
    h: f64,
    sqrt_h: f64,
    weights: Vec<f64>,
    xi0: Vec<f64>,
}

impl Engine {
    fn new(params: &ModelParams, cfg: &SimConfig) -> Result<Self> {
        cfg.validate()?;
        params.validate()?;
        let n = cfg.n_steps;
        let h = cfg.maturity / n as f64;
        let weights = kernel_weights(params, h, n, 0.0)?;
        let xi0 = (0..=n)
            .map(|k| expected_variance(params, k as f64 * h))
            .collect::<Result<Vec<_>>>()?;
        Ok(Engine {
            params: *params,
            cfg: *cfg,
            h,
            sqrt_h: h.sqrt(),
            weights,
            xi0,
        })
    }

    /// Path `i`: paths 2j and 2j+1 share stream j under antithetic sampling.
    fn path(&self, i: usize) -> Path {
        let n = self.cfg.n_steps;
        let (stream, sign) = if self.cfg.antithetic {
            ((i / 2) as u64, if i.is_multiple_of(2) { 1.0 } else { -1.0 })
        } else {
            (i as u64, 1.0)
        };
        let mut rng = ChaCha8Rng::seed_from_u64(self.cfg.seed);
        rng.set_stream(stream);
        let (rho, rho_bar) = (self.params.rho, self.params.rho_bar());
        let mut v = vec![0.0; n + 1];
        let mut g = vec![0.0; n];
        v[0] = self.xi0[0];
        let (mut m, mut qv) = (0.0, 0.0);
        for k in 0..n {
            let vp = v[k].max(0.0);
            let sv = vp.sqrt();
            let z: f64 = StandardNormal.sample(&mut rng);
            let dw = sign * z * self.sqrt_h;
            g[k] = sv * dw;
            if !self.cfg.driftless {
                m -= 0.5 * vp * self.h;
            }
            m += rho * g[k];
            qv += vp * self.h;
            let mut conv = 0.0;
            for j in 0..=k {
                conv += self.weights[k + 1 - j] * g[j];
            }
            v[k + 1] = self.xi0[k + 1] + conv;
        }
        let zb: f64 = StandardNormal.sample(&mut rng);
        let s2 = rho_bar * rho_bar * qv;
        let x = m + sign * zb * s2.sqrt();
        Path {
            out: (x, qv, v[n], m, s2),
            v,
            g,
        }
    }
}

/// Simulate terminal samples by full-truncation Euler on the Volterra
/// representation with O(N²) convolution per path. Fixed seeds give
/// bit-identical output regardless of thread count.
pub fn simulate(params: &ModelParams, cfg: &SimConfig) -> Result<SimOutput> {
    let eng = Engine::new(params, cfg)?;
    let rows: Vec<(f64, f64, f64, f64, f64)> = (0..cfg.n_paths).into_par_iter().map(|i| eng.path(i).out).collect();
    let mut out = SimOutput::default();
    for (x, iv, vt, m, s2) in rows {
        out.x.push(x);
        out.int_v.push(iv);
        out.v_t.push(vt);
        out.cond_mean.push(m);
        out.cond_var.push(s2);
    }
    Ok(out)
}

/// Sample mean and its standard error.
pub fn mean_and_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, f64::NAN);
    }
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// E((e^X − e^k)⁺) or E((e^k − e^X)⁺) for X ~ N(m, s²).
fn lognormal_option(kind: OptionKind, m: f64, s2: f64, k: f64) -> f64 {
    let s = s2.sqrt();
    if s <= 0.0 {
        return match kind {
            OptionKind::Call => (m.exp() - k.exp()).max(0.0),
            OptionKind::Put => (k.exp() - m.exp()).max(0.0),
        };
    }
    let d1 = (m + s2 - k) / s;
    let d2 = d1 - s;
    let f = (m + 0.5 * s2).exp();
    match kind {
        OptionKind::Call => f * norm_cdf(d1) - k.exp() * norm_cdf(d2),
        OptionKind::Put => k.exp() * norm_cdf(-d2) - f * norm_cdf(-d1),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct McSmilePoint {
    /// scaled log-moneyness
    pub x: f64,
    /// log-strike x·T^{½−H}
    pub log_strike: f64,
    pub kind: OptionKind,
    pub price: f64,
    pub price_stderr: f64,
    pub vol: Option<f64>,
    pub vol_stderr: Option<f64>,
    pub flag: Option<String>,
}

/// Monte Carlo smile at scaled log-moneyness values x (strikes e^{x T^{½−H}}),
/// priced with the conditional Black-Scholes estimator given the W-path and
/// converted to implied vols; standard errors by the delta method through vega.
pub fn mc_smile(params: &ModelParams, cfg: &SimConfig, xs: &[f64]) -> Result<Vec<McSmilePoint>> {
    let sim = simulate(params, cfg)?;
    Ok(smile_from_samples(params, cfg.maturity, &sim, xs))
}

pub fn smile_from_samples(params: &ModelParams, t: f64, sim: &SimOutput, xs: &[f64]) -> Vec<McSmilePoint> {
    let scale = t.powf(0.5 - params.hurst());
    xs.iter()
        .map(|&x| {
            let k = x * scale;
            let kind = if k >= 0.0 { OptionKind::Call } else { OptionKind::Put };
            let payoffs: Vec<f64> = sim
                .cond_mean
                .iter()
                .zip(&sim.cond_var)
                .map(|(&m, &s2)| lognormal_option(kind, m, s2, k))
                .collect();
            let (price, se) = mean_and_se(&payoffs);
            let quote = OptionQuote {
                price,
                log_strike: k,
                maturity: t,
                kind,
            };
            match implied_vol(&quote) {
                Ok(vol) => McSmilePoint {
                    x,
                    log_strike: k,
                    kind,
                    price,
                    price_stderr: se,
                    vol: Some(vol),
                    vol_stderr: Some(se / bs_vega(k, t, vol)),
                    flag: None,
                },
                Err(e) => McSmilePoint {
                    x,
                    log_strike: k,
                    kind,
                    price,
                    price_stderr: se,
                    vol: None,
                    vol_stderr: None,
                    flag: Some(e.to_string()),
                },
            }
        })
        .collect()
}

/// E(X_T³) = 3V₀ρνT^{1+α}/(Γ(α)α(1+α)) for the driftless model with λ = 0.
pub fn third_moment_closed_form(params: &ModelParams, t: f64) -> Result<f64> {
    if params.lambda != 0.0 {
        return Err(Error::domain(
            "the closed-form third moment needs λ = 0; use the general form",
        ));
    }
    let a = params.alpha;
    Ok(3.0 * params.v0 * params.rho * params.nu * t.powf(1.0 + a) / (crate::special::gamma_fn(a)? * a * (1.0 + a)))
}

/// D(T) = ∫₀ᵀ∫₀ᵗ κ(t−s)ξ₀(s) ds dt = ∫₀ᵀ ξ₀(s)K(T−s) ds with K(x) = ∫₀ˣκ, so that
/// the kernel singularity is integrated analytically.
pub fn skew_integral(params: &ModelParams, xi0: &dyn Fn(f64) -> f64, t: f64) -> Result<f64> {
    if !(t > 0.0) {
        return Err(Error::domain(format!("maturity must be positive, got {t}")));
    }
    let mut failure = None;
    let f = |s: f64| match kernel_integral(params, t - s) {
        Ok(k) => xi0(s) * k,
        Err(e) => {
            failure.get_or_insert(e);
            0.0
        }
    };
    let (v, _) = integrate_adaptive(f, 0.0, t, 1e-16, 1e-12, 4000)?;
    if let Some(e) = failure {
        return Err(e);
    }
    Ok(v)
}

/// E(X_T³) = 3ρ D(T) for the driftless model with a general initial variance curve.
pub fn third_moment_general(params: &ModelParams, xi0: &dyn Fn(f64) -> f64, t: f64) -> Result<f64> {
    Ok(3.0 * params.rho * skew_integral(params, xi0, t)?)
}

/// Monte Carlo E(X_T³) for the driftless model, using E(X³ | W) = m³ + 3ms².
pub fn third_moment_mc(params: &ModelParams, cfg: &SimConfig) -> Result<(f64, f64)> {
    let mut c = *cfg;
    c.driftless = true;
    let sim = simulate(params, &c)?;
    let vals: Vec<f64> = sim
        .cond_mean
        .iter()
        .zip(&sim.cond_var)
        .map(|(&m, &s2)| m * m * m + 3.0 * m * s2)
        .collect();
    Ok(mean_and_se(&vals))
}

/// Maturities with target third moments.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SkewTermStructure {
    pub maturities: Vec<f64>,
    pub third_moments: Vec<f64>,
}

impl SkewTermStructure {
    pub fn new(maturities: Vec<f64>, third_moments: Vec<f64>) -> Result<Self> {
        if maturities.len() != third_moments.len() || maturities.is_empty() {
            return Err(Error::domain(
                "maturities and third moments must be non-empty and of equal length",
            ));
        }
        if maturities[0] <= 0.0 || maturities.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::domain("maturities must be positive and increasing"));
        }
        Ok(SkewTermStructure {
            maturities,
            third_moments,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RhoPoint {
    pub maturity: f64,
    /// m₃/(3D), clamped to [−1, 1] when infeasible
    pub rho: f64,
    pub raw: f64,
    pub feasible: bool,
}

/// ρ(Tᵢ) = m₃(Tᵢ)/(3D(Tᵢ)), where m₃ is read as a function of the maturity.
pub fn calibrate_rho_t(params: &ModelParams, xi0: &dyn Fn(f64) -> f64, s: &SkewTermStructure) -> Result<Vec<RhoPoint>> {
    s.maturities
        .iter()
        .zip(&s.third_moments)
        .map(|(&t, &m3)| {
            let d = skew_integral(params, xi0, t)?;
            if d == 0.0 {
                return Err(Error::Degenerate(format!("skew integral vanishes at T = {t}")));
            }
            let raw = m3 / (3.0 * d);
            Ok(RhoPoint {
                maturity: t,
                rho: raw.clamp(-1.0, 1.0),
                raw,
                feasible: raw.abs() < 1.0,
            })
        })
        .collect()
}

/// A simulated forward variance curve at time t, indexed by time to maturity
/// u − t. Discretised paths can dip below zero, so no positivity is imposed.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvolvedCurve {
    pub horizon: f64,
    pub tenors: Vec<f64>,
    pub values: Vec<f64>,
}

impl EvolvedCurve {
    /// Convert to a [`VarianceCurve`]; fails if any value is not positive.
    pub fn to_variance_curve(&self) -> Result<VarianceCurve> {
        VarianceCurve::new(self.tenors.clone(), self.values.clone())
    }
}

/// Per-path forward variance curves ξ_t(u) = ξ₀(u) + ∫₀ᵗκ(u−s)√V_s dW_s at tenors u > t,
/// with t = `cfg.maturity`. Each curve is indexed by time to maturity u − t and
/// starts from ξ_t(t) = V_t.
pub fn evolve_variance_curve(params: &ModelParams, cfg: &SimConfig, tenors: &[f64]) -> Result<Vec<EvolvedCurve>> {
    let t = cfg.maturity;
    if tenors.is_empty() {
        return Err(Error::domain("at least one tenor is required"));
    }
    if let Some(u) = tenors.iter().find(|&&u| !(u > t)) {
        return Err(Error::domain(format!("tenor {u} must exceed the horizon {t}")));
    }
    if tenors.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::domain("tenors must be increasing"));
    }
    let eng = Engine::new(params, cfg)?;
    let n = cfg.n_steps;
    let h = eng.h;
    // weight for panel j at tenor u: (K(u − t_j) − K(u − t_{j+1}))/h
    let tables: Vec<(Vec<f64>, f64)> = tenors
        .iter()
        .map(|&u| {
            let w = kernel_weights(params, h, n, u - t)?;
            Ok((w, expected_variance(params, u)?))
        })
        .collect::<Result<_>>()?;
    let mut rel = vec![0.0];
    rel.extend(tenors.iter().map(|u| u - t));
    Ok((0..cfg.n_paths)
        .into_par_iter()
        .map(|i| {
            let path = eng.path(i);
            let mut xi = vec![path.v[n]];
            xi.extend(tables.iter().map(|(w, base)| {
                let mut acc = *base;
                for (j, g) in path.g.iter().enumerate() {
                    acc += w[n - j] * g;
                }
                acc
            }));
            EvolvedCurve {
                horizon: t,
                tenors: rel.clone(),
                values: xi,
            }
        })
        .collect())
}

/// V_T on each path of `cfg` (the short end the evolved curves should meet).
pub fn terminal_variance(params: &ModelParams, cfg: &SimConfig) -> Result<Vec<f64>> {
    Ok(simulate(params, cfg)?.v_t)
}
