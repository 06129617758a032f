//! Solvers for the fractional Riccati equation D^α f = c₀ + c₁f + c₂f², f(0) = 0:
//! the fractional Adams predictor-corrector, the fractional power series, the
//! first-order correction ψ₁, and explosion-time search.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::ModelParams;
use crate::special::{gamma_ratio, rgamma, FracGrid, ProductWeights, Scalar};

/// |f| above this value marks a solution as exploded.
pub const BLOW_UP_THRESHOLD: f64 = 1e8;

/// Right-hand side G(w) = c₀ + c₁w + c₂w² of the Riccati equation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RiccatiRhs<S> {
    pub c0: S,
    pub c1: S,
    pub c2: f64,
}

impl<S: Scalar> RiccatiRhs<S> {
    pub fn new(c0: S, c1: S, c2: f64) -> Result<Self> {
        if !(c2 > 0.0) {
            return Err(Error::domain(format!(
                "quadratic coefficient must be positive, got {c2}"
            )));
        }
        Ok(RiccatiRhs { c0, c1, c2 })
    }

    /// Equation for the log-mgf of X: c₀ = ½(p² − p), c₁ = pρν − λ.
    pub fn full(params: &ModelParams, p: S) -> Self {
        RiccatiRhs {
            c0: (p * p - p) * 0.5,
            c1: p * (params.rho * params.nu) - S::from_f64(params.lambda),
            c2: 0.5 * params.nu * params.nu,
        }
    }

    /// Driftless small-time equation: c₀ = ½p², c₁ = pρν.
    pub fn driftless(params: &ModelParams, p: S) -> Self {
        RiccatiRhs {
            c0: p * p * 0.5,
            c1: p * (params.rho * params.nu),
            c2: 0.5 * params.nu * params.nu,
        }
    }

    pub fn eval(&self, w: S) -> S {
        self.c0 + (self.c1 + w * self.c2) * w
    }
}

/// A discretised solution on a uniform grid.
///
/// `values` holds f(t_k) for every node reached; when the solution exploded the
/// vector stops at the first node whose modulus exceeded [`BLOW_UP_THRESHOLD`]
/// and `t_star_bracket` holds the last two node times.
#[derive(Debug, Clone, PartialEq)]
pub struct VieSolution<S> {
    pub grid: FracGrid,
    pub values: Vec<S>,
    pub exploded: bool,
    pub t_star_bracket: Option<(f64, f64)>,
}

impl<S: Scalar> VieSolution<S> {
    pub fn last(&self) -> S {
        *self.values.last().expect("solutions always hold the initial value")
    }

    pub fn is_complete(&self) -> bool {
        !self.exploded && self.values.len() == self.grid.len()
    }
}

/// Generic fractional Adams (PECE) scheme for f = I^α[g(t, f)], where the
/// right-hand side may depend on the node index.
fn adams<S: Scalar, F: FnMut(usize, S) -> S>(
    alpha: f64,
    grid: &FracGrid,
    threshold: f64,
    mut g: F,
) -> Result<VieSolution<S>> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::domain(format!("order {alpha} outside (0, 1]")));
    }
    let n_steps = grid.n_steps;
    let h = grid.step();
    let zero = S::from_f64(0.0);
    let mut values = Vec::with_capacity(n_steps + 1);
    let mut rhs = Vec::with_capacity(n_steps + 1);
    values.push(zero);
    rhs.push(g(0, zero));

    let weights = if alpha < 1.0 {
        Some(ProductWeights::new(alpha, h, n_steps + 1)?)
    } else {
        None
    };
    // running sums used by the classical (α = 1) trapezoid special case
    let mut sum_all = rhs[0];
    let mut sum_tail = zero;

    for n in 0..n_steps {
        let (predictor, history) = match &weights {
            Some(w) => {
                let mut p = zero;
                for j in 0..=n {
                    p += rhs[j] * w.rect[n - j];
                }
                let mut c = rhs[0] * w.first[n + 1];
                for j in 1..=n {
                    c += rhs[j] * w.trap[n + 1 - j];
                }
                (p * w.rect_scale, c)
            }
            None => (sum_all * h, rhs[0] + sum_tail * 2.0),
        };
        let scale = match &weights {
            Some(w) => w.trap_scale,
            None => 0.5 * h,
        };
        let g_pred = g(n + 1, predictor);
        let next = (g_pred + history) * scale;
        let t_lo = grid.node(n);
        let t_hi = grid.node(n + 1);
        if !next.is_finite_value() {
            if predictor.modulus() > threshold || values[n].modulus() > threshold.sqrt() {
                values.push(next);
                return Ok(VieSolution {
                    grid: *grid,
                    values,
                    exploded: true,
                    t_star_bracket: Some((t_lo, t_hi)),
                });
            }
            return Err(Error::NumericalFailure {
                what: "non-finite value before the blow-up threshold".into(),
                last_good: n,
                t: t_lo,
            });
        }
        values.push(next);
        if next.modulus() > threshold {
            return Ok(VieSolution {
                grid: *grid,
                values,
                exploded: true,
                t_star_bracket: Some((t_lo, t_hi)),
            });
        }
        let g_next = g(n + 1, next);
        rhs.push(g_next);
        sum_all += g_next;
        sum_tail += g_next;
    }
    Ok(VieSolution {
        grid: *grid,
        values,
        exploded: false,
        t_star_bracket: None,
    })
}

/// Fractional Adams predictor-corrector (product rectangle predictor, product
/// trapezoid corrector, one correction) for D^α f = G(f), f(0) = 0.
pub fn solve_adams<S: Scalar>(rhs: &RiccatiRhs<S>, alpha: f64, grid: &FracGrid) -> Result<VieSolution<S>> {
    adams(alpha, grid, BLOW_UP_THRESHOLD, |_, w| rhs.eval(w))
}

/// Truncated fractional power series f(t) = Σ_{n≥1} aₙ t^{αn}.
#[derive(Debug, Clone, PartialEq)]
pub struct SeriesSolution<S> {
    pub alpha: f64,
    /// a₁, a₂, … (index 0 holds a₁)
    pub coeffs: Vec<S>,
    /// ratio-test radius of convergence in τ = t^α, without safety factor
    pub radius_tau: f64,
    /// set when coefficients overflowed and the series was cut short
    pub truncated: bool,
}

/// Safety factor applied to the estimated radius of convergence.
pub const SERIES_SAFETY: f64 = 0.9;

impl<S: Scalar> SeriesSolution<S> {
    /// Radius of safe evaluation in t (safety factor applied).
    pub fn radius(&self) -> f64 {
        (SERIES_SAFETY * self.radius_tau).powf(1.0 / self.alpha)
    }

    pub fn eval(&self, t: f64) -> S {
        let tau = t.powf(self.alpha);
        let mut acc = S::from_f64(0.0);
        let mut pw = 1.0;
        for a in &self.coeffs {
            pw *= tau;
            acc += *a * pw;
        }
        acc
    }

    /// I^r of the series at time t: Σ aₙ Γ(αn+1)/Γ(αn+1+r) t^{αn+r}.
    pub fn frac_integral(&self, t: f64, r: f64) -> S {
        let mut acc = S::from_f64(0.0);
        for (i, a) in self.coeffs.iter().enumerate() {
            let n = (i + 1) as f64;
            let e = self.alpha * n;
            acc += *a * (gamma_ratio(e + 1.0, r) * t.powf(e + r));
        }
        acc
    }
}

fn ratio_radius<S: Scalar>(coeffs: &[S]) -> f64 {
    let nz: Vec<(usize, f64)> = coeffs
        .iter()
        .enumerate()
        .map(|(i, c)| (i + 1, c.modulus()))
        .filter(|(_, m)| *m > 0.0)
        .collect();
    if nz.len() < 2 {
        return f64::INFINITY;
    }
    let (n, an) = nz[nz.len() - 1];
    let target = (3 * n) / 4;
    let &(m, am) = nz
        .iter()
        .rev()
        .find(|(k, _)| *k <= target.max(1))
        .unwrap_or(&nz[nz.len() - 2]);
    if m == n {
        return f64::INFINITY;
    }
    (am / an).powf(1.0 / (n - m) as f64)
}

fn series_step_ratio(alpha: f64, n: usize) -> f64 {
    let nf = n as f64;
    gamma_ratio(alpha * nf + 1.0, alpha)
}

fn check_terms(n_terms: usize) -> Result<()> {
    if !(1..=200).contains(&n_terms) {
        return Err(Error::domain(format!("series length {n_terms} outside 1..=200")));
    }
    Ok(())
}

/// Fractional power series of the Riccati solution.
///
/// a₁ = c₀/Γ(1+α), a_{n+1} = (c₁aₙ + c₂ Σ_{j=1}^{n−1} a_j a_{n−j}) Γ(αn+1)/Γ(α(n+1)+1).
pub fn solve_series<S: Scalar>(rhs: &RiccatiRhs<S>, alpha: f64, n_terms: usize) -> Result<SeriesSolution<S>> {
    check_terms(n_terms)?;
    let mut a: Vec<S> = Vec::with_capacity(n_terms);
    a.push(rhs.c0 * rgamma(1.0 + alpha));
    let mut truncated = false;
    for n in 1..n_terms {
        let mut conv = S::from_f64(0.0);
        for j in 1..n {
            conv += a[j - 1] * a[n - j - 1];
        }
        let next = (rhs.c1 * a[n - 1] + conv * rhs.c2) * series_step_ratio(alpha, n);
        if !next.is_finite_value() {
            truncated = true;
            break;
        }
        a.push(next);
    }
    let radius_tau = ratio_radius(&a);
    Ok(SeriesSolution {
        alpha,
        coeffs: a,
        radius_tau,
        truncated,
    })
}

/// Series for the driftless solution ψ(p, ·) and its first-order correction ψ₁,
/// which solves D^α ψ₁ = −½p − λψ + pρνψ₁ + ν²ψψ₁.
pub fn solve_series_psi1<S: Scalar>(
    params: &ModelParams,
    p: S,
    n_terms: usize,
) -> Result<(SeriesSolution<S>, SeriesSolution<S>)> {
    check_terms(n_terms)?;
    let alpha = params.alpha;
    let rhs = RiccatiRhs::driftless(params, p);
    let nu2 = params.nu * params.nu;
    let mut a: Vec<S> = vec![rhs.c0 * rgamma(1.0 + alpha)];
    let mut b: Vec<S> = vec![p * (-0.5 * rgamma(1.0 + alpha))];
    let mut truncated = false;
    for n in 1..n_terms {
        let r = series_step_ratio(alpha, n);
        let mut conv_a = S::from_f64(0.0);
        let mut conv_b = S::from_f64(0.0);
        for j in 1..n {
            conv_a += a[j - 1] * a[n - j - 1];
            conv_b += a[j - 1] * b[n - j - 1];
        }
        let next_a = (rhs.c1 * a[n - 1] + conv_a * rhs.c2) * r;
        let next_b = (a[n - 1] * (-params.lambda) + rhs.c1 * b[n - 1] + conv_b * nu2) * r;
        if !next_a.is_finite_value() || !next_b.is_finite_value() {
            truncated = true;
            break;
        }
        a.push(next_a);
        b.push(next_b);
    }
    let radius_tau = ratio_radius(&a);
    Ok((
        SeriesSolution {
            alpha,
            coeffs: a,
            radius_tau,
            truncated,
        },
        SeriesSolution {
            alpha,
            coeffs: b,
            radius_tau,
            truncated,
        },
    ))
}

/// Adams solve of the linear correction equation D^α ψ₁ = −½p − λψ + pρνψ₁ + ν²ψψ₁
/// with the coefficient ψ taken from a driftless solution on the same grid.
pub fn solve_psi1<S: Scalar>(
    psi0: &VieSolution<S>,
    params: &ModelParams,
    p: S,
    grid: &FracGrid,
) -> Result<VieSolution<S>> {
    if psi0.grid != *grid {
        return Err(Error::domain(
            "correction grid differs from the driftless solution grid",
        ));
    }
    if !psi0.is_complete() {
        return Err(Error::domain("driftless solution exploded inside the grid"));
    }
    let forcing = p * -0.5;
    let lin = p * (params.rho * params.nu);
    let nu2 = params.nu * params.nu;
    let lambda = params.lambda;
    let psi = &psi0.values;
    adams(params.alpha, grid, BLOW_UP_THRESHOLD, |k, w| {
        forcing - psi[k] * lambda + (lin + psi[k] * nu2) * w
    })
}

/// Explosion time T* of a real Riccati solution.
///
/// The horizon is grown from `t_hint` until an `n_steps` Adams solve crosses the
/// blow-up threshold, then bisected with restarted solves until the bracket
/// width is below 1e-4·T*. Returns +∞ when nothing explodes up to 10·t_hint.
pub fn explosion_time(rhs: &RiccatiRhs<f64>, alpha: f64, t_hint: f64, n_steps: usize) -> Result<f64> {
    if !(t_hint > 0.0 && t_hint.is_finite()) {
        return Err(Error::domain(format!(
            "explosion-time hint must be positive, got {t_hint}"
        )));
    }
    let explodes =
        |horizon: f64| -> Result<VieSolution<f64>> { solve_adams(rhs, alpha, &FracGrid::new(horizon, n_steps)?) };
    let mut lo = 0.0;
    let mut horizon = 1.25 * t_hint;
    let hi = loop {
        let sol = explodes(horizon)?;
        if sol.exploded {
            break horizon;
        }
        lo = horizon;
        if horizon >= 10.0 * t_hint {
            return Ok(f64::INFINITY);
        }
        horizon = (2.0 * horizon).min(10.0 * t_hint);
    };
    let mut hi = hi;
    while hi - lo > 1e-4 * hi {
        let mid = 0.5 * (lo + hi);
        if explodes(mid)?.exploded {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// A horizon hint for [`explosion_time`] from the series radius of convergence.
pub fn explosion_hint(rhs: &RiccatiRhs<f64>, alpha: f64) -> Result<f64> {
    let s = solve_series(rhs, alpha, 80)?;
    let r = s.radius();
    Ok(if r.is_finite() && r > 0.0 { r } else { 1.0 })
}

/// Summary of a solve, for reporting.
#[derive(Debug, Clone, Serialize)]
pub struct SolveSummary {
    pub t_max: f64,
    pub n_steps: usize,
    pub exploded: bool,
    pub t_star_lo: Option<f64>,
    pub t_star_hi: Option<f64>,
}

impl<S: Scalar> From<&VieSolution<S>> for SolveSummary {
    fn from(s: &VieSolution<S>) -> Self {
        SolveSummary {
            t_max: s.grid.t_max,
            n_steps: s.grid.n_steps,
            exploded: s.exploded,
            t_star_lo: s.t_star_bracket.map(|b| b.0),
            t_star_hi: s.t_star_bracket.map(|b| b.1),
        }
    }
}
