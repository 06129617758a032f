//! Closed-form classical Heston results (α = 1) used as independent oracles.
//!
//! Nothing here calls into the library's solvers: the characteristic function is
//! the "little trap" closed form, prices come from the original two-probability
//! formula with composite Gauss-Legendre quadrature, and the small-time cumulant
//! generating function is the explicit tangent solution of the driftless
//! Riccati equation.
#![allow(dead_code)]

use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64 as C64;

/// Classical Heston parameters: dV = κ(θ − V)dt + σ√V dW, d⟨X, W⟩ = ρ√V dt.
#[derive(Debug, Clone, Copy)]
pub struct Heston {
    pub kappa: f64,
    pub theta: f64,
    pub sigma: f64,
    pub rho: f64,
    pub v0: f64,
}

impl Heston {
    /// log E(e^{qX_t}) for X₀ = 0.
    pub fn log_mgf(&self, q: C64, t: f64) -> C64 {
        let (k, s) = (self.kappa, self.sigma);
        let b = C64::new(k, 0.0) - q * (self.rho * s);
        let d = (b * b - (q * q - q) * (s * s)).sqrt();
        let g = (b - d) / (b + d);
        let e = (-d * t).exp();
        let one = C64::new(1.0, 0.0);
        let big_d = (b - d) / (s * s) * (one - e) / (one - g * e);
        let big_c = (k * self.theta / (s * s)) * ((b - d) * t - 2.0 * ((one - g * e) / (one - g)).ln());
        big_c + big_d * self.v0
    }

    /// Call price E(e^X − e^k)⁺ = P₁ − e^k P₂ with
    /// P_j = ½ + (1/π)∫₀^∞ Re[e^{−iuk}φ_j(u)/(iu)] du,
    /// φ₂(u) = E(e^{iuX}), φ₁(u) = E(e^{(1+iu)X}).
    pub fn call(&self, k: f64, t: f64) -> f64 {
        let prob = |shift: f64| {
            let f = |u: f64| {
                let q = C64::new(shift, u);
                let phi = (self.log_mgf(q, t) - C64::new(0.0, u * k)).exp();
                (phi / C64::new(0.0, u)).re
            };
            // geometric panels, 64-point Gauss-Legendre each; the integrand decays exponentially
            let (nodes, weights) = gauss_legendre(64);
            let mut acc = 0.0;
            let mut lo = 0.0;
            let mut hi = 0.25;
            while lo < 400.0 {
                let (mid, half) = (0.5 * (lo + hi), 0.5 * (hi - lo));
                for (x, w) in nodes.iter().zip(&weights) {
                    acc += half * w * f(mid + half * x);
                }
                lo = hi;
                hi *= 2.0;
            }
            0.5 + acc / PI
        };
        prob(1.0) - k.exp() * prob(0.0)
    }
}

/// Gauss-Legendre nodes and weights on [−1, 1] by Newton iteration on P_n.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        nodes[i] = x;
        weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    (nodes, weights)
}

/// Blow-up time of w' = a + bw + cw², w(0) = 0 (c > 0); +∞ if the solution stays finite.
pub fn riccati_blowup(a: f64, b: f64, c: f64) -> f64 {
    let omega2 = a * c - 0.25 * b * b;
    if omega2 > 0.0 {
        // w + b/(2c) = (ω/c)·tan(ωt + φ) with tan φ = b/(2ω)
        let omega = omega2.sqrt();
        (FRAC_PI_2 - (b / (2.0 * omega)).atan()) / omega
    } else if a <= 0.0 {
        f64::INFINITY
    } else {
        let sq = (0.25 * b * b - a * c).sqrt();
        let (r1, r2) = ((-0.5 * b - sq) / c, (-0.5 * b + sq) / c);
        if r2 > 0.0 {
            // rises to the smaller (positive) root
            f64::INFINITY
        } else {
            (r1 / r2).ln() / (c * (r2 - r1))
        }
    }
}

/// Solution at t of w' = a + bw + cw², w(0) = 0, in the oscillatory regime
/// a·c > b²/4 (the driftless small-time case); +∞ past the blow-up time.
pub fn riccati_tan(a: f64, b: f64, c: f64, t: f64) -> f64 {
    let omega = (a * c - 0.25 * b * b).sqrt();
    let arg = omega * t + (b / (2.0 * omega)).atan();
    if arg >= FRAC_PI_2 {
        return f64::INFINITY;
    }
    (omega / c) * arg.tan() - b / (2.0 * c)
}

/// Classical small-time cumulant generating function Λ̄(p) = V₀ψ(p, 1) with
/// ψ' = ½p² + pρνψ + ½ν²ψ².
pub fn small_time_cgf(nu: f64, rho: f64, v0: f64, p: f64) -> f64 {
    if p == 0.0 {
        return 0.0;
    }
    v0 * riccati_tan(0.5 * p * p, p * rho * nu, 0.5 * nu * nu, 1.0)
}

/// Critical moments (p₋, p₊) of the classical small-time cgf: T*(p) = 1 with
/// T*(p) = (2/(|p|νρ̄))(π/2 − arctan(sgn(p)ρ/ρ̄)).
pub fn small_time_critical(nu: f64, rho: f64) -> (f64, f64) {
    let rb = (1.0 - rho * rho).sqrt();
    let plus = 2.0 / (nu * rb) * (FRAC_PI_2 - (rho / rb).atan());
    let minus = -2.0 / (nu * rb) * (FRAC_PI_2 + (rho / rb).atan());
    (minus, plus)
}

/// Golden-section maximum of a unimodal function on [lo, hi].
pub fn golden_sup(f: impl Fn(f64) -> f64, lo: f64, hi: f64) -> f64 {
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let (mut a, mut b) = (lo, hi);
    for _ in 0..300 {
        let c = b - g * (b - a);
        let d = a + g * (b - a);
        if f(c) >= f(d) {
            b = d;
        } else {
            a = c;
        }
    }
    f(0.5 * (a + b))
}

/// Classical small-time rate function I(x) = sup_p (px − Λ̄(p)).
pub fn small_time_rate(nu: f64, rho: f64, v0: f64, x: f64) -> f64 {
    let (pm, pp) = small_time_critical(nu, rho);
    let (lo, hi) = if x >= 0.0 { (0.0, pp) } else { (pm, 0.0) };
    golden_sup(|p| p * x - small_time_cgf(nu, rho, v0, p), lo, hi)
}
