//! End-to-end acceptance checks. Runs every check, prints one PASS/FAIL line
//! each, and exits non-zero if any check fails.

mod common;

use std::process::ExitCode;
use std::time::{Duration, Instant};

use num_complex::Complex64;

use common::{riccati_blowup, small_time_rate, Heston};
use rough_heston::commands::cmd_smile;
use rough_heston::config::RunConfig;
use rough_heston::export::Cell;
use rough_heston::largetime::{limiting_cgf, u1};
use rough_heston::mgf::{log_mgf, LambdaTable, SeriesCgf};
use rough_heston::model::ModelParams;
use rough_heston::montecarlo::{mc_smile, third_moment_closed_form, third_moment_mc, SimConfig};
use rough_heston::pricing::{lewis_call, saddle_contour_call, EdgeworthPricer, ExactMgf, QuadratureSpec};
use rough_heston::riccati::{explosion_hint, explosion_time, solve_adams, RiccatiRhs};
use rough_heston::smalltime::{critical_moments, rate_function, smile_series_coeffs, transform_smile};
use rough_heston::special::FracGrid;

/// Reference smile for α = 0.75, V₀ = 0.04, ν = 0.15, ρ = −0.02, λ = 0, in percent:
/// x, σ̂(x), higher order (T = 0.00005), Monte Carlo (T = 0.00005),
/// higher order (T = 0.005), Monte Carlo (T = 0.005). NaN where no value is quoted.
const REFERENCE: [[f64; 6]; 11] = [
    [-0.10, 20.2068, 20.2023, 20.2020, 20.1615, 20.1589],
    [-0.08, 20.141, 20.1364, 20.1363, 20.0953, 20.0931],
    [-0.06, 20.0869, 20.0822, 20.0824, 20.0407, 20.0388],
    [-0.04, 20.045, 20.0404, 20.0407, 19.9986, 19.9968],
    [-0.02, 20.016, 20.0113, 20.0119, 19.9693, 19.9676],
    [0.00, 20.0000, f64::NAN, 19.9942, f64::NAN, 19.9513],
    [0.02, 19.9973, 19.9926, 19.9921, 19.9503, 19.9509],
    [0.04, 20.0079, 20.0033, 20.0029, 19.9610, 19.9613],
    [0.06, 20.0316, 20.0270, 20.0266, 19.9850, 19.9850],
    [0.08, 20.068, 20.0634, 20.0629, 20.0218, 20.0213],
    [0.10, 20.1166, 20.1120, 20.1114, 20.0709, 20.0699],
];

type Check = fn() -> Result<String, String>;

fn table_params() -> ModelParams {
    ModelParams::new(0.75, 0.0, 0.04, 0.15, -0.02, 0.04).unwrap()
}

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(elapsed: Duration, limit_s: f64) -> Result<(), String> {
    ensure(elapsed.as_secs_f64() < limit_s, || {
        format!("took {:.1} s, limit {limit_s} s", elapsed.as_secs_f64())
    })
}

fn num(c: &Cell) -> f64 {
    match c {
        Cell::Num(v) => *v,
        _ => f64::NAN,
    }
}

/// Leading-order smile column from the 15-term series and a numerical
/// Fenchel-Legendre transform, through the `smile` command.
fn leading_order_table() -> Result<String, String> {
    let start = Instant::now();
    let cfg = RunConfig {
        mc: false,
        maturities: vec![0.00005],
        ..RunConfig::preset("table").map_err(|e| e.to_string())?
    };
    let out = cmd_smile(&cfg).map_err(|e| e.to_string())?;
    let (ix, is) = (out.table.column("x").unwrap(), out.table.column("sigma_hat").unwrap());
    let mut worst: f64 = 0.0;
    for (row, reference) in out.table.rows.iter().zip(&REFERENCE) {
        ensure((num(&row[ix]) - reference[0]).abs() < 1e-12, || "grid mismatch".into())?;
        let dev = (num(&row[is]) - reference[1] / 100.0).abs();
        ensure(dev <= 1.5e-4, || format!("x = {}: deviation {dev:.2e}", reference[0]))?;
        worst = worst.max(dev);
    }
    within(start.elapsed(), 30.0)?;
    Ok(format!(
        "max |dσ| = {worst:.2e} over 11 strikes in {:.2} s",
        start.elapsed().as_secs_f64()
    ))
}

/// Higher-order smile from saddlepoint-contour pricing with the first correction.
fn higher_order_table() -> Result<String, String> {
    let start = Instant::now();
    let p = table_params();
    let cgf = SeriesCgf::new(&p, 60).map_err(|e| e.to_string())?;
    let mut worst: f64 = 0.0;
    for (t, col) in [(0.00005, 2), (0.005, 4)] {
        for r in REFERENCE.iter().filter(|r| r[col].is_finite()) {
            let v = saddle_contour_call(&cgf, &p, r[0], t, true)
                .map_err(|e| e.to_string())?
                .implied_vol;
            let dev = (v - r[col] / 100.0).abs();
            ensure(dev <= 3e-4, || format!("T = {t}, x = {}: deviation {dev:.2e}", r[0]))?;
            worst = worst.max(dev);
        }
    }
    within(start.elapsed(), 120.0)?;
    Ok(format!(
        "max |dσ| = {worst:.2e} over 20 quotes in {:.2} s",
        start.elapsed().as_secs_f64()
    ))
}

/// Explosion times of the driftless equation at p = ±1.
fn explosion_times() -> Result<String, String> {
    let start = Instant::now();
    let p = table_params();
    let (pm, pp) = critical_moments(&p).map_err(|e| e.to_string())?;
    let t_plus = pp.powf(1.0 / p.alpha);
    let t_minus = (-pm).powf(1.0 / p.alpha);
    ensure((t_plus - 34.5).abs() <= 0.5, || format!("T*(1) = {t_plus}"))?;
    ensure((t_minus - 33.25).abs() <= 0.5, || format!("T*(-1) = {t_minus}"))?;
    within(start.elapsed(), 10.0)?;
    Ok(format!(
        "T*(1) = {t_plus:.3}, T*(-1) = {t_minus:.3} in {:.2} s",
        start.elapsed().as_secs_f64()
    ))
}

/// Monte Carlo smile at T = 0.00005 against the reference Monte Carlo column.
fn monte_carlo_bracket() -> Result<String, String> {
    let start = Instant::now();
    let p = table_params();
    let cfg = SimConfig::new(10_000, 500, 0.00005, 2024).map_err(|e| e.to_string())?;
    let xs: Vec<f64> = REFERENCE.iter().map(|r| r[0]).collect();
    let smile = mc_smile(&p, &cfg, &xs).map_err(|e| e.to_string())?;
    let mut worst: f64 = 0.0;
    for (pt, r) in smile.iter().zip(&REFERENCE) {
        let (v, se) = (pt.vol.ok_or("no implied vol")?, pt.vol_stderr.ok_or("no stderr")?);
        let z = (v - r[3] / 100.0).abs() / se;
        ensure(z <= 2.0, || {
            format!("x = {}: {v} vs {} ({z:.2} standard errors)", r[0], r[3] / 100.0)
        })?;
        worst = worst.max(z);
    }
    within(start.elapsed(), 600.0)?;
    Ok(format!(
        "max |z| = {worst:.2} over 11 strikes in {:.2} s",
        start.elapsed().as_secs_f64()
    ))
}

/// At α = 1 the log-mgf, the small-time rate function and Lewis prices match
/// the closed-form Heston model.
fn classical_limit() -> Result<String, String> {
    let start = Instant::now();
    let sets = [(2.0, 0.05, 0.4, -0.1, 0.04), (0.5, 0.05, 1.5, 0.3, 0.04)];
    let mut worst_mgf: f64 = 0.0;
    let mut exploded = 0;
    for (kappa, theta, nu, rho, v0) in sets {
        let p = ModelParams::new(1.0, kappa, theta, nu, rho, v0).map_err(|e| e.to_string())?;
        let h = Heston {
            kappa,
            theta,
            sigma: nu,
            rho,
            v0,
        };
        for i in 0..=20 {
            let q = -2.0 + 0.25 * i as f64;
            let t_star = riccati_blowup(0.5 * (q * q - q), q * rho * nu - kappa, 0.5 * nu * nu);
            let m = log_mgf(&p, q, 1.0, 2000).map_err(|e| e.to_string())?;
            if t_star < 0.9 {
                ensure(!m.finite, || format!("p = {q}: explosion at {t_star} not detected"))?;
                exploded += 1;
            } else if t_star > 1.2 {
                let want = h.log_mgf(Complex64::new(q, 0.0), 1.0).re;
                let dev = (m.log_mgf - want).abs() / want.abs().max(1.0);
                ensure(m.finite && dev <= 1e-6, || {
                    format!("p = {q}: log-mgf {} vs {want}", m.log_mgf)
                })?;
                worst_mgf = worst_mgf.max(dev);
            }
        }
    }
    ensure(exploded > 0, || "no explosive case exercised".into())?;

    let (kappa, theta, nu, rho, v0) = sets[0];
    let p = ModelParams::new(1.0, kappa, theta, nu, rho, v0).map_err(|e| e.to_string())?;
    let table = LambdaTable::build(&p, 2000).map_err(|e| e.to_string())?;
    let mut worst_rate: f64 = 0.0;
    for i in 0..=12 {
        let x = -0.3 + 0.05 * i as f64;
        let dev = (rate_function(&table, x).rate - small_time_rate(nu, rho, v0, x)).abs();
        ensure(dev <= 1e-6, || format!("x = {x}: rate deviation {dev:.2e}"))?;
        worst_rate = worst_rate.max(dev);
    }

    let h = Heston {
        kappa,
        theta,
        sigma: nu,
        rho,
        v0,
    };
    let mgf = ExactMgf {
        params: p,
        t: 1.0,
        n_steps: 1000,
    };
    let quad = QuadratureSpec::new(1600, 80.0).map_err(|e| e.to_string())?;
    let mut worst_price: f64 = 0.0;
    for i in 0..=6 {
        let k = -0.3 + 0.1 * i as f64;
        let c = lewis_call(&mgf, k, &quad).map_err(|e| e.to_string())?.price;
        let dev = (c - h.call(k, 1.0)).abs();
        ensure(dev <= 1e-6, || format!("k = {k}: price deviation {dev:.2e}"))?;
        worst_price = worst_price.max(dev);
    }
    Ok(format!(
        "log-mgf {worst_mgf:.1e} ({exploded} explosions detected), rate {worst_rate:.1e}, price {worst_price:.1e} in {:.2} s",
        start.elapsed().as_secs_f64()
    ))
}

/// ε^α ψ(ε^{−α}p, εt) = ψ(p, t) on the solver output, and p·T*(p)^α constant.
fn scaling_law() -> Result<String, String> {
    let start = Instant::now();
    let p = table_params();
    let a = p.alpha;
    let solve = |q: f64, t: f64| -> Result<f64, String> {
        let grid = FracGrid::new(t, 2000).map_err(|e| e.to_string())?;
        let sol = solve_adams(&RiccatiRhs::driftless(&p, q), a, &grid).map_err(|e| e.to_string())?;
        Ok(sol.last())
    };
    let base = solve(1.0, 0.5)?;
    let mut worst: f64 = 0.0;
    for eps in [0.25_f64, 0.5] {
        let scaled = eps.powf(a) * solve(eps.powf(-a), eps * 0.5)?;
        let dev = (scaled - base).abs();
        ensure(dev <= 1e-6, || format!("ε = {eps}: {scaled} vs {base}"))?;
        worst = worst.max(dev);
    }
    let products: Vec<f64> = [0.5, 1.0, 2.0]
        .iter()
        .map(|&q| {
            let rhs = RiccatiRhs::driftless(&p, q);
            let hint = explosion_hint(&rhs, a).map_err(|e| e.to_string())?;
            Ok(q * explosion_time(&rhs, a, hint, 2000).map_err(|e| e.to_string())?.powf(a))
        })
        .collect::<Result<_, String>>()?;
    let (lo, hi) = products
        .iter()
        .fold((f64::INFINITY, 0.0_f64), |(l, h), &v| (l.min(v), h.max(v)));
    let spread = hi / lo - 1.0;
    ensure(spread <= 0.005, || {
        format!("p·T*(p)^α spread {spread:.3e}: {products:?}")
    })?;
    Ok(format!(
        "max scaling deviation {worst:.1e}, p·T*(p)^α spread {:.2e} in {:.2} s",
        spread,
        start.elapsed().as_secs_f64()
    ))
}

/// Long-horizon behaviour of the full equation in the stable case.
fn large_time() -> Result<String, String> {
    let start = Instant::now();
    let p = ModelParams::new(0.75, 2.0, 0.05, 0.4, -0.1, 0.04).unwrap();
    let q = 2.0;
    let m = log_mgf(&p, q, 50.0, 4000).map_err(|e| e.to_string())?;
    let v = limiting_cgf(&p, q);
    let rel = (m.log_mgf / 50.0 - v).abs() / v.abs();
    ensure(rel <= 0.05, || {
        format!("(1/t)·log-mgf = {} vs V = {v}", m.log_mgf / 50.0)
    })?;

    let u = u1(&p, q).map_err(|e| e.to_string())?;
    let grid = FracGrid::new(80.0, 8000).map_err(|e| e.to_string())?;
    let sol = solve_adams(&RiccatiRhs::full(&p, q), p.alpha, &grid).map_err(|e| e.to_string())?;
    ensure(sol.is_complete(), || "solution exploded".into())?;
    for w in sol.values.windows(2) {
        ensure(w[1] >= w[0] && w[1] <= u, || {
            format!("f not increasing towards U₁ = {u}")
        })?;
    }
    let (mut sx, mut sy, mut sxx, mut sxy, mut n) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for (k, f) in sol.values.iter().enumerate() {
        let t = grid.node(k);
        if t >= 20.0 {
            let (x, y) = (t.ln(), (u - f).ln());
            sx += x;
            sy += y;
            sxx += x * x;
            sxy += x * y;
            n += 1.0;
        }
    }
    let slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    ensure((slope + p.alpha).abs() <= 0.05, || format!("tail exponent {slope}"))?;
    within(start.elapsed(), 60.0)?;
    Ok(format!(
        "relative gap {rel:.2e} at t = 50, monotone, tail exponent {slope:.4} in {:.2} s",
        start.elapsed().as_secs_f64()
    ))
}

/// Monte Carlo third moment of the driftless log-price against the closed
/// form, and its boundedness as α decreases to ½.
fn skewness() -> Result<String, String> {
    let start = Instant::now();
    let p = ModelParams::new(0.75, 0.0, 0.04, 0.2, -0.1, 0.04).unwrap();
    let t = 0.5;
    let cfg = SimConfig::new(10_000, 300, t, 7).map_err(|e| e.to_string())?;
    let (m, se) = third_moment_mc(&p, &cfg).map_err(|e| e.to_string())?;
    let exact = third_moment_closed_form(&p, t).map_err(|e| e.to_string())?;
    let z = (m - exact).abs() / se;
    ensure(z <= 3.0, || format!("MC {m:.4e} ± {se:.1e} vs closed form {exact:.4e}"))?;

    let limit = third_moment_closed_form(&p.with_alpha(0.5).unwrap(), t).map_err(|e| e.to_string())?;
    let mut scan = Vec::new();
    for a in [0.55, 0.52, 0.51] {
        let (ma, _) = third_moment_mc(&p.with_alpha(a).unwrap(), &cfg).map_err(|e| e.to_string())?;
        ensure(ma.is_finite() && ma.abs() <= 1.25 * limit.abs(), || {
            format!("α = {a}: third moment {ma:.4e} vs limit {limit:.4e}")
        })?;
        scan.push(ma);
    }
    let gap = (scan[2] - limit).abs() / limit.abs();
    Ok(format!(
        "z = {z:.2} at α = 0.75; α ∈ {{0.55, 0.52, 0.51}} → [{:.3e}, {:.3e}, {:.3e}], α = ½ value {limit:.3e} (gap {:.1}%) in {:.2} s",
        scan[0],
        scan[1],
        scan[2],
        100.0 * gap,
        start.elapsed().as_secs_f64()
    ))
}

/// Shape, symmetry and quadrature stability of the H = 0 limit smile.
fn edgeworth_smile() -> Result<String, String> {
    let start = Instant::now();
    let p = ModelParams::new(0.5, 0.0, 0.04, 0.2, -0.1, 0.04).unwrap();
    let quad = QuadratureSpec::new(1600, 40.0).map_err(|e| e.to_string())?;
    let xs = [-0.3, -0.2, -0.1, 0.1, 0.2, 0.3];
    let smile = |params: &ModelParams, q: &QuadratureSpec| -> Result<Vec<f64>, String> {
        let pricer = EdgeworthPricer::new(params, q).map_err(|e| e.to_string())?;
        xs.iter().map(|&x| pricer.smile(x).map_err(|e| e.to_string())).collect()
    };
    let s = smile(&p, &quad)?;
    let spread = s.iter().cloned().fold(f64::NEG_INFINITY, f64::max) - s.iter().cloned().fold(f64::INFINITY, f64::min);
    ensure(spread > 1e-3, || format!("smile is flat: {s:?}"))?;
    ensure(s[2] > s[3], || {
        format!("σ(−0.1) = {} not above σ(0.1) = {}", s[2], s[3])
    })?;

    let sym = smile(&p.with_rho(0.0).unwrap(), &quad)?;
    let asym = (0..3).map(|i| (sym[i] - sym[5 - i]).abs()).fold(0.0, f64::max);
    ensure(asym <= 1e-8, || format!("ρ = 0 asymmetry {asym:.2e}"))?;

    let fine = smile(&p, &quad.doubled())?;
    let change = s.iter().zip(&fine).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    ensure(change <= 1e-6, || {
        format!("doubling the quadrature moved vols by {change:.2e}")
    })?;
    within(start.elapsed(), 60.0)?;
    Ok(format!(
        "σ(−0.1) = {:.4}, σ(0.1) = {:.4}, ρ = 0 asymmetry {asym:.1e}, refinement change {change:.1e} in {:.2} s",
        s[2],
        s[3],
        start.elapsed().as_secs_f64()
    ))
}

/// Finite differences of the transform-based smile at the money against the
/// closed-form level, skew and convexity.
fn smile_series() -> Result<String, String> {
    let start = Instant::now();
    let p = table_params();
    let cgf = SeriesCgf::new(&p, 60).map_err(|e| e.to_string())?;
    let h = 0.005;
    let s = |x: f64| transform_smile(&cgf, &p, x).map_err(|e| e.to_string());
    let (sm, s0, sp) = (s(-h)?, s(0.0)?, s(h)?);
    let fd = [s0, (sp - sm) / (2.0 * h), (sp - 2.0 * s0 + sm) / (2.0 * h * h)];
    let series = smile_series_coeffs(&p);
    let want = [series.sigma0, series.skew, series.convexity];
    let mut worst: f64 = 0.0;
    for (name, (got, w)) in ["level", "skew", "convexity"].iter().zip(fd.iter().zip(&want)) {
        let rel = (got - w).abs() / w.abs();
        ensure(rel <= 0.01, || {
            format!("{name}: finite difference {got:.6e} vs series {w:.6e}")
        })?;
        worst = worst.max(rel);
    }
    let classical = ModelParams::new(1.0, 0.0, 0.04, 0.3, -0.5, 0.04).unwrap();
    let skew = smile_series_coeffs(&classical).skew;
    let exact = classical.rho * classical.nu / (4.0 * classical.v0.sqrt());
    ensure((skew - exact).abs() <= 1e-10, || {
        format!("α = 1 skew {skew} vs {exact}")
    })?;
    Ok(format!(
        "max relative deviation {worst:.2e}; α = 1 skew error {:.1e} in {:.2} s",
        (skew - exact).abs(),
        start.elapsed().as_secs_f64()
    ))
}

fn main() -> ExitCode {
    let checks: [(&str, Check); 10] = [
        ("leading-order smile table", leading_order_table),
        ("higher-order smile table", higher_order_table),
        ("explosion times at p = ±1", explosion_times),
        ("Monte Carlo smile bracket", monte_carlo_bracket),
        ("classical Heston limit", classical_limit),
        ("scaling law", scaling_law),
        ("large-time limit", large_time),
        ("third-moment skewness", skewness),
        ("H = 0 smile properties", edgeworth_smile),
        ("at-the-money smile series", smile_series),
    ];
    let mut failures = 0;
    for (i, (name, check)) in checks.iter().enumerate() {
        match check() {
            Ok(detail) => println!("[PASS] {:>2}. {name}: {detail}", i + 1),
            Err(why) => {
                failures += 1;
                println!("[FAIL] {:>2}. {name}: {why}", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failures} failed", checks.len() - failures);
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
