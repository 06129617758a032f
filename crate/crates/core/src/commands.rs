//! The command implementations behind the `rough-heston` binary. Each command
//! turns a [`RunConfig`] into a [`Table`]; rows that could not be computed carry
//! an `error: …` note and are counted in [`Output::failed_rows`].

use std::fs::File;
use std::io::BufWriter;

use rayon::prelude::*;
use serde_json::json;

use crate::config::RunConfig;
use crate::error::{Error, Result};
use crate::export::{Cell, Table};
use crate::largetime::{classify_case, domain_endpoints, limiting_cgf, smile_infinity, u1, u2};
use crate::mgf::{log_mgf, Cgf, LambdaTable, SeriesCgf};
use crate::model::{expected_variance, theta_from_curve, VarianceCurve};
use crate::montecarlo::{
    calibrate_rho_t, mc_smile, mean_and_se, simulate, skew_integral, third_moment_closed_form, third_moment_general,
    SimConfig, SkewTermStructure,
};
use crate::pricing::{saddle_contour_call, EdgeworthPricer};
use crate::smalltime::asymptotic_smile;
use crate::special::FracGrid;

/// A command result: the table plus the number of rows that failed.
#[derive(Debug, Clone, PartialEq)]
pub struct Output {
    pub table: Table,
    pub failed_rows: usize,
}

fn error_note(e: &Error) -> Cell {
    Cell::Text(format!("error: {e}"))
}

fn finish(table: Table) -> Output {
    let failed_rows = match table.column("note") {
        Some(i) => table
            .rows
            .iter()
            .filter(|r| matches!(&r[i], Cell::Text(s) if s.starts_with("error")))
            .count(),
        None => 0,
    };
    Output { table, failed_rows }
}

fn sim_config(cfg: &RunConfig, maturity: f64) -> Result<SimConfig> {
    let mut sim = SimConfig::new(cfg.paths, cfg.steps, maturity, cfg.seed)?;
    sim.antithetic = cfg.antithetic;
    Ok(sim)
}

fn params_meta(table: &mut Table, cfg: &RunConfig) {
    table.meta("params", json!(cfg.params));
}

/// Central difference of a smooth scalar function.
fn derivative(f: impl Fn(f64) -> f64, p: f64, h: f64) -> f64 {
    (f(p + h) - f(p - h)) / (2.0 * h)
}

/// Leading-order, higher-order and Monte Carlo smiles for each maturity.
///
/// The leading order σ̂(x) uses the `series_terms`-term power series for Λ̄
/// with a numerical Fenchel-Legendre transform; the higher order prices along
/// the saddlepoint contour with the first correction included and reports the
/// exact implied volatility of that price.
pub fn cmd_smile(cfg: &RunConfig) -> Result<Output> {
    cfg.validate()?;
    let p = &cfg.params;
    let xs = cfg.x_grid();
    let lead = SeriesCgf::new(p, cfg.series_terms)?;
    let saddle = SeriesCgf::new(p, cfg.saddle_terms)?;
    let mut columns = vec!["maturity", "x", "sigma_hat", "sigma_higher_order"];
    if cfg.mc {
        columns.extend(["sigma_mc", "mc_stderr"]);
    }
    columns.push("note");
    let mut table = Table::new(&columns);
    params_meta(&mut table, cfg);
    if cfg.mc {
        table.meta(
            "mc",
            json!({"paths": cfg.paths, "steps": cfg.steps, "seed": cfg.seed, "antithetic": cfg.antithetic}),
        );
    }
    for &t in &cfg.maturities {
        let mc = if cfg.mc {
            Some(mc_smile(p, &sim_config(cfg, t)?, &xs)?)
        } else {
            None
        };
        let higher: Vec<_> = xs
            .par_iter()
            .map(|&x| saddle_contour_call(&saddle, p, x, t, true))
            .collect();
        for (i, &x) in xs.iter().enumerate() {
            let mut notes = Vec::new();
            let hat = asymptotic_smile(&lead, p, x).unwrap_or_else(|e| {
                notes.push(format!("error: sigma_hat: {e}"));
                f64::NAN
            });
            let ho = match &higher[i] {
                Ok(r) => r.implied_vol,
                Err(e) => {
                    notes.push(format!("error: sigma_higher_order: {e}"));
                    f64::NAN
                }
            };
            let mut row: Vec<Cell> = vec![t.into(), x.into(), hat.into(), ho.into()];
            if let Some(mc) = &mc {
                let pt = &mc[i];
                row.push(pt.vol.into());
                row.push(pt.vol_stderr.into());
                if let Some(flag) = &pt.flag {
                    notes.push(format!("mc: {flag}"));
                }
            }
            row.push(Cell::Text(notes.join("; ")));
            table.push(row);
        }
    }
    Ok(finish(table))
}

/// Λ̄(p) on a grid across (p₋, p₊), with the dual coordinates x = Λ̄'(p) and
/// I(x) = px − Λ̄(p), plus divergence markers at the critical moments.
pub fn cmd_rate(cfg: &RunConfig) -> Result<Output> {
    cfg.validate()?;
    let lt = LambdaTable::build(&cfg.params, cfg.table_steps)?;
    let (pm, pp) = (lt.p_minus(), lt.p_plus());
    let n = cfg.p_points;
    let mut ps: Vec<f64> = (1..n).rev().map(|j| pm * j as f64 / n as f64).collect();
    ps.push(0.0);
    ps.extend((1..n).map(|j| pp * j as f64 / n as f64));

    let mut table = Table::new(&["p", "lambda_bar", "x", "I", "marker"]);
    params_meta(&mut table, cfg);
    let a = cfg.params.alpha;
    table.meta(
        "critical",
        json!({
            "p_minus": pm,
            "p_plus": pp,
            "t_star_minus": (-pm).powf(1.0 / a),
            "t_star_plus": pp.powf(1.0 / a),
            "adams_steps": cfg.table_steps,
        }),
    );
    table.push(vec![
        pm.into(),
        f64::INFINITY.into(),
        Cell::Empty,
        Cell::Empty,
        "p_minus".into(),
    ]);
    let h = 1e-5 * (pp - pm);
    for &p in &ps {
        let lam = lt.lambda_bar(p);
        let x = if p == 0.0 {
            0.0
        } else {
            derivative(|q| lt.lambda_bar(q), p, h)
        };
        let rate = if p == 0.0 { 0.0 } else { p * x - lam };
        table.push(vec![p.into(), lam.into(), x.into(), rate.into(), "".into()]);
    }
    table.push(vec![
        pp.into(),
        f64::INFINITY.into(),
        Cell::Empty,
        Cell::Empty,
        "p_plus".into(),
    ]);
    Ok(finish(table))
}

/// V(p) = λθU₁(p) on the real-root interval, its Legendre dual V*(x) at
/// x = V'(p), and the large-time smile σ∞(x); with `verify`, the long-horizon
/// Adams estimate (1/t)·log E(e^{pX_t}).
pub fn cmd_largetime(cfg: &RunConfig) -> Result<Output> {
    cfg.validate()?;
    let p = &cfg.params;
    let (lo, hi) = domain_endpoints(p)?;
    let n = 2 * cfg.p_points;
    let mut ps: Vec<f64> = (0..n).map(|i| lo + (hi - lo) * (i as f64 + 0.5) / n as f64).collect();
    ps.extend([0.0, 1.0]);
    ps.sort_by(f64::total_cmp);
    ps.dedup();

    let mut columns = vec!["p", "case", "U1", "U2", "V", "x", "V_star", "sigma_infinity"];
    if cfg.verify {
        columns.push("V_adams");
    }
    columns.push("note");
    let mut table = Table::new(&columns);
    params_meta(&mut table, cfg);
    table.meta("domain", json!({"p_lower": lo, "p_upper": hi}));
    if cfg.verify {
        table.meta(
            "verify",
            json!({"horizon": cfg.verify_horizon, "steps": cfg.verify_steps}),
        );
    }
    let h = 1e-6 * (hi - lo);
    let verify: Vec<Option<Result<f64>>> = ps
        .par_iter()
        .map(|&q| {
            cfg.verify.then(|| {
                let m = log_mgf(p, q, cfg.verify_horizon, cfg.verify_steps)?;
                Ok(if m.finite {
                    m.log_mgf / cfg.verify_horizon
                } else {
                    f64::INFINITY
                })
            })
        })
        .collect();
    for (i, &q) in ps.iter().enumerate() {
        let mut notes = Vec::new();
        let case = classify_case(p, q);
        let u = u1(p, q).unwrap_or(f64::NAN);
        let corr = u2(p, q).unwrap_or(f64::NAN);
        let v = limiting_cgf(p, q);
        let x = derivative(|r| limiting_cgf(p, r), q, h);
        let v_star = q * x - v;
        let sigma = smile_infinity(p, x).unwrap_or_else(|e| {
            notes.push(format!("error: sigma_infinity: {e}"));
            f64::NAN
        });
        let mut row: Vec<Cell> = vec![
            q.into(),
            format!("{:?}", case.case).into(),
            u.into(),
            corr.into(),
            v.into(),
            x.into(),
            v_star.into(),
            sigma.into(),
        ];
        if let Some(check) = &verify[i] {
            row.push(match check {
                Ok(v) => (*v).into(),
                Err(e) => {
                    notes.push(format!("error: V_adams: {e}"));
                    f64::NAN.into()
                }
            });
        }
        row.push(Cell::Text(notes.join("; ")));
        table.push(row);
    }
    Ok(finish(table))
}

/// The H = 0 limit smile σ̂₀(x) (requires α = ½).
pub fn cmd_h0(cfg: &RunConfig) -> Result<Output> {
    cfg.validate()?;
    let pricer = EdgeworthPricer::new(&cfg.params, &cfg.quad)?;
    let mut table = Table::new(&["x", "sigma_0", "otm_price", "note"]);
    params_meta(&mut table, cfg);
    table.meta(
        "quadrature",
        json!({"points": cfg.quad.n_points, "u_max": cfg.quad.u_max, "a_plus": pricer.a_plus, "a_minus": pricer.a_minus}),
    );
    table.meta(
        "critical_estimate",
        json!({"p_minus": pricer.critical.0, "p_plus": pricer.critical.1}),
    );
    for x in cfg.x_grid() {
        let price = pricer.otm_price(x)?;
        match pricer.smile(x) {
            Ok(s) => table.push(vec![x.into(), s.into(), price.into(), "".into()]),
            Err(e) => table.push(vec![x.into(), f64::NAN.into(), price.into(), error_note(&e)]),
        }
    }
    Ok(finish(table))
}

/// Monte Carlo diagnostics per maturity: martingale check, mean terminal
/// variance against the forward variance, and the third moment of the
/// driftless log-price against its closed form. Optionally dumps the samples.
pub fn cmd_mc(cfg: &RunConfig) -> Result<Output> {
    cfg.validate()?;
    let p = &cfg.params;
    let mut table = Table::new(&["maturity", "statistic", "estimate", "stderr", "reference"]);
    params_meta(&mut table, cfg);
    table.meta(
        "mc",
        json!({"paths": cfg.paths, "steps": cfg.steps, "seed": cfg.seed, "antithetic": cfg.antithetic}),
    );
    let xi0 = |s: f64| expected_variance(p, s).unwrap_or(f64::NAN);
    for (i, &t) in cfg.maturities.iter().enumerate() {
        let sim_cfg = sim_config(cfg, t)?;
        let sim = simulate(p, &sim_cfg)?;
        if let Some(path) = &cfg.samples {
            let path = if cfg.maturities.len() == 1 {
                path.clone()
            } else {
                path.with_extension(format!("{i}.bin"))
            };
            sim.write_binary(BufWriter::new(File::create(&path)?))?;
        }
        let stat = |table: &mut Table, name: &str, xs: &[f64], reference: f64| {
            let (m, se) = mean_and_se(xs);
            table.push(vec![t.into(), name.into(), m.into(), se.into(), reference.into()]);
        };
        let ex: Vec<f64> = sim.x.iter().map(|x| x.exp()).collect();
        stat(&mut table, "mean_exp_x", &ex, 1.0);
        stat(&mut table, "mean_x", &sim.x, f64::NAN);
        stat(&mut table, "mean_v_t", &sim.v_t, expected_variance(p, t)?);
        stat(&mut table, "mean_int_v", &sim.int_v, f64::NAN);

        let mut drift_free = sim_cfg;
        drift_free.driftless = true;
        let sim = simulate(p, &drift_free)?;
        let m3: Vec<f64> = sim
            .cond_mean
            .iter()
            .zip(&sim.cond_var)
            .map(|(&m, &s2)| m * m * m + 3.0 * m * s2)
            .collect();
        let reference = if p.lambda == 0.0 {
            third_moment_closed_form(p, t)?
        } else {
            third_moment_general(p, &xi0, t)?
        };
        stat(&mut table, "third_moment_driftless", &m3, reference);
    }
    Ok(finish(table))
}

fn load_curve(cfg: &RunConfig) -> Result<Option<VarianceCurve>> {
    cfg.variance_curve
        .as_deref()
        .map(VarianceCurve::from_csv_path)
        .transpose()
}

/// θ(t) that reproduces the forward variance curve in `variance_curve`
/// (flat at V₀ when none is given).
pub fn cmd_calibrate_theta(cfg: &RunConfig) -> Result<Output> {
    cfg.validate()?;
    let curve = match load_curve(cfg)? {
        Some(c) => c,
        None => VarianceCurve::flat(cfg.params.v0)?,
    };
    let grid = FracGrid::new(cfg.theta_horizon, cfg.theta_steps)?;
    let theta = theta_from_curve(&cfg.params, &curve, &grid)?;
    let mut table = Table::new(&["t", "xi0", "theta"]);
    params_meta(&mut table, cfg);
    for (t, th) in grid.nodes().into_iter().zip(theta) {
        table.push(vec![t.into(), curve.eval(t).into(), th.into()]);
    }
    Ok(finish(table))
}

/// ρ(T) = m₃(T)/(3D(T)) for the target third moments, using the forward
/// variance curve from `variance_curve` or the model's own E(V_t).
pub fn cmd_calibrate_rho(cfg: &RunConfig) -> Result<Output> {
    cfg.validate()?;
    let s = SkewTermStructure::new(cfg.skew_maturities.clone(), cfg.skew_moments.clone())?;
    let curve = load_curve(cfg)?;
    let p = &cfg.params;
    let xi0 = |t: f64| match &curve {
        Some(c) => c.eval(t),
        None => expected_variance(p, t).unwrap_or(f64::NAN),
    };
    let points = calibrate_rho_t(p, &xi0, &s)?;
    let mut table = Table::new(&["maturity", "third_moment", "skew_integral", "rho", "rho_raw", "note"]);
    params_meta(&mut table, cfg);
    table.meta(
        "interpretation",
        json!("the target third moments are read as E(X_T^3) at each maturity T of the driftless log-price"),
    );
    for (pt, m3) in points.iter().zip(&s.third_moments) {
        let d = skew_integral(p, &xi0, pt.maturity)?;
        let note = if pt.feasible {
            ""
        } else {
            "infeasible: |rho| >= 1, clamped"
        };
        table.push(vec![
            pt.maturity.into(),
            (*m3).into(),
            d.into(),
            pt.rho.into(),
            pt.raw.into(),
            note.into(),
        ]);
    }
    Ok(finish(table))
}
