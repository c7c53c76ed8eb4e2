//! Named sweeps. Grid points run on the worker pool and are merged in input
//! order, so output is identical for any pool size.

use crate::config::{Config, NRule};
use crate::fit::fit_exponent;
use crate::output::{Report, Table};
use crate::window::half_peak_width;
use anyhow::{bail, Context};
use num_complex::Complex64 as C;
use rayon::prelude::*;
use std::f64::consts::PI;
use triperiod_core::asympt::{calibration, h_main_term, l_kernel_approx, remainder_budget_ii};
use triperiod_core::betacore::{std_beta, std_beta_main};
use triperiod_core::func::Compact;
use triperiod_core::repn::{make_test_vector, CircleFunction, RepParams, SpectralParam, TestKind};
use triperiod_core::spectral::{gen_spectrum, parseval_sum, ParsevalMode, WeightModel};
use triperiod_core::trilinear::{default_tol, h_form_detailed, l_kernel};
use triperiod_core::Result;

pub const EXPERIMENTS: [&str; 7] = ["kernel-slope", "airy-peak", "airy-window", "tilde-ratio", "fg-bridge", "beta-slope", "spectrum-totals"];

/// Tolerance for the one-dimensional kernel and Beta integrals.
pub const FINE_TOL: f64 = 1e-10;

fn tol_at(tol: Option<f64>, t: f64) -> f64 {
    tol.unwrap_or_else(|| default_tol(t))
}

fn par_rows<T: Sync>(items: &[T], f: impl Fn(&T) -> Result<Vec<f64>> + Sync + Send) -> Result<Vec<Vec<f64>>> {
    items.par_iter().map(f).collect()
}

fn add_fit(r: &mut Report, x: &str, y: &str) -> Result<()> {
    let (xs, ys) = (r.table.column(x).expect("column"), r.table.column(y).expect("column"));
    let fit = fit_exponent(&xs.into_iter().zip(ys).collect::<Vec<_>>())?;
    r.set("slope", fit.slope);
    r.set("intercept", fit.intercept);
    r.set("r2", fit.r2);
    Ok(())
}

fn extremes(v: &[f64]) -> (f64, f64) {
    v.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| (lo.min(x), hi.max(x)))
}

/// |l_kernel − main term| against t at fixed c.
pub fn kernel_slope(p: &RepParams, c: f64, ts: &[f64], tol: Option<f64>) -> Result<Report> {
    let tol = tol.unwrap_or(FINE_TOL);
    let mut r = Report { table: Table::new(&["t", "error", "oracle_err", "budget"]), ..Default::default() };
    r.table.rows = par_rows(ts, |&t| {
        let lam = SpectralParam::Principal(t);
        let q = l_kernel(p, &lam, c, tol)?;
        let a = l_kernel_approx(p, &lam, c)?;
        Ok(vec![t, (q.value - a.main_term).norm(), q.err_estimate, a.remainder_budget])
    })?;
    r.set("c", c);
    add_fit(&mut r, "t", "error")?;
    Ok(r)
}

/// H_t(w_n) for the plain vector with n from the rule; the rule `half`
/// puts t on the Airy peak line t = 2n.
pub fn airy_peak(p: &RepParams, ts: &[f64], rule: NRule, tol: Option<f64>) -> Result<Report> {
    let mut r = Report { table: Table::new(&["t", "n", "h", "h_err", "h_main"]), ..Default::default() };
    r.table.rows = par_rows(ts, |&t| {
        let n = rule.n_for(t);
        let (h, err, _) = h_form_detailed(p, &SpectralParam::Principal(t), &make_test_vector(n, TestKind::Plain)?, tol_at(tol, t))?;
        Ok(vec![t, n as f64, h, err, h_main_term(t, n)?])
    })?;
    add_fit(&mut r, "t", "h")?;
    Ok(r)
}

/// Half-peak width of t ↦ H_t(w_n), n = T/2 rounded to even, at each T.
pub fn airy_window(p: &RepParams, ts: &[f64], tol: Option<f64>) -> Result<Report> {
    let mut r = Report { table: Table::new(&["T", "n", "t_peak", "h_peak", "t_lo", "t_hi", "width", "model_width", "evals"]), ..Default::default() };
    r.table.rows = par_rows(ts, |&big_t| {
        let n = NRule::Half.n_for(big_t);
        let w = make_test_vector(n, TestKind::Plain)?;
        let win = half_peak_width(n, &|t| h_form_detailed(p, &SpectralParam::Principal(t), &w, tol_at(tol, big_t)).map(|x| x.0))?;
        Ok(vec![big_t, n as f64, win.t_peak, win.h_peak, win.t_lo, win.t_hi, win.width, win.model_width, win.evals as f64])
    })?;
    add_fit(&mut r, "T", "width")?;
    Ok(r)
}

/// H_t(w̃_n) over the spectral budget.
pub fn tilde_ratio(p: &RepParams, ts: &[f64], rule: NRule, tol: Option<f64>) -> Result<Report> {
    let pairs: Vec<(f64, i64)> = ts.iter().map(|&t| (t, rule.n_for(t))).collect();
    tilde_ratio_pairs(p, &pairs, tol)
}

/// As [`tilde_ratio`] on explicit (t, n) pairs.
pub fn tilde_ratio_pairs(p: &RepParams, pairs: &[(f64, i64)], tol: Option<f64>) -> Result<Report> {
    let mut r = Report { table: Table::new(&["t", "n", "h", "h_err", "budget", "ratio"]), ..Default::default() };
    r.table.rows = par_rows(pairs, |&(t, n)| {
        let (h, err, _) = h_form_detailed(p, &SpectralParam::Principal(t), &make_test_vector(n, TestKind::Tilde)?, tol_at(tol, t))?;
        let b = remainder_budget_ii(p, t, n)?;
        Ok(vec![t, n as f64, h, err, b, h / b])
    })?;
    let ratios = r.table.column("ratio").expect("column");
    r.set("max_ratio", extremes(&ratios).1);
    Ok(r)
}

/// |F − a_λt^{−1/2}G|·t^{3/2} for φ ≡ 1.
pub fn fg_bridge(p: &RepParams, ts: &[f64], rule: NRule) -> Result<Report> {
    let one = CircleFunction::constant(C::new(1.0, 0.0));
    let mut r = Report { table: Table::new(&["t", "n", "deviation", "normalized"]), ..Default::default() };
    r.table.rows = par_rows(ts, |&t| {
        let n = rule.n_for(t);
        let d = calibration::fg_deviation(p, t, n, &one)?;
        Ok(vec![t, n as f64, d, d * t.powf(1.5)])
    })?;
    let (lo, hi) = extremes(&r.table.column("normalized").expect("column"));
    r.set("max_normalized", hi);
    r.set("min_normalized", lo);
    r.set("spread", hi / lo);
    r.set("bound", calibration::FG_C);
    Ok(r)
}

/// Standard Beta integral against its main term; σ = −1/2 + iτ, σ′ = −1/2 + iτ′,
/// amplitude a unit bump of radius 1/2 at 0.
pub fn beta_slope(p: &RepParams, ts: &[f64], tol: Option<f64>) -> Result<Report> {
    let tol = tol.unwrap_or(FINE_TOL);
    let (s, sp) = beta_exponents(p);
    let phi = Compact::bump(0.0, 0.5);
    let mut r = Report { table: Table::new(&["t", "remainder", "oracle_err", "normalized"]), ..Default::default() };
    r.table.rows = par_rows(ts, |&t| {
        let lam = C::new(0.0, t);
        let q = std_beta(lam, s, sp, &phi, tol)?;
        let d = (q.value - std_beta_main(lam, s, sp, &phi)?).norm();
        Ok(vec![t, d, q.err_estimate, d * t.powf(1.5)])
    })?;
    add_fit(&mut r, "t", "remainder")?;
    Ok(r)
}

pub fn beta_exponents(p: &RepParams) -> (C, C) {
    (C::new(-0.5, p.tau().im), C::new(-0.5, p.tau_prime().im))
}

/// Parseval totals of a synthetic spectrum (κ = 1, A = 1) over several n.
pub fn spectrum_totals(p: &RepParams, ns: &[i64], t_max: f64, seed: u64, model: WeightModel) -> Result<Report> {
    let spec = gen_spectrum(p, t_max, 1.0, 1.0, seed, model)?;
    let mut r = Report { table: Table::new(&["n", "total", "low", "tail", "tail_bound", "blocks_ok"]), ..Default::default() };
    for &n in ns {
        let d = parseval_sum(&spec, p, n, ParsevalMode::Asymptotic)?;
        r.table.push(vec![n as f64, d.grand_total, d.low.h_sum, d.tail_sum, d.tail_bound, if d.all_within_bound { 1.0 } else { 0.0 }]);
    }
    let (lo, hi) = extremes(&r.table.column("total").expect("column"));
    r.set("total_spread", hi / lo);
    r.set("blocks_ok", extremes(&r.table.column("blocks_ok").expect("column")).0);
    r.set("points", spec.points.len());
    Ok(r)
}

/// Dispatches a validated config.
pub fn run_experiment(cfg: &Config) -> anyhow::Result<Report> {
    let pr = &cfg.params;
    let p = RepParams::new(pr.tau, pr.tau_prime);
    let ts = &pr.t_grid;
    let rule = cfg.n_rule();
    let r = match cfg.experiment.as_str() {
        "kernel-slope" => kernel_slope(&p, pr.c.unwrap_or(PI / 2.0), ts, pr.tol)?,
        "airy-peak" => airy_peak(&p, ts, rule, pr.tol)?,
        "airy-window" => airy_window(&p, ts, pr.tol)?,
        "tilde-ratio" => tilde_ratio(&p, ts, rule, pr.tol)?,
        "fg-bridge" => fg_bridge(&p, ts, rule)?,
        "beta-slope" => beta_slope(&p, ts, pr.tol)?,
        "spectrum-totals" => {
            let ns = pr.n_grid.clone().context("spectrum-totals needs params.n_grid")?;
            let t_max = ts.iter().copied().fold(0.0, f64::max);
            spectrum_totals(&p, &ns, t_max, pr.seed, WeightModel::Uniform)?
        }
        other => bail!("unknown experiment {other:?}; known: {}", EXPERIMENTS.join(", ")),
    };
    Ok(r)
}

/// Names of failed assertions; an unknown metric is a config error.
pub fn check_assertions(cfg: &Config, r: &Report) -> anyhow::Result<Vec<String>> {
    let mut failed = Vec::new();
    for a in &cfg.assertions {
        let Some(x) = r.number(&a.metric) else {
            bail!("assertion on unknown metric {:?}", a.metric);
        };
        if !a.holds(x) {
            failed.push(format!("{} = {} violates {} {}", a.metric, x, serde_json::to_string(&a.op)?.trim_matches('"'), a.value));
        }
    }
    Ok(failed)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn beta_slope_is_three_halves() {
        let r = beta_slope(&RepParams::new(0.3, 0.7), &[64.0, 128.0, 256.0], None).unwrap();
        assert!((r.number("slope").unwrap() + 1.5).abs() < 0.05);
    }

    #[test]
    fn unknown_experiment_is_an_error() {
        let cfg = Config::parse(r#"{"experiment":"nope","params":{"t_grid":[10]}}"#).unwrap();
        assert!(run_experiment(&cfg).is_err());
    }
}
