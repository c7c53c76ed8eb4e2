//! Frozen remainder constants. Each is 1.2× the maximum normalized oracle
//! deviation over a fixed 40-point calibration grid; the grids are disjoint
//! from every acceptance grid. The `*_samples` functions recompute the
//! normalized deviations so the constants can be regenerated.

use super::{a_lambda, g_functional, g_main_term, l_kernel_approx};
use crate::error::Result;
use crate::repn::{make_test_vector, CircleFunction, RepParams, SpectralParam, TestKind};
use crate::trilinear::{f_functional, h_form, l_kernel};
use crate::oscquad::QuadOptions;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;
use std::f64::consts::PI;

/// Safety factor over the calibration maximum. Each constant below is
/// MARGIN × the maximum of the matching `*_samples` grid, frozen.
pub const MARGIN: f64 = 1.2;

/// Pointwise kernel remainder.
pub const KERNEL_C: f64 = 0.468_756_5;
/// Spectral budget for H_λ(w̃_n).
pub const II_C: f64 = 375.143_7;
/// |F − a_λt^{−1/2}G| ≤ C‖φ‖_∞t^{−3/2}.
pub const FG_C: f64 = 0.256_931_0;
/// |G − G_main| ≤ C‖φ‖_{C²}t^{−2/3} for |δ − 1| ≤ 0.1.
pub const AIRY_C: f64 = 0.227_453_5;
/// |G| ≤ C·t^{−3} for δ ≤ 0.9, φ ≡ 1.
pub const DECAY_C3: f64 = 2.815_414e5;

/// Parameters used throughout calibration and acceptance.
pub fn reference_params() -> RepParams {
    RepParams::new(0.3, 0.7)
}

/// One calibration point: inputs and the normalized deviation.
#[derive(Debug, Clone, Serialize)]
pub struct Sample {
    pub t: f64,
    /// c for the kernel grid, n otherwise.
    pub x: f64,
    pub normalized: f64,
}

/// 1.2× the largest normalized deviation.
pub fn freeze(samples: &[Sample]) -> f64 {
    MARGIN * samples.iter().map(|s| s.normalized).fold(0.0, f64::max)
}

fn even(x: f64) -> i64 {
    2 * (x / 2.0).round() as i64
}

pub fn kernel_grid() -> Vec<(f64, f64)> {
    let cs = [0.2, 0.5, 0.9, 1.2, 1.9, 2.3, 2.7, 2.95];
    let ts = [40.0, 80.0, 160.0, 320.0, 640.0];
    ts.iter().flat_map(|&t| cs.iter().map(move |&c| (t, c))).collect()
}

/// |l − main|/(t^{−3/2}|sin c|^{−1/2}|ln|sin(c/2)cos(c/2)||).
pub fn kernel_samples() -> Result<Vec<Sample>> {
    let p = reference_params();
    kernel_grid()
        .into_par_iter()
        .map(|(t, c)| {
            let lam = SpectralParam::Principal(t);
            let q = l_kernel(&p, &lam, c, 1e-10)?;
            let a = l_kernel_approx(&p, &lam, c)?;
            let shape = t.powf(-1.5) * c.sin().abs().powf(-0.5) * ((c / 2.0).sin() * (c / 2.0).cos()).abs().ln().abs();
            Ok(Sample { t, x: c, normalized: (q.value - a.main_term).norm() / shape })
        })
        .collect()
}

/// (n, t) with t/(2n) ∈ {0.25, …, 3.0}.
pub fn ii_grid() -> Vec<(i64, f64)> {
    let ns = [12, 26, 50, 70, 100];
    let rhos = [0.25, 0.45, 0.6, 0.8, 0.9, 1.1, 1.5, 3.0];
    ns.iter().flat_map(|&n| rhos.iter().map(move |&r| (n, 2.0 * n as f64 * r))).collect()
}

/// H_λ(w̃_n)/((1+n)^{−1}t^{−1} + t^{−3}) (or /t^{−3} for t > 4n).
pub fn ii_samples() -> Result<Vec<Sample>> {
    let p = reference_params();
    ii_grid()
        .into_par_iter()
        .map(|(n, t)| {
            let w = make_test_vector(n, TestKind::Tilde)?;
            let h = h_form(&p, &SpectralParam::Principal(t), &w, 1e-6)?;
            let shape = super::remainder_budget_ii_with(&p, t, n, 1.0)?;
            Ok(Sample { t, x: n as f64, normalized: h / shape })
        })
        .collect()
}

/// t = 40·1.07^i, i < 40, rounded to 0.25 and nudged off the acceptance t-values.
pub fn fg_grid() -> Vec<f64> {
    (0..40)
        .map(|i| {
            let t = (40.0 * 1.07f64.powi(i) * 4.0).round() / 4.0;
            if [64.0, 128.0, 256.0, 512.0].contains(&t) {
                t + 0.25
            } else {
                t
            }
        })
        .collect()
}

/// n used with t in the bridge and Airy sweeps.
pub fn fg_n(t: f64) -> i64 {
    even(t / 2.0)
}

/// |F − a_λt^{−1/2}G|·t^{3/2}/‖φ‖_∞ with φ ≡ 1, n = [`fg_n`].
pub fn fg_samples() -> Result<Vec<Sample>> {
    let p = reference_params();
    let one = CircleFunction::constant(Complex64::new(1.0, 0.0));
    fg_grid()
        .into_iter()
        .map(|t| {
            let n = fg_n(t);
            let d = fg_deviation(&p, t, n, &one)?;
            Ok(Sample { t, x: n as f64, normalized: d * t.powf(1.5) / one.cnorm(0) })
        })
        .collect()
}

/// |F_{λ,n}(φ) − a_λt^{−1/2}G_{λ,n}(φ)|.
pub fn fg_deviation(p: &RepParams, t: f64, n: i64, phi: &CircleFunction) -> Result<f64> {
    let lam = SpectralParam::Principal(t);
    let tol = 1e-7;
    let f = f_functional(p, &lam, n, phi, tol)?;
    let g = g_functional(p, &lam, n, phi, 1e-10)?;
    Ok((f.value - a_lambda(lam.lambda()) * t.powf(-0.5) * g.value).norm())
}

/// Amplitude for the Airy sweeps: bumps of radius 0.6 at π/2 + kπ.
pub fn airy_probe() -> CircleFunction {
    CircleFunction::bump_train(PI / 2.0, 0.6).expect("valid radius")
}

pub fn airy_grid() -> Vec<(f64, i64)> {
    let ts = [60.0, 90.0, 150.0, 300.0, 600.0];
    let deltas = [0.9, 0.93, 0.96, 0.99, 1.01, 1.04, 1.07, 1.1];
    ts.iter().flat_map(|&t| deltas.iter().map(move |&d| (t, even(d * t / 2.0)))).collect()
}

/// |G − G_main|·t^{2/3}/‖φ‖_{C²}.
pub fn airy_samples() -> Result<Vec<Sample>> {
    let p = reference_params();
    let phi = airy_probe();
    let c2 = phi.cnorm(2);
    airy_grid()
        .into_par_iter()
        .map(|(t, n)| {
            let g = g_functional(&p, &SpectralParam::Principal(t), n, &phi, 1e-10)?;
            let m = g_main_term(t, n, phi.eval(PI / 2.0))?;
            Ok(Sample { t, x: n as f64, normalized: (g.value - m).norm() * t.powf(2.0 / 3.0) / c2 })
        })
        .collect()
}

/// Dense in t near 200, where t³|G| peaks along δ = 0.9.
pub fn decay_grid() -> Vec<(f64, i64)> {
    let ts = [40.0, 80.0, 120.0, 160.0, 180.0, 200.0, 220.0, 240.0, 280.0, 360.0];
    let deltas = [0.3, 0.6, 0.8, 0.9];
    ts.iter().flat_map(|&t| deltas.iter().map(move |&d| (t, even(d * t / 2.0)))).collect()
}

/// G with an absolute floor suited to rapidly decaying values.
pub fn decay_g(p: &RepParams, t: f64, n: i64) -> Result<crate::oscquad::QuadResult> {
    let one = CircleFunction::constant(Complex64::new(1.0, 0.0));
    let opts = QuadOptions { abs_tol: 1e-14, rel_tol: 1e-8, ..QuadOptions::default() };
    super::g_functional_with(p, &SpectralParam::Principal(t), n, &one, &opts)
}

/// |G|·t³ with φ ≡ 1, δ ≤ 0.9.
pub fn decay_samples() -> Result<Vec<Sample>> {
    let p = reference_params();
    decay_grid()
        .into_par_iter()
        .map(|(t, n)| {
            let g = decay_g(&p, t, n)?;
            Ok(Sample { t, x: n as f64, normalized: g.value.norm() * t.powi(3) })
        })
        .collect()
}
