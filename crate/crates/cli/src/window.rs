//! Half-peak width of t ↦ H_t(w_n) around the Airy peak, with brackets seeded
//! from the main-term model.

use serde::Serialize;
use triperiod_core::asympt::{airy, airy_level_crossing, AIRY_PEAK_X};
use triperiod_core::{Error, Result};

const GOLDEN_STEPS: usize = 12;
/// Crossing tolerance in Airy scales, and an iteration cap.
const XTOL: f64 = 1e-3;
const MAX_FALSI: usize = 40;
/// Bracket padding in units of the Airy scale (2t)^{1/3}.
const PAD: f64 = 0.3;

#[derive(Debug, Clone, Serialize)]
pub struct Window {
    pub n: i64,
    pub t_peak: f64,
    pub h_peak: f64,
    pub t_lo: f64,
    pub t_hi: f64,
    pub width: f64,
    /// Width predicted by the main term.
    pub model_width: f64,
    pub evals: usize,
}

/// t solving (t − 2n)/(2t)^{1/3} = z.
pub fn t_of_airy_arg(n: i64, z: f64) -> f64 {
    let mut t = 2.0 * n as f64;
    for _ in 0..50 {
        t = 2.0 * n as f64 + z * (2.0 * t).cbrt();
    }
    t
}

/// Model half-level crossings (z_lo, z_hi) of Ai² around its peak.
pub fn model_half_crossings() -> Result<(f64, f64)> {
    let level = airy(AIRY_PEAK_X)? / 2f64.sqrt();
    Ok((airy_level_crossing(level, -2.3, AIRY_PEAK_X)?, airy_level_crossing(level, AIRY_PEAK_X, 2.0)?))
}

/// Golden-section peak search within ±0.5 Airy scales of the model peak, then
/// Illinois regula falsi for h = peak/2 on each side. Each oracle value costs a
/// double integral, so step counts are kept near the resolution the width needs.
pub fn half_peak_width(n: i64, h: &dyn Fn(f64) -> Result<f64>) -> Result<Window> {
    let scale = (4.0 * n as f64).cbrt();
    let mut evals = 0;
    let mut eval = |t: f64| {
        evals += 1;
        h(t)
    };
    let (z_lo, z_hi) = model_half_crossings()?;
    let tp = t_of_airy_arg(n, AIRY_PEAK_X);
    let r = 0.5 * (5f64.sqrt() - 1.0);
    let (mut a, mut b) = (tp - 0.5 * scale, tp + 0.5 * scale);
    let (mut x1, mut x2) = (b - r * (b - a), a + r * (b - a));
    let (mut f1, mut f2) = (eval(x1)?, eval(x2)?);
    for _ in 0..GOLDEN_STEPS {
        if f1 < f2 {
            a = x1;
            (x1, f1) = (x2, f2);
            x2 = a + r * (b - a);
            f2 = eval(x2)?;
        } else {
            b = x2;
            (x2, f2) = (x1, f1);
            x1 = b - r * (b - a);
            f1 = eval(x1)?;
        }
    }
    let (t_peak, h_peak) = if f1 >= f2 { (x1, f1) } else { (x2, f2) };
    let half = h_peak / 2.0;
    let mut cross = |outer: f64| -> Result<f64> {
        let mut g_out = eval(outer)? - half;
        if g_out >= 0.0 {
            return Err(Error::Domain(format!("half level not bracketed at t = {outer}")));
        }
        let (mut inside, mut g_in, mut out) = (t_peak, h_peak - half, outer);
        let (mut m, mut side) = (outer, 0i8);
        for _ in 0..MAX_FALSI {
            let next = (inside * g_out - out * g_in) / (g_out - g_in);
            let done = (next - m).abs() <= XTOL * scale;
            m = next;
            if done {
                break;
            }
            let gm = eval(m)? - half;
            if gm >= 0.0 {
                (inside, g_in) = (m, gm);
                if side == 1 {
                    g_out /= 2.0;
                }
                side = 1;
            } else {
                (out, g_out) = (m, gm);
                if side == -1 {
                    g_in /= 2.0;
                }
                side = -1;
            }
        }
        Ok(m)
    };
    let t_lo = cross(t_of_airy_arg(n, z_lo) - PAD * scale)?;
    let t_hi = cross(t_of_airy_arg(n, z_hi) + PAD * scale)?;
    let model_width = t_of_airy_arg(n, z_hi) - t_of_airy_arg(n, z_lo);
    Ok(Window { n, t_peak, h_peak, t_lo, t_hi, width: t_hi - t_lo, model_width, evals })
}
