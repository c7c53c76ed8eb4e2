//! The Airy function Ai on [−100, 100].
//!
//! −4 ≤ x ≤ 2: Maclaurin series. x > 2: Ai(x) = (1/π)√(x/3)·K_{1/3}(ζ),
//! ζ = (2/3)x^{3/2}, with K_ν(z) = ∫₀^∞ e^{−z cosh u}cosh(νu)du by the
//! trapezoid rule (geometrically convergent for this integrand).
//! −10 ≤ x < −4: Taylor stepping of y″ = xy from x = −4. x < −10: the
//! oscillatory asymptotic expansion.

use crate::error::{Error, Result};
use std::f64::consts::PI;

/// Ai(0) = 3^{−2/3}/Γ(2/3).
pub const AI0: f64 = 0.355_028_053_887_817_239_260;
/// −Ai′(0) = 3^{−1/3}/Γ(1/3).
pub const AIP0: f64 = 0.258_819_403_792_806_798_405;

/// Ai(x) for |x| ≤ 100.
pub fn airy(x: f64) -> Result<f64> {
    if !(x.abs() <= 100.0) {
        return Err(Error::Range(format!("airy argument {x} outside [-100, 100]")));
    }
    Ok(if (-4.0..=2.0).contains(&x) {
        maclaurin(x).0
    } else if x > 2.0 {
        bessel_k_form(x)
    } else if x >= -10.0 {
        taylor_march(x)
    } else {
        oscillatory_asymptotic(-x)
    })
}

/// (Ai, Ai′) by the Maclaurin series.
fn maclaurin(x: f64) -> (f64, f64) {
    let x3 = x * x * x;
    // f = Σ a_k x^{3k}, g = Σ b_k x^{3k+1}; Ai = Ai(0)f − (−Ai′(0))g.
    let (mut f, mut g, mut df, mut dg) = (1.0, x, 0.0, 1.0);
    let (mut a, mut b) = (1.0, x);
    for k in 1..200 {
        let kf = k as f64;
        a *= x3 / ((3.0 * kf - 1.0) * (3.0 * kf));
        b *= x3 / ((3.0 * kf) * (3.0 * kf + 1.0));
        f += a;
        g += b;
        if x != 0.0 {
            df += 3.0 * kf * a / x;
            dg += (3.0 * kf + 1.0) * b / x;
        }
        if a.abs() < 1e-18 * f.abs() && b.abs() < 1e-18 * g.abs().max(1e-300) {
            break;
        }
    }
    (AI0 * f - AIP0 * g, AI0 * df - AIP0 * dg)
}

fn bessel_k_form(x: f64) -> f64 {
    let zeta = 2.0 / 3.0 * x.powf(1.5);
    let h = 0.05;
    // Terms decay like e^{−ζ(cosh u − 1)}; ζ > 1.8 here.
    let mut sum = 0.5;
    let mut k = 1;
    loop {
        let u = k as f64 * h;
        let term = (-zeta * (u.cosh() - 1.0)).exp() * (u / 3.0).cosh();
        sum += term;
        if term < 1e-20 * sum {
            break;
        }
        k += 1;
    }
    let kv = h * sum * (-zeta).exp();
    (x / 3.0).sqrt() * kv / PI
}

/// Taylor steps of y″ = xy from (−4, Ai(−4), Ai′(−4)).
fn taylor_march(target: f64) -> f64 {
    let (mut y, mut dy) = maclaurin(-4.0);
    let mut x = -4.0;
    let n_steps = ((x - target) / 0.125).ceil() as usize;
    let h = (target - x) / n_steps as f64;
    for _ in 0..n_steps {
        // d_k = y^{(k)}(x)/k!; (k+2)(k+1)d_{k+2} = x d_k + d_{k−1}.
        let mut d = vec![y, dy];
        for k in 0..40 {
            let prev = if k >= 1 { d[k - 1] } else { 0.0 };
            let next = (x * d[k] + prev) / ((k + 2) as f64 * (k + 1) as f64);
            d.push(next);
        }
        let (mut ny, mut ndy) = (0.0, 0.0);
        for k in (0..d.len()).rev() {
            ny = ny * h + d[k];
        }
        for k in (1..d.len()).rev() {
            ndy = ndy * h + k as f64 * d[k];
        }
        y = ny;
        dy = ndy;
        x += h;
    }
    y
}

/// Ai(−x) for x ≥ 10.
fn oscillatory_asymptotic(x: f64) -> f64 {
    let zeta = 2.0 / 3.0 * x.powf(1.5);
    let mut u = 1.0;
    let (mut p, mut q) = (1.0, 0.0);
    let mut zpow = 1.0;
    let mut last = f64::INFINITY;
    for k in 1..60 {
        let kf = k as f64;
        u *= (6.0 * kf - 5.0) * (6.0 * kf - 3.0) * (6.0 * kf - 1.0) / ((2.0 * kf - 1.0) * 216.0 * kf);
        zpow /= zeta;
        let term = u * zpow;
        if term.abs() > last {
            break;
        }
        last = term.abs();
        // P = Σ(−1)^k u_{2k}ζ^{−2k}, Q = Σ(−1)^k u_{2k+1}ζ^{−2k−1}.
        match k % 4 {
            1 => q += term,
            2 => p -= term,
            3 => q -= term,
            _ => p += term,
        }
        if term.abs() < 1e-17 {
            break;
        }
    }
    let phase = zeta + PI / 4.0;
    (phase.sin() * p - phase.cos() * q) / (PI.sqrt() * x.powf(0.25))
}

/// Zero of Ai(x) = level on [lo, hi] by bisection (sign change required).
pub fn airy_level_crossing(level: f64, lo: f64, hi: f64) -> Result<f64> {
    let g = |x: f64| airy(x).map(|v| v - level);
    let (mut a, mut b) = (lo, hi);
    let (ga, gb) = (g(a)?, g(b)?);
    if ga * gb > 0.0 {
        return Err(Error::Domain("no sign change in bracket".into()));
    }
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        let gm = g(m)?;
        if (gm > 0.0) == (ga > 0.0) {
            a = m;
        } else {
            b = m;
        }
        if b - a < 1e-15 {
            break;
        }
    }
    Ok(0.5 * (a + b))
}

/// Largest b′ with |Ai| ≥ Ai(0)/2 on [−b′, b′].
pub fn half_level_radius() -> f64 {
    let right = airy_level_crossing(AI0 / 2.0, 0.0, 3.0).expect("bracket");
    let left = -airy_level_crossing(AI0 / 2.0, -3.0, -1.0188).expect("bracket");
    right.min(left)
}

/// Location of the global maximum of Ai (first zero of Ai′).
pub const AIRY_PEAK_X: f64 = -1.018_792_971_647_471_1;
