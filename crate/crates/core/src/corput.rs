//! Integration-by-parts bounds, the Van der Corput bound and the model
//! integral ∫u(x)|x|^{−1/2−it}e^{isg(x)}dx with its four-interval estimate.
//!
//! Hypotheses on caller-supplied callables are checked on 2048 samples.

use crate::error::{contract, domain, Result};
use crate::func::{Compact, ComplexFn, RealFn};
use crate::oscquad::{integrate_line_with, QuadOptions, QuadResult, SingularitySpec};
use num_complex::Complex64;
use serde::Serialize;

type C = Complex64;

pub const C1: f64 = 3.0;
pub const C2: f64 = 8.0;
pub const SAMPLES: usize = 2048;

fn grid(a: f64, b: f64) -> impl Iterator<Item = f64> {
    (0..SAMPLES).map(move |i| a + (b - a) * i as f64 / (SAMPLES - 1) as f64)
}

/// Derivative of a possibly oscillatory function: fourth-order central
/// difference with step `h`.
fn d1(f: &dyn Fn(f64) -> C, x: f64, h: f64) -> C {
    (f(x - 2.0 * h) - 8.0 * f(x - h) + 8.0 * f(x + h) - f(x + 2.0 * h)) / (12.0 * h)
}

/// ξ^i g for ξ = v∂, i ≤ 3, through v, v′, v″ and g′, g″, g‴.
fn xi_power(v: &dyn RealFn, g: &dyn Fn(usize, f64) -> C, i: usize, x: f64) -> C {
    let (v0, v1, v2) = (v.eval(x), v.deriv(1, x), v.deriv(2, x));
    match i {
        0 => g(0, x),
        1 => v0 * g(1, x),
        2 => v0 * v1 * g(1, x) + v0 * v0 * g(2, x),
        3 => v0 * (v1 * v1 + v0 * v2) * g(1, x) + 3.0 * v0 * v0 * v1 * g(2, x) + v0.powi(3) * g(3, x),
        _ => unreachable!("orders above 3 are rejected earlier"),
    }
}

/// Magnitude coefficients K_{n,i} of (ξ∘H)^n φ = Σ_i (products of ξ^jH)·ξ^iφ:
/// K_{k+1,i} = (k+1)K_{k,i} + K_{k,i−1}.
pub fn ibp_coefficients(n: usize) -> Vec<f64> {
    let mut k = vec![1.0];
    for step in 0..n {
        let mut next = vec![0.0; k.len() + 1];
        for (i, &c) in k.iter().enumerate() {
            next[i] += (step + 1) as f64 * c;
            next[i + 1] += c;
        }
        k = next;
    }
    k
}

/// The pieces entering an integration-by-parts bound.
#[derive(Debug, Clone, Serialize)]
pub struct IbpReport {
    pub bound: f64,
    /// Sampled max of |ξ^jH|, j ≤ n.
    pub c_measured: f64,
    /// Worst relative residual of H·ξ(F) = λF on samples.
    pub identity_residual: f64,
    /// R_F(ξ^iφ), i ≤ n.
    pub r_terms: Vec<f64>,
}

/// Data of an integral I_F(φ) = ∫F·φ·ω over an interval, with ω = w(y)dy.
pub struct IbpSetup<'a> {
    pub f: &'a dyn ComplexFn,
    /// Coefficient v of the vector field ξ = v(y)∂/∂y.
    pub xi: &'a dyn RealFn,
    pub h: &'a dyn ComplexFn,
    pub lambda: C,
    pub omega: &'a dyn RealFn,
    pub interval: (f64, f64),
    /// Singular points of F inside the interval.
    pub sing: SingularitySpec,
}

impl IbpSetup<'_> {
    fn fd_step(&self) -> f64 {
        1e-3 / (1.0 + self.lambda.norm())
    }

    /// Relative residual of H·ξ(F) − λF at y.
    fn residual(&self, y: f64) -> f64 {
        let fy = self.f.eval(y);
        let xf = self.xi.eval(y) * d1(&|x| self.f.eval(x), y, self.fd_step());
        (self.h.eval(y) * xf - self.lambda * fy).norm() / (self.lambda * fy).norm().max(1e-300)
    }

    fn check(&self) -> Result<f64> {
        let (a, b) = self.interval;
        let near_singular = |y: f64| self.sing.points.iter().any(|p| (y - p.at).abs() < 1e-3);
        let mut worst: f64 = 0.0;
        for y in grid(a, b).filter(|&y| !near_singular(y)) {
            worst = worst.max(self.residual(y));
            // ξω = 0 means (v·w)′ = 0.
            let vw = |x: f64| C::new(self.xi.eval(x) * self.omega.eval(x), 0.0);
            let dvw = d1(&vw, y, 1e-4).re;
            if dvw.abs() > 1e-6 * (1.0 + vw(y).re.abs()) {
                return contract(format!("ξω ≠ 0 at y = {y}"));
            }
        }
        if worst > 1e-6 {
            return contract(format!("H·ξ(F) = λF fails on samples (relative residual {worst:.2e})"));
        }
        Ok(worst)
    }

    /// I_F(g) = ∫F·g·ω by the oracle.
    pub fn integral(&self, g: &(dyn Fn(f64) -> C + Sync), tol: f64) -> Result<QuadResult> {
        let opts = QuadOptions { abs_tol: tol, rel_tol: 0.0, ..QuadOptions::default() }.with_freq(self.lambda.norm());
        let f = |y: f64| self.f.eval(y) * g(y) * self.omega.eval(y);
        integrate_line_with(f, self.interval, &self.sing, &opts)
    }

    /// ξ(Hφ)(y).
    pub fn xi_h(&self, phi: &Compact, y: f64) -> C {
        let hphi = |x: f64| self.h.eval(x) * phi.eval(x);
        self.xi.eval(y) * d1(&hphi, y, 1e-4)
    }
}

/// |λ|^{−n}Cⁿ·Σ_i K_{n,i}R_F(ξ^iφ), R_F(g) = ∫|F·g||ω|.
///
/// K_{n,i} counts the Leibniz terms of (ξ∘H)^n; for n = 1 all equal 1.
pub fn ibp_bound(setup: &IbpSetup, n: usize, phi: &Compact, tol: f64) -> Result<IbpReport> {
    if n > 3 {
        return domain("n ≤ 3 supported");
    }
    let identity_residual = setup.check()?;
    let (a, b) = setup.interval;
    let mut c_measured: f64 = 0.0;
    let hder = |k: usize, x: f64| setup.h.deriv(k, x);
    for y in grid(a, b) {
        for j in 0..=n {
            c_measured = c_measured.max(xi_power(setup.xi, &hder, j, y).norm());
        }
    }
    let pder = |k: usize, x: f64| phi.deriv(k, x);
    let mut r_terms = Vec::with_capacity(n + 1);
    for i in 0..=n {
        let g = |y: f64| C::new(xi_power(setup.xi, &pder, i, y).norm(), 0.0);
        let absf = |y: f64| C::new(setup.f.eval(y).norm() * setup.omega.eval(y).abs(), 0.0) * g(y);
        let lo = a.max(phi.lo);
        let hi = b.min(phi.hi);
        let r = if lo < hi {
            let sing = SingularitySpec {
                points: setup
                    .sing
                    .points
                    .iter()
                    .map(|p| crate::oscquad::Singularity { at: p.at, exponents: p.exponents.iter().map(|e| C::new(e.re, 0.0)).collect() })
                    .collect(),
            };
            integrate_line_with(absf, (lo, hi), &sing, &QuadOptions { abs_tol: tol, rel_tol: 1e-6, ..QuadOptions::default() })?.value.re
        } else {
            0.0
        };
        r_terms.push(r);
    }
    let k = ibp_coefficients(n);
    let sum: f64 = r_terms.iter().zip(&k).map(|(r, k)| r * k).sum();
    let bound = setup.lambda.norm().powi(-(n as i32)) * c_measured.powi(n as i32) * sum;
    Ok(IbpReport { bound, c_measured, identity_residual, r_terms })
}

/// M(φ) = |φ(b)| + ∫_a^b|φ′| by sampled total variation.
pub fn variation(phi: &dyn Fn(f64) -> C, a: f64, b: f64) -> f64 {
    let mut tv = 0.0;
    let mut prev = phi(a);
    for x in grid(a, b).skip(1) {
        let v = phi(x);
        tv += (v - prev).norm();
        prev = v;
    }
    phi(b).norm() + tv
}

/// c_k·m_k(f)^{−1/k}·M(φ) on [a, b].
pub fn vdc_bound(f: &dyn RealFn, phi: &dyn Fn(f64) -> C, interval: (f64, f64), k: usize) -> Result<f64> {
    let (a, b) = interval;
    if !(a < b) {
        return domain("empty interval");
    }
    let ck = match k {
        1 => C1,
        2 => C2,
        _ => return domain("k must be 1 or 2"),
    };
    let samples: Vec<f64> = grid(a, b).map(|x| f.deriv(k, x)).collect();
    let (lo, hi) = samples.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), &v| (l.min(v), h.max(v)));
    let mk = if lo > 0.0 || hi < 0.0 { lo.abs().min(hi.abs()) } else { 0.0 };
    if !(mk > 0.0) {
        return domain(format!("m_{k}(f) = 0 on samples"));
    }
    if k == 1 {
        let d2: Vec<f64> = samples.windows(2).map(|w| w[1] - w[0]).collect();
        let scale = samples.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let slack = 1e-9 * scale;
        if !(d2.iter().all(|&d| d >= -slack) || d2.iter().all(|&d| d <= slack)) {
            return contract("f′ is not monotone on the interval");
        }
    }
    Ok(ck * mk.powf(-1.0 / k as f64) * variation(phi, a, b))
}

/// ∫_a^b e^{if}φ by the oracle.
pub fn oscillatory_integral(f: &dyn RealFn, phi: &(dyn Fn(f64) -> C + Sync), interval: (f64, f64), freq: f64, tol: f64) -> Result<QuadResult> {
    let g = |x: f64| C::from_polar(1.0, f.eval(x)) * phi(x);
    let opts = QuadOptions { abs_tol: tol, ..QuadOptions::default() }.with_freq(freq);
    integrate_line_with(g, interval, &SingularitySpec::none(), &opts)
}

fn check_model(s: f64, t: f64, u: &Compact, g: &dyn RealFn) -> Result<()> {
    if !(s >= 1.0 && t >= 1.0) {
        return domain("need s, t ≥ 1");
    }
    if u.lo < -1.0 || u.hi > 1.0 {
        return domain("u must be supported in [−1, 1]");
    }
    for x in grid(-1.0, 1.0) {
        let (g1, g2) = (g.deriv(1, x), g.deriv(2, x));
        if !(g1 > 0.99 && g1 < 1.01) {
            return domain(format!("g′({x}) = {g1} outside (0.99, 1.01)"));
        }
        if !(g2.abs() <= 0.5) {
            return domain(format!("|g″({x})| = {} exceeds 1/2", g2.abs()));
        }
    }
    Ok(())
}

/// ∫_{−1}^{1}u(x)|x|^{−1/2−it}e^{isg(x)}dx.
pub fn model_integral(s: f64, t: f64, u: &Compact, g: &dyn RealFn, tol: f64) -> Result<QuadResult> {
    check_model(s, t, u, g)?;
    let e = C::new(-0.5, -t);
    let sing = SingularitySpec::none().with(0.0, &[e]);
    let f = |x: f64| (e * x.abs().ln() + C::new(0.0, s * g.eval(x))).exp() * u.eval(x);
    let opts = QuadOptions { abs_tol: tol, ..QuadOptions::default() }.with_freq(1.01 * s + u.cnorm(1) / u.cnorm(0).max(1e-300));
    integrate_line_with(f, (u.lo.max(-1.0), u.hi.min(1.0)), &sing, &opts)
}

/// Per-interval pieces of the model-integral bound, summed over both half-lines.
#[derive(Debug, Clone, Serialize)]
pub struct ModelBound {
    /// b_j·s^{1/2} for J₁…J₄.
    pub b: [f64; 4],
    /// B = Σb_j.
    pub total_b: f64,
    /// B·s^{−1/2}.
    pub bound: f64,
}

/// Phase on one half-line in the variable y = |x|: s·g(±y) − t·ln y.
struct Phase<'a> {
    s: f64,
    t: f64,
    g: &'a dyn RealFn,
    sign: f64,
}

impl RealFn for Phase<'_> {
    fn eval(&self, x: f64) -> f64 {
        self.s * self.g.eval(self.sign * x) - self.t * x.ln()
    }

    fn deriv(&self, k: usize, x: f64) -> f64 {
        let gk = self.g.deriv(k, self.sign * x) * self.sign.powi(k as i32);
        let log_k = match k {
            1 => 1.0 / x,
            2 => -1.0 / (x * x),
            _ => return crate::func::RealFn::deriv(&|y: f64| self.eval(y), k, x),
        };
        self.s * gk - self.t * log_k
    }
}

/// Splits [a, b] where f″ changes sign, so that f′ is monotone on each piece.
fn monotone_pieces(f: &dyn RealFn, a: f64, b: f64) -> Vec<(f64, f64)> {
    let xs: Vec<f64> = grid(a, b).collect();
    let mut cuts = vec![a];
    for w in xs.windows(2) {
        if f.deriv(2, w[0]).signum() != f.deriv(2, w[1]).signum() {
            cuts.push(0.5 * (w[0] + w[1]));
        }
    }
    cuts.push(b);
    cuts.windows(2).map(|w| (w[0], w[1])).collect()
}

/// B·s^{−1/2} assembled from J₁ = (2a, 1), J₂ = (a/2, 2a), J₃ = (s⁻¹/2, a/2),
/// J₄ = (0, s⁻¹/2), a = t/s: k = 1 on J₁ and J₃, k = 2 on J₂, absolute value on J₄.
pub fn model_integral_bound(s: f64, t: f64, u: &Compact, g: &dyn RealFn) -> Result<ModelBound> {
    check_model(s, t, u, g)?;
    let a = t / s;
    if !(a >= 1.0 / s && a <= 1.0) {
        return domain(format!("a = t/s = {a} outside [1/s, 1]"));
    }
    let mut b = [0.0; 4];
    for sign in [1.0, -1.0] {
        let phase = Phase { s, t, g, sign };
        let amp = |x: f64| u.eval(sign * x) * x.powf(-0.5);
        let sup_u = grid(0.0, 1.0).map(|x| u.eval(sign * x).norm()).fold(0.0, f64::max);
        let j4 = 0.5 / s;
        b[3] += 2.0 * j4.sqrt() * sup_u;
        if a / 2.0 > j4 {
            for (lo, hi) in monotone_pieces(&phase, j4, a / 2.0) {
                b[2] += vdc_bound(&phase, &amp, (lo, hi), 1)?;
            }
        }
        let j2_hi = (2.0 * a).min(1.0);
        b[1] += vdc_bound(&phase, &amp, (a / 2.0, j2_hi), 2)?;
        if 2.0 * a < 1.0 {
            for (lo, hi) in monotone_pieces(&phase, 2.0 * a, 1.0) {
                b[0] += vdc_bound(&phase, &amp, (lo, hi), 1)?;
            }
        }
    }
    let root = s.sqrt();
    let scaled = b.map(|x| x * root);
    let total_b: f64 = scaled.iter().sum();
    Ok(ModelBound { b: scaled, total_b, bound: total_b / root })
}
