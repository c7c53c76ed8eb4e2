//! Beta integrals ∫|y − 1|^{σ+λ}|y + 1|^{σ′+λ}φ(y)dy, their scaled and
//! curved variants, stationary-phase main terms and the normal-form change of
//! variables that straightens f(t, c) = h(t − c)h(t + c) to x² − a².
//!
//! Exponents satisfy Re σ, Re σ′ > −1 and Re σ + Re σ′ = −1; λ is imaginary.
//! The phase ln|1 − y²| has its only critical point at y = 0, so for λ = iT
//! the main term is αφ(0)|λ|^{−1/2} with α = √π·e^{−iπ/4·sgn T}.

use crate::error::{domain, Result};
use crate::func::{Compact, ComplexFn, RealFn};
use crate::oscquad::{integrate_line_with, QuadOptions, QuadResult, SingularitySpec};
use crate::repn::abs_pow;
use num_complex::Complex64;
use std::f64::consts::PI;
use std::sync::Arc;

type C = Complex64;

/// Half-width of the working interval for c and of the amplitude support.
pub const WORK_EPS: f64 = 0.5;
pub const WORK_D: f64 = 0.5;

fn check_exponents(lambda: C, sigma: C, sigma_p: C) -> Result<f64> {
    if lambda.re != 0.0 {
        return domain("λ must be purely imaginary");
    }
    if !(sigma.re > -1.0 && sigma_p.re > -1.0) {
        return domain("need Re σ, Re σ′ > −1");
    }
    if (sigma.re + sigma_p.re + 1.0).abs() > 1e-12 {
        return domain("need Re σ + Re σ′ = −1");
    }
    Ok(lambda.im)
}

/// (π/i)^{1/2} for λ = iT with T > 0, its conjugate for T < 0.
pub fn alpha(lambda: C) -> C {
    C::from_polar(PI.sqrt(), -PI / 4.0 * lambda.im.signum())
}

fn options(t: f64, tol: f64, phi: &Compact) -> QuadOptions {
    let freq = phi.cnorm(1) / phi.cnorm(0).max(1e-300);
    QuadOptions { abs_tol: 1e-3 * tol / (1.0 + t.abs()), rel_tol: tol, ..QuadOptions::default() }.with_freq(freq)
}

/// ∫|y − 1|^{σ+λ}|y + 1|^{σ′+λ}φ(y)dy over the support of φ.
pub fn std_beta(lambda: C, sigma: C, sigma_p: C, phi: &Compact, tol: f64) -> Result<QuadResult> {
    scaled_beta_unchecked(lambda, sigma, sigma_p, 1.0, phi, tol)
}

/// αφ(0)|λ|^{−1/2}.
pub fn std_beta_main(lambda: C, sigma: C, sigma_p: C, phi: &Compact) -> Result<C> {
    check_exponents(lambda, sigma, sigma_p)?;
    Ok(alpha(lambda) * phi.eval(0.0) * lambda.norm().powf(-0.5))
}

/// H_{λ,a}(ψ) = ∫|x − a|^{σ+λ}|x + a|^{σ′+λ}ψ(x)dx, a ∈ (0, 0.1].
pub fn scaled_beta(lambda: C, sigma: C, sigma_p: C, a: f64, psi: &Compact, tol: f64) -> Result<QuadResult> {
    if !(a > 0.0 && a <= 0.1) {
        return domain(format!("a = {a} outside (0, 0.1]"));
    }
    scaled_beta_unchecked(lambda, sigma, sigma_p, a, psi, tol)
}

fn scaled_beta_unchecked(lambda: C, sigma: C, sigma_p: C, a: f64, psi: &Compact, tol: f64) -> Result<QuadResult> {
    let t = check_exponents(lambda, sigma, sigma_p)?;
    let (e1, e2) = (sigma + lambda, sigma_p + lambda);
    let sing = SingularitySpec::none().with(a, &[e1]).with(-a, &[e2]);
    let f = |x: f64| (e1 * (x - a).abs().ln() + e2 * (x + a).abs().ln()).exp() * psi.eval(x);
    integrate_line_with(f, (psi.lo, psi.hi), &sing, &options(t, tol, psi))
}

/// a^{σ+σ′+1+2λ}·αψ(0)|λ|^{−1/2}; modulus |αψ(0)||λ|^{−1/2} for every a.
pub fn scaled_beta_main(lambda: C, sigma: C, sigma_p: C, a: f64, psi: &Compact) -> Result<C> {
    if !(a > 0.0) {
        return domain("a must be positive");
    }
    Ok(abs_pow(a, sigma + sigma_p + 1.0 + 2.0 * lambda) * std_beta_main(lambda, sigma, sigma_p, psi)?)
}

/// Normal form of f(t, c) = h(t − c)h(t + c) near t = 0: x(t)² − a² = f(t, c).
#[derive(Clone)]
pub struct XMap {
    h: Arc<dyn RealFn>,
    pub c: f64,
    pub a: f64,
}

impl std::fmt::Debug for XMap {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "XMap {{ c: {}, a: {} }}", self.c, self.a)
    }
}

/// Odd h with h′ > 0 on the working interval; returns a = h(c) and the map.
pub fn beta_change_of_vars(h: Arc<dyn RealFn>, c: f64) -> Result<(f64, XMap)> {
    if !(c.abs() < WORK_EPS) {
        return domain(format!("|c| = {} outside the working interval", c.abs()));
    }
    let reach = WORK_D + WORK_EPS;
    for i in 0..=256 {
        let s = reach * i as f64 / 256.0;
        let (hp, hm) = (h.eval(s), h.eval(-s));
        if (hp + hm).abs() > 1e-12 * (1.0 + hp.abs()) {
            return domain(format!("h is not odd at {s}"));
        }
        if !(h.deriv(1, s) > 0.0) {
            return domain(format!("h′ ≤ 0 at {s}"));
        }
    }
    let map = XMap { h, c, a: 0.0 };
    let a = map.h.eval(c);
    let map = XMap { a, ..map };
    for i in 0..=128 {
        let t = -WORK_D + 2.0 * WORK_D * i as f64 / 128.0;
        if map.f(t) + a * a < -1e-14 {
            return domain(format!("f(t, c) + a² < 0 at t = {t}"));
        }
    }
    Ok((a, map))
}

impl XMap {
    fn f(&self, t: f64) -> f64 {
        self.h.eval(t - self.c) * self.h.eval(t + self.c)
    }

    /// x(t) = sgn(t)·√(f(t, c) + a²).
    pub fn x(&self, t: f64) -> f64 {
        t.signum() * (self.f(t) + self.a * self.a).max(0.0).sqrt()
    }

    /// dx/dt; at t = 0 the limit √(h′(c)² − h(c)h″(c)).
    pub fn dx_dt(&self, t: f64) -> f64 {
        let x = self.x(t);
        if t.abs() < 1e-6 || x.abs() < 1e-12 {
            let (hp, h, hpp) = (self.h.deriv(1, self.c), self.a, self.h.deriv(2, self.c));
            let base = (hp * hp - h * hpp).sqrt();
            if t == 0.0 {
                return base;
            }
            // x is odd in t, so x′ is even: x′(t) = x′(0) + O(t²).
            return (self.x(t + 1e-4) - self.x(t - 1e-4)) / 2e-4;
        }
        let fp = self.h.deriv(1, t - self.c) * self.h.eval(t + self.c) + self.h.eval(t - self.c) * self.h.deriv(1, t + self.c);
        fp / (2.0 * x)
    }

    /// Inverse map t(x) by safeguarded Newton on [−reach, reach].
    pub fn t_of(&self, x: f64) -> f64 {
        let reach = WORK_D + WORK_EPS;
        let (mut lo, mut hi) = (-reach, reach);
        let mut t = x / self.dx_dt(0.0);
        for _ in 0..100 {
            let r = self.x(t) - x;
            if r == 0.0 {
                return t;
            }
            if r > 0.0 {
                hi = hi.min(t);
            } else {
                lo = lo.max(t);
            }
            let mut next = t - r / self.dx_dt(t);
            if !(next >= lo && next <= hi) {
                next = 0.5 * (lo + hi);
            }
            if (next - t).abs() < 1e-15 * (1.0 + t.abs()) {
                return next;
            }
            t = next;
        }
        t
    }

    /// g₁ with h(t − c) = (x − a)g₁; the removable point x = a is filled by
    /// the limit h′(0)·dt/dx.
    pub fn g1(&self, x: f64) -> f64 {
        let t = self.t_of(x);
        if (x - self.a).abs() < 1e-9 * (1.0 + self.a.abs()) {
            return self.h.deriv(1, 0.0) / self.dx_dt(t);
        }
        self.h.eval(t - self.c) / (x - self.a)
    }

    /// g₂ with h(t + c) = (x + a)g₂.
    pub fn g2(&self, x: f64) -> f64 {
        let t = self.t_of(x);
        if (x + self.a).abs() < 1e-9 * (1.0 + self.a.abs()) {
            return self.h.deriv(1, 0.0) / self.dx_dt(t);
        }
        self.h.eval(t + self.c) / (x + self.a)
    }

    /// ψ(x) = φ(t(x))|g₁|^σ|g₂|^{σ′}|dt/dx|, supported on x([lo, hi]).
    pub fn pullback(&self, phi: &Compact, sigma: C, sigma_p: C) -> Compact {
        let (lo, hi) = (self.x(phi.lo), self.x(phi.hi));
        let me = self.clone();
        let phi = phi.clone();
        let f = move |x: f64| {
            let t = me.t_of(x);
            phi.eval(t) * abs_pow(me.g1(x), sigma) * abs_pow(me.g2(x), sigma_p) / me.dx_dt(t).abs()
        };
        Compact::new(Arc::new(f), lo, hi)
    }
}

/// 𝐇_{λ,c}(φ) = ∫|h(t − c)|^{σ+λ}|h(t + c)|^{σ′+λ}φ(t)dt, φ supported in [−d, d].
pub fn general_beta(h: Arc<dyn RealFn>, lambda: C, sigma: C, sigma_p: C, c: f64, phi: &Compact, tol: f64) -> Result<QuadResult> {
    let t = check_exponents(lambda, sigma, sigma_p)?;
    beta_change_of_vars(h.clone(), c)?;
    if phi.lo < -WORK_D - 1e-12 || phi.hi > WORK_D + 1e-12 {
        return domain("amplitude support must lie in [−d, d]");
    }
    let (e1, e2) = (sigma + lambda, sigma_p + lambda);
    // Near t = ±c, h(t ∓ c) ≈ h′(0)(t ∓ c): same exponents as the flat case.
    let sing = SingularitySpec::none().with(c, &[e1]).with(-c, &[e2]);
    let f = |s: f64| (e1 * h.eval(s - c).abs().ln() + e2 * h.eval(s + c).abs().ln()).exp() * phi.eval(s);
    integrate_line_with(f, (phi.lo, phi.hi), &sing, &options(t, tol, phi))
}

/// Stationary-phase main term at t = 0, computed directly:
/// |h(c)|^{σ+σ′+1+2λ}·αφ(0)|λ|^{−1/2}·(h′(c)² − h(c)h″(c))^{−1/2}.
pub fn general_beta_main(h: &dyn RealFn, lambda: C, sigma: C, sigma_p: C, c: f64, phi: &Compact) -> Result<C> {
    check_exponents(lambda, sigma, sigma_p)?;
    let (hc, hp, hpp) = (h.eval(c), h.deriv(1, c), h.deriv(2, c));
    let curv = hp * hp - hc * hpp;
    if !(curv > 0.0) {
        return domain("degenerate critical point");
    }
    let a = hc.abs();
    Ok(abs_pow(a, sigma + sigma_p + 1.0 + 2.0 * lambda) * alpha(lambda) * phi.eval(0.0) * lambda.norm().powf(-0.5) / curv.sqrt())
}

/// The same main term through the normal form: [`scaled_beta_main`] of the
/// pulled-back amplitude ψ at a = |h(c)|.
pub fn general_beta_main_pullback(h: Arc<dyn RealFn>, lambda: C, sigma: C, sigma_p: C, c: f64, phi: &Compact) -> Result<C> {
    // c < 0 swaps the roles of the two factors.
    let (c, sigma, sigma_p) = if c < 0.0 { (-c, sigma_p, sigma) } else { (c, sigma, sigma_p) };
    let (a, map) = beta_change_of_vars(h, c)?;
    let psi = map.pullback(phi, sigma, sigma_p);
    Ok(abs_pow(a, sigma + sigma_p + 1.0 + 2.0 * lambda) * std_beta_main(lambda, sigma, sigma_p, &psi)?)
}

/// Wraps a closure with analytic first and second derivatives.
pub struct Smooth3 {
    pub f: fn(f64) -> f64,
    pub d1: fn(f64) -> f64,
    pub d2: fn(f64) -> f64,
}

impl RealFn for Smooth3 {
    fn eval(&self, x: f64) -> f64 {
        (self.f)(x)
    }

    fn deriv(&self, k: usize, x: f64) -> f64 {
        match k {
            0 => (self.f)(x),
            1 => (self.d1)(x),
            2 => (self.d2)(x),
            _ => {
                let g = |y: f64| (self.d2)(y);
                let h = 1e-3;
                if k == 3 {
                    (g(x + h) - g(x - h)) / (2.0 * h)
                } else {
                    (g(x + h) - 2.0 * g(x) + g(x - h)) / (h * h)
                }
            }
        }
    }
}

/// h = sin with exact derivatives.
pub fn sine() -> Arc<dyn RealFn> {
    Arc::new(Smooth3 { f: f64::sin, d1: f64::cos, d2: |x| -x.sin() })
}

/// h(t) = t.
pub fn identity() -> Arc<dyn RealFn> {
    Arc::new(Smooth3 { f: |x| x, d1: |_| 1.0, d2: |_| 0.0 })
}

impl ComplexFn for XMap {
    fn eval(&self, t: f64) -> C {
        C::new(self.x(t), 0.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn half() -> C {
        C::new(-0.5, 0.0)
    }

    #[test]
    fn arcsine_at_zero_frequency() {
        let one = Compact::new(Arc::new(|_: f64| C::new(1.0, 0.0)), -1.0, 1.0);
        let q = std_beta(C::new(0.0, 0.0), half(), half(), &one, 1e-12).unwrap();
        assert!((q.value - C::new(PI, 0.0)).norm() < 1e-10);
    }

    #[test]
    fn alpha_modulus() {
        assert!((alpha(C::new(0.0, 5.0)).norm() - 1.772_453_850_905_516).abs() < 1e-15);
        assert!((alpha(C::new(0.0, 5.0)) - (C::new(PI, 0.0) / C::new(0.0, 1.0)).sqrt()).norm() < 1e-15);
    }

    #[test]
    fn exponent_constraints() {
        let b = Compact::bump(0.0, 0.5);
        assert!(std_beta(C::new(0.0, 10.0), C::new(-0.4, 0.0), half(), &b, 1e-6).is_err());
        assert!(std_beta(C::new(0.1, 10.0), half(), half(), &b, 1e-6).is_err());
        assert!(scaled_beta(C::new(0.0, 10.0), half(), half(), 0.2, &b, 1e-6).is_err());
        assert_eq!(std_beta_main(C::new(0.0, 10.0), half(), half(), &Compact::bump(0.3, 0.2)).unwrap(), C::new(0.0, 0.0));
    }

    #[test]
    fn parity_split() {
        // σ = σ′ and even φ: the integral is twice the half-line part.
        let b = Compact::bump(0.0, 0.8);
        let lam = C::new(0.0, 40.0);
        let full = std_beta(lam, half(), half(), &b, 1e-11).unwrap();
        let right = Compact::new(b.func.clone(), 0.0, 0.8);
        let half_line = std_beta(lam, half(), half(), &right, 1e-11).unwrap();
        assert!((full.value - 2.0 * half_line.value).norm() < 1e-9);
    }

    #[test]
    fn identity_map_is_identity() {
        let (a, m) = beta_change_of_vars(identity(), 0.2).unwrap();
        assert_eq!(a, 0.2);
        for &t in &[-0.4, -0.1, 0.0, 0.05, 0.3] {
            assert!((m.x(t) - t).abs() < 1e-15);
        }
    }

    #[test]
    fn sine_map_is_sine() {
        // sin(t − c)sin(t + c) + sin²c = sin²t.
        let (a, m) = beta_change_of_vars(sine(), 0.2).unwrap();
        assert!((a - 0.2f64.sin()).abs() < 1e-16);
        assert_eq!(m.x(0.0), 0.0);
        for &t in &[-0.45, -0.2, -0.01, 0.01, 0.2, 0.45] {
            assert!((m.x(t) - t.sin()).abs() < 1e-14);
            assert!((m.dx_dt(t) - t.cos()).abs() < 1e-7);
            assert!((m.t_of(t.sin()) - t).abs() < 1e-13);
        }
        assert!((m.dx_dt(0.0) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn x_map_smooth_across_zero() {
        let (_, m) = beta_change_of_vars(sine(), 0.2).unwrap();
        let h = 0.01;
        let d4 = |t: f64| (m.x(t - 2.0 * h) - 4.0 * m.x(t - h) + 6.0 * m.x(t) - 4.0 * m.x(t + h) + m.x(t + 2.0 * h)) / h.powi(4);
        for i in -10..=10 {
            assert!(d4(i as f64 * 0.003).abs() < 2.0);
        }
    }

    #[test]
    fn rejects_bad_h() {
        let even: Arc<dyn RealFn> = Arc::new(|x: f64| x * x);
        assert!(beta_change_of_vars(even, 0.1).is_err());
        let decreasing: Arc<dyn RealFn> = Arc::new(|x: f64| -x);
        assert!(beta_change_of_vars(decreasing, 0.1).is_err());
        assert!(beta_change_of_vars(sine(), 0.7).is_err());
    }

    #[test]
    fn main_terms_agree_through_pullback() {
        let phi = Compact::modulated_bump(0.02, 0.45, 1.3, 0.4);
        let lam = C::new(0.0, 128.0);
        let s = C::new(-0.5, 0.3);
        let sp = C::new(-0.5, -0.1);
        for &c in &[0.2, 0.05, -0.3] {
            let d = general_beta_main(sine().as_ref(), lam, s, sp, c, &phi).unwrap();
            let p = general_beta_main_pullback(sine(), lam, s, sp, c, &phi).unwrap();
            assert!((d - p).norm() < 1e-9 * d.norm(), "c={c}: {d} vs {p}");
        }
    }
}
