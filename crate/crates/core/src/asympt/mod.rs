//! Closed-form approximants for l_λ, G_{λ,n} and F_{λ,n}, with remainder
//! budgets and regime classification by δ = 2n/t.
//!
//! Conventions. k_λ(c) = A(c)m_λ(c) with A(c) = |sin c|^{(−τ−τ′−1)/2} and
//! m_λ(c) = |sin(c/2)|^{−λ/2}|cos(c/2)|^{λ/2}; a_λ = e^{iπ/4}2^{1+λ/2}.
//! Since m_λ(c + π) = m_{−λ}(c), pointwise l_λ ≈ (a_λ/2)t^{−1/2}A(m_λ + m_{−λ}),
//! and against π-periodic functions this integrates to a_λ t^{−1/2}∫k_λ.
//!
//! The phase of m_λe^{inc} is S(c) = (t/2)ln|cot(c/2)| + nc with
//! S′(c) = n − t/(2 sin c): critical points solve sin c = t/(2n) = 1/δ.
//! At δ = 1 the point c₀ = π/2 is degenerate with S‴(c₀) = −t/2, giving
//! G ≈ 2π(4/t)^{1/3}iⁿφ(π/2)·Ai((t − 2n)/(2t)^{1/3}).

mod airy;
pub mod calibration;

pub use airy::{airy, airy_level_crossing, half_level_radius, AI0, AIP0, AIRY_PEAK_X};

use crate::error::{domain, Result};
use crate::oscquad::{integrate_line_with, QuadOptions, QuadResult, SingularitySpec};
use crate::repn::{kernel_exponents, CircleFunction, Period, RepParams, SpectralParam};
use num_complex::Complex64;
use serde::Serialize;
use std::f64::consts::PI;

type C = Complex64;

/// Half-width of the Airy window in δ.
pub const REGIME_EPS: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Regime {
    NoCriticalPoint,
    Nondegenerate,
    AiryWindow,
}

/// A main term with its remainder budget.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Approximation {
    pub main_term: C,
    pub remainder_budget: f64,
    /// None for pointwise kernel approximations, which do not depend on n.
    pub regime: Option<Regime>,
}

/// Regime from δ = 2n/t.
pub fn regime(t: f64, n: i64) -> Regime {
    let delta = 2.0 * n as f64 / t;
    if (delta - 1.0).abs() <= REGIME_EPS {
        Regime::AiryWindow
    } else if delta > 1.0 {
        Regime::Nondegenerate
    } else {
        Regime::NoCriticalPoint
    }
}

/// t for λ = it with t ≥ 𝒮.
fn checked_t(p: &RepParams, lambda: &SpectralParam) -> Result<f64> {
    let t = lambda.principal_t()?;
    if t.abs() < p.s_cutoff() {
        return domain(format!("|t| = {} below the cutoff 𝒮 = {}", t.abs(), p.s_cutoff()));
    }
    Ok(t)
}

/// a_λ = e^{iπ/4}·2^{1+λ/2}, principal branch.
pub fn a_lambda(lambda: C) -> C {
    C::from_polar(1.0, PI / 4.0) * (C::new(1.0, 0.0) + lambda / 2.0).scale(2f64.ln()).exp()
}

/// k_λ(c) = A(c)·m_λ(c).
pub fn k_lambda(p: &RepParams, lambda: C, c: f64) -> C {
    let a = (-p.tau() - p.tau_prime() - 1.0) / 2.0;
    let lc = (c / 2.0).cos().abs().ln() - (c / 2.0).sin().abs().ln();
    (a * c.sin().abs().ln() + lambda / 2.0 * lc).exp()
}

/// k_λ(c) + k_λ(c + π) = A(c)(m_λ(c) + m_{−λ}(c)).
pub fn k_lambda_folded(p: &RepParams, lambda: C, c: f64) -> C {
    let a = (-p.tau() - p.tau_prime() - 1.0) / 2.0;
    let lc = (c / 2.0).cos().abs().ln() - (c / 2.0).sin().abs().ln();
    let amp = (a * c.sin().abs().ln()).exp();
    amp * ((lambda / 2.0 * lc).exp() + (-lambda / 2.0 * lc).exp())
}

/// Pointwise approximation of l_λ(c).
///
/// Budget: C_k·t^{−3/2}|sin c|^{−1/2}|ln|sin(c/2)cos(c/2)||, C_k frozen in
/// [`calibration::KERNEL_C`].
pub fn l_kernel_approx(p: &RepParams, lambda: &SpectralParam, c: f64) -> Result<Approximation> {
    let t = checked_t(p, lambda)?;
    let s = c.sin();
    if s.abs() < 1e-300 {
        return domain(format!("c = {c} is a singular angle"));
    }
    let lam = lambda.lambda();
    let main_term = a_lambda(lam) / 2.0 * t.abs().powf(-0.5) * k_lambda_folded(p, lam, c);
    let log = ((c / 2.0).sin() * (c / 2.0).cos()).abs().ln().abs();
    let remainder_budget = calibration::KERNEL_C * t.abs().powf(-1.5) * s.abs().powf(-0.5) * log;
    Ok(Approximation { main_term, remainder_budget, regime: None })
}

/// G_{λ,n}(φ) = ∫_{S¹} k_λ(c)e^{inc}φ(c) dc by the oracle, with `tol` relative.
pub fn g_functional(p: &RepParams, lambda: &SpectralParam, n: i64, phi: &CircleFunction, tol: f64) -> Result<QuadResult> {
    let t = lambda.principal_t()?;
    let opts = QuadOptions { abs_tol: 1e-4 * tol / (1.0 + t.abs()), rel_tol: tol, ..QuadOptions::default() };
    g_functional_with(p, lambda, n, phi, &opts)
}

/// As [`g_functional`] with explicit oracle options.
///
/// For π-periodic e^{inc}φ the circle folds onto (−π/2, π/2) with the kernel
/// k_λ(c) + k_λ(c + π); the single singular point c = 0 carries the branches
/// |c|^{e₁−λ} and |c|^{e₁}.
pub fn g_functional_with(p: &RepParams, lambda: &SpectralParam, n: i64, phi: &CircleFunction, opts: &QuadOptions) -> Result<QuadResult> {
    checked_t(p, lambda)?;
    if phi.period() != Period::Pi {
        return domain("profile must have period π");
    }
    if n % 2 != 0 {
        return domain("n must be even so that e^{inc}φ has period π");
    }
    let lam = lambda.lambda();
    let [e1, _, _] = kernel_exponents(p, lam);
    let sing = SingularitySpec::none().with(0.0, &[e1 - lam, e1]);
    let nf = n as f64;
    let f = |c: f64| k_lambda_folded(p, lam, c) * C::from_polar(1.0, nf * c) * phi.eval(c);
    let opts = opts.clone().with_freq(nf.abs() + phi.max_frequency());
    integrate_line_with(f, (-PI / 2.0, PI / 2.0), &sing, &opts)
}

/// Airy main term of G_{λ,n}(φ) given φ(π/2).
pub fn g_main_term(t: f64, n: i64, phi_c0: C) -> Result<C> {
    if !(t > 0.0) {
        return domain("t must be positive");
    }
    let z = (t - 2.0 * n as f64) / (2.0 * t).cbrt();
    let ai = airy::airy(z)?;
    let i_n = C::from_polar(1.0, PI / 2.0 * (n.rem_euclid(4)) as f64);
    Ok(i_n * phi_c0 * (2.0 * PI * (4.0 / t).cbrt() * ai))
}

/// Airy main term of F_{λ,n}(φ) = a_λ t^{−1/2}·[`g_main_term`].
pub fn f_main_term(t: f64, n: i64, phi_c0: C) -> Result<C> {
    let g = g_main_term(t, n, phi_c0)?;
    Ok(a_lambda(C::new(0.0, t)) * t.powf(-0.5) * g)
}

/// Approximation of G_{λ,n}(φ) with the Airy budget C_A·‖φ‖_{C²}·t^{−2/3}.
pub fn g_approx(p: &RepParams, lambda: &SpectralParam, n: i64, phi: &CircleFunction) -> Result<Approximation> {
    let t = checked_t(p, lambda)?;
    Ok(Approximation {
        main_term: g_main_term(t, n, phi.eval(PI / 2.0))?,
        remainder_budget: calibration::AIRY_C * phi.cnorm(2) * t.powf(-2.0 / 3.0),
        regime: Some(regime(t, n)),
    })
}

/// Approximation of F_{λ,n}(φ): Airy main term, budget a_λ-scaled Airy budget
/// plus the bridge term C_FG‖φ‖_∞t^{−3/2}.
pub fn f_approx(p: &RepParams, lambda: &SpectralParam, n: i64, phi: &CircleFunction) -> Result<Approximation> {
    let g = g_approx(p, lambda, n, phi)?;
    let t = checked_t(p, lambda)?;
    let scale = 2.0 * t.powf(-0.5);
    Ok(Approximation {
        main_term: a_lambda(lambda.lambda()) * t.powf(-0.5) * g.main_term,
        remainder_budget: scale * g.remainder_budget + calibration::FG_C * phi.cnorm(0) * t.powf(-1.5),
        regime: g.regime,
    })
}

/// Main-term peak value of H for Plain(n): |f_main_term|².
pub fn h_main_term(t: f64, n: i64) -> Result<f64> {
    Ok(f_main_term(t, n, C::new(1.0, 0.0))?.norm_sqr())
}

/// Constants (b, c) of the lower bound |F_main|² ≥ c·t^{−5/3} for
/// |2n − t| ≤ b·t^{1/3}: b = 2^{1/3}b′ with b′ from [`half_level_radius`],
/// c = 4π²·4^{2/3}·Ai(0)².
pub fn lower_bound_constants() -> (f64, f64) {
    let b = 2f64.cbrt() * half_level_radius();
    let c = 4.0 * PI * PI * 4f64.powf(2.0 / 3.0) * AI0 * AI0;
    (b, c)
}

/// S(c) = (t/2)(−ln|sin(c/2)| + ln|cos(c/2)|) + nc.
pub fn phase(t: f64, n: i64, c: f64) -> f64 {
    t / 2.0 * ((c / 2.0).cos().abs().ln() - (c / 2.0).sin().abs().ln()) + n as f64 * c
}

/// Critical points of the phase in (0, π).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CriticalPoints {
    pub points: Vec<f64>,
    /// A single cubic point (δ = 1).
    pub degenerate: bool,
    /// n = 0: the equation degenerates onto the singular endpoints.
    pub endpoint_degenerate: bool,
}

/// Solutions of sin c = 1/δ in (0, π), δ = 2n/t.
pub fn phase_critical_points(t: f64, n: i64) -> Result<CriticalPoints> {
    if !(t > 0.0) || n < 0 {
        return domain("need t > 0 and n ≥ 0");
    }
    if n == 0 {
        return Ok(CriticalPoints { points: vec![], degenerate: false, endpoint_degenerate: true });
    }
    let inv = t / (2.0 * n as f64);
    if (inv - 1.0).abs() <= 1e-12 {
        return Ok(CriticalPoints { points: vec![PI / 2.0], degenerate: true, endpoint_degenerate: false });
    }
    let points = if inv < 1.0 { vec![inv.asin(), PI - inv.asin()] } else { vec![] };
    Ok(CriticalPoints { points, degenerate: false, endpoint_degenerate: false })
}

/// Spectral budget for H_λ(w̃_n): C((1+n)^{−1}t^{−1} + t^{−3}) for t ≤ 4n,
/// C·t^{−3} beyond; C frozen in [`calibration::II_C`].
pub fn remainder_budget_ii(p: &RepParams, t: f64, n: i64) -> Result<f64> {
    remainder_budget_ii_with(p, t, n, calibration::II_C)
}

/// As [`remainder_budget_ii`] with an explicit constant.
pub fn remainder_budget_ii_with(p: &RepParams, t: f64, n: i64, c: f64) -> Result<f64> {
    let t = t.abs();
    if t < p.s_cutoff() {
        return domain(format!("t = {t} below the cutoff 𝒮 = {}", p.s_cutoff()));
    }
    let n = n.unsigned_abs() as f64;
    Ok(if t <= 4.0 * n { c * (1.0 / ((1.0 + n) * t) + t.powi(-3)) } else { c * t.powi(-3) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::func::ExpPoly;
    use crate::trilinear::l_kernel;

    fn one() -> CircleFunction {
        CircleFunction::constant(C::new(1.0, 0.0))
    }

    #[test]
    fn quarter_turn_modulus() {
        for &(tau, taup) in &[(0.0, 0.0), (0.3, 0.7)] {
            let p = RepParams::new(tau, taup);
            for &t in &[16.0, 100.0, 900.0] {
                let a = l_kernel_approx(&p, &SpectralParam::Principal(t), PI / 2.0).unwrap();
                assert!((a.main_term.norm() - 2.0 / t.sqrt()).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn k_modulus_is_t_independent() {
        let p = RepParams::new(0.3, 0.7);
        for &c in &[0.3, 1.1, 2.5] {
            let m0 = k_lambda(&p, C::new(0.0, 10.0), c).norm();
            let m1 = k_lambda(&p, C::new(0.0, 333.0), c).norm();
            assert!((m0 - m1).abs() < 1e-13 * m0);
            assert!((m0 - c.sin().abs().powf(-0.5)).abs() < 1e-13 * m0);
        }
    }

    #[test]
    fn folded_kernel_is_shift_sum() {
        let p = RepParams::new(0.3, 0.7);
        let lam = C::new(0.0, 37.0);
        for &c in &[-1.2, -0.2, 0.4, 1.5] {
            let a = k_lambda_folded(&p, lam, c);
            let b = k_lambda(&p, lam, c) + k_lambda(&p, lam, c + PI);
            assert!((a - b).norm() < 1e-12 * a.norm().max(1.0));
        }
    }

    #[test]
    fn pointwise_main_term_tracks_oracle() {
        let p = RepParams::new(0.3, 0.7);
        for &t in &[128.0, 512.0] {
            let lam = SpectralParam::Principal(t);
            let q = l_kernel(&p, &lam, 0.7, 1e-10).unwrap();
            let a = l_kernel_approx(&p, &lam, 0.7).unwrap();
            assert!((q.value - a.main_term).norm() <= a.remainder_budget, "t={t}");
        }
    }

    #[test]
    fn a_lambda_modulus_and_branch() {
        assert!((a_lambda(C::new(0.0, 123.4)).norm() - 2.0).abs() < 1e-14);
        let a = a_lambda(C::new(0.0, 0.0));
        assert!((a - C::from_polar(2.0, PI / 4.0)).norm() < 1e-15);
    }

    #[test]
    fn main_terms_at_window_centre() {
        // t = 2n: argument 0, so |G_main| = 2π(4/t)^{1/3}Ai(0).
        let g = g_main_term(300.0, 150, C::new(1.0, 0.0)).unwrap();
        assert!((g.norm() - 2.0 * PI * (4.0f64 / 300.0).cbrt() * AI0).abs() < 1e-14);
        let f = f_main_term(200.0, 100, C::new(1.0, 0.0)).unwrap();
        let expect = 2.0 * 200f64.powf(-0.5) * 2.0 * PI * (4.0f64 / 200.0).cbrt() * AI0;
        assert!((f.norm() - expect).abs() < 1e-14);
        // t^{−1/2}·t^{−1/3} = t^{−5/6} along t = 2n.
        let r = f_main_term(1600.0, 800, C::new(1.0, 0.0)).unwrap().norm() / f.norm();
        assert!((r - 8f64.powf(-5.0 / 6.0)).abs() < 1e-13);
    }

    #[test]
    fn main_term_tail_is_small() {
        // t − 2n = 5(2t)^{1/3} gives argument 5.
        let t: f64 = 2000.0;
        let n = ((t - 5.0 * (2.0 * t).cbrt()) / 2.0).round() as i64;
        let z = (t - 2.0 * n as f64) / (2.0 * t).cbrt();
        let g = g_main_term(t, n, C::new(1.0, 0.0)).unwrap().norm();
        assert!(z > 4.9 && g < 2.0 * PI * (4.0 / t).cbrt() * 2e-4);
    }

    #[test]
    fn g_matches_airy_term_at_centre() {
        let p = RepParams::new(0.0, 0.0);
        let q = g_functional(&p, &SpectralParam::Principal(300.0), 150, &one(), 1e-8).unwrap();
        let m = g_main_term(300.0, 150, C::new(1.0, 0.0)).unwrap();
        assert!(q.converged);
        assert!((q.value - m).norm() < 0.05 * m.norm(), "{} vs {}", q.value, m);
    }

    #[test]
    fn critical_points() {
        let cp = phase_critical_points(100.0, 100).unwrap();
        assert!((cp.points[0] - PI / 6.0).abs() < 1e-14 && (cp.points[1] - 5.0 * PI / 6.0).abs() < 1e-14);
        assert!(phase_critical_points(400.0, 100).unwrap().points.is_empty());
        let d = phase_critical_points(200.0, 100).unwrap();
        assert!(d.degenerate && d.points == vec![PI / 2.0]);
        let z = phase_critical_points(50.0, 0).unwrap();
        assert!(z.endpoint_degenerate && z.points.is_empty());
        // S′ vanishes at the reported points.
        let h = 1e-6;
        for &c in &cp.points {
            let ds = (phase(100.0, 100, c + h) - phase(100.0, 100, c - h)) / (2.0 * h);
            assert!(ds.abs() < 1e-6 * 100.0);
        }
    }

    #[test]
    fn regimes() {
        assert_eq!(regime(200.0, 100), Regime::AiryWindow);
        assert_eq!(regime(100.0, 100), Regime::Nondegenerate);
        assert_eq!(regime(400.0, 100), Regime::NoCriticalPoint);
        assert_eq!(regime(200.0, 108), Regime::AiryWindow);
    }

    #[test]
    fn budget_ii_branches() {
        let p = RepParams::new(0.3, 0.7);
        let n = 50;
        let at = remainder_budget_ii_with(&p, 200.0, n, 1.0).unwrap();
        assert!((at - (1.0 / (51.0 * 200.0) + 200f64.powi(-3))).abs() < 1e-18);
        let beyond = remainder_budget_ii_with(&p, 200.0 + 1e-9, n, 1.0).unwrap();
        assert!((beyond - 200f64.powi(-3)).abs() < 1e-15);
        assert!(remainder_budget_ii_with(&p, 2.0, n, 1.0).is_err());
    }

    #[test]
    fn lower_bound_holds_for_main_term() {
        let (b, c) = lower_bound_constants();
        for &t in &[100.0f64, 400.0, 1600.0] {
            let w = b * t.cbrt();
            let lo = ((t - w) / 2.0).ceil() as i64;
            let hi = ((t + w) / 2.0).floor() as i64;
            for n in lo..=hi {
                assert!(h_main_term(t, n).unwrap() >= c * t.powf(-5.0 / 3.0) * (1.0 - 1e-12));
            }
        }
    }

    #[test]
    fn complementary_and_small_t_rejected() {
        let p = RepParams::new(0.3, 0.7);
        assert!(l_kernel_approx(&p, &SpectralParam::complementary(0.4).unwrap(), 1.0).is_err());
        assert!(l_kernel_approx(&p, &SpectralParam::Principal(2.0), 1.0).is_err());
        let phi = CircleFunction::from_exp_poly(ExpPoly::new(vec![(0, C::new(1.0, 0.0))]));
        assert!(g_functional(&p, &SpectralParam::Principal(50.0), 3, &phi, 1e-6).is_err());
    }
}
