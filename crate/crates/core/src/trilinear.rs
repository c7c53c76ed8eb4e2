//! Oracle evaluation of the reduced kernel l_λ, the rank-one functional b_λ,
//! the Hermitian form H_λ on ΔK-invariant vectors and the functional F_{λ,n}.
//!
//! Normalization: l_λ(c) = (8π)^{−1/2}·∫_{S¹} K(y + c, y, 0) dy. With this
//! constant |l_λ(π/2)| ≈ 2t^{−1/2} at τ = τ′ = 0 and F ≈ a_λ t^{−1/2} G hold
//! with the standard a_λ = e^{iπ/4}2^{1+λ/2}.

use crate::error::{domain, Result};
use crate::oscquad::{integrate_line_with, QuadOptions, QuadResult, SingularitySpec};
use crate::repn::{abs_pow, eval_kernel, kernel_exponents, CircleFunction, Period, RepParams, SpectralParam, TestVector};
use num_complex::Complex64;
use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::Mutex;

type C = Complex64;

/// (8π)^{−1/2}.
pub fn kernel_normalization() -> f64 {
    1.0 / (8.0 * PI).sqrt()
}

/// Representative of c modulo π in (−π/2, π/2]. Arguments already in range
/// are returned unchanged: going through [0, π) would cost ε·π absolute
/// precision for small negative c.
fn reduce_angle(c: f64) -> Result<f64> {
    let mut r = c - PI * (c / PI).round();
    if r <= -PI / 2.0 {
        r += PI;
    }
    if r.abs() < 1e-300 || (PI - r.abs()).abs() < 1e-12 {
        return domain(format!("l_λ is singular at c = {c} (multiple of π)"));
    }
    Ok(r)
}

fn inner_options(t: f64, rel_tol: f64) -> QuadOptions {
    QuadOptions { abs_tol: 1e-3 * rel_tol / (1.0 + t).sqrt(), rel_tol, ..QuadOptions::default() }
}

/// l_λ(c) through the factored form |sin c|^{e₁}·∫|sin s|^{e₂}|sin(c − s)|^{e₃}ds.
///
/// `tol` is relative. The inner integrand is π-periodic; the window is centred
/// between its two singular points 0 and c so that the offsets from both are
/// computed without cancellation, even for c within 1e−12 of a multiple of π.
pub fn l_kernel(p: &RepParams, lambda: &SpectralParam, c: f64, tol: f64) -> Result<QuadResult> {
    let t = lambda.principal_t()?;
    let r = reduce_angle(c)?;
    let [e1, e2, e3] = kernel_exponents(p, lambda.lambda());
    let mid = 0.5 * r;
    let sing = SingularitySpec::none().with(0.0, &[e2]).with(r, &[e3]);
    let f = |s: f64| (e2 * s.sin().abs().ln() + e3 * (r - s).sin().abs().ln()).exp();
    let q = integrate_line_with(f, (mid - PI / 2.0, mid + PI / 2.0), &sing, &inner_options(t, tol))?;
    let scale = abs_pow(r.sin(), e1) * (2.0 * kernel_normalization());
    Ok(QuadResult { value: q.value * scale, err_estimate: q.err_estimate * scale.norm(), ..q })
}

/// l_λ(c) by integrating the full kernel K(y + c, y, 0) over the circle;
/// an independent path used to cross-check [`l_kernel`].
pub fn l_kernel_direct(p: &RepParams, lambda: &SpectralParam, c: f64, tol: f64) -> Result<QuadResult> {
    let t = lambda.principal_t()?;
    let r = reduce_angle(c)?.rem_euclid(PI);
    let [_, e2, e3] = kernel_exponents(p, lambda.lambda());
    let sing = SingularitySpec::none()
        .with(0.0, &[e3])
        .with(PI, &[e3])
        .with(2.0 * PI, &[e3])
        .with(PI - r, &[e2])
        .with(2.0 * PI - r, &[e2]);
    let f = |y: f64| eval_kernel(p, lambda, y + c, y, 0.0).unwrap_or(C::new(f64::NAN, 0.0));
    let q = integrate_line_with(f, (0.0, 2.0 * PI), &sing, &inner_options(t, tol))?;
    let s = kernel_normalization();
    Ok(QuadResult { value: q.value * s, err_estimate: q.err_estimate * s, ..q })
}

const OUTER_MAX_EVALS: usize = 400_000;

/// ∫_{S¹} l_λ(c)·g(c) dc for π-periodic g, with l_λ memoized on the outer nodes.
///
/// Integrated over (−π/2, π/2) so the only singular point, c = 0, is interior;
/// there l_λ ~ |c|^{e₁−λ}·A + |c|^{e₁}·B and both branches are declared.
fn outer_integral(p: &RepParams, lambda: &SpectralParam, g: &(dyn Fn(f64) -> C + Sync), g_freq: f64, tol: f64) -> Result<QuadResult> {
    let t = lambda.principal_t()?;
    let lam = lambda.lambda();
    let [e1, _, _] = kernel_exponents(p, lam);
    let ends = [e1 - lam, e1];
    let sing = SingularitySpec::none().with(0.0, &ends);
    // ∫|l·g| exceeds |∫l·g| by about t^{1/3} at the Airy peak.
    let inner_tol = tol / (10.0 * (1.0 + t.abs()).cbrt());
    let memo: Mutex<HashMap<u64, QuadResult>> = Mutex::new(HashMap::new());
    let failure: Mutex<Option<crate::Error>> = Mutex::new(None);
    let f = |c: f64| -> C {
        let key = c.to_bits();
        if let Some(q) = memo.lock().unwrap().get(&key) {
            return q.value * g(c);
        }
        match l_kernel(p, lambda, c, inner_tol) {
            Ok(q) => {
                memo.lock().unwrap().insert(key, q);
                q.value * g(c)
            }
            Err(e) => {
                failure.lock().unwrap().get_or_insert(e);
                C::new(0.0, 0.0)
            }
        }
    };
    // Each outer node costs an inner quadrature; past this budget the result is
    // returned unconverged rather than refined further.
    let opts = QuadOptions { abs_tol: 1e-3 * tol / (1.0 + t), rel_tol: tol, max_evals: OUTER_MAX_EVALS, ..QuadOptions::default() }.with_freq(g_freq);
    let target = |v: C| opts.abs_tol.max(opts.rel_tol * v.norm());
    let q = integrate_line_with(f, (-PI / 2.0, PI / 2.0), &sing, &opts)?;
    if let Some(e) = failure.into_inner().unwrap() {
        return Err(e);
    }
    let memo = memo.into_inner().unwrap();
    // Inner errors enter through ∫|l·g|, bounded by the worst relative inner error.
    let inner_rel = memo.values().map(|q| q.err_estimate / q.value.norm().max(1e-300)).fold(0.0, f64::max);
    let inner_ok = memo.values().all(|q| q.converged);
    let err = 2.0 * (q.err_estimate + inner_rel * q.abs_mass);
    Ok(QuadResult {
        value: 2.0 * q.value,
        err_estimate: err,
        n_evals: q.n_evals + memo.values().map(|q| q.n_evals).sum::<usize>(),
        converged: q.converged && inner_ok && err <= target(2.0 * q.value),
        abs_mass: 2.0 * q.abs_mass,
    })
}

fn require_pi_periodic(u: &CircleFunction) -> Result<()> {
    if u.period() != Period::Pi {
        return domain("profile must have period π");
    }
    Ok(())
}

/// b_λ(u) = ∫_{S¹} l_λ(c)u(c) dc.
pub fn b_functional(p: &RepParams, lambda: &SpectralParam, u: &CircleFunction, tol: f64) -> Result<QuadResult> {
    require_pi_periodic(u)?;
    outer_integral(p, lambda, &|c| u.eval(c), u.max_frequency(), tol)
}

/// H_λ(w) = |b_λ(u_w)|².
pub fn h_form(p: &RepParams, lambda: &SpectralParam, w: &TestVector, tol: f64) -> Result<f64> {
    Ok(h_form_detailed(p, lambda, w, tol)?.0)
}

/// (H_λ(w), error bound on H, underlying b).
pub fn h_form_detailed(p: &RepParams, lambda: &SpectralParam, w: &TestVector, tol: f64) -> Result<(f64, f64, QuadResult)> {
    let b = b_functional(p, lambda, &w.u_profile(), tol)?;
    let m = b.value.norm();
    Ok((m * m, 2.0 * m * b.err_estimate + b.err_estimate * b.err_estimate, b))
}

/// F_{λ,n}(φ) = ∫_{S¹} l_λ(c)e^{inc}φ(c) dc.
pub fn f_functional(p: &RepParams, lambda: &SpectralParam, n: i64, phi: &CircleFunction, tol: f64) -> Result<QuadResult> {
    require_pi_periodic(phi)?;
    if n % 2 != 0 {
        return domain("n must be even so that e^{inc}φ has period π");
    }
    let nf = n as f64;
    let g = |c: f64| C::from_polar(1.0, nf * c) * phi.eval(c);
    outer_integral(p, lambda, &g, nf.abs() + phi.max_frequency(), tol)
}

/// Default relative tolerance: 1e−6 up to t = 256, 1e−5 beyond.
pub fn default_tol(t: f64) -> f64 {
    if t.abs() <= 256.0 {
        1e-6
    } else {
        1e-5
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::func::ExpPoly;
    use crate::repn::{make_test_vector, TestKind};

    #[test]
    fn kernel_is_even_near_the_singular_point() {
        let p = RepParams::new(0.3, 0.7);
        let lam = SpectralParam::Principal(73.5);
        for c in [1e-4, 1e-7, 1e-9] {
            let a = l_kernel(&p, &lam, c, 1e-12).unwrap().value;
            let b = l_kernel(&p, &lam, -c, 1e-12).unwrap().value;
            assert!((a - b).norm() < 1e-12 * a.norm(), "c = {c}: {a} vs {b}");
        }
        let a = l_kernel(&p, &lam, 0.3, 1e-12).unwrap().value;
        let b = l_kernel(&p, &lam, 0.3 - 3.0 * PI, 1e-12).unwrap().value;
        assert!((a - b).norm() < 1e-10 * a.norm());
    }

    #[test]
    fn peak_value_at_quarter_turn() {
        let p = RepParams::new(0.0, 0.0);
        let q = l_kernel(&p, &SpectralParam::Principal(100.0), PI / 2.0, 1e-9).unwrap();
        assert!(q.converged);
        assert!((q.value.norm() - 0.2).abs() < 3.0 * 100f64.powf(-1.5), "{}", q.value.norm());
    }

    #[test]
    fn swap_identity() {
        let p = RepParams::new(0.3, 0.7);
        let lam = SpectralParam::Principal(40.0);
        for &c in &[0.4, 1.3, 2.2] {
            let a = l_kernel(&p, &lam, -c, 1e-10).unwrap();
            let b = l_kernel(&p.swapped(), &lam, c, 1e-10).unwrap();
            assert!((a.value - b.value).norm() <= 10.0 * (a.err_estimate + b.err_estimate) + 1e-12);
        }
        let s = RepParams::new(0.5, 0.5);
        let a = l_kernel(&s, &lam, -0.9, 1e-10).unwrap();
        let b = l_kernel(&s, &lam, 0.9, 1e-10).unwrap();
        assert!((a.value - b.value).norm() < 1e-10);
    }

    #[test]
    fn factored_and_direct_agree() {
        let p = RepParams::new(0.3, 0.7);
        let lam = SpectralParam::Principal(25.0);
        let a = l_kernel(&p, &lam, 0.8, 1e-10).unwrap();
        let b = l_kernel_direct(&p, &lam, 0.8, 1e-10).unwrap();
        assert!((a.value - b.value).norm() <= 10.0 * (a.err_estimate + b.err_estimate) + 1e-11);
    }

    #[test]
    fn singular_angle_is_rejected() {
        let p = RepParams::new(0.0, 0.0);
        assert!(l_kernel(&p, &SpectralParam::Principal(10.0), PI, 1e-6).is_err());
        assert!(l_kernel(&p, &SpectralParam::Complementary(0.5), 1.0, 1e-6).is_err());
    }

    #[test]
    fn linearity_of_f_and_b() {
        let p = RepParams::new(0.0, 0.0);
        let lam = SpectralParam::Principal(20.0);
        let one = CircleFunction::constant(C::new(1.0, 0.0));
        let tilde = make_test_vector(10, TestKind::Tilde).unwrap().profile();
        let ft = f_functional(&p, &lam, 10, &tilde, 1e-8).unwrap();
        let f10 = f_functional(&p, &lam, 10, &one, 1e-8).unwrap();
        let f12 = f_functional(&p, &lam, 12, &one, 1e-8).unwrap();
        let err = ft.err_estimate + f10.err_estimate + f12.err_estimate;
        assert!((ft.value - f10.value - f12.value).norm() <= err + 1e-9, "{}", (ft.value - f10.value - f12.value).norm());
        let u = CircleFunction::from_exp_poly(ExpPoly::new(vec![(10, C::new(1.0, 0.0)), (-10, C::new(1.0, 0.0))]));
        let b = b_functional(&p, &lam, &u, 1e-8).unwrap();
        let fm = f_functional(&p, &lam, -10, &one, 1e-8).unwrap();
        assert!((b.value - f10.value - fm.value).norm() <= b.err_estimate + f10.err_estimate + fm.err_estimate + 1e-9);
        let zero = CircleFunction::constant(C::new(0.0, 0.0));
        assert_eq!(f_functional(&p, &lam, 4, &zero, 1e-8).unwrap().value, C::new(0.0, 0.0));
    }

    #[test]
    fn h_form_is_nonnegative() {
        let p = RepParams::new(0.3, 0.7);
        let w = make_test_vector(6, TestKind::Tilde).unwrap();
        assert!(h_form(&p, &SpectralParam::Principal(12.0), &w, 1e-7).unwrap() >= 0.0);
    }
}
