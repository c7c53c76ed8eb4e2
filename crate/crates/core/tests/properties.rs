use num_complex::Complex64 as C;
use proptest::prelude::*;
use std::sync::Arc;
use triperiod_core::corput::{ibp_bound, oscillatory_integral, vdc_bound, IbpSetup};
use triperiod_core::func::Compact;
use triperiod_core::oscquad::{integrate_line, SingularitySpec};
use triperiod_core::repn::{eval_kernel, RepParams, SpectralParam};
use triperiod_core::spectral::{gen_spectrum, low_spectrum_bound, orthonormalize, parseval_sum_with, ParsevalMode, WeightModel};

// Room for summation order in the oracle's own arithmetic.
const ROUNDING: f64 = 1e-13;

fn singular_oscillator(a: f64, shift: f64) -> impl Fn(f64) -> C + Sync {
    move |x: f64| C::from_polar(1.0, a * x) * (1.0 + shift * x) * x.abs().powf(-0.5)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn oracle_is_linear(a in -40.0..40.0f64, b in -40.0..40.0f64, ar in -2.0..2.0f64, ai in -2.0..2.0f64, br in -2.0..2.0f64) {
        let (alpha, beta) = (C::new(ar, ai), C::new(br, -ai));
        let sing = SingularitySpec::real(&[0.0], -0.5);
        let f = singular_oscillator(a, 0.3);
        let g = singular_oscillator(b, -0.7);
        let qf = integrate_line(&f, (-1.0, 1.0), &sing, 1e-10).unwrap();
        let qg = integrate_line(&g, (-1.0, 1.0), &sing, 1e-10).unwrap();
        let qs = integrate_line(|x: f64| alpha * f(x) + beta * g(x), (-1.0, 1.0), &sing, 1e-10).unwrap();
        let gap = (qs.value - alpha * qf.value - beta * qg.value).norm();
        prop_assert!(gap <= alpha.norm() * qf.err_estimate + beta.norm() * qg.err_estimate + qs.err_estimate + ROUNDING, "gap {gap:e}");
    }

    #[test]
    fn oracle_commutes_with_reflection(a in -60.0..60.0f64, shift in -0.9..0.9f64, half in 0.3..2.0f64) {
        let sing = SingularitySpec::real(&[0.0], -0.5);
        let f = singular_oscillator(a, shift);
        let q = integrate_line(&f, (-half, half), &sing, 1e-10).unwrap();
        let r = integrate_line(|x: f64| f(-x), (-half, half), &sing, 1e-10).unwrap();
        prop_assert!((q.value - r.value).norm() <= q.err_estimate + r.err_estimate + ROUNDING);
    }

    #[test]
    fn error_estimate_shrinks_with_tolerance(a in 0.0..80.0f64, shift in -0.9..0.9f64) {
        let sing = SingularitySpec::real(&[0.0], -0.5);
        let f = singular_oscillator(a, shift);
        let errs: Vec<f64> = [1e-4, 1e-6, 1e-8, 1e-10]
            .iter()
            .map(|&tol| integrate_line(&f, (-1.0, 1.0), &sing, tol).unwrap().err_estimate)
            .collect();
        prop_assert!(errs.windows(2).all(|w| w[1] <= w[0]), "{errs:?}");
    }

    #[test]
    fn kernel_swap_and_modulus(tau in -2.0..2.0f64, taup in -2.0..2.0f64, t in -300.0..300.0f64,
                               x in 0.0..6.28f64, y in 0.0..6.28f64, z in 0.0..6.28f64) {
        let s = |u: f64| u.sin().abs();
        prop_assume!(s(x - y) > 1e-3 && s(x - z) > 1e-3 && s(y - z) > 1e-3);
        let p = RepParams::new(tau, taup);
        let lam = SpectralParam::Principal(t);
        let k = eval_kernel(&p, &lam, x, y, z).unwrap();
        let swapped = eval_kernel(&p.swapped(), &lam, y, x, z).unwrap();
        prop_assert!((k - swapped).norm() <= 1e-12 * k.norm());
        let modulus = (s(x - y) * s(x - z) * s(y - z)).powf(-0.5);
        prop_assert!((k.norm() - modulus).abs() <= 1e-12 * modulus);
    }

    #[test]
    fn adding_the_next_k_type_cannot_lower_the_norm(
        cells in prop::collection::vec((0.0..1.0f64, 0.0..5.0f64, 0.0..5.0f64), 1..40)
    ) {
        // Nonnegative step functions u_n, u_{n+2} on a measure space with cell masses μ.
        let lhs: f64 = cells.iter().map(|&(mu, a, _)| mu * a * a).sum();
        let rhs: f64 = cells.iter().map(|&(mu, a, b)| mu * (a + b) * (a + b)).sum();
        prop_assert!(lhs <= rhs);
    }

    #[test]
    fn vdc_bound_dominates_polynomial_phases(s in 20.0..500.0f64, pow in prop::sample::select(vec![1.5, 2.0, 3.0]),
                                            lo in 0.2..1.5f64, len in 0.1..1.5f64, slope in -0.5..0.5f64, k in 1usize..=2) {
        let hi = lo + len;
        let f = move |x: f64| s * x.powf(pow);
        let amp = move |x: f64| C::new(1.0 + slope * x, 0.0);
        let bound = vdc_bound(&f, &amp, (lo, hi), k).unwrap();
        let freq = s * pow * hi.powf(pow - 1.0);
        let q = oscillatory_integral(&f, &amp, (lo, hi), freq, 1e-12).unwrap();
        prop_assert!(q.value.norm() <= bound, "|I| = {} > {bound}", q.value.norm());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn low_spectrum_inequality(raw in prop::collection::vec(-1.0..1.0f64, 5 * 30), b in prop::collection::vec(0.0..3.0f64, 30),
                               w in prop::collection::vec(0.1..1.0f64, 30)) {
        let funcs: Vec<Vec<f64>> = raw.chunks(30).map(<[f64]>::to_vec).collect();
        let basis = orthonormalize(&funcs, &w).unwrap();
        let r = low_spectrum_bound(&basis, &b, &w).unwrap();
        prop_assert!(r.holds);
        prop_assert!(r.projection_norm_sq <= r.certificate * (1.0 + 1e-12));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn removing_spectrum_points_lowers_the_sum(seed in 0u64..1000, drop in prop::collection::vec(0usize..400, 1..20), n in prop::sample::select(vec![8i64, 16, 40])) {
        let p = RepParams::new(0.3, 0.7);
        let spec = gen_spectrum(&p, 60.0, 1.0, 1.0, seed, WeightModel::HeavyTail).unwrap();
        let full = parseval_sum_with(&spec, &p, n, ParsevalMode::Asymptotic, 1.0).unwrap().grand_total;
        let part = parseval_sum_with(&spec.without(&drop), &p, n, ParsevalMode::Asymptotic, 1.0).unwrap().grand_total;
        prop_assert!(part <= full);
    }

    #[test]
    fn spectrum_is_a_function_of_the_seed(seed in any::<u64>()) {
        let p = RepParams::new(0.3, 0.7);
        let a = gen_spectrum(&p, 40.0, 1.0, 2.0, seed, WeightModel::Uniform).unwrap();
        let b = gen_spectrum(&p, 40.0, 1.0, 2.0, seed, WeightModel::Uniform).unwrap();
        prop_assert_eq!(a.points, b.points);
    }

    #[test]
    fn integration_by_parts_identity(t in 5.0..60.0f64, which in 0usize..3, centre in -0.2..0.2f64, freq in -3.0..3.0f64, slope in -0.5..0.5f64) {
        let lambda = C::new(0.0, t);
        let report = ibp_case(which, lambda, centre, freq, slope);
        prop_assert!(report.0 <= report.1, "residual {:e} > tolerance {:e}", report.0, report.1);
    }
}

/// (|I_F(φ) + λ⁻¹I_F(ξ(Hφ))|, combined tolerance) for one of three setups
/// with H·ξ(F) = λF and ξω = 0.
fn ibp_case(which: usize, lambda: C, centre: f64, freq: f64, slope: f64) -> (f64, f64) {
    let one = |_: f64| C::new(1.0, 0.0);
    let unit = |_: f64| 1.0;
    let (f, xi, h, omega, interval, mid): (Arc<dyn Fn(f64) -> C + Send + Sync>, Arc<dyn Fn(f64) -> f64 + Send + Sync>, Arc<dyn Fn(f64) -> C + Send + Sync>, Arc<dyn Fn(f64) -> f64 + Send + Sync>, (f64, f64), f64) = match which {
        // e^{λy}, ξ = ∂.
        0 => (Arc::new(move |y: f64| (lambda * y).exp()), Arc::new(unit), Arc::new(one), Arc::new(unit), (-1.0, 1.0), 0.0),
        // y^λ, ξ = y∂, ω = dy/y.
        1 => (Arc::new(move |y: f64| (lambda * y.ln()).exp()), Arc::new(|y: f64| y), Arc::new(one), Arc::new(|y: f64| 1.0 / y), (0.2, 3.0), 1.2),
        // e^{λy²/2}, ξ = ∂, H = 1/y.
        _ => (Arc::new(move |y: f64| (lambda * y * y / 2.0).exp()), Arc::new(unit), Arc::new(|y: f64| C::new(1.0 / y, 0.0)), Arc::new(unit), (0.5, 2.0), 1.2),
    };
    let (fr, xr, hr, or) = (f.as_ref(), xi.as_ref(), h.as_ref(), omega.as_ref());
    let setup = IbpSetup { f: &fr, xi: &xr, h: &hr, lambda, omega: &or, interval, sing: SingularitySpec::none() };
    let phi = Compact::modulated_bump(mid + centre, 0.25, freq, slope);
    let tol = 1e-11;
    ibp_bound(&setup, 1, &phi, tol).expect("setup satisfies the hypotheses");
    let direct = setup.integral(&|y| phi.eval(y), tol).unwrap();
    let moved = setup.integral(&|y| setup.xi_h(&phi, y), tol).unwrap();
    let residual = (direct.value + moved.value / lambda).norm();
    (residual, direct.err_estimate + moved.err_estimate / lambda.norm() + FD_SLACK)
}

// ξ(Hφ) uses a fourth-order difference with step 1e-4: rounding ≈ 1e-16/1e-4 per unit of |Hφ|.
const FD_SLACK: f64 = 1e-10;
