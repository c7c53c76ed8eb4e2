//! Representation parameters, K-types, test vectors and the model kernel.

use crate::error::{domain, Error, Result};
use crate::func::{Bump, ComplexFn, ExpPoly};
use num_complex::Complex64;
use std::f64::consts::PI;
use std::sync::Arc;

type C = Complex64;

/// Principal-series parameters (τ, τ′) of the two fixed representations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RepParams {
    tau: C,
    tau_prime: C,
    s_cutoff: f64,
}

impl RepParams {
    /// τ = i·tau_im, τ′ = i·tau_prime_im.
    pub fn new(tau_im: f64, tau_prime_im: f64) -> Self {
        let s_cutoff = 2.0 * (tau_im.abs() + tau_prime_im.abs()) + 1.0;
        Self { tau: C::new(0.0, tau_im), tau_prime: C::new(0.0, tau_prime_im), s_cutoff }
    }

    /// Rejects parameters off the imaginary axis.
    pub fn from_complex(tau: C, tau_prime: C) -> Result<Self> {
        if tau.re != 0.0 || tau_prime.re != 0.0 {
            return domain("tau and tau_prime must be purely imaginary");
        }
        Ok(Self::new(tau.im, tau_prime.im))
    }

    pub fn tau(&self) -> C {
        self.tau
    }

    pub fn tau_prime(&self) -> C {
        self.tau_prime
    }

    /// 𝒮 = 2(|τ| + |τ′|) + 1; spectral parameters below it are excluded.
    pub fn s_cutoff(&self) -> f64 {
        self.s_cutoff
    }

    pub fn swapped(&self) -> Self {
        Self { tau: self.tau_prime, tau_prime: self.tau, s_cutoff: self.s_cutoff }
    }
}

/// Spectral parameter λ of the third representation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SpectralParam {
    /// λ = i·t.
    Principal(f64),
    /// λ = s with 0 < s < 1; stored but never computed with.
    Complementary(f64),
}

impl SpectralParam {
    pub fn complementary(s: f64) -> Result<Self> {
        if s > 0.0 && s < 1.0 {
            Ok(Self::Complementary(s))
        } else {
            domain("complementary parameter must lie in (0, 1)")
        }
    }

    pub fn lambda(&self) -> C {
        match *self {
            Self::Principal(t) => C::new(0.0, t),
            Self::Complementary(s) => C::new(s, 0.0),
        }
    }

    /// t for λ = it; the complementary series is rejected.
    pub fn principal_t(&self) -> Result<f64> {
        match *self {
            Self::Principal(t) => Ok(t),
            Self::Complementary(_) => domain("only principal-series λ = it is supported"),
        }
    }
}

/// Period of a circle function.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Period {
    Pi,
    TwoPi,
}

impl Period {
    pub fn value(self) -> f64 {
        match self {
            Self::Pi => PI,
            Self::TwoPi => 2.0 * PI,
        }
    }
}

/// Smooth function on the circle with derivative access.
#[derive(Clone)]
pub struct CircleFunction {
    func: Arc<dyn ComplexFn>,
    period: Period,
    even: bool,
    /// Exact C^N bounds when built from an exponential polynomial.
    exp_poly: Option<ExpPoly>,
}

impl std::fmt::Debug for CircleFunction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("CircleFunction")
            .field("period", &self.period)
            .field("even", &self.even)
            .field("exp_poly", &self.exp_poly)
            .finish()
    }
}

struct BumpTrain(Bump);

impl ComplexFn for BumpTrain {
    fn eval(&self, x: f64) -> C {
        self.deriv(0, x)
    }

    fn deriv(&self, k: usize, x: f64) -> C {
        let shift = ((x - self.0.center) / PI).round() * PI;
        self.0.deriv(k, x - shift)
    }
}

/// Highest derivative order guaranteed by [`CircleFunction::deriv`].
pub const N_MAX: usize = 4;

const GRID: usize = 512;

impl CircleFunction {
    /// From Σ c_k e^{ikc}; period and parity are read off the coefficients.
    pub fn from_exp_poly(p: ExpPoly) -> Self {
        let period = if p.terms.iter().all(|(k, _)| k % 2 == 0) { Period::Pi } else { Period::TwoPi };
        let even = p.terms.iter().all(|&(k, c)| {
            let partner: C = p.terms.iter().filter(|(j, _)| *j == -k).map(|(_, c)| *c).sum();
            (partner - c).norm() <= 1e-15 * (1.0 + c.norm())
        });
        Self { func: Arc::new(p.clone()), period, even, exp_poly: Some(p) }
    }

    /// Generic callable; the declared period and parity are verified on a grid.
    pub fn from_fn(f: Arc<dyn ComplexFn>, period: Period, even: bool) -> Result<Self> {
        let out = Self { func: f, period, even, exp_poly: None };
        out.check()?;
        Ok(out)
    }

    /// π-periodic train of smooth bumps centred at `center` + kπ.
    pub fn bump_train(center: f64, radius: f64) -> Result<Self> {
        if !(radius > 0.0 && radius < PI / 2.0) {
            return domain("bump radius must lie in (0, π/2)");
        }
        let even = (2.0 * center / PI - (2.0 * center / PI).round()).abs() < 1e-15;
        Self::from_fn(Arc::new(BumpTrain(Bump::new(center, radius))), Period::Pi, even)
    }

    pub fn constant(c: C) -> Self {
        Self::from_exp_poly(ExpPoly::constant(c))
    }

    pub fn eval(&self, c: f64) -> C {
        self.func.eval(c)
    }

    pub fn deriv(&self, order: usize, c: f64) -> C {
        self.func.deriv(order, c)
    }

    pub fn period(&self) -> Period {
        self.period
    }

    pub fn is_even(&self) -> bool {
        self.even
    }

    pub fn exp_poly(&self) -> Option<&ExpPoly> {
        self.exp_poly.as_ref()
    }

    /// Largest frequency for exponential polynomials, else a sampled estimate.
    pub fn max_frequency(&self) -> f64 {
        match &self.exp_poly {
            Some(p) => p.max_frequency(),
            None => {
                let s0 = self.sup_on_grid(0).max(1e-300);
                (self.sup_on_grid(1) / s0).max(1.0)
            }
        }
    }

    fn sup_on_grid(&self, order: usize) -> f64 {
        let p = self.period.value();
        (0..GRID).map(|i| self.deriv(order, p * i as f64 / GRID as f64).norm()).fold(0.0, f64::max)
    }

    /// max_{j ≤ order} sup|f^{(j)}|: exact bound for exponential polynomials,
    /// sampled maximum otherwise.
    pub fn cnorm(&self, order: usize) -> f64 {
        match &self.exp_poly {
            Some(p) => (0..=order).map(|j| p.derivative_bound(j)).fold(0.0, f64::max),
            None => (0..=order).map(|j| self.sup_on_grid(j)).fold(0.0, f64::max),
        }
    }

    /// Periodicity and declared parity on a sample grid.
    pub fn check(&self) -> Result<()> {
        let p = self.period.value();
        let scale = self.sup_on_grid(0).max(1.0);
        for i in 0..64 {
            let c = -p + 2.0 * p * i as f64 / 64.0 + 0.013;
            if (self.eval(c + p) - self.eval(c)).norm() > 1e-9 * scale {
                return Err(Error::Contract(format!("not periodic with period {p}")));
            }
            if self.even && (self.eval(-c) - self.eval(c)).norm() > 1e-9 * scale {
                return Err(Error::Contract("declared even but f(−c) ≠ f(c)".into()));
            }
        }
        Ok(())
    }
}

/// Which ΔK-invariant test vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TestKind {
    /// w_n = e_n ⊗ e′_{−n}.
    Plain,
    /// w̃_n = w_n + w_{n+2}.
    Tilde,
}

/// Test vector indexed by an even K-type n ≥ 0.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TestVector {
    n: i64,
    kind: TestKind,
}

/// Even n ≥ 0 only; all K-types of PGL(2, ℝ) are even.
pub fn make_test_vector(n: i64, kind: TestKind) -> Result<TestVector> {
    if n < 0 || n % 2 != 0 {
        return domain(format!("K-type index must be even and nonnegative, got {n}"));
    }
    Ok(TestVector { n, kind })
}

impl TestVector {
    pub fn n(&self) -> i64 {
        self.n
    }

    pub fn kind(&self) -> TestKind {
        self.kind
    }

    /// Reduced profile φ: 1 for Plain, 1 + e^{2ic} for Tilde.
    pub fn profile(&self) -> CircleFunction {
        let one = C::new(1.0, 0.0);
        match self.kind {
            TestKind::Plain => CircleFunction::constant(one),
            TestKind::Tilde => CircleFunction::from_exp_poly(ExpPoly::new(vec![(0, one), (2, one)])),
        }
    }

    /// u(c) = φ(c)·e^{inc}.
    pub fn u_profile(&self) -> CircleFunction {
        let one = C::new(1.0, 0.0);
        let terms = match self.kind {
            TestKind::Plain => vec![(self.n, one)],
            TestKind::Tilde => vec![(self.n, one), (self.n + 2, one)],
        };
        CircleFunction::from_exp_poly(ExpPoly::new(terms))
    }
}

/// Exponents of |sin(x−y)|, |sin(x−z)|, |sin(y−z)| in the model kernel.
pub fn kernel_exponents(p: &RepParams, lambda: C) -> [C; 3] {
    let (t, tp) = (p.tau, p.tau_prime);
    [(-t - tp + lambda - 1.0) / 2.0, (-t + tp - lambda - 1.0) / 2.0, (t - tp - lambda - 1.0) / 2.0]
}

/// |a|^w = exp(w·ln|a|), principal logarithm.
#[inline]
pub fn abs_pow(a: f64, w: C) -> C {
    (w * a.abs().ln()).exp()
}

const SINGULAR_SIN: f64 = 1e-15;

/// Model kernel K_{τ,τ′,λ}(x, y, z).
pub fn eval_kernel(p: &RepParams, lambda: &SpectralParam, x: f64, y: f64, z: f64) -> Result<C> {
    lambda.principal_t()?;
    let [e1, e2, e3] = kernel_exponents(p, lambda.lambda());
    let s = [(x - y).sin(), (x - z).sin(), (y - z).sin()];
    if s.iter().any(|v| v.abs() < SINGULAR_SIN) {
        return Err(Error::Singularity(format!("kernel singular at ({x}, {y}, {z})")));
    }
    Ok(abs_pow(s[0], e1) * abs_pow(s[1], e2) * abs_pow(s[2], e3))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cutoff_formula() {
        let p = RepParams::new(0.3, -0.7);
        assert!((p.s_cutoff() - 3.0).abs() < 1e-15);
        assert!(RepParams::from_complex(C::new(0.1, 0.3), C::new(0.0, 0.7)).is_err());
    }

    #[test]
    fn bump_train_is_periodic_and_even() {
        let b = CircleFunction::bump_train(PI / 2.0, 0.6).unwrap();
        assert!(b.is_even() && b.period() == Period::Pi);
        assert!((b.eval(PI / 2.0) - C::new(1.0, 0.0)).norm() < 1e-15);
        assert!((b.eval(-PI / 2.0 + 0.1) - b.eval(PI / 2.0 + 0.1)).norm() < 1e-15);
        assert_eq!(b.eval(0.0), C::new(0.0, 0.0));
        assert!(CircleFunction::bump_train(0.0, 2.0).is_err());
    }

    #[test]
    fn test_vectors() {
        let w = make_test_vector(4, TestKind::Plain).unwrap();
        assert_eq!(w.profile().eval(0.3), C::new(1.0, 0.0));
        assert!((w.u_profile().eval(0.3) - C::from_polar(1.0, 1.2)).norm() < 1e-15);
        let wt = make_test_vector(4, TestKind::Tilde).unwrap();
        assert!(wt.profile().eval(PI / 2.0).norm() < 1e-15);
        assert_eq!(w.profile().eval(PI / 2.0), C::new(1.0, 0.0));
        assert!(make_test_vector(3, TestKind::Plain).is_err());
        assert!(make_test_vector(-2, TestKind::Plain).is_err());
        assert_eq!(wt.profile().period(), Period::Pi);
        assert_eq!(wt.u_profile().period(), Period::Pi);
    }

    #[test]
    fn kernel_examples() {
        let p = RepParams::new(0.0, 0.0);
        let k = eval_kernel(&p, &SpectralParam::Principal(0.0), PI / 2.0, 0.0, PI / 4.0).unwrap();
        assert!((k - C::new(2f64.sqrt(), 0.0)).norm() < 1e-12);
        let k = eval_kernel(&p, &SpectralParam::Principal(17.0), 0.0, PI / 3.0, 2.0 * PI / 3.0).unwrap();
        assert!((k.norm() - 0.75f64.powf(-0.75)).abs() < 1e-12);
        assert!((0.75f64.powf(-0.75) - 1.24081).abs() < 1e-5);
        let q = RepParams::new(0.3, 0.7);
        let (x, y, z) = (0.4, 1.9, -0.8);
        let k = eval_kernel(&q, &SpectralParam::Principal(50.0), x, y, z).unwrap();
        let m = ((x - y).sin() * (x - z).sin() * (y - z).sin()).abs().powf(-0.5);
        assert!((k.norm() - m).abs() < 1e-12 * m);
    }

    #[test]
    fn kernel_rejects_singular_points_and_complementary() {
        let p = RepParams::new(0.0, 0.0);
        assert!(matches!(eval_kernel(&p, &SpectralParam::Principal(1.0), 1.0, 1.0, 0.3), Err(Error::Singularity(_))));
        assert!(matches!(eval_kernel(&p, &SpectralParam::Principal(1.0), PI, 0.0, 0.3), Err(Error::Singularity(_))));
        let s = SpectralParam::complementary(0.5).unwrap();
        assert!(matches!(eval_kernel(&p, &s, 0.1, 0.5, 0.9), Err(Error::Domain(_))));
        assert!(SpectralParam::complementary(1.5).is_err());
    }

    #[test]
    fn circle_function_checks() {
        let f = CircleFunction::from_exp_poly(ExpPoly::new(vec![(2, C::new(1.0, 0.0)), (-2, C::new(1.0, 0.0))]));
        assert!(f.is_even());
        assert_eq!(f.period(), Period::Pi);
        assert!(f.check().is_ok());
        let g: Arc<dyn ComplexFn> = Arc::new(|c: f64| C::new(c.sin(), 0.0));
        assert!(CircleFunction::from_fn(g.clone(), Period::Pi, false).is_err());
        assert!(CircleFunction::from_fn(g.clone(), Period::TwoPi, true).is_err());
        let ok = CircleFunction::from_fn(g, Period::TwoPi, false).unwrap();
        assert!(ok.cnorm(2) >= 0.99);
    }
}
