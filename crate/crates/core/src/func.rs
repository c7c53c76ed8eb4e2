//! Callable wrappers with derivative access.
//!
//! Analytic derivatives are used when a type provides them; everything else
//! falls back to Richardson-extrapolated central differences.

use num_complex::Complex64;
use std::sync::Arc;

type C = Complex64;

/// Real-valued smooth function of one variable.
pub trait RealFn: Send + Sync {
    fn eval(&self, x: f64) -> f64;

    /// k-th derivative; defaults to finite differences.
    fn deriv(&self, k: usize, x: f64) -> f64 {
        if k == 0 {
            return self.eval(x);
        }
        richardson(|h| central_difference(&|y| self.eval(y), k, x, h), fd_step(k, x))
    }
}

/// Complex-valued smooth function of one variable.
pub trait ComplexFn: Send + Sync {
    fn eval(&self, x: f64) -> C;

    fn deriv(&self, k: usize, x: f64) -> C {
        if k == 0 {
            return self.eval(x);
        }
        let h = fd_step(k, x);
        let re = richardson(|h| central_difference(&|y| self.eval(y).re, k, x, h), h);
        let im = richardson(|h| central_difference(&|y| self.eval(y).im, k, x, h), h);
        C::new(re, im)
    }
}

impl<F: Fn(f64) -> f64 + Send + Sync> RealFn for F {
    fn eval(&self, x: f64) -> f64 {
        self(x)
    }
}

impl<F: Fn(f64) -> C + Send + Sync> ComplexFn for F {
    fn eval(&self, x: f64) -> C {
        self(x)
    }
}

fn fd_step(k: usize, x: f64) -> f64 {
    let base = match k {
        1 => 2e-3,
        2 => 4e-3,
        3 => 1e-2,
        _ => 2e-2,
    };
    base * x.abs().max(1.0)
}

/// Order-k central difference with step h; error O(h^2).
fn central_difference(f: &dyn Fn(f64) -> f64, k: usize, x: f64, h: f64) -> f64 {
    let mut acc = 0.0;
    let mut binom = 1.0;
    for j in 0..=k {
        let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
        let offset = (k as f64 / 2.0 - j as f64) * h;
        acc += sign * binom * f(x + offset);
        binom = binom * (k - j) as f64 / (j + 1) as f64;
    }
    acc / h.powi(k as i32)
}

fn richardson(d: impl Fn(f64) -> f64, h: f64) -> f64 {
    let d1 = d(h);
    let d2 = d(h / 2.0);
    let d3 = d(h / 4.0);
    let r1 = (4.0 * d2 - d1) / 3.0;
    let r2 = (4.0 * d3 - d2) / 3.0;
    (16.0 * r2 - r1) / 15.0
}

/// Finite exponential polynomial Σ c_k e^{i k x}.
#[derive(Debug, Clone, PartialEq)]
pub struct ExpPoly {
    pub terms: Vec<(i64, C)>,
}

impl ExpPoly {
    pub fn new(terms: Vec<(i64, C)>) -> Self {
        Self { terms }
    }

    pub fn constant(c: C) -> Self {
        Self { terms: vec![(0, c)] }
    }

    pub fn max_frequency(&self) -> f64 {
        self.terms.iter().map(|(k, _)| k.unsigned_abs() as f64).fold(0.0, f64::max)
    }

    /// Sum of |c_k|·|k|^order, an exact bound on the sup of the derivative.
    pub fn derivative_bound(&self, order: usize) -> f64 {
        self.terms
            .iter()
            .map(|(k, c)| c.norm() * (k.unsigned_abs() as f64).powi(order as i32))
            .sum()
    }
}

impl ComplexFn for ExpPoly {
    fn eval(&self, x: f64) -> C {
        self.terms.iter().map(|&(k, c)| c * C::from_polar(1.0, k as f64 * x)).sum()
    }

    fn deriv(&self, order: usize, x: f64) -> C {
        self.terms
            .iter()
            .map(|&(k, c)| c * C::new(0.0, k as f64).powu(order as u32) * C::from_polar(1.0, k as f64 * x))
            .sum()
    }
}

/// Smooth bump exp(1 − 1/(1 − s²)), s = (x − center)/radius, scaled by `height`;
/// equal to `height` at the center and flat to all orders at the edges.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bump {
    pub center: f64,
    pub radius: f64,
    pub height: C,
}

impl Bump {
    pub fn new(center: f64, radius: f64) -> Self {
        Self { center, radius, height: C::new(1.0, 0.0) }
    }

    pub fn support(&self) -> (f64, f64) {
        (self.center - self.radius, self.center + self.radius)
    }

    fn profile(&self, x: f64) -> f64 {
        let s = (x - self.center) / self.radius;
        let q = 1.0 - s * s;
        if q <= 0.0 {
            0.0
        } else {
            (1.0 - 1.0 / q).exp()
        }
    }
}

impl ComplexFn for Bump {
    fn eval(&self, x: f64) -> C {
        self.height * self.profile(x)
    }

    fn deriv(&self, k: usize, x: f64) -> C {
        let s = (x - self.center) / self.radius;
        if s.abs() >= 1.0 {
            return C::new(0.0, 0.0);
        }
        if k == 0 {
            return self.eval(x);
        }
        // d/dx e^{g} with g = 1 − 1/(1−s²); expand via the recurrence on P_k(s)·e^g.
        let g_derivs = bump_exponent_derivs(s, k);
        let mut e = vec![0.0; k + 1];
        e[0] = 1.0;
        for m in 1..=k {
            // Faà di Bruno through e^{(m)} = Σ_j C(m−1, j) g^{(j+1)} e^{(m−1−j)}.
            let mut acc = 0.0;
            let mut binom = 1.0;
            for j in 0..m {
                acc += binom * g_derivs[j + 1] * e[m - 1 - j];
                binom = binom * (m - 1 - j) as f64 / (j + 1) as f64;
            }
            e[m] = acc;
        }
        self.height * (e[k] * self.profile(x) / self.radius.powi(k as i32))
    }
}

/// Derivatives in s of g(s) = 1 − 1/(1 − s²) up to order k (index 0 is g itself).
fn bump_exponent_derivs(s: f64, k: usize) -> Vec<f64> {
    // 1/(1−s²) = (1/2)[1/(1−s) + 1/(1+s)].
    let mut out = vec![0.0; k + 1];
    let mut fact = 1.0;
    for m in 0..=k {
        if m > 0 {
            fact *= m as f64;
        }
        let a = fact / (1.0 - s).powi(m as i32 + 1);
        let b = if m % 2 == 0 { 1.0 } else { -1.0 } * fact / (1.0 + s).powi(m as i32 + 1);
        out[m] = -0.5 * (a + b);
    }
    out[0] += 1.0;
    out
}

/// A smooth amplitude with compact support [lo, hi].
#[derive(Clone)]
pub struct Compact {
    pub func: Arc<dyn ComplexFn>,
    pub lo: f64,
    pub hi: f64,
}

impl std::fmt::Debug for Compact {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Compact[{}, {}]", self.lo, self.hi)
    }
}

impl Compact {
    pub fn new(func: Arc<dyn ComplexFn>, lo: f64, hi: f64) -> Self {
        Self { func, lo, hi }
    }

    pub fn bump(center: f64, radius: f64) -> Self {
        let b = Bump::new(center, radius);
        let (lo, hi) = b.support();
        Self::new(Arc::new(b), lo, hi)
    }

    /// Bump times e^{i·freq·x}·(1 + slope·x): a non-symmetric test amplitude.
    pub fn modulated_bump(center: f64, radius: f64, freq: f64, slope: f64) -> Self {
        let b = Bump::new(center, radius);
        let (lo, hi) = b.support();
        let f = move |x: f64| b.eval(x) * C::from_polar(1.0 + slope * x, freq * x);
        Self::new(Arc::new(f), lo, hi)
    }

    pub fn eval(&self, x: f64) -> C {
        if x <= self.lo || x >= self.hi {
            C::new(0.0, 0.0)
        } else {
            self.func.eval(x)
        }
    }

    pub fn deriv(&self, k: usize, x: f64) -> C {
        if x <= self.lo || x >= self.hi {
            C::new(0.0, 0.0)
        } else {
            self.func.deriv(k, x)
        }
    }

    /// y ↦ φ(a·y) with support rescaled accordingly.
    pub fn rescaled(&self, a: f64) -> Compact {
        let inner = self.func.clone();
        let f = move |y: f64| inner.eval(a * y);
        Compact::new(Arc::new(f), self.lo / a, self.hi / a)
    }

    /// Sampled sup of |φ^{(j)}| for j ≤ order.
    pub fn cnorm(&self, order: usize) -> f64 {
        let n = 400;
        let mut best: f64 = 0.0;
        for i in 1..n {
            let x = self.lo + (self.hi - self.lo) * i as f64 / n as f64;
            for j in 0..=order {
                best = best.max(self.deriv(j, x).norm());
            }
        }
        best
    }
}
