//! Product-integration rules on [0, 1] for integrands of the form
//! Σ_j u^{β_j}·g_j(u) with g_j smooth and Re β_j > −1.
//!
//! The rules are invariant under u ↦ h·u, so one set of reference weights
//! serves every panel touching a given singular point.

use super::gauss::{gauss_legendre, legendre_table};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

type C = Complex64;

/// Nodes in (0, 1) and complex weights.
#[derive(Debug, Clone)]
pub struct ProductRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<C>,
}

/// ∫₀¹ u^β P_k(2u−1) du for k < m, with s = β + 1:
/// μ_k = (−1)^k (1−s)_k / (s)_{k+1}.
fn shifted_legendre_moments(beta: C, m: usize) -> Vec<C> {
    let s = beta + 1.0;
    let mut out = Vec::with_capacity(m);
    let mut mu = C::new(1.0, 0.0) / s;
    for k in 0..m {
        out.push(mu);
        let kf = k as f64;
        mu = -mu * (1.0 - s + kf) / (s + kf + 1.0);
    }
    out
}

/// Gauss–Legendre nodes and weights mapped to [0, 1].
fn unit_gauss(n: usize) -> (Vec<f64>, Vec<f64>) {
    let (x, w) = gauss_legendre(n);
    (x.iter().map(|v| 0.5 * (v + 1.0)).collect(), w.iter().map(|v| 0.5 * v).collect())
}

/// Exact for u^β·p(u), deg p < m.
fn single_exponent_rule(beta: C, m: usize) -> ProductRule {
    let (u, om) = unit_gauss(m);
    let mu = shifted_legendre_moments(beta, m);
    let weights = u
        .iter()
        .zip(&om)
        .map(|(&ui, &wi)| {
            let p = legendre_table(m, 2.0 * ui - 1.0);
            let s: C = (0..m).map(|k| mu[k] * ((2 * k + 1) as f64 * p[k])).sum();
            s * wi * (-beta * ui.ln()).exp()
        })
        .collect();
    ProductRule { nodes: u, weights }
}

/// Exact for u^{β_j}·p(u), deg p < m, every j.
///
/// Square collocation on Gauss nodes is badly conditioned when exponents are
/// close, so the system is oversampled 2× on nodes graded as u = s² and the
/// minimal-norm weights are taken. The span is written in Newton divided
/// differences in β to keep nearby exponents distinguishable.
fn multi_exponent_rule(betas: &[C], m: usize) -> ProductRule {
    let r = betas.len();
    let unknowns = r * m;
    let n = 2 * unknowns;
    // Oversampled nodes graded toward the singular end; minimal-norm weights.
    let (s, _) = unit_gauss(n);
    let u: Vec<f64> = s.iter().map(|v| v * v).collect();
    let tables: Vec<Vec<f64>> = u.iter().map(|&ui| legendre_table(m, 2.0 * ui - 1.0)).collect();
    let moments: Vec<Vec<C>> = betas.iter().map(|&b| shifted_legendre_moments(b, m)).collect();
    let node_dd: Vec<Vec<C>> = u
        .iter()
        .map(|&ui| divided_differences(betas, &betas.iter().map(|b| (b * ui.ln()).exp()).collect::<Vec<_>>()))
        .collect();
    let mut a = DMatrix::<C>::zeros(unknowns, n);
    let mut rhs = DVector::<C>::zeros(unknowns);
    for k in 0..m {
        let mu_dd = divided_differences(betas, &moments.iter().map(|mu| mu[k]).collect::<Vec<_>>());
        for j in 0..r {
            let row = j * m + k;
            rhs[row] = mu_dd[j];
            for i in 0..n {
                a[(row, i)] = node_dd[i][j] * tables[i][k];
            }
        }
    }
    let w = a.svd(true, true).solve(&rhs, 1e-14).expect("product-rule SVD failed");
    ProductRule { nodes: u, weights: w.iter().copied().collect() }
}

/// Leading Newton divided differences f[β₀], f[β₀,β₁], … of values at `betas`.
fn divided_differences(betas: &[C], values: &[C]) -> Vec<C> {
    let r = betas.len();
    let mut col = values.to_vec();
    let mut out = vec![col[0]];
    for level in 1..r {
        for i in 0..r - level {
            col[i] = (col[i + 1] - col[i]) / (betas[i + level] - betas[i]);
        }
        out.push(col[0]);
    }
    out
}

/// Pair of rules (coarse, fine) for the exponent set at a singular point.
#[derive(Debug, Clone)]
pub struct ProductPair {
    pub coarse: ProductRule,
    pub fine: ProductRule,
}

impl ProductPair {
    pub fn new(betas: &[C]) -> Self {
        let distinct = dedup_exponents(betas);
        match distinct.len() {
            0 => {
                let z = [C::new(0.0, 0.0)];
                Self { coarse: single_exponent_rule(z[0], 10), fine: single_exponent_rule(z[0], 20) }
            }
            1 => Self {
                coarse: single_exponent_rule(distinct[0], 10),
                fine: single_exponent_rule(distinct[0], 20),
            },
            _ => Self {
                coarse: multi_exponent_rule(&distinct, 8),
                fine: multi_exponent_rule(&distinct, 14),
            },
        }
    }

    pub fn evals(&self) -> usize {
        self.coarse.nodes.len() + self.fine.nodes.len()
    }
}

/// Exponents differing by an integer generate the same function class
/// locally; keep the one with the smallest real part.
fn dedup_exponents(betas: &[C]) -> Vec<C> {
    let mut out: Vec<C> = Vec::new();
    let mut sorted = betas.to_vec();
    sorted.sort_by(|a, b| a.re.partial_cmp(&b.re).unwrap());
    for b in sorted {
        let dup = out.iter().any(|o| {
            let d = b - o;
            d.im.abs() < 1e-12 && (d.re - d.re.round()).abs() < 1e-12
        });
        if !dup {
            out.push(b);
        }
    }
    out
}
