//! Synthetic-spectrum sandbox for the spectral side of the argument.
//!
//! There is no lattice here, so H_Δ(w) is defined as the Parseval sum
//! Σ d_i·H_{t_i}(w) over the synthetic spectrum. All absolute constants are
//! synthetic knobs; only scaling shapes carry meaning.

pub mod io;

use crate::asympt::{calibration, f_main_term, lower_bound_constants, remainder_budget_ii_with};
use crate::error::{contract, domain, Result};
use crate::repn::{make_test_vector, RepParams, SpectralParam, TestKind};
use crate::trilinear::h_form_detailed;
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1, Pareto};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Weight distribution for [`gen_spectrum`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum WeightModel {
    /// d_i ~ (A/2)·Exp(1).
    Uniform,
    /// d_i ~ Pareto(A/6, 1.5) truncated at 100·(A/6); same mean as `Uniform`.
    HeavyTail,
}

/// Spectral points with weights, sorted by t.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticSpectrum {
    pub points: Vec<(f64, f64)>,
    pub weyl_const: f64,
    pub mv_const: f64,
    pub seed: u64,
    pub t_max: f64,
}

/// Audit slack for floating-point rescaling.
const AUDIT_REL: f64 = 1e-12;
const PARETO_SHAPE: f64 = 1.5;
const PARETO_TRUNC: f64 = 100.0;

/// Index of the dyadic block [2^k, 2^{k+1}) holding t; −1 for t < 1.
pub fn dyadic_index(t: f64) -> i32 {
    if t < 1.0 {
        -1
    } else {
        t.log2().floor() as i32
    }
}

/// Points t_i = √((i + u_i)/κ) ≤ T_max, u_i uniform, so the counting error is
/// at most one. Weights are drawn from `model`, rescaled so that every block
/// [2^k, 2^{k+1}) carries mass ≤ A·4^k, then clamped so that
/// Σ_{t_i ≤ T} d_i ≤ A·T² for every T.
pub fn gen_spectrum(p: &RepParams, t_max: f64, kappa: f64, a: f64, seed: u64, model: WeightModel) -> Result<SyntheticSpectrum> {
    if !(t_max >= 4.0 * p.s_cutoff()) {
        return domain(format!("T_max = {t_max} below 4𝒮 = {}", 4.0 * p.s_cutoff()));
    }
    if !(kappa > 0.0 && a > 0.0) {
        return domain("kappa and A must be positive");
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pareto = Pareto::new(a / 6.0, PARETO_SHAPE).map_err(|e| crate::Error::Domain(e.to_string()))?;
    let mut points = Vec::new();
    for i in 0u64.. {
        let u: f64 = rng.random();
        let t = ((i as f64 + u) / kappa).sqrt();
        if t > t_max {
            break;
        }
        let d = match model {
            WeightModel::Uniform => a / 2.0 * <Exp1 as Distribution<f64>>::sample(&Exp1, &mut rng),
            WeightModel::HeavyTail => pareto.sample(&mut rng).min(PARETO_TRUNC * a / 6.0),
        };
        points.push((t, d));
    }
    let mut start = 0;
    while start < points.len() {
        let k = dyadic_index(points[start].0);
        let end = start + points[start..].iter().take_while(|q| dyadic_index(q.0) == k).count();
        if k >= 0 {
            let cap = a * 4f64.powi(k);
            let mass: f64 = points[start..end].iter().map(|q| q.1).sum();
            if mass > cap {
                let s = cap / mass * (1.0 - AUDIT_REL);
                points[start..end].iter_mut().for_each(|q| q.1 *= s);
            }
        }
        start = end;
    }
    let mut running = 0.0;
    for q in &mut points {
        let room = a * q.0 * q.0 - running;
        if q.1 > room {
            q.1 = room.max(0.0);
        }
        running += q.1;
    }
    Ok(SyntheticSpectrum { points, weyl_const: kappa, mv_const: a, seed, t_max })
}

/// Result of [`SyntheticSpectrum::audit`].
#[derive(Debug, Clone, Serialize)]
pub struct SpectrumAudit {
    /// max over checked T of |#{t_i ≤ T} − κT²| / (κT).
    pub counting_ratio: f64,
    /// max over T of Σ_{t_i ≤ T} d_i / (A·T²).
    pub mean_value_ratio: f64,
    /// max over k of block mass / (A·4^k).
    pub block_ratio: f64,
    pub ok: bool,
}

impl SyntheticSpectrum {
    /// Checks the Weyl counting law on [lo, T_max] and both mass caps.
    pub fn audit(&self, lo: f64) -> SpectrumAudit {
        let kappa = self.weyl_const;
        let mut counting_ratio: f64 = 0.0;
        let mut t = lo;
        while t <= self.t_max {
            let count = self.points.partition_point(|q| q.0 <= t) as f64;
            counting_ratio = counting_ratio.max((count - kappa * t * t).abs() / (kappa * t));
            t += 0.25;
        }
        let (mut running, mut mean_value_ratio) = (0.0, 0.0f64);
        for q in &self.points {
            running += q.1;
            if q.0 > 0.0 {
                mean_value_ratio = mean_value_ratio.max(running / (self.mv_const * q.0 * q.0));
            }
        }
        let mut block_ratio: f64 = 0.0;
        for k in 0..=dyadic_index(self.t_max) {
            block_ratio = block_ratio.max(self.block_mass(k) / (self.mv_const * 4f64.powi(k)));
        }
        let ok = counting_ratio <= 3.0 && mean_value_ratio <= 1.0 + AUDIT_REL && block_ratio <= 1.0 + AUDIT_REL;
        SpectrumAudit { counting_ratio, mean_value_ratio, block_ratio, ok }
    }

    fn block_mass(&self, k: i32) -> f64 {
        self.points.iter().filter(|q| dyadic_index(q.0) == k).map(|q| q.1).sum()
    }

    /// Copy without the points at the given indices.
    pub fn without(&self, drop: &[usize]) -> Self {
        let mut out = self.clone();
        out.points = self.points.iter().enumerate().filter(|(i, _)| !drop.contains(i)).map(|(_, q)| *q).collect();
        out
    }
}

/// Σ d_i·h(t_i), evaluated in parallel and reduced in index order.
pub fn weighted_sum(points: &[(f64, f64)], h: impl Fn(f64) -> Result<f64> + Sync) -> Result<f64> {
    let vals: Vec<f64> = points.par_iter().map(|q| h(q.0).map(|v| q.1 * v)).collect::<Result<_>>()?;
    Ok(vals.iter().sum())
}

/// How [`parseval_sum`] evaluates H_t(w̃_n).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ParsevalMode {
    /// The spectral budget C((1+n)^{−1}t^{−1} + t^{−3}) / C·t^{−3}.
    Asymptotic,
    /// As `Asymptotic`, plus quadrature of H at up to `per_block` (≤ 10)
    /// evenly spaced points of each block.
    OracleSpotCheck { per_block: usize, tol: f64 },
}

/// Oracle H against the budget at one spectral point.
#[derive(Debug, Clone, Serialize)]
pub struct SpotCheck {
    pub t: f64,
    pub oracle: f64,
    pub oracle_err: f64,
    pub budget: f64,
    pub ok: bool,
}

/// One dyadic block of a [`DyadicReport`].
#[derive(Debug, Clone, Serialize)]
pub struct Block {
    pub k: i32,
    pub lo: f64,
    pub hi: f64,
    pub count: usize,
    pub mass: f64,
    /// H_k = Σ_{t_i ∈ I_k} d_i·H_{t_i}(w̃_n).
    pub h_sum: f64,
    /// M_k; zero for the low block.
    pub m_k: f64,
    /// 4^k·A·M_k, the bound implied by block mass ≤ A·4^k.
    pub bound: f64,
    /// 2^k·A·M_k; reported for comparison, not checked.
    pub literal_bound: f64,
    pub within_bound: bool,
    pub spot_checks: Vec<SpotCheck>,
}

/// Per-block decomposition of the Parseval sum for w̃_n.
#[derive(Debug, Clone, Serialize)]
pub struct DyadicReport {
    pub n: i64,
    pub k0: i32,
    pub c: f64,
    /// I_{k₀} = {t < 2^{k₀+1}}.
    pub low: Block,
    pub blocks: Vec<Block>,
    /// Σ_{k>k₀} H_k.
    pub tail_sum: f64,
    /// 9·A·C.
    pub tail_bound: f64,
    pub grand_total: f64,
    pub all_within_bound: bool,
    pub spot_checks_ok: bool,
}

/// k₀ with 2^{k₀} ≤ 𝒮 < 2^{k₀+1}.
pub fn low_block_index(p: &RepParams) -> i32 {
    p.s_cutoff().log2().floor() as i32
}

fn m_k(c: f64, n: f64, k: i32) -> f64 {
    let x = 2f64.powi(k);
    if x < 4.0 * n {
        c * (1.0 / (n * x) + x.powi(-3))
    } else {
        c * x.powi(-3)
    }
}

/// Dyadic decomposition of Σ d_i·H_{t_i}(w̃_n) with the budget constant from
/// calibration. Points below 𝒮 take the budget at 𝒮.
pub fn parseval_sum(spec: &SyntheticSpectrum, p: &RepParams, n: i64, mode: ParsevalMode) -> Result<DyadicReport> {
    parseval_sum_with(spec, p, n, mode, calibration::II_C)
}

/// As [`parseval_sum`] with an explicit budget constant.
pub fn parseval_sum_with(spec: &SyntheticSpectrum, p: &RepParams, n: i64, mode: ParsevalMode, c: f64) -> Result<DyadicReport> {
    if n < 8 || n % 2 != 0 {
        return domain(format!("n must be even and at least 8, got {n}"));
    }
    let s = p.s_cutoff();
    let budget = |t: f64| remainder_budget_ii_with(p, t.max(s), n, c);
    let k0 = low_block_index(p);
    let a = spec.mv_const;
    let nf = n as f64;
    let low_hi = 2f64.powi(k0 + 1);
    let split = spec.points.partition_point(|q| q.0 < low_hi);
    let low_pts = &spec.points[..split];
    let low = Block {
        k: k0,
        lo: 0.0,
        hi: low_hi,
        count: low_pts.len(),
        mass: low_pts.iter().map(|q| q.1).sum(),
        h_sum: weighted_sum(low_pts, budget)?,
        m_k: 0.0,
        bound: f64::INFINITY,
        literal_bound: f64::INFINITY,
        within_bound: true,
        spot_checks: vec![],
    };
    let mut blocks = Vec::new();
    let mut start = split;
    let mut k = k0 + 1;
    while start < spec.points.len() {
        let (lo, hi) = (2f64.powi(k), 2f64.powi(k + 1));
        let end = start + spec.points[start..].partition_point(|q| q.0 < hi);
        let pts = &spec.points[start..end];
        let h_sum = weighted_sum(pts, budget)?;
        let mk = m_k(c, nf, k);
        let bound = 4f64.powi(k) * a * mk;
        let spot_checks = match mode {
            ParsevalMode::Asymptotic => vec![],
            ParsevalMode::OracleSpotCheck { per_block, tol } => spot_check(p, n, pts, per_block.min(10), tol, &budget)?,
        };
        blocks.push(Block {
            k,
            lo,
            hi,
            count: pts.len(),
            mass: pts.iter().map(|q| q.1).sum(),
            h_sum,
            m_k: mk,
            bound,
            literal_bound: 2f64.powi(k) * a * mk,
            within_bound: h_sum <= bound,
            spot_checks,
        });
        start = end;
        k += 1;
    }
    let tail_sum: f64 = blocks.iter().map(|b| b.h_sum).sum();
    let all_within_bound = blocks.iter().all(|b| b.within_bound);
    let spot_checks_ok = blocks.iter().flat_map(|b| &b.spot_checks).all(|s| s.ok);
    Ok(DyadicReport {
        n,
        k0,
        c,
        grand_total: low.h_sum + tail_sum,
        low,
        blocks,
        tail_sum,
        tail_bound: 9.0 * a * c,
        all_within_bound,
        spot_checks_ok,
    })
}

fn spot_check(p: &RepParams, n: i64, pts: &[(f64, f64)], m: usize, tol: f64, budget: &(impl Fn(f64) -> Result<f64> + Sync)) -> Result<Vec<SpotCheck>> {
    if pts.is_empty() || m == 0 {
        return Ok(vec![]);
    }
    let w = make_test_vector(n, TestKind::Tilde)?;
    let picks: Vec<f64> = (0..m.min(pts.len())).map(|j| pts[j * pts.len() / m.min(pts.len())].0).collect();
    picks
        .into_iter()
        .map(|t| {
            let (oracle, oracle_err, _) = h_form_detailed(p, &SpectralParam::Principal(t), &w, tol)?;
            let budget = budget(t)?;
            Ok(SpotCheck { t, oracle, oracle_err, budget, ok: oracle <= budget + oracle_err })
        })
        .collect()
}

/// Output of [`low_spectrum_bound`].
#[derive(Debug, Clone, Serialize)]
pub struct LowSpectrumReport {
    /// ‖proj_R b‖².
    pub projection_norm_sq: f64,
    pub l1_norm: f64,
    /// max over unit f ∈ span R of ‖f‖_∞/‖f‖₂ on the sample set.
    pub c_r: f64,
    /// ‖b‖²_{L¹}·C_R².
    pub certificate: f64,
    pub holds: bool,
}

/// Gram-matrix tolerance for the orthonormality check.
pub const ORTHO_TOL: f64 = 1e-8;

/// Orthonormalizes sampled functions against the weights (sample measure) by
/// a QR factorization of the weighted sample matrix.
pub fn orthonormalize(funcs: &[Vec<f64>], weights: &[f64]) -> Result<Vec<Vec<f64>>> {
    let m = weights.len();
    if funcs.iter().any(|f| f.len() != m) || weights.iter().any(|&w| !(w > 0.0)) {
        return contract("sample lengths differ or a weight is not positive");
    }
    let sw: Vec<f64> = weights.iter().map(|w| w.sqrt()).collect();
    let mat = DMatrix::from_fn(m, funcs.len(), |i, j| funcs[j][i] * sw[i]);
    let q = mat.qr().q();
    Ok((0..funcs.len()).map(|j| (0..m).map(|i| q[(i, j)] / sw[i]).collect()).collect())
}

/// Projection of b ≥ 0 onto span R against the certificate ‖b‖²_{L¹}·C_R².
/// Since a = proj b satisfies ‖a‖² = ⟨b, a⟩ ≤ ‖b‖_{L¹}‖a‖_∞ ≤ ‖b‖_{L¹}C_R‖a‖₂,
/// the inequality always holds; for an orthonormal basis C_R is exactly
/// max_x (Σ_i R_i(x)²)^{1/2}.
pub fn low_spectrum_bound(basis: &[Vec<f64>], b: &[f64], weights: &[f64]) -> Result<LowSpectrumReport> {
    let m = weights.len();
    if b.len() != m || basis.iter().any(|r| r.len() != m) {
        return contract("sample lengths differ");
    }
    if b.iter().any(|&v| v < 0.0) {
        return contract("b must be nonnegative");
    }
    let w = DVector::from_column_slice(weights);
    let r = DMatrix::from_fn(m, basis.len(), |i, j| basis[j][i]);
    let gram = r.transpose() * DMatrix::from_diagonal(&w) * &r;
    let off = (gram - DMatrix::identity(basis.len(), basis.len())).abs().max();
    if off > ORTHO_TOL {
        return contract(format!("basis is not orthonormal on the sample measure (Gram deviation {off:e})"));
    }
    let bw = DVector::from_iterator(m, b.iter().zip(weights).map(|(x, y)| x * y));
    let coeffs = r.transpose() * bw;
    let projection_norm_sq = coeffs.norm_squared();
    let l1_norm: f64 = b.iter().zip(weights).map(|(x, y)| x * y).sum();
    let c_r = r.row_iter().map(|row| row.norm()).fold(0.0, f64::max);
    let certificate = l1_norm * l1_norm * c_r * c_r;
    let holds = projection_norm_sq <= certificate * (1.0 + 1e-12);
    Ok(LowSpectrumReport { projection_norm_sq, l1_norm, c_r, certificate, holds })
}

/// Model of H_t(w_n) for the plain vector used by the extraction: the Airy
/// main term |F_main|² where the Airy argument z = (t − 2n)/(2t)^{1/3} is in
/// range, the averaged oscillatory envelope for z < −100, zero for z > 100.
pub fn h_model(t: f64, n: i64) -> Result<f64> {
    let z = (t - 2.0 * n as f64) / (2.0 * t).cbrt();
    if z > 100.0 {
        return Ok(0.0);
    }
    if z < -100.0 {
        let g2 = 4.0 * PI * PI * (4.0 / t).powf(2.0 / 3.0) / (PI * (-z).sqrt());
        return Ok(4.0 / t * g2);
    }
    Ok(f_main_term(t, n, C::new(1.0, 0.0))?.norm_sqr())
}

/// Half-width factor b_window with window |t − T| ≤ b_window·T^{1/3}/2.
pub fn default_b_window() -> f64 {
    2.0 * lower_bound_constants().0
}

/// Output of [`subconvexity_extract`].
#[derive(Debug, Clone, Serialize)]
pub struct ExtractReport {
    pub t_center: f64,
    pub n: i64,
    pub half_width: f64,
    pub window_count: usize,
    pub window_sum: f64,
    /// Σ d_i H_{t_i}(w_T) over the whole spectrum.
    pub h_delta: f64,
    /// min over the window of H_t(w_T), on 65 equally spaced points.
    pub h_min: f64,
    /// None for an empty window.
    pub certified_bound: Option<f64>,
    pub holds: Option<bool>,
}

/// Window mass around T against H_Δ(w_T)/min_window H_t(w_T), with
/// w_T = w_n for n the even integer nearest T/2.
pub fn subconvexity_extract(spec: &SyntheticSpectrum, p: &RepParams, t_center: f64, b_window: f64) -> Result<ExtractReport> {
    if !(t_center >= 4.0 * p.s_cutoff()) {
        return domain(format!("T = {t_center} below 4𝒮 = {}", 4.0 * p.s_cutoff()));
    }
    let n = 2 * (t_center / 4.0).round() as i64;
    let s = p.s_cutoff();
    let half_width = b_window * t_center.cbrt() / 2.0;
    let in_window = |t: f64| (t - t_center).abs() <= half_width;
    let window: Vec<&(f64, f64)> = spec.points.iter().filter(|q| in_window(q.0)).collect();
    let window_sum: f64 = window.iter().map(|q| q.1).sum();
    let h_delta = weighted_sum(&spec.points, |t| h_model(t.max(s), n))?;
    let h_min = (0..=64)
        .map(|j| h_model(t_center - half_width + 2.0 * half_width * j as f64 / 64.0, n))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .fold(f64::INFINITY, f64::min);
    let (certified_bound, holds) = if window.is_empty() {
        (None, None)
    } else {
        let cb = h_delta / h_min;
        (Some(cb), Some(window_sum <= cb))
    };
    Ok(ExtractReport { t_center, n, half_width, window_count: window.len(), window_sum, h_delta, h_min, certified_bound, holds })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p() -> RepParams {
        RepParams::new(0.3, 0.7)
    }

    #[test]
    fn counting_and_determinism() {
        let s = gen_spectrum(&p(), 100.0, 1.0, 1.0, 7, WeightModel::Uniform).unwrap();
        assert!((s.points.len() as f64 - 1e4).abs() <= 2.0);
        assert_eq!(s, gen_spectrum(&p(), 100.0, 1.0, 1.0, 7, WeightModel::Uniform).unwrap());
        assert_ne!(s, gen_spectrum(&p(), 100.0, 1.0, 1.0, 8, WeightModel::Uniform).unwrap());
        assert!(s.audit(p().s_cutoff()).ok);
    }

    #[test]
    fn heavy_tail_respects_caps() {
        for seed in 0..5 {
            let s = gen_spectrum(&p(), 60.0, 2.0, 0.5, seed, WeightModel::HeavyTail).unwrap();
            let a = s.audit(p().s_cutoff());
            assert!(a.ok, "{a:?}");
        }
    }

    #[test]
    fn rejects_short_range() {
        assert!(gen_spectrum(&p(), 11.0, 1.0, 1.0, 0, WeightModel::Uniform).is_err());
    }

    #[test]
    fn m_k_switches_at_4n() {
        assert_eq!(m_k(1.0, 8.0, 4), 1.0 / 128.0 + 1.0 / 4096.0);
        assert_eq!(m_k(1.0, 8.0, 5), 1.0 / 32768.0);
    }

    #[test]
    fn blocks_respect_bound_with_explicit_constant() {
        let s = gen_spectrum(&p(), 200.0, 1.0, 1.0, 3, WeightModel::Uniform).unwrap();
        let r = parseval_sum_with(&s, &p(), 16, ParsevalMode::Asymptotic, 2.0).unwrap();
        assert_eq!(r.k0, 1);
        assert!(r.all_within_bound);
        assert!(r.tail_sum <= r.tail_bound);
        assert!((r.grand_total - r.low.h_sum - r.blocks.iter().map(|b| b.h_sum).sum::<f64>()).abs() < 1e-12);
        assert_eq!(r.blocks.iter().map(|b| b.count).sum::<usize>() + r.low.count, s.points.len());
    }

    #[test]
    fn low_spectrum_equality_case() {
        let w = vec![0.25; 4];
        let r = low_spectrum_bound(&[vec![1.0; 4]], &[2.0; 4], &w).unwrap();
        assert!((r.projection_norm_sq - 4.0).abs() < 1e-12);
        assert!((r.certificate - 4.0).abs() < 1e-12);
        let z = low_spectrum_bound(&[vec![1.0; 4]], &[0.0; 4], &w).unwrap();
        assert_eq!(z.projection_norm_sq, 0.0);
    }

    #[test]
    fn low_spectrum_rejects_non_orthonormal() {
        let w = vec![0.25; 4];
        assert!(matches!(low_spectrum_bound(&[vec![2.0; 4]], &[1.0; 4], &w), Err(crate::Error::Contract(_))));
    }

    #[test]
    fn orthonormalize_gives_identity_gram() {
        let w = vec![0.1, 0.2, 0.3, 0.4];
        let f = vec![vec![1.0, 2.0, 0.0, 1.0], vec![0.0, 1.0, 1.0, 3.0]];
        let q = orthonormalize(&f, &w).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                let g: f64 = (0..4).map(|x| q[i][x] * q[j][x] * w[x]).sum();
                assert!((g - if i == j { 1.0 } else { 0.0 }).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn zero_weights_give_zero_window() {
        let mut s = gen_spectrum(&p(), 120.0, 1.0, 1.0, 1, WeightModel::Uniform).unwrap();
        s.points.iter_mut().for_each(|q| q.1 = 0.0);
        let r = subconvexity_extract(&s, &p(), 100.0, default_b_window()).unwrap();
        assert_eq!(r.window_sum, 0.0);
        assert_eq!(r.holds, Some(true));
    }

    #[test]
    fn h_model_envelope_caps_main_term_near_range_edge() {
        // z ≈ −100: main term oscillates under the envelope used beyond it.
        let n = 2000;
        let env = |t: f64| 4.0 / t * 4.0 * PI * (4.0 / t).powf(2.0 / 3.0) / (-(t - 2.0 * n as f64) / (2.0 * t).cbrt()).sqrt();
        let t0 = 4000.0 - 100.0 * 8000f64.cbrt();
        let mut worst: f64 = 0.0;
        let mut best: f64 = 0.0;
        for j in 0..400 {
            let t = t0 + 0.1 + j as f64 * 0.02;
            let r = h_model(t, n).unwrap() / env(t);
            worst = worst.max(r);
            best = best.max(r);
        }
        assert!(worst <= 1.01 && best >= 0.9, "{worst} {best}");
        assert!(h_model(t0 - 50.0, n).unwrap() > 0.0);
        assert_eq!(h_model(4000.0 + 100.0 * 8000f64.cbrt() + 50.0, n).unwrap(), 0.0);
    }
}
