use super::gauss::{WG, WGK, XGK};
use super::product::ProductPair;
use super::{QuadOptions, QuadResult, SingularitySpec};
use crate::error::{Error, Result};
use num_complex::Complex64;
use rayon::prelude::*;
use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::f64::consts::PI;

type C = Complex64;

/// Phase advance allotted to one 21-point panel of the initial mesh.
const PANEL_PHASE: f64 = 4.0 * PI;

#[derive(Debug, Clone, Copy)]
enum Kind {
    Regular,
    /// Singular at `a`; index into the product-rule table.
    Left(usize),
    /// Singular at `b`.
    Right(usize),
}

#[derive(Debug, Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
    kind: Kind,
    value: C,
    err: f64,
    abs_mass: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.err == other.err
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.err.partial_cmp(&other.err).unwrap_or(Ordering::Equal)
    }
}

struct Engine<'a, F> {
    f: &'a F,
    rules: Vec<ProductPair>,
}

impl<F: Fn(f64) -> C + Sync> Engine<'_, F> {
    fn eval(&self, x: f64) -> Result<C> {
        let v = (self.f)(x);
        if v.re.is_finite() && v.im.is_finite() {
            Ok(v)
        } else {
            Err(Error::Singularity(format!("integrand not finite at x = {x}")))
        }
    }

    /// Fills value/err/abs_mass; returns the evaluation count.
    fn apply(&self, p: &mut Panel) -> Result<usize> {
        match p.kind {
            Kind::Regular => {
                let c = 0.5 * (p.a + p.b);
                let hl = 0.5 * (p.b - p.a);
                let fc = self.eval(c)?;
                let mut k = fc * WGK[10];
                let mut g = C::new(0.0, 0.0);
                let mut mass = fc.norm() * WGK[10];
                for j in 0..10 {
                    let dx = hl * XGK[j];
                    let f1 = self.eval(c - dx)?;
                    let f2 = self.eval(c + dx)?;
                    k += (f1 + f2) * WGK[j];
                    mass += (f1.norm() + f2.norm()) * WGK[j];
                    if j % 2 == 1 {
                        g += (f1 + f2) * WG[j / 2];
                    }
                }
                p.value = k * hl;
                p.err = ((k - g) * hl).norm();
                p.abs_mass = mass * hl;
                Ok(21)
            }
            Kind::Left(r) | Kind::Right(r) => {
                let pair = &self.rules[r];
                let h = p.b - p.a;
                let (x0, dir) = match p.kind {
                    Kind::Left(_) => (p.a, 1.0),
                    _ => (p.b, -1.0),
                };
                let run = |rule: &super::product::ProductRule| -> Result<(C, f64)> {
                    let mut s = C::new(0.0, 0.0);
                    let mut m = 0.0;
                    for (&u, &w) in rule.nodes.iter().zip(&rule.weights) {
                        let v = self.eval(x0 + dir * h * u)? * w;
                        s += v;
                        m += v.norm();
                    }
                    Ok((s * h, m * h))
                };
                let (lo, _) = run(&pair.coarse)?;
                let (hi, mass) = run(&pair.fine)?;
                p.value = hi;
                p.err = (hi - lo).norm();
                p.abs_mass = mass;
                Ok(pair.evals())
            }
        }
    }

    fn split(&self, p: &Panel) -> (Panel, Panel) {
        let m = 0.5 * (p.a + p.b);
        let (k1, k2) = match p.kind {
            Kind::Regular => (Kind::Regular, Kind::Regular),
            Kind::Left(r) => (Kind::Left(r), Kind::Regular),
            Kind::Right(r) => (Kind::Regular, Kind::Right(r)),
        };
        (blank(p.a, m, k1), blank(m, p.b, k2))
    }
}

fn blank(a: f64, b: f64, kind: Kind) -> Panel {
    Panel { a, b, kind, value: C::new(0.0, 0.0), err: 0.0, abs_mass: 0.0 }
}

fn refinable(p: &Panel) -> bool {
    let scale = p.a.abs().max(p.b.abs()).max(1e-300);
    match p.kind {
        Kind::Regular => p.b - p.a > 64.0 * f64::EPSILON * scale,
        _ => p.b - p.a > 1e-13 * scale.max(1.0),
    }
}

/// Initial panels on a segment singular at most at one end.
fn mesh_segment(a: f64, b: f64, left: Option<usize>, right: Option<usize>, sing: &SingularitySpec, opts: &QuadOptions, out: &mut Vec<Panel>) {
    let len = b - a;
    let nu = |x: f64| opts.max_freq + sing.local_frequency(x);
    match (left, right) {
        (None, None) => {
            let peak = nu(a).max(nu(b)).max(nu(0.5 * (a + b)));
            let n = ((len * peak / PANEL_PHASE).ceil() as usize).max(1);
            for i in 0..n {
                let x0 = a + len * i as f64 / n as f64;
                let x1 = if i + 1 == n { b } else { a + len * (i + 1) as f64 / n as f64 };
                out.push(blank(x0, x1, Kind::Regular));
            }
        }
        (Some(r), None) | (None, Some(r)) => {
            let from_left = left.is_some();
            // The product rule absorbs the singular point's own oscillation; the
            // first panel only has to resolve everything else.
            let x0 = if from_left { a } else { b };
            let other = opts.max_freq + sing.local_frequency_excluding(x0, x0);
            let d0 = (0.5 * len).min(PI / (1.0 + other));
            // Positions measured from the singular end.
            let mut cuts = vec![0.0, d0];
            let mut s = d0;
            while s < len {
                let x = if from_left { a + s } else { b - s };
                let w = (PANEL_PHASE / nu(x)).min(s);
                let mut next = s + w;
                if len - next < 0.25 * w {
                    next = len;
                }
                cuts.push(next.min(len));
                s = next;
            }
            *cuts.last_mut().unwrap() = len;
            for i in 0..cuts.len() - 1 {
                let kind = if i == 0 {
                    if from_left { Kind::Left(r) } else { Kind::Right(r) }
                } else {
                    Kind::Regular
                };
                let (x0, x1) = if from_left {
                    (a + cuts[i], if i + 2 == cuts.len() { b } else { a + cuts[i + 1] })
                } else {
                    (if i + 2 == cuts.len() { a } else { b - cuts[i + 1] }, b - cuts[i])
                };
                out.push(blank(x0, x1, kind));
            }
        }
        (Some(_), Some(_)) => unreachable!("two-sided segments are split beforehand"),
    }
}

/// ∫_a^b f with explicit options.
pub fn integrate_line_with<F>(f: F, interval: (f64, f64), sing: &SingularitySpec, opts: &QuadOptions) -> Result<QuadResult>
where
    F: Fn(f64) -> C + Sync,
{
    let (a, b) = interval;
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::Domain("interval must be finite".into()));
    }
    if a == b {
        return Ok(QuadResult { value: C::new(0.0, 0.0), err_estimate: 0.0, n_evals: 0, converged: true, abs_mass: 0.0 });
    }
    if a > b {
        let r = integrate_line_with(f, (b, a), sing, opts)?;
        return Ok(QuadResult { value: -r.value, ..r });
    }
    for p in &sing.points {
        if p.exponents.iter().any(|e| !(e.re > -1.0)) {
            return Err(Error::Domain(format!("non-integrable exponent at {}", p.at)));
        }
    }
    let len = b - a;
    let snap = 1e-14 * len.max(a.abs()).max(b.abs());
    let mut rules = Vec::new();
    // (position, rule index) of singular breakpoints within [a, b].
    let mut singular: Vec<(f64, usize)> = Vec::new();
    for p in &sing.points {
        let at = if (p.at - a).abs() <= snap {
            a
        } else if (p.at - b).abs() <= snap {
            b
        } else {
            p.at
        };
        if at < a || at > b {
            continue;
        }
        if let Some(existing) = singular.iter().position(|(x, _)| *x == at) {
            let idx = singular[existing].1;
            let mut merged = rules_exponents(sing, at, snap);
            merged.dedup();
            rules[idx] = ProductPair::new(&merged);
            continue;
        }
        rules.push(ProductPair::new(&p.exponents));
        singular.push((at, rules.len() - 1));
    }
    singular.sort_by(|x, y| x.0.partial_cmp(&y.0).unwrap());

    let mut breaks: Vec<(f64, Option<usize>)> = Vec::new();
    if singular.first().map(|s| s.0) != Some(a) {
        breaks.push((a, None));
    }
    for &(x, r) in &singular {
        breaks.push((x, Some(r)));
    }
    if singular.last().map(|s| s.0) != Some(b) {
        breaks.push((b, None));
    }

    let mut panels = Vec::new();
    for w in breaks.windows(2) {
        let ((x0, r0), (x1, r1)) = (w[0], w[1]);
        match (r0, r1) {
            (Some(_), Some(_)) => {
                let m = 0.5 * (x0 + x1);
                mesh_segment(x0, m, r0, None, sing, opts, &mut panels);
                mesh_segment(m, x1, None, r1, sing, opts, &mut panels);
            }
            _ => mesh_segment(x0, x1, r0, r1, sing, opts, &mut panels),
        }
    }

    let engine = Engine { f: &f, rules };
    let counts: Vec<Result<usize>> = panels.par_iter_mut().map(|p| engine.apply(p)).collect();
    let mut n_evals = 0;
    for c in counts {
        n_evals += c?;
    }

    let mut heap: BinaryHeap<Panel> = panels.into_iter().collect();
    let mut frozen: Vec<Panel> = Vec::new();
    let mut total_err: f64 = heap.iter().map(|p| p.err).sum();
    let target = |heap: &BinaryHeap<Panel>, frozen: &[Panel]| -> f64 {
        let value: C = heap.iter().chain(frozen).map(|p| p.value).sum();
        let mass: f64 = heap.iter().chain(frozen).map(|p| p.abs_mass).sum();
        opts.abs_tol.max(opts.rel_tol * value.norm()).max(50.0 * f64::EPSILON * mass)
    };
    let mut tol = target(&heap, &frozen);
    let mut since_retarget = 0usize;
    while total_err > tol && n_evals < opts.max_evals {
        let Some(worst) = heap.pop() else { break };
        if !refinable(&worst) {
            frozen.push(worst);
            continue;
        }
        let (mut l, mut r) = engine.split(&worst);
        n_evals += engine.apply(&mut l)?;
        n_evals += engine.apply(&mut r)?;
        total_err += l.err + r.err - worst.err;
        heap.push(l);
        heap.push(r);
        since_retarget += 1;
        // Full rescans are O(heap); spacing them by heap/8 keeps the loop near-linear.
        if since_retarget >= 64.max(heap.len() / 8) || total_err <= tol {
            total_err = heap.iter().chain(&frozen).map(|p| p.err).sum();
            tol = target(&heap, &frozen);
            since_retarget = 0;
        }
    }

    let mut all: Vec<Panel> = heap.into_vec();
    all.extend(frozen);
    all.sort_by(|x, y| x.a.partial_cmp(&y.a).unwrap());
    let value: C = all.iter().map(|p| p.value).sum();
    let err: f64 = all.iter().map(|p| p.err).sum();
    let mass: f64 = all.iter().map(|p| p.abs_mass).sum();
    let tol = opts.abs_tol.max(opts.rel_tol * value.norm()).max(50.0 * f64::EPSILON * mass);
    Ok(QuadResult { value, err_estimate: err, n_evals, converged: err <= tol, abs_mass: mass })
}

fn rules_exponents(sing: &SingularitySpec, at: f64, snap: f64) -> Vec<C> {
    sing.points
        .iter()
        .filter(|p| (p.at - at).abs() <= snap)
        .flat_map(|p| p.exponents.iter().copied())
        .collect()
}

/// ∫_a^b f to absolute tolerance `tol`.
pub fn integrate_line<F>(f: F, interval: (f64, f64), sing: &SingularitySpec, tol: f64) -> Result<QuadResult>
where
    F: Fn(f64) -> C + Sync,
{
    integrate_line_with(f, interval, sing, &QuadOptions::abs(tol))
}

/// ∫ over one period [0, period); singular locations are reduced modulo the period.
pub fn integrate_periodic<F>(f: F, period: f64, sing: &SingularitySpec, opts: &QuadOptions) -> Result<QuadResult>
where
    F: Fn(f64) -> C + Sync,
{
    if !(period > 0.0) {
        return Err(Error::Domain("period must be positive".into()));
    }
    let mut reduced = SingularitySpec::none();
    for p in &sing.points {
        let mut at = p.at.rem_euclid(period);
        if at > period * (1.0 - 1e-14) || at < period * 1e-14 {
            at = 0.0;
            reduced.points.push(super::Singularity { at: period, exponents: p.exponents.clone() });
        }
        reduced.points.push(super::Singularity { at, exponents: p.exponents.clone() });
    }
    integrate_line_with(f, (0.0, period), &reduced, opts)
}

/// ∫_{S¹} f over [0, 2π).
pub fn integrate_circle<F>(f: F, sing: &SingularitySpec, tol: f64) -> Result<QuadResult>
where
    F: Fn(f64) -> C + Sync,
{
    integrate_periodic(f, 2.0 * PI, sing, &QuadOptions::abs(tol))
}
