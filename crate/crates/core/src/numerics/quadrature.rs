//! Adaptive tensor-product Gauss–Legendre cubature on hyperrectangles.
//!
//! Each panel is integrated with a 7-point rule per axis. The error of a panel
//! is estimated axis by axis: the rule along axis `a` is swapped for a 5-point
//! rule and the difference to the full 7-point value is that axis' error
//! indicator. The panel with the largest total indicator is bisected along its
//! worst axis until the global estimate meets the tolerance.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::sync::OnceLock;

use super::{HyperRectangle, NumericsError};

const FINE_POINTS: usize = 7;
const COARSE_POINTS: usize = 5;

/// Nodes and weights of an `n`-point Gauss–Legendre rule on `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    /// Newton iteration on the Legendre recurrence.
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "rule needs at least one node");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let m = n.div_ceil(2);
        for i in 0..m {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre_with_derivative(n, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        Self { nodes, weights }
    }

    /// Highest polynomial degree integrated exactly.
    pub fn exact_degree(&self) -> usize {
        2 * self.nodes.len() - 1
    }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let p = if n == 0 { 1.0 } else { p1 };
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p, d)
}

fn fine_rule() -> &'static GaussLegendre {
    static RULE: OnceLock<GaussLegendre> = OnceLock::new();
    RULE.get_or_init(|| GaussLegendre::new(FINE_POINTS))
}

fn coarse_rule() -> &'static GaussLegendre {
    static RULE: OnceLock<GaussLegendre> = OnceLock::new();
    RULE.get_or_init(|| GaussLegendre::new(COARSE_POINTS))
}

#[derive(Debug, Clone, Copy)]
pub struct QuadOptions {
    pub rel_tol: f64,
    /// Absolute floor on the error target; needed for integrals that vanish.
    pub abs_tol: f64,
    pub max_panels: usize,
}

impl Default for QuadOptions {
    fn default() -> Self {
        Self {
            rel_tol: 1e-6,
            abs_tol: 1e-15,
            max_panels: 20_000,
        }
    }
}

impl QuadOptions {
    pub fn with_rel_tol(rel_tol: f64) -> Self {
        Self {
            rel_tol,
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadResult {
    pub value: f64,
    /// Sum of the per-panel error indicators.
    pub error: f64,
    pub panels: usize,
    /// False when the panel budget ran out before the tolerance was met.
    pub converged: bool,
}

struct Panel {
    rect: HyperRectangle,
    value: f64,
    l1: f64,
    axis_err: Vec<f64>,
    err: f64,
    seq: usize,
}

impl Panel {
    fn worst_axis(&self) -> usize {
        let mut best = 0;
        for (k, e) in self.axis_err.iter().enumerate() {
            if *e > self.axis_err[best] {
                best = k;
            }
        }
        best
    }
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    // Max-heap on error; ties go to the older panel so the order is reproducible.
    fn cmp(&self, other: &Self) -> Ordering {
        self.err
            .total_cmp(&other.err)
            .then_with(|| other.seq.cmp(&self.seq))
    }
}

/// Tensor-product rule over `rect` where axis `coarse_axis` (if any) uses the
/// 5-point rule. Returns `(Σ w f, Σ w |f|)`.
fn tensor_rule<F>(
    f: &F,
    rect: &HyperRectangle,
    coarse_axis: Option<usize>,
    point: &mut [f64],
) -> Result<(f64, f64), NumericsError>
where
    F: Fn(&[f64]) -> f64 + ?Sized,
{
    let n = rect.dim();
    let rules: Vec<&GaussLegendre> = (0..n)
        .map(|k| {
            if Some(k) == coarse_axis {
                coarse_rule()
            } else {
                fine_rule()
            }
        })
        .collect();
    let half: Vec<f64> = rect.axes().iter().map(|a| 0.5 * a.width()).collect();
    let mid: Vec<f64> = rect.axes().iter().map(|a| a.midpoint()).collect();
    let jac: f64 = half.iter().product();

    let mut idx = vec![0usize; n];
    let mut sum = 0.0;
    let mut abs_sum = 0.0;
    loop {
        let mut w = 1.0;
        for k in 0..n {
            point[k] = mid[k] + half[k] * rules[k].nodes[idx[k]];
            w *= rules[k].weights[idx[k]];
        }
        let v = f(point);
        if !v.is_finite() {
            return Err(NumericsError::NonFiniteIntegrand {
                point: point.to_vec(),
                value: v,
            });
        }
        sum += w * v;
        abs_sum += w * v.abs();

        // odometer increment, last axis fastest
        let mut k = n;
        loop {
            if k == 0 {
                return Ok((sum * jac, abs_sum * jac));
            }
            k -= 1;
            idx[k] += 1;
            if idx[k] < rules[k].nodes.len() {
                break;
            }
            idx[k] = 0;
        }
    }
}

fn eval_panel<F>(f: &F, rect: HyperRectangle, seq: usize) -> Result<Panel, NumericsError>
where
    F: Fn(&[f64]) -> f64 + ?Sized,
{
    let mut point = vec![0.0; rect.dim()];
    let (value, l1) = tensor_rule(f, &rect, None, &mut point)?;
    let mut axis_err = Vec::with_capacity(rect.dim());
    for a in 0..rect.dim() {
        let (coarse, _) = tensor_rule(f, &rect, Some(a), &mut point)?;
        axis_err.push((value - coarse).abs());
    }
    let err = axis_err.iter().sum();
    Ok(Panel {
        rect,
        value,
        l1,
        axis_err,
        err,
        seq,
    })
}

/// Single 7-point-per-axis panel, no adaptivity. Exact for polynomials of
/// degree ≤ 13 in each variable.
pub fn gauss_legendre_panel<F>(f: F, rect: &HyperRectangle) -> Result<f64, NumericsError>
where
    F: Fn(&[f64]) -> f64,
{
    let mut point = vec![0.0; rect.dim()];
    tensor_rule(&f, rect, None, &mut point).map(|(v, _)| v)
}

/// `∫_box f dⁿx` to relative tolerance `rel_tol` with the default budget.
pub fn integrate_box<F>(f: F, rect: &HyperRectangle, rel_tol: f64) -> Result<QuadResult, NumericsError>
where
    F: Fn(&[f64]) -> f64,
{
    integrate_box_with(f, rect, &QuadOptions::with_rel_tol(rel_tol))
}

pub fn integrate_box_with<F>(
    f: F,
    rect: &HyperRectangle,
    opts: &QuadOptions,
) -> Result<QuadResult, NumericsError>
where
    F: Fn(&[f64]) -> f64,
{
    if !(opts.rel_tol > 0.0) || opts.abs_tol < 0.0 || opts.max_panels == 0 {
        return Err(NumericsError::InvalidTolerance);
    }
    let mut seq = 0;
    let root = eval_panel(&f, rect.clone(), seq)?;
    let mut value = root.value;
    let mut l1 = root.l1;
    let mut err = root.err;
    let mut heap = BinaryHeap::new();
    heap.push(root);

    let target = |value: f64, l1: f64| {
        (opts.rel_tol * value.abs())
            .max(opts.abs_tol)
            .max(64.0 * f64::EPSILON * l1)
    };

    let mut converged = err <= target(value, l1);
    while !converged && heap.len() < opts.max_panels {
        let worst = heap.pop().expect("heap never empties");
        let (left, right) = worst.rect.bisect(worst.worst_axis());
        let left = eval_panel(&f, left, seq + 1)?;
        let right = eval_panel(&f, right, seq + 2)?;
        seq += 2;
        value += left.value + right.value - worst.value;
        l1 += left.l1 + right.l1 - worst.l1;
        err = (err + left.err + right.err - worst.err).max(0.0);
        heap.push(left);
        heap.push(right);
        if err <= target(value, l1) {
            // re-add from scratch so drift in the running sums cannot fake convergence
            let (v, a, e) = totals(&heap);
            value = v;
            l1 = a;
            err = e;
            converged = err <= target(value, l1);
        }
    }

    let (value, _, error) = totals(&heap);
    Ok(QuadResult {
        value,
        error,
        panels: heap.len(),
        converged,
    })
}

/// Sums in creation order, independent of heap layout.
fn totals(heap: &BinaryHeap<Panel>) -> (f64, f64, f64) {
    let mut panels: Vec<&Panel> = heap.iter().collect();
    panels.sort_by_key(|p| p.seq);
    panels.iter().fold((0.0, 0.0, 0.0), |(v, a, e), p| {
        (v + p.value, a + p.l1, e + p.err)
    })
}
