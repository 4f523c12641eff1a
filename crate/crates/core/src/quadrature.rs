//! Tensor Gauss–Legendre cubature on boxes.
//!
//! [`integrate_box`] is globally adaptive: every cell carries the difference between
//! a high- and a low-order tensor rule as its error estimate, and the worst cells are
//! bisected along every axis in parallel batches until the summed estimate meets the
//! tolerance. [`integrate_region`] handles integrands cut off by an indicator: cells
//! straddling the region boundary are refined to a fixed depth, and the remaining
//! straddling leaves are integrated line by line with the boundary located by bisection.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::sync::OnceLock;

use rayon::prelude::*;

use crate::error::Result;
use crate::surface::BoxDomain;

const MAX_ORDER: usize = 64;

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    fn compute(m: usize) -> Self {
        let mut nodes = vec![0.0; m];
        let mut weights = vec![0.0; m];
        for i in 0..m.div_ceil(2) {
            // Tricomi's initial guess, then Newton on P_m.
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (m as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre(m, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre(m, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[m - 1 - i] = x;
            weights[i] = w;
            weights[m - 1 - i] = w;
        }
        if m % 2 == 1 {
            nodes[m / 2] = 0.0;
        }
        Self { nodes, weights }
    }

    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    /// `∫_a^b f` with this rule.
    pub fn integrate<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, mut f: F) -> f64 {
        let (c, h) = (0.5 * (a + b), 0.5 * (b - a));
        let mut s = NeumaierSum::default();
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            s.add(w * f(c + h * x));
        }
        h * s.value()
    }
}

fn legendre(m: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    for k in 2..=m {
        let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    let p = if m == 0 { 1.0 } else { p1 };
    let d = m as f64 * (x * p - p0) / (x * x - 1.0);
    (p, d)
}

/// Cached rule of order `m` (`1 ≤ m ≤ 64`).
pub fn gauss_legendre(m: usize) -> &'static GaussLegendre {
    static RULES: OnceLock<Vec<GaussLegendre>> = OnceLock::new();
    assert!((1..=MAX_ORDER).contains(&m), "unsupported order {m}");
    let rules = RULES.get_or_init(|| (0..=MAX_ORDER).map(|k| GaussLegendre::compute(k.max(1))).collect());
    &rules[m]
}

/// Compensated summation; the result depends only on the order of additions.
#[derive(Debug, Clone, Copy, Default)]
pub struct NeumaierSum {
    sum: f64,
    comp: f64,
}

impl NeumaierSum {
    #[inline]
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

pub fn compensated_sum<I: IntoIterator<Item = f64>>(it: I) -> f64 {
    let mut s = NeumaierSum::default();
    for x in it {
        s.add(x);
    }
    s.value()
}

#[derive(Debug, Clone)]
pub struct QuadOptions {
    pub order: usize,
    pub initial_splits: usize,
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_evals: u64,
}

impl Default for QuadOptions {
    fn default() -> Self {
        Self {
            order: 8,
            initial_splits: 2,
            rel_tol: 1e-9,
            abs_tol: 1e-13,
            max_evals: 50_000_000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadResult {
    pub value: f64,
    pub error: f64,
    pub evals: u64,
    pub converged: bool,
}

#[derive(Debug, Clone)]
struct Cell {
    lo: Vec<f64>,
    hi: Vec<f64>,
    value: f64,
    error: f64,
    id: u64,
}

struct Ranked(Cell);

impl PartialEq for Ranked {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Ranked {}
impl PartialOrd for Ranked {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Ranked {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0
            .error
            .total_cmp(&other.0.error)
            .then_with(|| other.0.id.cmp(&self.0.id))
    }
}

/// Tensor rule of the given order on a cell.
fn tensor_rule<F>(f: &F, lo: &[f64], hi: &[f64], rule: &GaussLegendre) -> Result<f64>
where
    F: Fn(&[f64]) -> Result<f64> + Sync,
{
    let d = lo.len();
    let m = rule.order();
    let half: Vec<f64> = lo.iter().zip(hi).map(|(a, b)| 0.5 * (b - a)).collect();
    let mid: Vec<f64> = lo.iter().zip(hi).map(|(a, b)| 0.5 * (a + b)).collect();
    let jac: f64 = half.iter().product();
    let mut idx = vec![0usize; d];
    let mut x = vec![0.0; d];
    let mut s = NeumaierSum::default();
    loop {
        let mut w = 1.0;
        for k in 0..d {
            x[k] = mid[k] + half[k] * rule.nodes[idx[k]];
            w *= rule.weights[idx[k]];
        }
        s.add(w * f(&x)?);
        let mut k = 0;
        loop {
            if k == d {
                return Ok(jac * s.value());
            }
            idx[k] += 1;
            if idx[k] < m {
                break;
            }
            idx[k] = 0;
            k += 1;
        }
    }
}

fn low_order(order: usize) -> usize {
    (order / 2 + 1).max(1).min(order.saturating_sub(1).max(1))
}

fn eval_cell<F>(f: &F, lo: Vec<f64>, hi: Vec<f64>, id: u64, order: usize) -> Result<Cell>
where
    F: Fn(&[f64]) -> Result<f64> + Sync,
{
    let hi_val = tensor_rule(f, &lo, &hi, gauss_legendre(order))?;
    let lo_val = tensor_rule(f, &lo, &hi, gauss_legendre(low_order(order)))?;
    Ok(Cell {
        lo,
        hi,
        value: hi_val,
        error: (hi_val - lo_val).abs(),
        id,
    })
}

fn split(lo: &[f64], hi: &[f64]) -> Vec<(Vec<f64>, Vec<f64>)> {
    let d = lo.len();
    (0..1usize << d)
        .map(|mask| {
            let mut a = lo.to_vec();
            let mut b = hi.to_vec();
            for k in 0..d {
                let m = 0.5 * (lo[k] + hi[k]);
                if mask & (1 << k) == 0 {
                    b[k] = m;
                } else {
                    a[k] = m;
                }
            }
            (a, b)
        })
        .collect()
}

fn grid(domain: &BoxDomain, splits: usize) -> Vec<(Vec<f64>, Vec<f64>)> {
    let d = domain.dim();
    let splits = splits.max(1);
    let total = splits.pow(d as u32);
    (0..total)
        .map(|mut idx| {
            let mut a = vec![0.0; d];
            let mut b = vec![0.0; d];
            for k in 0..d {
                let i = idx % splits;
                idx /= splits;
                let (lo, hi) = (domain.lo()[k], domain.hi()[k]);
                let h = (hi - lo) / splits as f64;
                a[k] = lo + h * i as f64;
                b[k] = if i + 1 == splits { hi } else { lo + h * (i + 1) as f64 };
            }
            (a, b)
        })
        .collect()
}

fn evals_per_cell(order: usize, d: usize) -> u64 {
    (order.pow(d as u32) + low_order(order).pow(d as u32)) as u64
}

/// Globally adaptive integral of `f` over `domain`.
pub fn integrate_box<F>(f: F, domain: &BoxDomain, opts: &QuadOptions) -> Result<QuadResult>
where
    F: Fn(&[f64]) -> Result<f64> + Sync,
{
    let d = domain.dim();
    let per_cell = evals_per_cell(opts.order, d);
    let mut next_id = 0u64;
    let initial: Vec<_> = grid(domain, opts.initial_splits)
        .into_iter()
        .map(|c| {
            next_id += 1;
            (c, next_id)
        })
        .collect();
    let cells: Vec<Cell> = initial
        .into_par_iter()
        .map(|((a, b), id)| eval_cell(&f, a, b, id, opts.order))
        .collect::<Result<_>>()?;
    let mut evals = per_cell * cells.len() as u64;
    let mut value = NeumaierSum::default();
    let mut error = NeumaierSum::default();
    let mut heap = BinaryHeap::with_capacity(cells.len());
    for c in cells {
        value.add(c.value);
        error.add(c.error);
        heap.push(Ranked(c));
    }

    let tol = |v: f64| opts.abs_tol.max(opts.rel_tol * v.abs());
    let mut converged = error.value() <= tol(value.value());
    while !converged {
        if evals >= opts.max_evals {
            break;
        }
        let excess = error.value() - 0.5 * tol(value.value());
        let budget = ((opts.max_evals - evals) / (per_cell << d)).max(1) as usize;
        let mut batch = Vec::new();
        let mut taken = 0.0;
        while let Some(Ranked(c)) = heap.pop() {
            taken += c.error;
            batch.push(c);
            if taken >= excess || batch.len() >= 1024.min(budget) {
                break;
            }
        }
        if batch.is_empty() {
            break;
        }
        let jobs: Vec<(Vec<f64>, Vec<f64>, u64)> = batch
            .iter()
            .flat_map(|c| split(&c.lo, &c.hi))
            .map(|(a, b)| {
                next_id += 1;
                (a, b, next_id)
            })
            .collect();
        let children: Vec<Cell> = jobs
            .into_par_iter()
            .map(|(a, b, id)| eval_cell(&f, a, b, id, opts.order))
            .collect::<Result<_>>()?;
        evals += per_cell * children.len() as u64;
        for c in &batch {
            value.add(-c.value);
            error.add(-c.error);
        }
        for c in children {
            value.add(c.value);
            error.add(c.error);
            heap.push(Ranked(c));
        }
        converged = error.value() <= tol(value.value());
    }

    // Final totals in a fixed order, independent of the batch history.
    let mut cells: Vec<Cell> = heap.into_iter().map(|r| r.0).collect();
    cells.sort_by_key(|c| c.id);
    let value = compensated_sum(cells.iter().map(|c| c.value));
    let error = compensated_sum(cells.iter().map(|c| c.error));
    Ok(QuadResult {
        value,
        error,
        evals,
        converged: converged || error <= tol(value),
    })
}

/// Options for integrals over `{inside}` ∩ box.
#[derive(Debug, Clone)]
pub struct RegionOptions {
    pub order: usize,
    pub initial_splits: usize,
    /// Refinement depth for cells that straddle the boundary.
    pub depth: usize,
    /// Indicator samples per axis used to classify a cell.
    pub probes: usize,
    pub rel_tol: f64,
}

impl Default for RegionOptions {
    fn default() -> Self {
        Self {
            order: 6,
            initial_splits: 8,
            depth: 6,
            probes: 5,
            rel_tol: 1e-3,
        }
    }
}

enum Class {
    Inside,
    Outside,
    Mixed,
}

fn classify<G>(inside: &G, lo: &[f64], hi: &[f64], probes: usize) -> Result<Class>
where
    G: Fn(&[f64]) -> Result<bool> + Sync,
{
    let d = lo.len();
    let q = probes.max(2);
    let total = q.pow(d as u32);
    let mut x = vec![0.0; d];
    let (mut any_in, mut any_out) = (false, false);
    for mut idx in 0..total {
        for k in 0..d {
            let s = (idx % q) as f64 / (q - 1) as f64;
            idx /= q;
            x[k] = lo[k] + s * (hi[k] - lo[k]);
        }
        if inside(&x)? {
            any_in = true;
        } else {
            any_out = true;
        }
        if any_in && any_out {
            return Ok(Class::Mixed);
        }
    }
    Ok(if any_in { Class::Inside } else { Class::Outside })
}

/// Along axis 0 of a cell, integrates `f` over the inside portion of the line through `x`.
fn line_rule<F, G>(f: &F, inside: &G, x: &mut [f64], a: f64, b: f64, rule: &GaussLegendre) -> Result<f64>
where
    F: Fn(&[f64]) -> Result<f64> + Sync,
    G: Fn(&[f64]) -> Result<bool> + Sync,
{
    const SAMPLES: usize = 16;
    let test = |s: f64, x: &mut [f64]| -> Result<bool> {
        x[0] = s;
        inside(x)
    };
    let h = (b - a) / SAMPLES as f64;
    let mut cuts = vec![a];
    let mut prev = test(a, x)?;
    let start_inside = prev;
    for i in 1..=SAMPLES {
        let s = if i == SAMPLES { b } else { a + h * i as f64 };
        let cur = test(s, x)?;
        if cur != prev {
            let (mut l, mut r) = (s - h, s);
            for _ in 0..64 {
                let m = 0.5 * (l + r);
                if m <= l || m >= r {
                    break;
                }
                if test(m, x)? == prev {
                    l = m;
                } else {
                    r = m;
                }
            }
            cuts.push(0.5 * (l + r));
            prev = cur;
        }
    }
    cuts.push(b);
    let mut total = NeumaierSum::default();
    let mut state = start_inside;
    for w in cuts.windows(2) {
        if state && w[1] > w[0] {
            let mut err = None;
            let v = rule.integrate(w[0], w[1], |s| {
                x[0] = s;
                f(x).unwrap_or_else(|e| {
                    err.get_or_insert(e);
                    0.0
                })
            });
            if let Some(e) = err {
                return Err(e);
            }
            total.add(v);
        }
        state = !state;
    }
    Ok(total.value())
}

fn mixed_leaf<F, G>(f: &F, inside: &G, lo: &[f64], hi: &[f64], rule: &GaussLegendre) -> Result<f64>
where
    F: Fn(&[f64]) -> Result<f64> + Sync,
    G: Fn(&[f64]) -> Result<bool> + Sync,
{
    let d = lo.len();
    let (a, b) = (lo[0], hi[0]);
    if d == 1 {
        let mut x = vec![a];
        return line_rule(f, inside, &mut x, a, b, rule);
    }
    let outer = |y: &[f64]| -> Result<f64> {
        let mut x = Vec::with_capacity(d);
        x.push(a);
        x.extend_from_slice(y);
        line_rule(f, inside, &mut x, a, b, rule)
    };
    tensor_rule(&outer, &lo[1..], &hi[1..], rule)
}

/// `∫ f · 1[inside]` over `domain`. The error estimate compares the last two
/// refinement levels and adds the tensor-rule estimates of the interior cells.
pub fn integrate_region<F, G>(
    f: F,
    inside: G,
    domain: &BoxDomain,
    opts: &RegionOptions,
) -> Result<QuadResult>
where
    F: Fn(&[f64]) -> Result<f64> + Sync,
    G: Fn(&[f64]) -> Result<bool> + Sync,
{
    let d = domain.dim();
    let rule = gauss_legendre(opts.order);
    let lo_rule = gauss_legendre(low_order(opts.order));
    let mut full = NeumaierSum::default();
    let mut full_err = NeumaierSum::default();
    let mut evals = 0u64;
    let mut level = grid(domain, opts.initial_splits);
    let mut history: Vec<f64> = Vec::new();

    for depth in 0..=opts.depth {
        let classes: Vec<Class> = level
            .par_iter()
            .map(|(a, b)| classify(&inside, a, b, opts.probes))
            .collect::<Result<_>>()?;
        evals += (level.len() * opts.probes.max(2).pow(d as u32)) as u64;
        let mut mixed = Vec::new();
        let interior: Vec<&(Vec<f64>, Vec<f64>)> = level
            .iter()
            .zip(&classes)
            .filter_map(|(c, k)| match k {
                Class::Inside => Some(c),
                Class::Mixed => {
                    mixed.push(c.clone());
                    None
                }
                Class::Outside => None,
            })
            .collect();
        let vals: Vec<(f64, f64)> = interior
            .par_iter()
            .map(|(a, b)| {
                let v = tensor_rule(&f, a, b, rule)?;
                let w = tensor_rule(&f, a, b, lo_rule)?;
                Ok((v, (v - w).abs()))
            })
            .collect::<Result<_>>()?;
        evals += interior.len() as u64 * evals_per_cell(opts.order, d);
        for (v, e) in vals {
            full.add(v);
            full_err.add(e);
        }
        if mixed.is_empty() {
            history.push(full.value());
            break;
        }
        // Line-rule the straddling cells at the last two levels.
        if depth + 1 >= opts.depth {
            let line: Vec<f64> = mixed
                .par_iter()
                .map(|(a, b)| mixed_leaf(&f, &inside, a, b, rule))
                .collect::<Result<_>>()?;
            evals += (mixed.len() * opts.order.pow(d as u32 - 1) * (opts.order + 20)) as u64;
            history.push(full.value() + compensated_sum(line));
        }
        if depth == opts.depth {
            break;
        }
        level = mixed.iter().flat_map(|(a, b)| split(a, b)).collect();
    }
    let estimate = *history.last().expect("at least one level");
    let previous = if history.len() > 1 { history[history.len() - 2] } else { estimate };
    let error = (estimate - previous).abs() + full_err.value();
    Ok(QuadResult {
        value: estimate,
        error,
        evals,
        converged: error <= opts.rel_tol * estimate.abs().max(f64::MIN_POSITIVE),
    })
}
