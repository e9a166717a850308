//! One-sided ℓp Lewis weights, Lewis-weight row sampling and the online
//! (arrival-order) variant.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{invalid, Result};
use crate::linalg::{inv_sqrt_sym, leverage_scores, quad_form, sym_inverse, weighted_gram};
use crate::matrix::DenseMatrix;
use crate::rng::SeededRng;

#[derive(Clone, Debug, Serialize)]
pub struct LewisWeights {
    pub w: Vec<f64>,
    pub p: f64,
    /// `min_i w_i / τ_i(W^{1/2−1/p}A)`, clamped to 1.
    pub alpha: f64,
    /// `R` with `W^{1/2−1/p}AR` orthonormal; `None` when `A` lacks full
    /// column rank.
    pub basis: Option<DenseMatrix>,
    pub converged: bool,
    pub iterations: usize,
}

impl LewisWeights {
    pub fn total(&self) -> f64 {
        self.w.iter().sum()
    }

    /// `‖w‖₁^{p/2−1} w_i`, the sensitivity bound for `p ≥ 2`.
    pub fn sensitivity_bound(&self, i: usize) -> f64 {
        self.total().powf(self.p / 2.0 - 1.0) * self.w[i]
    }
}

#[derive(Clone, Copy, Debug)]
pub struct LewisOptions {
    pub tol: f64,
    pub max_iters: usize,
}

impl Default for LewisOptions {
    fn default() -> Self {
        Self { tol: 1e-12, max_iters: 200 }
    }
}

fn gram_pow(a: &DenseMatrix, w: &[f64], p: f64) -> DMatrix<f64> {
    let e = 1.0 - 2.0 / p;
    let s: Vec<f64> = w.iter().map(|&v| if v > 0.0 { v.powf(e) } else { 0.0 }).collect();
    weighted_gram(a, &s)
}

fn quad_forms(a: &DenseMatrix, ginv: &DMatrix<f64>) -> Vec<f64> {
    a.row_iter().map(|r| quad_form(ginv, r).max(0.0)).collect()
}

/// `w_i = τ_i(W^{1/2−1/p}A)` by fixed-point iteration from leverage scores.
///
/// The update `w_i ← (a_iᵀ(AᵀW^{1−2/p}A)⁻¹a_i)^{p/2}` is damped
/// geometrically with `θ = min(1, 2/p)`; at `θ = 2/p` each step is exactly a
/// leverage-score computation, which keeps `Σw = rank` along the way.
pub fn compute_lewis(a: &DenseMatrix, p: f64, opts: LewisOptions) -> Result<LewisWeights> {
    if !(p >= 1.0) || !p.is_finite() {
        return invalid(format!("Lewis weights need finite p >= 1, got {p}"));
    }
    let mut w = leverage_scores(a);
    for v in &mut w {
        if *v < 1e-300 {
            *v = 0.0;
        }
    }
    let theta = (2.0 / p).min(1.0);
    let mut converged = false;
    let mut iterations = 0;
    while iterations < opts.max_iters {
        iterations += 1;
        let ginv = sym_inverse(&gram_pow(a, &w, p));
        let m = quad_forms(a, &ginv);
        let mut change: f64 = 0.0;
        for (wi, mi) in w.iter_mut().zip(&m) {
            if *wi == 0.0 {
                continue;
            }
            let upd = mi.powf(p / 2.0);
            let next = wi.powf(1.0 - theta) * upd.powf(theta);
            change = change.max((next - *wi).abs() / *wi);
            *wi = next;
        }
        if change <= opts.tol {
            converged = true;
            break;
        }
    }
    let g = gram_pow(a, &w, p);
    let m = quad_forms(a, &sym_inverse(&g));
    let alpha = w
        .iter()
        .zip(&m)
        .filter(|(wi, _)| **wi > 0.0)
        .map(|(wi, mi)| wi / (wi.powf(1.0 - 2.0 / p) * mi))
        .fold(f64::INFINITY, f64::min)
        .min(1.0);
    let basis = inv_sqrt_sym(&g).ok().map(|r| DenseMatrix::from_na(&r));
    Ok(LewisWeights { w, p, alpha: if alpha.is_finite() { alpha } else { 1.0 }, basis, converged, iterations })
}

/// A sampled, rescaled row subset `S`: row `j` of `SA` is
/// `scales[j] · a_{indices[j]}`.
#[derive(Clone, Debug, Serialize)]
pub struct SamplingMatrix {
    pub indices: Vec<usize>,
    pub probs: Vec<f64>,
    pub scales: Vec<f64>,
    pub n: usize,
}

impl SamplingMatrix {
    pub fn apply(&self, a: &DenseMatrix) -> DenseMatrix {
        a.select_rows(&self.indices).scale_rows(&self.scales)
    }

    pub fn apply_vec(&self, b: &[f64]) -> Vec<f64> {
        self.indices.iter().zip(&self.scales).map(|(&i, s)| b[i] * s).collect()
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }
}

/// Independent row sampling: keep `i` with probability `probs[i]`, rescale by
/// `probs[i]^{-1/p}` so `E‖SAx‖_p^p = ‖Ax‖_p^p`.
pub fn sample_rows(probs: &[f64], p: f64, rng: &mut SeededRng) -> SamplingMatrix {
    let mut s = SamplingMatrix { indices: Vec::new(), probs: Vec::new(), scales: Vec::new(), n: probs.len() };
    for (i, &pi) in probs.iter().enumerate() {
        let pi = pi.min(1.0);
        if pi > 0.0 && rng.bernoulli(pi) {
            s.indices.push(i);
            s.probs.push(pi);
            s.scales.push(pi.powf(-1.0 / p));
        }
    }
    s
}

#[derive(Clone, Copy, Debug)]
pub struct LewisSampleConfig {
    /// Oversampling constant.
    pub c: f64,
    /// Replace the computed oversampling factor outright.
    pub beta_override: Option<f64>,
}

impl Default for LewisSampleConfig {
    fn default() -> Self {
        Self { c: 10.0, beta_override: None }
    }
}

fn ln1(x: f64) -> f64 {
    x.ln().max(1.0)
}

/// Oversampling factor `β`; row `i` is kept with probability `min(1, β w_i)`.
pub fn lewis_beta(n: usize, d: usize, p: f64, eps: f64, delta: f64, cfg: LewisSampleConfig) -> f64 {
    if let Some(b) = cfg.beta_override {
        return b;
    }
    let (n, d) = (n as f64, d as f64);
    if p > 2.0 {
        cfg.c * d.powf(p / 2.0 - 1.0) / (eps * eps) * (ln1(d).powi(2) * ln1(n) + (1.0 / delta).ln())
    } else {
        cfg.c / (eps * eps) * ln1(d) * ln1(1.0 / delta)
    }
}

pub fn lewis_sample(
    lw: &LewisWeights,
    d: usize,
    eps: f64,
    delta: f64,
    rng: &mut SeededRng,
    cfg: LewisSampleConfig,
) -> Result<SamplingMatrix> {
    if !(eps > 0.0 && eps < 1.0) || !(delta > 0.0 && delta < 1.0) {
        return invalid("eps and delta must lie in (0, 1)");
    }
    let beta = lewis_beta(lw.w.len(), d, lw.p, eps, delta, cfg);
    let probs: Vec<f64> = lw.w.iter().map(|w| (beta * w).min(1.0)).collect();
    Ok(sample_rows(&probs, lw.p, rng))
}

/// Diagonal of `W^{1/q−1/p}`; zero-weight rows map to zero.
pub fn reweight_p_to_q(lw: &LewisWeights, q: f64) -> Vec<f64> {
    let e = 1.0 / q - 1.0 / lw.p;
    lw.w.iter().map(|&w| if w > 0.0 { w.powf(e) } else { 0.0 }).collect()
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct OnlineDecision {
    pub weight: f64,
    pub prob: f64,
    pub kept: bool,
    /// `prob^{-1/p}` when kept.
    pub scale: f64,
}

/// Online Lewis weights: each row's weight is fixed on arrival from the
/// rows seen so far (itself included) and never revised.
#[derive(Clone, Debug)]
pub struct OnlineLewis {
    p: f64,
    m: DMatrix<f64>,
    /// Multiplier on the weight before the `min(1, ·)` cap.
    pub c: f64,
    /// Keep probability is `min(1, beta · w_i)`.
    pub beta: f64,
    pub ridge_rel: f64,
    seen: usize,
    total: f64,
}

/// Root of `w^{2/p} + m w = m` on `(0, 1)`: the self-consistent weight of a
/// row whose quadratic form against the earlier rows is `m`.
fn self_consistent_weight(m: f64, p: f64) -> f64 {
    if !m.is_finite() {
        return 1.0;
    }
    if m <= 0.0 {
        return 0.0;
    }
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid.powf(2.0 / p) + m * mid - m > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

impl OnlineLewis {
    pub fn new(d: usize, p: f64, beta: f64) -> Result<Self> {
        if !(p >= 1.0) || !p.is_finite() {
            return invalid(format!("online Lewis needs finite p >= 1, got {p}"));
        }
        Ok(Self { p, m: DMatrix::zeros(d, d), c: 1.0, beta, ridge_rel: 1e-12, seen: 0, total: 0.0 })
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn seen(&self) -> usize {
        self.seen
    }

    /// Sum of the weights handed out so far.
    pub fn total_weight(&self) -> f64 {
        self.total
    }

    /// Weight of `row` given the history, without recording it.
    pub fn peek(&self, row: &[f64]) -> f64 {
        let d = self.dim();
        assert_eq!(row.len(), d);
        if row.iter().all(|v| *v == 0.0) {
            return 0.0;
        }
        let tr = self.m.trace();
        let m = if tr <= 0.0 {
            f64::INFINITY
        } else {
            let lam = self.ridge_rel * tr;
            let mut reg = self.m.clone();
            for i in 0..d {
                reg[(i, i)] += lam;
            }
            quad_form(&sym_inverse(&reg), row)
        };
        (self.c * self_consistent_weight(m, self.p)).min(1.0)
    }

    pub fn push(&mut self, row: &[f64], rng: &mut SeededRng) -> OnlineDecision {
        let w = self.peek(row);
        self.record(row, w);
        let prob = (self.beta * w).min(1.0);
        let kept = prob > 0.0 && rng.bernoulli(prob);
        OnlineDecision { weight: w, prob, kept, scale: if kept { prob.powf(-1.0 / self.p) } else { 0.0 } }
    }

    /// Weight only, no sampling decision.
    pub fn push_weight(&mut self, row: &[f64]) -> f64 {
        let w = self.peek(row);
        self.record(row, w);
        w
    }

    fn record(&mut self, row: &[f64], w: f64) {
        self.seen += 1;
        self.total += w;
        if w <= 0.0 {
            return;
        }
        let s = w.powf(1.0 - 2.0 / self.p);
        let d = self.dim();
        for i in 0..d {
            for j in 0..d {
                self.m[(i, j)] += s * row[i] * row[j];
            }
        }
    }
}

/// Online Lewis weights of every row of `a`, in row order.
pub fn online_lewis_weights(a: &DenseMatrix, p: f64) -> Result<Vec<f64>> {
    let mut ol = OnlineLewis::new(a.cols(), p, 0.0)?;
    Ok(a.row_iter().map(|r| ol.push_weight(r)).collect())
}
