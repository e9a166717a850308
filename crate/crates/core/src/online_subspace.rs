//! Online strong coresets for `(k, p)` subspace approximation and a weak
//! online coreset for entrywise ℓp low-rank approximation.
//!
//! Each row's sensitivity is estimated once, on arrival, from
//!
//! ```text
//! σ̃_i = c₀ · [ ‖a_i(I − P_F)‖₂^p / v  +  (c·t·ln(nΔ))^{max(0, p/2−1)} · w̃_i ]
//! ```
//!
//! where `F` is the current approximate subspace, `v` the residual mass since
//! `F` last changed and `w̃_i` an online Lewis weight of the row projected on
//! `F`. While the rows span fewer than `2t` dimensions `F` is their exact
//! row span. Estimates from `R` independent copies are summed and rows are
//! kept with probability `min(1, β σ̃_i)`.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::coreset::StrongCoreset;
use crate::error::{invalid, Result};
use crate::lewis::OnlineLewis;
use crate::linalg::{best_rank_k, row_space_basis};
use crate::matrix::{dot, lp_norm, norm2, DenseMatrix};
use crate::regression::{lp_regression, pq2_regression, IrlsOptions};
use crate::rng::SeededRng;
use crate::sketch::{PStableSketch, Sketch, SrhtSketch};

#[derive(Clone, Debug, Serialize)]
pub struct Rounded {
    pub a: DenseMatrix,
    pub granularity: f64,
    /// `‖A‖_∞ / granularity`.
    pub delta: f64,
}

/// Rounds every entry to the grid `ε·n^{−1/p}·d^{−1/2}·λ^{1/p}`, so that
/// `‖A − A'‖_{p,2}^p ≤ ε^p λ` for any `λ ≤ OPT`.
pub fn integer_round(a: &DenseMatrix, eps: f64, lambda_lower: f64, p: f64) -> Result<Rounded> {
    if !(lambda_lower > 0.0) {
        return invalid("lambda_lower must be positive");
    }
    if !(eps > 0.0) || !(p >= 1.0) {
        return invalid("need eps > 0 and p >= 1");
    }
    let (n, d) = a.shape();
    let g = eps * (n as f64).powf(-1.0 / p) * (d as f64).powf(-0.5) * lambda_lower.powf(1.0 / p);
    let r = DenseMatrix::from_fn(n, d, |i, j| (a.get(i, j) / g).round() * g);
    Ok(Rounded { delta: a.max_abs() / g, a: r, granularity: g })
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct OnlineSubspaceConfig {
    /// Outer prefactor `c₀`.
    pub c0: f64,
    /// Prefactor inside `(c·t·ln(nΔ))`.
    pub c_mult: f64,
    /// `t = ⌈c_t·(k ln k + ln² n)⌉`.
    pub c_t: f64,
    /// Keep-rate multiplier for the online Lewis sample that drives refits.
    pub c_lewis: f64,
    /// Multiplier on the final oversampling factor `β`.
    pub c_beta: f64,
    /// Aspect-ratio bound `Δ` used inside logarithms.
    pub delta_range: f64,
    /// Number of summed copies; `⌈8 ln(n/δ)⌉` when unset.
    pub copies: Option<usize>,
}

impl Default for OnlineSubspaceConfig {
    fn default() -> Self {
        Self { c0: 4.0, c_mult: 4.0, c_t: 1.0, c_lewis: 4.0, c_beta: 1.0, delta_range: 1e6, copies: None }
    }
}

impl OnlineSubspaceConfig {
    pub fn sketch_dim(&self, k: usize, n: usize) -> usize {
        let kf = k as f64;
        let ln = (n.max(2) as f64).ln();
        (self.c_t * (kf * kf.ln().max(0.0) + ln * ln)).ceil().max(1.0) as usize
    }

    pub fn copies_for(&self, n: usize, delta: f64) -> usize {
        self.copies.unwrap_or_else(|| (8.0 * (n as f64 / delta).ln()).ceil().max(1.0) as usize)
    }
}

/// One copy of the arrival-time sensitivity estimator.
pub struct OnlineSensitivity {
    p: f64,
    d: usize,
    t: usize,
    mult: f64,
    c0: f64,
    sketch: Option<SrhtSketch>,
    /// online Lewis sample of the sketched rows; its kept rows refit `Ỹ`
    lewis_fit: OnlineLewis,
    kept: Vec<(Vec<f64>, Vec<f64>, f64)>,
    gram_sketched: DMatrix<f64>,
    /// orthonormal basis (d×r) of `F`
    basis: DenseMatrix,
    span: Vec<Vec<f64>>,
    v: f64,
    lewis_seg: OnlineLewis,
    rng: SeededRng,
    segments: usize,
}

fn project_out(basis: &DenseMatrix, a: &[f64]) -> Vec<f64> {
    let mut r = a.to_vec();
    for j in 0..basis.cols() {
        let q = basis.col(j);
        let c = dot(&q, a);
        for (x, y) in r.iter_mut().zip(&q) {
            *x -= c * y;
        }
    }
    r
}

fn coords(basis: &DenseMatrix, a: &[f64]) -> Vec<f64> {
    basis.tmatvec(a)
}

impl OnlineSensitivity {
    pub fn new(d: usize, k: usize, p: f64, n_hint: usize, cfg: &OnlineSubspaceConfig, rng: SeededRng) -> Result<Self> {
        if !(p >= 1.0) {
            return invalid("p must be >= 1");
        }
        if k == 0 || k > d {
            return invalid(format!("k={k} outside 1..={d}"));
        }
        let t = cfg.sketch_dim(k, n_hint);
        let log_range = ((n_hint.max(2) as f64) * cfg.delta_range).ln();
        let mult = (cfg.c_mult * t as f64 * log_range).powf((p / 2.0 - 1.0).max(0.0));
        let padded = d.next_power_of_two();
        // a sketch is only useful when the rows can outgrow the direct regime
        let sketch = if 2 * t <= d && t <= padded { Some(SrhtSketch::new(d, t, &mut rng.child(0))?) } else { None };
        let sd = sketch.as_ref().map_or(d, |s| s.rows());
        let beta_fit = cfg.c_lewis * (sd as f64).powf((p / 2.0).max(1.0)) * log_range;
        Ok(Self {
            p,
            d,
            t,
            mult,
            c0: cfg.c0,
            lewis_fit: OnlineLewis::new(sd, p, beta_fit)?,
            kept: Vec::new(),
            gram_sketched: DMatrix::zeros(sd, sd),
            basis: DenseMatrix::zeros(d, 0),
            span: Vec::new(),
            v: 0.0,
            lewis_seg: OnlineLewis::new(1, p, 0.0)?,
            sketch,
            rng: rng.child(1),
            segments: 0,
        })
    }

    pub fn sketch_dim(&self) -> usize {
        self.t
    }

    /// Refits of `F` in the sketched regime.
    pub fn segments(&self) -> usize {
        self.segments
    }

    /// Rows kept by the online Lewis sampler that drives the refits.
    pub fn lewis_keeps(&self) -> usize {
        self.kept.len()
    }

    /// Orthonormal basis of the current `F`, `d×r`.
    pub fn basis(&self) -> &DenseMatrix {
        &self.basis
    }

    fn reset_segment(&mut self, basis: DenseMatrix) {
        let r = basis.cols().max(1);
        self.basis = basis;
        self.lewis_seg = OnlineLewis::new(r, self.p, 0.0).expect("p validated");
    }

    /// Updates the exact span basis; returns true when the rank grew.
    fn grow_span(&mut self, a: &[f64]) -> bool {
        let r = project_out(&self.basis, a);
        let scale = norm2(a).max(1e-300);
        if norm2(&r) <= 1e-10 * scale {
            return false;
        }
        self.span.push(a.to_vec());
        let m = DenseMatrix::from_rows(&self.span).expect("rows share d");
        self.reset_segment(row_space_basis(&m));
        true
    }

    fn refit(&mut self) -> Result<DenseMatrix> {
        let x = DenseMatrix::from_rows(
            &self.kept.iter().map(|(g, _, s)| g.iter().map(|v| v * s).collect()).collect::<Vec<_>>(),
        )?;
        let b = DenseMatrix::from_rows(
            &self.kept.iter().map(|(_, a, s)| a.iter().map(|v| v * s).collect()).collect::<Vec<_>>(),
        )?;
        let fit = pq2_regression(&x, &b, self.p, IrlsOptions { max_iters: 50, tol: 1e-8 })?;
        let top = fit.y.max_abs().max(1e-300);
        let grid = 1e-9 * top;
        let y = DenseMatrix::from_fn(fit.y.rows(), fit.y.cols(), |i, j| (fit.y.get(i, j) / grid).round() * grid);
        // rowspan(A_i Gᵀ Ỹ) = rowspan(K^{1/2} Ỹ) with K the sketched Gram
        let eig = self.gram_sketched.clone().symmetric_eigen();
        let half = &eig.eigenvectors
            * DMatrix::from_diagonal(&eig.eigenvalues.map(|l| l.max(0.0).sqrt()))
            * eig.eigenvectors.transpose();
        let ky = DenseMatrix::from_na(&half).matmul(&y)?;
        Ok(row_space_basis(&ky))
    }

    /// Arrival-time estimate for `a` (before the `min(1, ·)` cap).
    pub fn push(&mut self, a: &[f64]) -> Result<f64> {
        assert_eq!(a.len(), self.d);
        let direct = self.sketch.is_none() || self.span.len() < 2 * self.t;
        let ga = self.sketch.as_ref().map_or_else(|| a.to_vec(), |s| s.apply_vec(a));
        for i in 0..ga.len() {
            for j in 0..ga.len() {
                self.gram_sketched[(i, j)] += ga[i] * ga[j];
            }
        }
        let dec = self.lewis_fit.push(&ga, &mut self.rng);
        if dec.kept {
            self.kept.push((ga.clone(), a.to_vec(), dec.scale));
        }
        let (res_p, reset) = if direct {
            self.grow_span(a);
            (0.0, false)
        } else if dec.kept {
            let b = self.refit()?;
            self.reset_segment(b);
            self.segments += 1;
            (norm2(&project_out(&self.basis, a)).powf(self.p), true)
        } else {
            (norm2(&project_out(&self.basis, a)).powf(self.p), false)
        };
        let first = if reset {
            self.v = res_p;
            if res_p > 0.0 {
                1.0
            } else {
                0.0
            }
        } else {
            self.v += res_p;
            if res_p > 0.0 {
                res_p / self.v
            } else {
                0.0
            }
        };
        let w = self.lewis_seg.push_weight(&coords(&self.basis, a));
        Ok(self.c0 * (first + self.mult * w))
    }
}

/// `(c·t²·ln²(nΔ))^{max(1,p/2)}·ln²t·ln n` per copy, times the copy count.
pub fn sensitivity_budget(t: usize, n: usize, p: f64, cfg: &OnlineSubspaceConfig, copies: usize) -> f64 {
    let tf = t as f64;
    let l = ((n.max(2) as f64) * cfg.delta_range).ln();
    let base = (cfg.c_mult * tf * tf * l * l).powf((p / 2.0).max(1.0));
    copies as f64 * base * tf.ln().max(1.0).powi(2) * (n.max(2) as f64).ln()
}

pub fn online_subspace_coreset(
    stream: &DenseMatrix,
    k: usize,
    p: f64,
    eps: f64,
    delta: f64,
    rng: &mut SeededRng,
    cfg: OnlineSubspaceConfig,
) -> Result<StrongCoreset> {
    if !(eps > 0.0 && eps < 1.0) || !(delta > 0.0 && delta < 1.0) {
        return invalid("eps and delta must lie in (0, 1)");
    }
    let (n, d) = stream.shape();
    let copies = cfg.copies_for(n, delta);
    let mut est: Vec<OnlineSensitivity> =
        (0..copies).map(|c| OnlineSensitivity::new(d, k, p, n, &cfg, rng.child(c as u64))).collect::<Result<_>>()?;
    let t = est[0].sketch_dim();
    let budget = sensitivity_budget(t, n, p, &cfg, copies);
    let kf = k as f64;
    let eps_p = eps.powf((p + 3.0) * (2.0 / p).max(1.0));
    let dim = kf * (kf * kf * kf.ln().max(1.0)).min(kf.powf((p / 2.0).max(1.0)));
    let beta = cfg.c_beta * (dim * budget.ln().max(1.0) + (1.0 / delta).ln() / (eps_p * eps_p));
    let mut coin = rng.child(u64::MAX);
    let mut out = StrongCoreset {
        indices: Vec::new(),
        weights: Vec::new(),
        probs: Vec::new(),
        center_ids: None,
        sigma: Vec::with_capacity(n),
        sigma_budget: budget,
        copies,
    };
    for (i, row) in stream.row_iter().enumerate() {
        let mut s = 0.0;
        for e in est.iter_mut() {
            s += e.push(row)?;
        }
        let s = s.min(1.0);
        out.sigma.push(s);
        let prob = (beta * s).min(1.0);
        if prob > 0.0 && coin.bernoulli(prob) {
            out.indices.push(i);
            out.weights.push(1.0 / prob);
            out.probs.push(prob);
        }
    }
    Ok(out)
}

/// `Σ_i w_i ‖a_i(I − P_F)‖₂^p` for `F` spanned by the orthonormal columns of
/// `basis` (d×k); unit weights when `weights` is `None`.
pub fn subspace_cost(a: &DenseMatrix, rows: Option<(&[usize], &[f64])>, basis: &DenseMatrix, p: f64) -> f64 {
    match rows {
        None => a.row_iter().map(|r| norm2(&project_out(basis, r)).powf(p)).sum(),
        Some((idx, w)) => idx.iter().zip(w).map(|(&i, wi)| wi * norm2(&project_out(basis, a.row(i))).powf(p)).sum(),
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct EntrywiseFit {
    pub coreset: StrongCoreset,
    pub sketch_cols: usize,
    /// `k×d`, orthonormal rows spanning the fitted row space.
    pub factor: DenseMatrix,
    /// `‖VSA − A‖_{p,p}`.
    pub residual: f64,
    /// `t^{1/2}·ln²n`.
    pub distortion_budget: f64,
}

/// Row-wise ℓp fit of `a` onto the row space spanned by `factor` (k×d);
/// returns `‖·‖_{p,p}` of the residual.
pub fn entrywise_residual(a: &DenseMatrix, factor: &DenseMatrix, p: f64) -> Result<f64> {
    let basis = factor.transpose();
    let mut tot = 0.0;
    for r in a.row_iter() {
        let f = lp_regression(&basis, r, p, IrlsOptions { max_iters: 60, tol: 1e-9 })?;
        tot += f.cost.powf(p);
    }
    Ok(tot.powf(1.0 / p))
}

/// Weak online coreset: rows are sketched by a `t`-column p-stable matrix,
/// the online subspace coreset runs on the sketched rows, and a rank-`k`
/// factor is fitted inside the row span of the kept rows.
pub fn entrywise_online_coreset(
    stream: &DenseMatrix,
    k: usize,
    p: f64,
    eps: f64,
    delta: f64,
    rng: &mut SeededRng,
    cfg: OnlineSubspaceConfig,
) -> Result<EntrywiseFit> {
    if !(1.0..2.0).contains(&p) {
        return invalid(format!("entrywise online coreset needs 1 <= p < 2, got {p}"));
    }
    let (n, d) = stream.shape();
    let t = ((k as f64) * (n.max(2) as f64).ln()).ceil() as usize;
    let g = PStableSketch::new(t.max(k), d, p, 1.0, &mut rng.child(0))?;
    let sketched = DenseMatrix::from_rows(&stream.row_iter().map(|r| g.apply_vec(r)).collect::<Vec<_>>())?;
    let cs = online_subspace_coreset(&sketched, k.min(sketched.cols()), p, eps, delta, &mut rng.child(1), cfg)?;
    let sa =
        stream.select_rows(&cs.indices).scale_rows(&cs.weights.iter().map(|w| w.powf(1.0 / p)).collect::<Vec<_>>());
    let span = row_space_basis(&sa); // d×r
    let kk = k.min(sa.rows()).min(d);
    // SVD start plus starts from kept rows; the SVD alone is pulled around
    // by sparse outliers
    let mut starts = vec![best_rank_k(&sa, kk)?.v.transpose()]; // k×d
    let mut pick = rng.child(2);
    for _ in 0..16.min(cs.indices.len()) {
        let rows: Vec<usize> = pick.subset(cs.indices.len(), kk).into_iter().map(|j| cs.indices[j]).collect();
        let f = orthonormal_rows(&stream.select_rows(&rows))?;
        if f.rows() == kk {
            starts.push(f);
        }
    }
    let mut scored = Vec::with_capacity(starts.len());
    for f in starts {
        scored.push((entrywise_residual(stream, &f, p)?, f));
    }
    scored.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut factor = None;
    let mut best = f64::INFINITY;
    for (_, init) in scored.into_iter().take(2) {
        let f = refine_factor(stream, &span, init, p, 4)?;
        let r = entrywise_residual(stream, &f, p)?;
        if r < best {
            best = r;
            factor = Some(f);
        }
    }
    let factor = factor.expect("at least the SVD start");
    let residual = best;
    let ln = (n.max(2) as f64).ln();
    Ok(EntrywiseFit {
        coreset: cs,
        sketch_cols: g.rows(),
        factor,
        residual,
        distortion_budget: (g.rows() as f64).sqrt() * ln * ln,
    })
}

/// Alternating ℓp refinement of a `k×d` factor constrained to `span` (d×r).
fn refine_factor(a: &DenseMatrix, span: &DenseMatrix, init: DenseMatrix, p: f64, rounds: usize) -> Result<DenseMatrix> {
    let opts = IrlsOptions { max_iters: 60, tol: 1e-9 };
    let k = init.rows();
    let r = span.cols();
    // factor = C · spanᵀ with C k×r
    let mut c = init.matmul(span)?;
    let mut best = (orthonormal_rows(&c.matmul(&span.transpose())?)?, f64::INFINITY);
    for _ in 0..rounds {
        let factor = c.matmul(&span.transpose())?;
        let ft = factor.transpose();
        let mut u = DenseMatrix::zeros(a.rows(), k);
        let mut cost = 0.0;
        for (i, row) in a.row_iter().enumerate() {
            let f = lp_regression(&ft, row, p, opts)?;
            cost += f.cost.powf(p);
            for j in 0..k {
                u.set(i, j, f.x[j]);
            }
        }
        if cost < best.1 {
            best = (orthonormal_rows(&factor)?, cost);
        }
        // vec(U C spanᵀ) is linear in C: one ℓp regression over all entries
        let mut design = DenseMatrix::zeros(a.rows() * a.cols(), k * r);
        let mut target = Vec::with_capacity(a.rows() * a.cols());
        for i in 0..a.rows() {
            for j in 0..a.cols() {
                let row = i * a.cols() + j;
                for l in 0..k {
                    for m in 0..r {
                        design.set(row, l * r + m, u.get(i, l) * span.get(j, m));
                    }
                }
                target.push(a.get(i, j));
            }
        }
        let f = lp_regression(&design, &target, p, opts)?;
        c = DenseMatrix::new(k, r, f.x)?;
    }
    Ok(best.0)
}

fn orthonormal_rows(f: &DenseMatrix) -> Result<DenseMatrix> {
    Ok(row_space_basis(f).transpose())
}

/// `|⟨u, v⟩| / (‖u‖‖v‖)`.
pub fn abs_cosine(u: &[f64], v: &[f64]) -> f64 {
    dot(u, v).abs() / (norm2(u) * norm2(v)).max(1e-300)
}

pub fn lp_entry_norm(a: &DenseMatrix, p: f64) -> f64 {
    lp_norm(a.data(), p)
}
