//! Online Euclidean `(k, p)`-clustering, online clustering sensitivities and
//! an independent-sampling strong coreset built on top of them.

use rayon::prelude::*;
use serde::Serialize;

use crate::coreset::StrongCoreset;
use crate::error::{invalid, Result};
use crate::matrix::DenseMatrix;
use crate::rng::SeededRng;

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// Distance to the nearest row of `centers` and its index; `+∞` when empty.
pub fn nearest(x: &[f64], centers: &[Vec<f64>]) -> (f64, Option<usize>) {
    let mut best = (f64::INFINITY, None);
    for (j, c) in centers.iter().enumerate() {
        let d = dist(x, c);
        if d < best.0 {
            best = (d, Some(j));
        }
    }
    best
}

/// `Σ_i w_i min_c ‖x_i − c‖^p`; unit weights when `rows` is `None`.
pub fn clustering_cost(points: &DenseMatrix, rows: Option<(&[usize], &[f64])>, centers: &[Vec<f64>], p: f64) -> f64 {
    match rows {
        None => points.row_iter().map(|x| nearest(x, centers).0.powf(p)).sum(),
        Some((idx, w)) => idx.iter().zip(w).map(|(&i, wi)| wi * nearest(points.row(i), centers).0.powf(p)).sum(),
    }
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct RoundEvent {
    /// Arrival index that closed the round.
    pub at: usize,
    pub round: usize,
    pub threshold: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct OnlineClusterState {
    pub k: usize,
    pub p: f64,
    pub n_hint: usize,
    pub w_star: f64,
    /// Stream indices of the opened centers.
    pub center_rows: Vec<usize>,
    pub centers: Vec<Vec<f64>>,
    pub round: usize,
    pub q: usize,
    pub threshold: f64,
    /// Center id assigned to each point on arrival.
    pub assignment: Vec<usize>,
    /// `d(a_i, C)^p` at arrival, after a possible opening.
    pub arrival_cost: Vec<f64>,
    pub rounds: Vec<RoundEvent>,
}

impl OnlineClusterState {
    pub fn new(k: usize, p: f64, n_hint: usize, w_star: f64) -> Result<Self> {
        if k == 0 {
            return invalid("k must be positive");
        }
        if !(w_star > 0.0) || !(p >= 1.0) {
            return invalid("need w_star > 0 and p >= 1");
        }
        let ln = (n_hint.max(2) as f64).ln();
        Ok(Self {
            k,
            p,
            n_hint,
            w_star,
            center_rows: Vec::new(),
            centers: Vec::new(),
            round: 1,
            q: 0,
            threshold: w_star / (k as f64 * ln),
            assignment: Vec::new(),
            arrival_cost: Vec::new(),
            rounds: Vec::new(),
        })
    }

    /// `3k(1 + log₂ n)`.
    pub fn round_cap(&self) -> usize {
        (3.0 * self.k as f64 * (1.0 + (self.n_hint.max(2) as f64).log2())).ceil() as usize
    }

    /// Processes one point; returns `(center id, opened)`.
    pub fn push(&mut self, x: &[f64], rng: &mut SeededRng) -> (usize, bool) {
        let i = self.assignment.len();
        let (d, j) = nearest(x, &self.centers);
        let prob = if j.is_none() { 1.0 } else { (d.powf(self.p) / self.threshold).min(1.0) };
        let open = prob >= 1.0 || (prob > 0.0 && rng.bernoulli(prob));
        let (id, cost) = if open {
            self.centers.push(x.to_vec());
            self.center_rows.push(i);
            self.q += 1;
            if self.q >= self.round_cap() {
                self.round += 1;
                self.q = 0;
                self.threshold *= 2.0;
                self.rounds.push(RoundEvent { at: i, round: self.round, threshold: self.threshold });
            }
            (self.centers.len() - 1, 0.0)
        } else {
            (j.expect("non-empty"), d.powf(self.p))
        };
        self.assignment.push(id);
        self.arrival_cost.push(cost);
        (id, open)
    }

    pub fn total_cost(&self) -> f64 {
        self.arrival_cost.iter().sum()
    }
}

/// `(w*, W)` defaults: `(min positive pairwise distance of the first 2k
/// points)^p` and `n·(max pairwise distance)^p`.
pub fn default_cost_hints(points: &DenseMatrix, k: usize, p: f64) -> (f64, f64) {
    let n = points.rows();
    let head = (2 * k).min(n);
    let mut lo = f64::INFINITY;
    for i in 0..head {
        for j in 0..i {
            let d = dist(points.row(i), points.row(j));
            if d > 0.0 {
                lo = lo.min(d);
            }
        }
    }
    let hi = (0..n)
        .into_par_iter()
        .map(|i| (0..i).map(|j| dist(points.row(i), points.row(j))).fold(0.0f64, f64::max))
        .reduce(|| 0.0, f64::max);
    let w_star = if lo.is_finite() { lo.powf(p) } else { 1.0 };
    (w_star, (n as f64 * hi.powf(p)).max(w_star))
}

pub fn online_cluster(
    points: &DenseMatrix,
    k: usize,
    p: f64,
    w_star: f64,
    rng: &mut SeededRng,
) -> Result<OnlineClusterState> {
    let mut st = OnlineClusterState::new(k, p, points.rows(), w_star)?;
    for x in points.row_iter() {
        st.push(x, rng);
    }
    Ok(st)
}

/// `16·k·ln n·ln(W/w*)`, floored at `16k`.
pub fn center_budget(k: usize, n: usize, w_star: f64, w_upper: f64) -> f64 {
    16.0 * k as f64 * (n.max(2) as f64).ln() * (w_upper / w_star).ln().max(1.0)
}

#[derive(Clone, Debug, Serialize)]
pub struct ClusterSensitivity {
    pub sigma: Vec<f64>,
    /// Assignment of the first copy.
    pub assignment: Vec<usize>,
    pub copies: usize,
    pub c0: f64,
}

/// One copy: `d(a_i,C)^p / v + 1/|S_i|` with `v` the running cost and `S_i`
/// the points assigned so far to `a_i`'s center.
fn sensitivity_copy(
    points: &DenseMatrix,
    k: usize,
    p: f64,
    w_star: f64,
    rng: &mut SeededRng,
) -> Result<(Vec<f64>, Vec<usize>)> {
    let mut st = OnlineClusterState::new(k, p, points.rows(), w_star)?;
    let mut sizes: Vec<usize> = Vec::new();
    let mut v = 0.0;
    let mut out = Vec::with_capacity(points.rows());
    for x in points.row_iter() {
        let (id, _) = st.push(x, rng);
        if id == sizes.len() {
            sizes.push(0);
        }
        sizes[id] += 1;
        let c = *st.arrival_cost.last().expect("pushed");
        v += c;
        let res = if c > 0.0 { c / v } else { 0.0 };
        out.push(res + 1.0 / sizes[id] as f64);
    }
    Ok((out, st.assignment))
}

/// `σ̃_i = c₀ Σ_copies (d(a_i,C)^p/v + 1/|S_i|)`, uncapped.
pub fn cluster_sensitivity(
    points: &DenseMatrix,
    k: usize,
    p: f64,
    w_star: f64,
    copies: usize,
    c0: f64,
    rng: &SeededRng,
) -> Result<ClusterSensitivity> {
    if copies == 0 {
        return invalid("need at least one copy");
    }
    let runs: Vec<(Vec<f64>, Vec<usize>)> = (0..copies)
        .into_par_iter()
        .map(|c| sensitivity_copy(points, k, p, w_star, &mut rng.child(c as u64)))
        .collect::<Result<_>>()?;
    let mut sigma = vec![0.0; points.rows()];
    for (s, _) in &runs {
        for (t, v) in sigma.iter_mut().zip(s) {
            *t += c0 * v;
        }
    }
    Ok(ClusterSensitivity { sigma, assignment: runs[0].1.clone(), copies, c0 })
}

/// `16·k·ln²n·ln(W/w)·R`.
pub fn sensitivity_sum_budget(k: usize, n: usize, w_lower: f64, w_upper: f64, copies: usize) -> f64 {
    let ln = (n.max(2) as f64).ln();
    16.0 * k as f64 * ln * ln * (w_upper / w_lower).ln().max(1.0) * copies as f64
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct ClusterCoresetConfig {
    /// Prefactor in `β₁` and `β₂`.
    pub c: f64,
    pub w_star: Option<f64>,
}

impl Default for ClusterCoresetConfig {
    fn default() -> Self {
        Self { c: 2.0, w_star: None }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ClusterCoreset {
    pub coreset: StrongCoreset,
    /// Bicriteria solution the probabilities were computed against.
    pub bicriteria: OnlineClusterState,
    pub beta1: f64,
    pub beta2: f64,
}

/// Keeps `a_i` with probability
/// `min{1, max{β₁ ε^{−(p+1)} ‖a_i − a_i'‖^p / v_i, β₂ ε^{−2} / |P_i|}}`
/// where `a_i'` is its online center and `v_i`, `|P_i|` are the running cost
/// and cluster size at arrival. Running values never exceed the final ones,
/// so these probabilities dominate the ones computed after the stream ends.
pub fn cluster_coreset(
    points: &DenseMatrix,
    k: usize,
    p: f64,
    eps: f64,
    delta: f64,
    rng: &mut SeededRng,
    cfg: ClusterCoresetConfig,
) -> Result<ClusterCoreset> {
    if !(eps > 0.0) || !(delta > 0.0 && delta < 1.0) {
        return invalid("need eps > 0 and delta in (0, 1)");
    }
    let (n, d) = points.shape();
    let w_star = cfg.w_star.unwrap_or_else(|| default_cost_hints(points, k, p).0);
    let ln_n = (n.max(2) as f64).ln();
    let ln_d = (1.0 / delta).ln();
    let beta1 = cfg.c * (d as f64 * k as f64 * ln_n + ln_d);
    let mut st = OnlineClusterState::new(k, p, n, w_star)?;
    let mut cluster_rng = rng.child(0);
    let mut coin = rng.child(1);
    let mut sizes: Vec<usize> = Vec::new();
    let mut v = 0.0;
    let mut out = StrongCoreset {
        indices: Vec::new(),
        weights: Vec::new(),
        probs: Vec::new(),
        center_ids: Some(Vec::new()),
        sigma: Vec::with_capacity(n),
        sigma_budget: 0.0,
        copies: 1,
    };
    let mut beta2 = 0.0;
    for (i, x) in points.row_iter().enumerate() {
        let (id, _) = st.push(x, &mut cluster_rng);
        if id == sizes.len() {
            sizes.push(0);
        }
        sizes[id] += 1;
        let c = *st.arrival_cost.last().expect("pushed");
        v += c;
        beta2 = cfg.c * ((st.centers.len().max(2) as f64).ln() + ln_d);
        let term1 = if c > 0.0 { beta1 * eps.powf(-(p + 1.0)) * c / v } else { 0.0 };
        let term2 = beta2 / (eps * eps * sizes[id] as f64);
        let prob = term1.max(term2).min(1.0);
        out.sigma.push(prob);
        if coin.bernoulli(prob) {
            out.indices.push(i);
            out.weights.push(1.0 / prob);
            out.probs.push(prob);
            out.center_ids.as_mut().expect("set").push(id);
        }
    }
    out.sigma_budget = out.sigma_total();
    Ok(ClusterCoreset { coreset: out, bicriteria: st, beta1, beta2 })
}

/// Per bicriteria cluster: `(true size, Σ kept weights)`.
pub fn cluster_size_check(cc: &ClusterCoreset) -> Vec<(usize, f64)> {
    let m = cc.bicriteria.centers.len();
    let mut out = vec![(0usize, 0.0f64); m];
    for &a in &cc.bicriteria.assignment {
        out[a].0 += 1;
    }
    let ids = cc.coreset.center_ids.as_ref().expect("clustering coreset");
    for (id, w) in ids.iter().zip(&cc.coreset.weights) {
        out[*id].1 += w;
    }
    out
}

/// k-means++ seeding followed by Lloyd steps (`p = 2`) or a Weiszfeld-style
/// reweighted update (`p ≠ 2`); best of `restarts`.
pub fn kmeans_pp(
    points: &DenseMatrix,
    k: usize,
    p: f64,
    restarts: usize,
    rng: &mut SeededRng,
) -> Result<(Vec<Vec<f64>>, f64)> {
    let n = points.rows();
    if k == 0 || n == 0 {
        return invalid("kmeans++ needs k >= 1 and points");
    }
    let mut best: Option<(Vec<Vec<f64>>, f64)> = None;
    for r in 0..restarts.max(1) {
        let mut g = rng.child(r as u64);
        let mut centers = vec![points.row(g.below(n)).to_vec()];
        while centers.len() < k.min(n) {
            let w: Vec<f64> = points.row_iter().map(|x| nearest(x, &centers).0.powf(p)).collect();
            let tot: f64 = w.iter().sum();
            if tot <= 0.0 {
                break;
            }
            let mut u = g.uniform() * tot;
            let mut pick = n - 1;
            for (i, wi) in w.iter().enumerate() {
                if u < *wi {
                    pick = i;
                    break;
                }
                u -= wi;
            }
            centers.push(points.row(pick).to_vec());
        }
        for _ in 0..100 {
            let d = points.cols();
            let mut sum = vec![vec![0.0; d]; centers.len()];
            let mut mass = vec![0.0; centers.len()];
            for x in points.row_iter() {
                let (dx, j) = nearest(x, &centers);
                let j = j.expect("non-empty");
                let w = if p == 2.0 { 1.0 } else { dx.max(1e-12).powf(p - 2.0) };
                for (s, v) in sum[j].iter_mut().zip(x) {
                    *s += w * v;
                }
                mass[j] += w;
            }
            let mut moved = 0.0f64;
            for (j, c) in centers.iter_mut().enumerate() {
                if mass[j] > 0.0 {
                    let nc: Vec<f64> = sum[j].iter().map(|s| s / mass[j]).collect();
                    moved = moved.max(dist(&nc, c));
                    *c = nc;
                }
            }
            if moved < 1e-12 {
                break;
            }
        }
        let cost = clustering_cost(points, None, &centers, p);
        if best.as_ref().is_none_or(|b| cost < b.1) {
            best = Some((centers, cost));
        }
    }
    Ok(best.expect("at least one restart"))
}
