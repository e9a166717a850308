//! John-ellipsoid coresets and the ℓ2 spanning sets, ℓ∞ / average-top-k
//! embeddings and well-conditioned decompositions built on them.
//!
//! Points are the rows `a_i`, symmetrised to `±a_i`, so the ellipsoid is
//! centred. Weights `u` satisfy `Σu = d`, `0 ≤ u ≤ 1`, and the witness of row
//! `i` is `a_iᵀ(AᵀUA)⁻¹a_i`.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::linalg::{col_space_basis, numerical_rank, pinv, quad_form, sym_inverse, weighted_gram};
use crate::matrix::{dot, lp_norm, norm2, DenseMatrix};
use crate::rng::SeededRng;

#[derive(Clone, Debug, Serialize)]
pub struct EllipsoidCoreset {
    pub method: String,
    /// Sorted row indices with positive weight.
    pub support: Vec<usize>,
    /// One weight per input row.
    pub weights: Vec<f64>,
    /// `AᵀUA`.
    pub shape: DenseMatrix,
    pub witnesses: Vec<f64>,
    pub iterations: usize,
    /// Allowed `|Σu − d|`: zero up to rounding for the exact method, `ε·d`
    /// for the sampled one whose weights are reweighted draws.
    pub mass_tol: f64,
}

impl EllipsoidCoreset {
    pub fn max_witness(&self) -> f64 {
        self.witnesses.iter().copied().fold(0.0, f64::max)
    }
}

/// Strategy computing an [`EllipsoidCoreset`].
pub trait MveeMethod: Send + Sync {
    fn name(&self) -> &'static str;
    fn run(&self, a: &DenseMatrix, eps: f64, rng: &mut SeededRng) -> Result<EllipsoidCoreset>;
}

fn check_input(a: &DenseMatrix, eps: f64) -> Result<()> {
    if !(eps > 0.0 && eps < 1.0) {
        return invalid(format!("eps={eps} outside (0, 1)"));
    }
    if a.rows() == 0 || a.cols() == 0 {
        return invalid("empty matrix");
    }
    let r = numerical_rank(a);
    if r < a.cols() {
        return Err(Error::RankDeficient(format!("rank {r} < d = {}", a.cols())));
    }
    Ok(())
}

fn witnesses_for(a: &DenseMatrix, u: &[f64]) -> (DMatrix<f64>, Vec<f64>) {
    let g = weighted_gram(a, u);
    let inv = sym_inverse(&g);
    let w = a.row_iter().map(|r| quad_form(&inv, r)).collect();
    (g, w)
}

/// Greedy pivoted rows: repeatedly the row with the largest component
/// orthogonal to the rows already picked.
fn pivot_rows(a: &DenseMatrix) -> Vec<usize> {
    let d = a.cols();
    let mut resid: Vec<Vec<f64>> = a.row_iter().map(|r| r.to_vec()).collect();
    let mut picked = Vec::with_capacity(d);
    for _ in 0..d {
        let (j, _) = resid
            .iter()
            .enumerate()
            .filter(|(i, _)| !picked.contains(i))
            .map(|(i, r)| (i, dot(r, r)))
            .fold((usize::MAX, -1.0), |b, c| if c.1 > b.1 { c } else { b });
        picked.push(j);
        let q: Vec<f64> = {
            let n = norm2(&resid[j]);
            resid[j].iter().map(|v| v / n).collect()
        };
        for r in resid.iter_mut() {
            let c = dot(r, &q);
            for (x, y) in r.iter_mut().zip(&q) {
                *x -= c * y;
            }
        }
    }
    picked
}

/// Wolfe–Atwood coordinate ascent with away steps on the D-optimal design
/// problem, started from `d` pivoted rows so every added point is charged to
/// a step.
#[derive(Clone, Copy, Debug)]
pub struct CoordinateAscent {
    /// Iteration cap per dimension.
    pub iters_per_dim: usize,
    /// Weights below this (in `u` units) are pruned at the end.
    pub prune: f64,
}

impl Default for CoordinateAscent {
    fn default() -> Self {
        Self { iters_per_dim: 10_000, prune: 1e-9 }
    }
}

struct DesignState {
    lambda: Vec<f64>,
    minv: DMatrix<f64>,
    omega: Vec<f64>,
}

impl DesignState {
    fn recompute(&mut self, a: &DenseMatrix) {
        let (g, _) = witnesses_for(a, &self.lambda);
        self.minv = sym_inverse(&g);
        self.omega = a.row_iter().map(|r| quad_form(&self.minv, r)).collect();
    }

    /// Move to `(1−τ)λ + τ e_j`, updating `M⁻¹` and `ω` in O(nd).
    fn step(&mut self, a: &DenseMatrix, j: usize, tau: f64) -> bool {
        let c = tau / (1.0 - tau);
        let aj = a.row(j);
        let denom = 1.0 + c * self.omega[j];
        if denom <= 1e-12 || !c.is_finite() {
            return false;
        }
        let d = aj.len();
        let mut z = vec![0.0; d];
        for i in 0..d {
            for k in 0..d {
                z[i] += self.minv[(i, k)] * aj[k];
            }
        }
        let scale = 1.0 / (1.0 - tau);
        for i in 0..d {
            for k in 0..d {
                self.minv[(i, k)] = scale * (self.minv[(i, k)] - c * z[i] * z[k] / denom);
            }
        }
        for (row, om) in a.row_iter().zip(self.omega.iter_mut()) {
            let g = dot(row, &z);
            *om = scale * (*om - c * g * g / denom);
        }
        for l in self.lambda.iter_mut() {
            *l *= 1.0 - tau;
        }
        self.lambda[j] += tau;
        if self.lambda[j] < 1e-300 {
            self.lambda[j] = 0.0;
        }
        true
    }
}

impl MveeMethod for CoordinateAscent {
    fn name(&self) -> &'static str {
        "coordinate_ascent"
    }

    fn run(&self, a: &DenseMatrix, eps: f64, _rng: &mut SeededRng) -> Result<EllipsoidCoreset> {
        check_input(a, eps)?;
        let (n, d) = a.shape();
        let df = d as f64;
        let mut st = DesignState { lambda: vec![0.0; n], minv: DMatrix::zeros(d, d), omega: vec![] };
        for j in pivot_rows(a) {
            st.lambda[j] = 1.0 / df;
        }
        st.recompute(a);
        let target = eps / 2.0;
        let max_iters = self.iters_per_dim * d;
        let mut it = 0;
        let mut done = false;
        while it < max_iters {
            it += 1;
            if it % 64 == 0 {
                st.recompute(a);
            }
            let (jp, wp) =
                st.omega.iter().enumerate().fold((0, f64::MIN), |b, (i, &w)| if w > b.1 { (i, w) } else { b });
            let (jm, wm) = st
                .omega
                .iter()
                .enumerate()
                .filter(|(i, _)| st.lambda[*i] > 0.0)
                .fold((0, f64::MAX), |b, (i, &w)| if w < b.1 { (i, w) } else { b });
            let eplus = wp / df - 1.0;
            let eminus = 1.0 - wm / df;
            let (jh, lh) = st.lambda.iter().enumerate().fold((0, 0.0), |b, (i, &l)| if l > b.1 { (i, l) } else { b });
            let heavy = lh * df > 1.0 + 1e-10;
            if eplus <= target && !heavy {
                done = true;
                break;
            }
            let (j, w) = if eplus > target && eplus >= eminus {
                (jp, wp)
            } else if heavy && eplus <= target {
                (jh, st.omega[jh])
            } else {
                (jm, wm)
            };
            let lj = st.lambda[j];
            let floor = -lj / (1.0 - lj);
            let tau = if (w - 1.0).abs() < 1e-15 || (w < 1.0 && w < df) {
                floor
            } else {
                ((w - df) / (df * (w - 1.0))).max(floor)
            };
            if tau == 0.0 || !st.step(a, j, tau) {
                st.recompute(a);
            }
        }
        st.recompute(a);
        let mut u: Vec<f64> = st.lambda.iter().map(|l| l * df).collect();
        let pruned: Vec<f64> = {
            let mut v: Vec<f64> = u.iter().map(|&x| if x < self.prune { 0.0 } else { x }).collect();
            let s: f64 = v.iter().sum();
            v.iter_mut().for_each(|x| *x *= df / s);
            v
        };
        let (_, wpr) = witnesses_for(a, &pruned);
        if wpr.iter().all(|&w| w <= 1.0 + eps) {
            u = pruned;
        }
        if !done && st.omega.iter().any(|&w| w / df > 1.0 + eps) {
            return Err(Error::NonConvergence(format!("coordinate ascent hit {max_iters} iterations")));
        }
        let (g, witnesses) = witnesses_for(a, &u);
        let support: Vec<usize> = (0..n).filter(|&i| u[i] > 0.0).collect();
        Ok(EllipsoidCoreset {
            method: self.name().into(),
            support,
            weights: u,
            shape: DenseMatrix::from_na(&g),
            witnesses,
            iterations: it,
            mass_tol: 1e-9 * df,
        })
    }
}

/// Multiplicative fixed-point refinement of the weights, then independent
/// sampling proportional to them.
#[derive(Clone, Copy, Debug)]
pub struct LeverageSampled {
    pub c: f64,
    pub delta: f64,
    pub max_fixed_point: usize,
    pub retries: usize,
}

impl Default for LeverageSampled {
    fn default() -> Self {
        Self { c: 1.0, delta: 0.1, max_fixed_point: 10_000, retries: 20 }
    }
}

/// Averaged iterates of `u_i ← u_i · a_iᵀ(AᵀUA)⁻¹a_i` from `u = d/n`, until the
/// average has all witnesses `≤ 1 + eps`.
pub fn fixed_point_weights(a: &DenseMatrix, eps: f64, max_iters: usize) -> Result<(Vec<f64>, usize)> {
    let (n, d) = a.shape();
    let mut u = vec![d as f64 / n as f64; n];
    let mut sum = vec![0.0; n];
    for t in 1..=max_iters {
        let (_, w) = witnesses_for(a, &u);
        for i in 0..n {
            u[i] *= w[i];
            sum[i] += u[i];
        }
        if t % 4 == 0 || t == max_iters {
            let avg: Vec<f64> = sum.iter().map(|s| s / t as f64).collect();
            let (_, wa) = witnesses_for(a, &avg);
            if wa.iter().all(|&x| x <= 1.0 + eps) {
                return Ok((avg, t));
            }
        }
    }
    Err(Error::NonConvergence(format!("fixed point did not reach 1+{eps} in {max_iters} rounds")))
}

impl MveeMethod for LeverageSampled {
    fn name(&self) -> &'static str {
        "leverage_sampled"
    }

    fn run(&self, a: &DenseMatrix, eps: f64, rng: &mut SeededRng) -> Result<EllipsoidCoreset> {
        check_input(a, eps)?;
        let (n, d) = a.shape();
        // (1 + eps/4)^2 stays below 1 + eps, leaving room for the sampling error
        let e = eps / 4.0;
        let (u, iters) = fixed_point_weights(a, e, self.max_fixed_point)?;
        let beta = self.c / (e * e) * (d as f64).ln().max(1.0) * (1.0 / self.delta).ln().max(1.0);
        for attempt in 0..self.retries {
            let mut r = rng.child(attempt as u64);
            let mut weights = vec![0.0; n];
            let mut support = Vec::new();
            for i in 0..n {
                let p = ((1.0 + e) * beta * u[i]).min(1.0);
                if u[i] > 0.0 && r.bernoulli(p) {
                    weights[i] = u[i] / p;
                    support.push(i);
                }
            }
            if support.len() < d || numerical_rank(&a.select_rows(&support)) < d {
                continue;
            }
            if spanning_coefficients(a, &support).iter().any(|&c| c > 1.0 + eps) {
                continue;
            }
            let (g, witnesses) = witnesses_for(a, &weights);
            if witnesses.iter().any(|&w| w > 1.0 + eps) || weights.iter().any(|&w| w > 1.0 + 1e-12) {
                continue;
            }
            return Ok(EllipsoidCoreset {
                method: self.name().into(),
                support,
                weights,
                shape: DenseMatrix::from_na(&g),
                witnesses,
                iterations: iters,
                mass_tol: eps * d as f64,
            });
        }
        Err(Error::NonConvergence(format!("no certified sample in {} draws", self.retries)))
    }
}

/// Name → strategy table for ellipsoid coresets.
pub fn mvee_methods() -> BTreeMap<&'static str, Box<dyn MveeMethod>> {
    let mut m: BTreeMap<&'static str, Box<dyn MveeMethod>> = BTreeMap::new();
    for s in [Box::new(CoordinateAscent::default()) as Box<dyn MveeMethod>, Box::new(LeverageSampled::default())] {
        m.insert(s.name(), s);
    }
    m
}

pub fn mvee_method(name: &str) -> Result<Box<dyn MveeMethod>> {
    mvee_methods().remove(name).ok_or_else(|| Error::UnknownName(name.into()))
}

pub fn mvee_coreset(
    a: &DenseMatrix,
    eps: f64,
    method: &dyn MveeMethod,
    rng: &mut SeededRng,
) -> Result<EllipsoidCoreset> {
    method.run(a, eps, rng)
}

/// `‖(A|_Sᵀ)⁺ a_i‖₂` for every row `i`: the norm of the minimum-norm
/// coefficients expressing `a_i` in the rows indexed by `S`.
pub fn spanning_coefficients(a: &DenseMatrix, support: &[usize]) -> Vec<f64> {
    let ps = pinv(&a.select_rows(support).transpose());
    a.row_iter().map(|r| norm2(&ps.matvec(r))).collect()
}

#[derive(Clone, Debug, Serialize)]
pub struct SpanningSet {
    pub support: Vec<usize>,
    pub eps: f64,
    pub coef_norms: Vec<f64>,
    pub method: String,
}

impl SpanningSet {
    pub fn max_coef(&self) -> f64 {
        self.coef_norms.iter().copied().fold(0.0, f64::max)
    }
}

fn certify(a: &DenseMatrix, ec: &EllipsoidCoreset, eps: f64) -> Result<SpanningSet> {
    let coef_norms = spanning_coefficients(a, &ec.support);
    let worst = coef_norms.iter().copied().fold(0.0, f64::max);
    if worst > 1.0 + eps + 1e-9 {
        return Err(Error::NonConvergence(format!("spanning certificate {worst} > 1 + {eps}")));
    }
    Ok(SpanningSet { support: ec.support.clone(), eps, coef_norms, method: ec.method.clone() })
}

/// Rows `S` with every `a_i = A|_Sᵀ c`, `‖c‖₂ ≤ 1 + eps`.
pub fn l2_spanning_set(a: &DenseMatrix, eps: f64, rng: &mut SeededRng) -> Result<SpanningSet> {
    let ec = CoordinateAscent::default().run(a, eps, rng)?;
    certify(a, &ec, eps)
}

/// Size budget `8·d·max(1, log₂log₂ d)` for the exact method.
pub fn spanning_budget(d: usize) -> f64 {
    let l = (d as f64).log2().max(1.0).log2().max(1.0);
    8.0 * d as f64 * l
}

/// Subset with `‖Ax‖_∞ ≤ κ‖A|_S x‖_∞` for all `x`.
pub fn linf_embedding_subset(
    a: &DenseMatrix,
    eps: f64,
    method: &dyn MveeMethod,
    rng: &mut SeededRng,
) -> Result<(SpanningSet, f64)> {
    let ec = method.run(a, eps, rng)?;
    let ss = certify(a, &ec, eps)?;
    let d = a.cols() as f64;
    let kappa = if method.name() == "leverage_sampled" {
        (1.0 + eps) / (1.0 - eps) * (ss.support.len() as f64).sqrt()
    } else {
        (1.0 + eps).powi(2) * d.sqrt()
    };
    Ok((ss, kappa))
}

/// `(1/k) Σ` of the `k` largest `|y_i|`; shorter vectors are zero-padded.
pub fn avg_top_k(y: &[f64], k: usize) -> f64 {
    let mut v: Vec<f64> = y.iter().map(|x| x.abs()).collect();
    v.sort_by(|a, b| b.total_cmp(a));
    v.iter().take(k).sum::<f64>() / k as f64
}

#[derive(Clone, Debug, Serialize)]
pub struct TopKEmbedding {
    pub support: Vec<usize>,
    pub k: usize,
    pub parts: usize,
    /// Deterministic: `AT_k(Ax) ≤ bound · AT_k(A|_S x)` for every `x`.
    pub distortion_bound: f64,
    /// `4(1+ε)√(t·s)` with `s` the largest part's spanning set, the scale the
    /// partitioned construction targets.
    pub partition_bound: Option<f64>,
}

/// Rows preserving the average-top-`k` norm of `Ax` up to `O(√(k|S|))`.
///
/// Below `k₀ = max(d, 16)` one spanning set is used; above it the rows are
/// split at random into `⌈k/k₀⌉` parts with one spanning set per part.
pub fn avg_top_k_embedding(a: &DenseMatrix, k: usize, eps: f64, rng: &mut SeededRng) -> Result<TopKEmbedding> {
    let (n, d) = a.shape();
    if k == 0 || k > n {
        return invalid(format!("k={k} outside 1..={n}"));
    }
    let t = d.max(16);
    let parts = k.div_ceil(t);
    let (support, partition_bound) = if parts <= 1 {
        (l2_spanning_set(a, eps, &mut rng.child(0))?.support, None)
    } else {
        let mut order: Vec<usize> = (0..n).collect();
        rng.child(1).shuffle(&mut order);
        let mut support = Vec::new();
        let mut smax = 0usize;
        for (pi, chunk) in order.chunks(n.div_ceil(parts)).enumerate() {
            let mut rows: Vec<usize> = chunk.to_vec();
            rows.sort_unstable();
            let sub = a.select_rows(&rows);
            let local = if numerical_rank(&sub) == d {
                l2_spanning_set(&sub, eps, &mut rng.child(100 + pi as u64))?.support
            } else {
                // a part too small to have full rank keeps all its rows
                (0..rows.len()).collect()
            };
            smax = smax.max(local.len());
            support.extend(local.into_iter().map(|j| rows[j]));
        }
        support.sort_unstable();
        support.dedup();
        (support, Some(4.0 * (1.0 + eps) * ((t * smax) as f64).sqrt()))
    };
    // |⟨a_i,x⟩| ≤ (1+ε)‖A_S x‖₂ ≤ (1+ε)√(max(k,|S|)/k)·k·AT_k(A_S x)
    let s = support.len() as f64;
    let kf = k as f64;
    let distortion_bound = (1.0 + eps) * (kf * s.max(kf)).sqrt();
    Ok(TopKEmbedding { support, k, parts: parts.max(1), distortion_bound, partition_bound })
}

/// `max_i ‖a_iᵀX‖₂ / max_{i∈S} ‖a_iᵀX‖₂`.
pub fn cascaded_inf_embedding_check(a: &DenseMatrix, support: &[usize], x: &DenseMatrix) -> Result<f64> {
    let ax = a.matmul(x)?;
    let top = ax.row_iter().map(norm2).fold(0.0, f64::max);
    let sub = support.iter().map(|&i| norm2(ax.row(i))).fold(0.0, f64::max);
    if sub == 0.0 {
        return Err(Error::Degenerate("A|_S X vanishes".into()));
    }
    Ok(top / sub)
}

#[derive(Clone, Debug, Serialize)]
pub struct WellConditioned {
    /// `n×s`, columns of `L` rescaled to unit ℓp.
    pub u: DenseMatrix,
    /// `s×d`, with `L = UV`.
    pub v: DenseMatrix,
    pub columns: Vec<usize>,
    /// `‖Ve_j‖₂ ≤ c_prime·‖Le_j‖_p`.
    pub c_prime: f64,
}

/// `L = UV` with `U` made of unit-ℓp columns of `L` and `V` controlled by
/// the ℓ2 spanning property of those columns.
pub fn well_cond_decomposition(
    l: &DenseMatrix,
    k: usize,
    p: f64,
    eps: f64,
    rng: &mut SeededRng,
) -> Result<WellConditioned> {
    if !(p >= 1.0) {
        return invalid("p must be >= 1");
    }
    let r = numerical_rank(l);
    if r > k {
        return invalid(format!("rank {r} exceeds k = {k}"));
    }
    let (n, d) = l.shape();
    let norms: Vec<f64> = (0..d).map(|j| lp_norm(&l.col(j), p)).collect();
    let nz: Vec<usize> = (0..d).filter(|&j| norms[j] > 0.0).collect();
    if nz.is_empty() {
        return Err(Error::Degenerate("L is zero".into()));
    }
    let lprime = l.select_cols(&nz).scale_cols(&nz.iter().map(|&j| 1.0 / norms[j]).collect::<Vec<_>>());
    // coordinates of the unit columns in an orthonormal basis of col(L)
    let q = col_space_basis(&lprime);
    let coords = q.transpose().matmul(&lprime)?; // r × |nz|
    let pts = coords.transpose();
    let ss = l2_spanning_set(&pts, eps, rng)?;
    let sel: Vec<usize> = ss.support.iter().map(|&i| nz[i]).collect();
    let u = l.select_cols(&sel).scale_cols(&sel.iter().map(|&j| 1.0 / norms[j]).collect::<Vec<_>>());
    let basis_pinv = pinv(&pts.select_rows(&ss.support).transpose()); // s × r
    let mut v = DenseMatrix::zeros(sel.len(), d);
    for (ci, &j) in nz.iter().enumerate() {
        let z = basis_pinv.matvec(pts.row(ci));
        for (s, zs) in z.iter().enumerate() {
            v.set(s, j, zs * norms[j]);
        }
    }
    let _ = n;
    Ok(WellConditioned { u, v, columns: sel, c_prime: 1.0 + eps })
}

#[derive(Clone, Debug, Serialize)]
pub struct LpSpanning {
    /// `d×s`; the columns of `AR` have unit ℓp norm.
    pub r: DenseMatrix,
    pub net_size: usize,
    pub net_columns: usize,
    /// Largest `‖y‖₂` over the net, where `x = Ry` is the min-norm solve.
    pub max_coef_net: f64,
}

/// `R` such that every `x` with `‖Ax‖_p = 1` is `Ry` for a short `y`.
///
/// Columns are a spanning set of a random net of unit-ℓp directions plus the
/// Lewis basis, each normalised to unit `‖A·‖_p`.
pub fn lp_subspace_spanning(a: &DenseMatrix, p: f64, net_factor: usize, rng: &mut SeededRng) -> Result<LpSpanning> {
    use crate::lewis::{compute_lewis, LewisOptions};
    let d = a.cols();
    let lw = compute_lewis(a, p, LewisOptions::default())?;
    let basis = lw.basis.ok_or_else(|| Error::RankDeficient("A lacks full column rank".into()))?;
    let m = net_factor * d;
    let mut g = rng.child(0);
    let mut net = DenseMatrix::zeros(m, d);
    for i in 0..m {
        let z: Vec<f64> = (0..d).map(|_| g.normal()).collect();
        let x = basis.matvec(&z);
        let s = lp_norm(&a.matvec(&x), p);
        for j in 0..d {
            net.set(i, j, x[j] / s);
        }
    }
    let ss = l2_spanning_set(&net, 0.25, &mut rng.child(1))?;
    let r1 = net.select_rows(&ss.support).transpose();
    let scale: Vec<f64> = (0..d).map(|j| 1.0 / lp_norm(&a.matvec(&basis.col(j)), p)).collect();
    let r2 = basis.scale_cols(&scale);
    let r = r1.hstack(&r2)?;
    let rp = pinv(&r);
    let max_coef_net = net.row_iter().map(|x| norm2(&rp.matvec(x))).fold(0.0, f64::max);
    Ok(LpSpanning { net_columns: ss.support.len(), r, net_size: m, max_coef_net })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_is_its_own_coreset() {
        let a = DenseMatrix::identity(4);
        let ec = CoordinateAscent::default().run(&a, 0.1, &mut SeededRng::new(0)).unwrap();
        assert_eq!(ec.support, vec![0, 1, 2, 3]);
        assert!(ec.weights.iter().all(|&u| (u - 1.0).abs() < 1e-9));
    }

    #[test]
    fn lower_bound_instance_coefficients() {
        let d = 4;
        let mut rows: Vec<Vec<f64>> = (0..d).map(|i| (0..d).map(|j| f64::from(i == j)).collect()).collect();
        rows.push(vec![1.0; d]);
        let a = DenseMatrix::from_rows(&rows).unwrap();
        // the ones row in terms of the identity rows
        let c = spanning_coefficients(&a, &[0, 1, 2, 3]);
        assert!((c[d] - (d as f64).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn rank_deficient_is_rejected() {
        let a = DenseMatrix::from_rows(&[vec![1.0, 1.0], vec![2.0, 2.0]]).unwrap();
        assert!(l2_spanning_set(&a, 0.2, &mut SeededRng::new(1)).is_err());
    }

    #[test]
    fn avg_top_k_values() {
        assert_eq!(avg_top_k(&[1.0, -5.0, 3.0], 2), 4.0);
        assert_eq!(avg_top_k(&[1.0], 2), 0.5);
    }
}
