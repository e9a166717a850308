//! Exhaustive and grid-based reference solvers used to check the fast
//! algorithms on small instances.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use minilp::{ComparisonOp, OptimizationDirection, Problem};
use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::clustering::clustering_cost;
use crate::css::{fit_all, ColumnCost};
use crate::error::{invalid, Error, Result};
use crate::matrix::{lp_norm, DenseMatrix};
use crate::online_subspace::subspace_cost;
use crate::regression::{lp_regression, IrlsOptions};

/// Number of `s`-subsets of `d`, saturating.
pub fn binomial(d: usize, s: usize) -> u128 {
    if s > d {
        return 0;
    }
    let s = s.min(d - s);
    let mut c: u128 = 1;
    for i in 0..s {
        c = c.saturating_mul((d - i) as u128) / (i as u128 + 1);
    }
    c
}

fn subsets(d: usize, s: usize) -> Vec<Vec<usize>> {
    if s > d {
        return Vec::new();
    }
    let mut out = Vec::new();
    let mut cur: Vec<usize> = (0..s).collect();
    loop {
        out.push(cur.clone());
        let Some(i) = (0..s).rev().find(|&i| cur[i] < d - s + i) else {
            return out;
        };
        cur[i] += 1;
        for j in i + 1..s {
            cur[j] = cur[j - 1] + 1;
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct BruteCss {
    pub subset: Vec<usize>,
    pub residual: f64,
    pub evaluated: usize,
}

/// Best `subset_size` columns by exhaustive search; at most `10⁶` subsets.
pub fn brute_css(a: &DenseMatrix, subset_size: usize, cost: &ColumnCost) -> Result<BruteCss> {
    let d = a.cols();
    if subset_size == 0 || subset_size > d {
        return invalid(format!("subset size {subset_size} outside 1..={d}"));
    }
    let total = binomial(d, subset_size);
    if total > 1_000_000 {
        return Err(Error::BudgetExceeded(format!("C({d}, {subset_size}) = {total} > 10^6")));
    }
    let all = subsets(d, subset_size);
    let scored: Vec<(f64, Vec<usize>)> =
        all.into_par_iter().map(|s| fit_all(a, &s, cost).map(|(_, r)| (cost.report(&r), s))).collect::<Result<_>>()?;
    let evaluated = scored.len();
    // lowest residual, then lexicographically first subset
    let (residual, subset) =
        scored.into_iter().min_by(|x, y| x.0.total_cmp(&y.0).then_with(|| x.1.cmp(&y.1))).expect("at least one subset");
    Ok(BruteCss { subset, residual, evaluated })
}

#[derive(Clone, Debug, Serialize)]
pub struct ExactFit {
    pub x: Vec<f64>,
    /// `‖Ax* − b‖_p` (no power).
    pub opt: f64,
    pub method: String,
    pub certified: bool,
    /// Relative KKT residual for finite `p`, 0 for LP-based solves.
    pub kkt: f64,
}

fn lp_l1(a: &DenseMatrix, b: &[f64]) -> Result<Vec<f64>> {
    let (n, d) = a.shape();
    let mut pb = Problem::new(OptimizationDirection::Minimize);
    let xs: Vec<_> = (0..d).map(|_| pb.add_var(0.0, (f64::NEG_INFINITY, f64::INFINITY))).collect();
    for i in 0..n {
        let t = pb.add_var(1.0, (0.0, f64::INFINITY));
        let row = a.row(i);
        let mut lo: Vec<_> = xs.iter().zip(row).map(|(v, c)| (*v, *c)).collect();
        lo.push((t, 1.0));
        pb.add_constraint(lo.as_slice(), ComparisonOp::Ge, b[i]);
        let mut hi: Vec<_> = xs.iter().zip(row).map(|(v, c)| (*v, *c)).collect();
        hi.push((t, -1.0));
        pb.add_constraint(hi.as_slice(), ComparisonOp::Le, b[i]);
    }
    let sol = pb.solve().map_err(|e| Error::NonConvergence(format!("LP: {e}")))?;
    Ok(xs.iter().map(|v| *sol.var_value(*v)).collect())
}

fn lp_linf(a: &DenseMatrix, b: &[f64]) -> Result<Vec<f64>> {
    let (n, d) = a.shape();
    let mut pb = Problem::new(OptimizationDirection::Minimize);
    let xs: Vec<_> = (0..d).map(|_| pb.add_var(0.0, (f64::NEG_INFINITY, f64::INFINITY))).collect();
    let t = pb.add_var(1.0, (0.0, f64::INFINITY));
    for i in 0..n {
        let row = a.row(i);
        let mut lo: Vec<_> = xs.iter().zip(row).map(|(v, c)| (*v, *c)).collect();
        lo.push((t, 1.0));
        pb.add_constraint(lo.as_slice(), ComparisonOp::Ge, b[i]);
        let mut hi: Vec<_> = xs.iter().zip(row).map(|(v, c)| (*v, *c)).collect();
        hi.push((t, -1.0));
        pb.add_constraint(hi.as_slice(), ComparisonOp::Le, b[i]);
    }
    let sol = pb.solve().map_err(|e| Error::NonConvergence(format!("LP: {e}")))?;
    Ok(xs.iter().map(|v| *sol.var_value(*v)).collect())
}

/// Chebyshev optimum by enumerating every basic solution of
/// `a_i x − s_i t = b_i` over `d+1` rows and signs `s_i = ±1`.
pub fn linf_vertex_enumeration(a: &DenseMatrix, b: &[f64]) -> Result<(Vec<f64>, f64)> {
    let (n, d) = a.shape();
    if d > 3 {
        return invalid("vertex enumeration is limited to d <= 3");
    }
    let m = d + 1;
    if n < m {
        // interpolate exactly
        let x = crate::linalg::lstsq_vec(a, b)?;
        let r: Vec<f64> = a.matvec(&x).iter().zip(b).map(|(u, v)| u - v).collect();
        return Ok((x, lp_norm(&r, f64::INFINITY)));
    }
    let best = subsets(n, m)
        .into_par_iter()
        .flat_map_iter(|rows| {
            (0..(1usize << m)).filter_map(move |mask| {
                let mut mat = DMatrix::zeros(m, m);
                let mut rhs = DVector::zeros(m);
                for (r, &i) in rows.iter().enumerate() {
                    for j in 0..d {
                        mat[(r, j)] = a.get(i, j);
                    }
                    mat[(r, d)] = if (mask >> r) & 1 == 1 { 1.0 } else { -1.0 };
                    rhs[r] = b[i];
                }
                let sol = mat.lu().solve(&rhs)?;
                let x: Vec<f64> = sol.iter().take(d).copied().collect();
                if !x.iter().all(|v| v.is_finite()) {
                    return None;
                }
                let r: Vec<f64> = a.matvec(&x).iter().zip(b).map(|(u, v)| u - v).collect();
                Some((lp_norm(&r, f64::INFINITY), x))
            })
        })
        .min_by(|p, q| p.0.total_cmp(&q.0))
        .ok_or_else(|| Error::Degenerate("no basic solution".into()))?;
    Ok((best.1, best.0))
}

/// Reference `min_x ‖Ax − b‖_p`: LP for `p ∈ {1, ∞}` (with vertex
/// enumeration as a second opinion for `∞` when `d ≤ 3`), otherwise IRLS
/// certified by its KKT residual.
pub fn exact_lp_regression(a: &DenseMatrix, b: &[f64], p: f64) -> Result<ExactFit> {
    if a.rows() != b.len() {
        return invalid("row count mismatch");
    }
    if !(p >= 1.0) {
        return invalid(format!("p must be >= 1, got {p}"));
    }
    let resid = |x: &[f64]| -> Vec<f64> { a.matvec(x).iter().zip(b).map(|(u, v)| u - v).collect() };
    if p.is_infinite() {
        let x = lp_linf(a, b)?;
        let opt = lp_norm(&resid(&x), p);
        if a.cols() <= 3 {
            let (xv, vv) = linf_vertex_enumeration(a, b)?;
            let tol = 1e-8 * (1.0 + vv.abs());
            let certified = (vv - opt).abs() <= tol;
            let (x, opt) = if vv < opt { (xv, vv) } else { (x, opt) };
            return Ok(ExactFit { x, opt, method: "lp+vertex".into(), certified, kkt: 0.0 });
        }
        return Ok(ExactFit { x, opt, method: "lp".into(), certified: true, kkt: 0.0 });
    }
    if p == 1.0 {
        let x = lp_l1(a, b)?;
        let opt = lp_norm(&resid(&x), 1.0);
        return Ok(ExactFit { x, opt, method: "lp".into(), certified: true, kkt: 0.0 });
    }
    let opts = IrlsOptions { max_iters: 2000, tol: 1e-13 };
    let f = lp_regression(a, b, p, opts)?;
    let certified = f.kkt <= 1e-10 || f.cost == 0.0;
    Ok(ExactFit { opt: f.cost, x: f.x, method: "irls".into(), certified, kkt: f.kkt })
}

/// Unit vectors on a half-sphere of `R^m` from hyperspherical angles at
/// `step` radians; one representative per line up to the grid.
pub fn hemisphere_grid(m: usize, step: f64) -> Vec<Vec<f64>> {
    if m == 1 {
        return vec![vec![1.0]];
    }
    let steps_pi = (std::f64::consts::PI / step).round().max(1.0) as usize;
    let mut out = Vec::new();
    let mut angles = vec![0usize; m - 1];
    loop {
        let mut v = vec![0.0; m];
        let mut s = 1.0;
        for j in 0..m - 1 {
            let phi = angles[j] as f64 * step;
            v[j] = s * phi.cos();
            s *= phi.sin();
        }
        v[m - 1] = s;
        out.push(v);
        // the last angle covers [0, π), the others [0, π]
        let mut j = m - 1;
        loop {
            if j == 0 {
                return out;
            }
            j -= 1;
            let cap = if j == m - 2 { steps_pi - 1 } else { steps_pi };
            if angles[j] < cap {
                angles[j] += 1;
                break;
            }
            angles[j] = 0;
        }
    }
}

/// Orthonormal basis (`m×(m−1)`) of the complement of unit `u`.
fn complement(u: &[f64]) -> DenseMatrix {
    let m = u.len();
    let mut cols: Vec<Vec<f64>> = Vec::new();
    for e in 0..m {
        let mut v = vec![0.0; m];
        v[e] = 1.0;
        let c: f64 = u[e];
        for i in 0..m {
            v[i] -= c * u[i];
        }
        for q in &cols {
            let c: f64 = q.iter().zip(&v).map(|(x, y)| x * y).sum();
            for i in 0..m {
                v[i] -= c * q[i];
            }
        }
        let nv = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if nv > 1e-6 && cols.len() < m - 1 {
            cols.push(v.iter().map(|x| x / nv).collect());
        }
    }
    DenseMatrix::from_fn(m, m - 1, |i, j| cols[j][i])
}

/// Rank-`k` subspaces (as `d×k` orthonormal bases) from an angular grid.
pub fn subspace_net(d: usize, k: usize, resolution_deg: f64) -> Result<Vec<DenseMatrix>> {
    if k == 0 || k > 2 || d > 4 || k > d {
        return invalid("subspace net supports d <= 4 and 1 <= k <= min(2, d)");
    }
    let step = resolution_deg.to_radians();
    let grid = hemisphere_grid(d, step);
    if k == 1 {
        return Ok(grid.into_iter().map(|u| DenseMatrix::new(d, 1, u).expect("length d")).collect());
    }
    let mut out = Vec::new();
    for u in &grid {
        let c = complement(u);
        for w in hemisphere_grid(d - 1, step) {
            let v = c.matvec(&w);
            let mut data = Vec::with_capacity(2 * d);
            for i in 0..d {
                data.push(u[i]);
                data.push(v[i]);
            }
            out.push(DenseMatrix::new(d, 2, data)?);
        }
    }
    Ok(out)
}

/// `max_F |Σ w_i cost_i(F) − Σ cost_i(F)| / Σ cost_i(F)` over a grid of
/// rank-`k` subspaces; subspaces with zero true cost are skipped.
pub fn strong_coreset_check(
    a: &DenseMatrix,
    indices: &[usize],
    weights: &[f64],
    k: usize,
    p: f64,
    resolution_deg: f64,
) -> Result<f64> {
    let net = subspace_net(a.cols(), k, resolution_deg)?;
    Ok(net
        .par_iter()
        .map(|f| {
            let t = subspace_cost(a, None, f, p);
            if t <= 0.0 {
                return 0.0;
            }
            let c = subspace_cost(a, Some((indices, weights)), f, p);
            (c - t).abs() / t
        })
        .reduce(|| 0.0, f64::max))
}

/// `gx×gy` lattice over the bounding box of 2-d points, padded by 10%.
pub fn center_lattice(points: &DenseMatrix, gx: usize, gy: usize) -> Vec<Vec<f64>> {
    let (mut lo, mut hi) = ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]);
    for r in points.row_iter() {
        for j in 0..2 {
            lo[j] = lo[j].min(r[j]);
            hi[j] = hi[j].max(r[j]);
        }
    }
    let pad: Vec<f64> = (0..2).map(|j| 0.1 * (hi[j] - lo[j])).collect();
    let at = |j: usize, t: usize, g: usize| {
        if g == 1 {
            0.5 * (lo[j] + hi[j])
        } else {
            lo[j] - pad[j] + (hi[j] - lo[j] + 2.0 * pad[j]) * t as f64 / (g - 1) as f64
        }
    };
    let mut out = Vec::with_capacity(gx * gy);
    for a in 0..gx {
        for b in 0..gy {
            out.push(vec![at(0, a, gx), at(1, b, gy)]);
        }
    }
    out
}

/// Per-point `sup_C cost_i(C) / cost(C)` over center tuples drawn from
/// `candidates` plus the input points themselves; tuples with zero total
/// cost are skipped.
pub fn exact_cluster_sensitivity(points: &DenseMatrix, k: usize, p: f64, grid: usize) -> Result<Vec<f64>> {
    if points.cols() != 2 || k == 0 || k > 2 {
        return invalid("grid sensitivity needs d = 2 and k in {1, 2}");
    }
    if grid == 0 || grid > 50 {
        return invalid("grid must lie in 1..=50");
    }
    let mut cands = center_lattice(points, grid, grid);
    cands.extend(points.row_iter().map(|r| r.to_vec()));
    let n = points.rows();
    let m = cands.len();
    let eval = |cs: &[Vec<f64>]| -> Vec<f64> {
        let costs: Vec<f64> = points.row_iter().map(|x| crate::clustering::nearest(x, cs).0.powf(p)).collect();
        let tot: f64 = costs.iter().sum();
        if tot <= 0.0 {
            return vec![0.0; n];
        }
        costs.iter().map(|c| c / tot).collect()
    };
    let merge = |mut a: Vec<f64>, b: Vec<f64>| {
        for (x, y) in a.iter_mut().zip(b) {
            *x = x.max(y);
        }
        a
    };
    let out = if k == 1 {
        cands.par_iter().map(|c| eval(std::slice::from_ref(c))).reduce(|| vec![0.0; n], merge)
    } else {
        (0..m)
            .into_par_iter()
            .map(|i| (i..m).map(|j| eval(&[cands[i].clone(), cands[j].clone()])).fold(vec![0.0; n], merge))
            .reduce(|| vec![0.0; n], merge)
    };
    Ok(out)
}

/// `max |Σ w c(C) − c(C)| / c(C)` over all pairs (or singletons) of centers
/// from `cands`.
pub fn cluster_coreset_check(
    points: &DenseMatrix,
    indices: &[usize],
    weights: &[f64],
    cands: &[Vec<f64>],
    k: usize,
    p: f64,
) -> f64 {
    let dev = |cs: &[Vec<f64>]| {
        let t = clustering_cost(points, None, cs, p);
        if t <= 0.0 {
            return 0.0;
        }
        (clustering_cost(points, Some((indices, weights)), cs, p) - t).abs() / t
    };
    if k == 1 {
        return cands.par_iter().map(|c| dev(std::slice::from_ref(c))).reduce(|| 0.0, f64::max);
    }
    (0..cands.len())
        .into_par_iter()
        .map(|i| cands.iter().map(|c2| dev(&[cands[i].clone(), c2.clone()])).fold(0.0, f64::max))
        .reduce(|| 0.0, f64::max)
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct OracleReport {
    pub instance_hash: String,
    pub method: String,
    pub value: f64,
    pub runtime_ms: f64,
}

/// `sha256` over the shape, the raw entries and a parameter string.
pub fn instance_hash(a: &DenseMatrix, b: Option<&[f64]>, params: &str) -> String {
    let mut h = Sha256::new();
    h.update((a.rows() as u64).to_le_bytes());
    h.update((a.cols() as u64).to_le_bytes());
    for v in a.data() {
        h.update(v.to_le_bytes());
    }
    if let Some(b) = b {
        for v in b {
            h.update(v.to_le_bytes());
        }
    }
    h.update(params.as_bytes());
    h.finalize().iter().map(|x| format!("{x:02x}")).collect()
}

/// Directory of JSON reports keyed by instance hash and method.
pub struct OracleCache {
    dir: PathBuf,
}

impl OracleCache {
    pub fn new(dir: impl AsRef<Path>) -> Result<Self> {
        fs::create_dir_all(dir.as_ref())?;
        Ok(Self { dir: dir.as_ref().to_path_buf() })
    }

    fn path(&self, hash: &str, method: &str) -> PathBuf {
        self.dir.join(format!("{hash}-{method}.json"))
    }

    pub fn get(&self, hash: &str, method: &str) -> Result<Option<OracleReport>> {
        let p = self.path(hash, method);
        if !p.exists() {
            return Ok(None);
        }
        Ok(Some(serde_json::from_str(&fs::read_to_string(p)?)?))
    }

    /// Cached value, or `f()` timed and stored.
    pub fn get_or_compute(&self, hash: &str, method: &str, f: impl FnOnce() -> Result<f64>) -> Result<OracleReport> {
        if let Some(r) = self.get(hash, method)? {
            return Ok(r);
        }
        let t = Instant::now();
        let value = f()?;
        let r = OracleReport {
            instance_hash: hash.into(),
            method: method.into(),
            value,
            runtime_ms: t.elapsed().as_secs_f64() * 1e3,
        };
        fs::write(self.path(hash, method), serde_json::to_string_pretty(&r)?)?;
        Ok(r)
    }
}
