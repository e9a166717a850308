//! Lower-bound constructions and planted synthetic instances.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::linalg::numerical_rank;
use crate::matrix::{dot, DenseMatrix};
use crate::rng::SeededRng;

#[derive(Clone, Debug, Serialize)]
pub struct HardInstance {
    pub kind: String,
    pub a: DenseMatrix,
    pub b: Option<Vec<f64>>,
    /// Row carrying the only nonzero label, when there is one.
    pub spike: Option<usize>,
    pub meta: BTreeMap<String, f64>,
}

#[derive(Clone, Copy, Debug)]
pub enum HardKind {
    /// `I_d` stacked on the all-ones row.
    SpanningLb { d: usize },
    /// `k` scaled Gaussian rows over every ±1 vector of length `r = k^c`.
    LinfCss { k: usize, c: f64 },
    /// `d^q` random sign vectors with pairwise `|⟨x,y⟩| ≤ c_q√d`.
    PtbCode { d: usize, q: f64, c_q: f64 },
    /// Repeated code rows with a label vector that is zero or one spike,
    /// each with probability 1/2; `spike` forces the branch.
    ActiveLb { p: f64, d: usize, eps: f64, c_q: f64, spike: Option<bool> },
}

pub fn hard_instance(kind: HardKind, rng: &mut SeededRng) -> Result<HardInstance> {
    match kind {
        HardKind::SpanningLb { d } => {
            if d == 0 {
                return invalid("d must be positive");
            }
            let a = DenseMatrix::from_fn(d + 1, d, |i, j| if i == d || i == j { 1.0 } else { 0.0 });
            let mut meta = BTreeMap::new();
            meta.insert("subset_coef_norm".into(), (d as f64).sqrt());
            Ok(HardInstance { kind: "spanning_lb".into(), a, b: None, spike: None, meta })
        }
        HardKind::LinfCss { k, c } => {
            let r = (k as f64).powf(c).round() as usize;
            if k == 0 || r == 0 || r > 20 {
                return invalid(format!("k^c = {r} must lie in 1..=20"));
            }
            let rows = k + (1usize << r);
            let mut a = DenseMatrix::zeros(rows, r);
            for i in 0..k {
                for j in 0..r {
                    a.set(i, j, k as f64 * rng.normal());
                }
            }
            for m in 0..(1usize << r) {
                for j in 0..r {
                    a.set(k + m, j, if (m >> j) & 1 == 1 { 1.0 } else { -1.0 });
                }
            }
            let mut meta = BTreeMap::new();
            // keep the k Gaussian rows, zero the sign rows
            meta.insert("opt_upper_bound".into(), 1.0);
            meta.insert("r".into(), r as f64);
            Ok(HardInstance { kind: "linf_css".into(), a, b: None, spike: None, meta })
        }
        HardKind::PtbCode { d, q, c_q } => {
            let a = ptb_code(d, q, c_q, rng)?;
            let mut meta = BTreeMap::new();
            meta.insert("c_q".into(), c_q);
            meta.insert("max_inner".into(), max_offdiag_inner(&a));
            Ok(HardInstance { kind: "ptb_code".into(), a, b: None, spike: None, meta })
        }
        HardKind::ActiveLb { p, d, eps, c_q, spike } => {
            if !(p >= 1.0) || !(eps > 0.0 && eps < 1.0) {
                return invalid("active_lb needs p >= 1 and eps in (0, 1)");
            }
            // regression needs rank d; redraw degenerate codes
            let mut code = ptb_code(d, p / 2.0, c_q, &mut rng.child(0))?;
            let mut tries = 1;
            while numerical_rank(&code) < d {
                if tries == 100 {
                    return Err(Error::BudgetExceeded("no full-rank code in 100 draws".into()));
                }
                code = ptb_code(d, p / 2.0, c_q, &mut rng.child(tries))?;
                tries += 1;
            }
            let c = c_q.powf(p).min(1.0) / 3.0;
            let s = (c / eps.powf(p - 1.0)).ceil().max(1.0) as usize;
            let n = s * code.rows();
            let mut idx = Vec::with_capacity(n);
            for i in 0..code.rows() {
                idx.extend(std::iter::repeat_n(i, s));
            }
            let a = code.select_rows(&idx);
            let mut r = rng.child(1);
            let take_spike = spike.unwrap_or_else(|| r.bernoulli(0.5));
            let mut b = vec![0.0; n];
            let spike_row = if take_spike {
                let i = r.below(n);
                b[i] = d as f64;
                Some(i)
            } else {
                None
            };
            let mut meta = BTreeMap::new();
            meta.insert("copies".into(), s as f64);
            meta.insert("codewords".into(), code.rows() as f64);
            meta.insert("c".into(), c);
            Ok(HardInstance { kind: "active_lb".into(), a, b: Some(b), spike: spike_row, meta })
        }
    }
}

fn max_offdiag_inner(a: &DenseMatrix) -> f64 {
    let mut m: f64 = 0.0;
    for i in 0..a.rows() {
        for j in 0..i {
            m = m.max(dot(a.row(i), a.row(j)).abs());
        }
    }
    m
}

/// Rejection-sampled sign code; fails after `10⁴` tries for one row.
pub fn ptb_code(d: usize, q: f64, c_q: f64, rng: &mut SeededRng) -> Result<DenseMatrix> {
    if d == 0 || !(q > 0.0) {
        return invalid("ptb_code needs d >= 1 and q > 0");
    }
    let count = (d as f64).powf(q).round().max(1.0) as usize;
    let bound = c_q * (d as f64).sqrt();
    let mut rows: Vec<Vec<f64>> = Vec::with_capacity(count);
    for _ in 0..count {
        let mut ok = false;
        for _ in 0..10_000 {
            let x: Vec<f64> = (0..d).map(|_| rng.sign()).collect();
            if rows.iter().all(|y| dot(&x, y).abs() <= bound) {
                rows.push(x);
                ok = true;
                break;
            }
        }
        if !ok {
            return Err(Error::BudgetExceeded(format!(
                "no sign vector within |<x,y>| <= {bound:.3} after 10^4 tries at row {}",
                rows.len()
            )));
        }
    }
    DenseMatrix::from_rows(&rows)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Noise {
    Gaussian,
    /// Large entries on a `density` fraction of positions.
    Sparse,
    Laplace,
}

#[derive(Clone, Debug, Serialize)]
pub struct Planted {
    pub a: DenseMatrix,
    pub signal: DenseMatrix,
    pub noise: DenseMatrix,
    /// Right factor `k×d` of the signal.
    pub v: DenseMatrix,
}

/// `A = UV + Δ` with Gaussian `U`, `V` and the requested noise.
pub fn planted_low_rank(
    n: usize,
    d: usize,
    k: usize,
    noise: Noise,
    level: f64,
    rng: &mut SeededRng,
) -> Result<Planted> {
    if k == 0 || k > d.min(n) {
        return invalid("planted rank out of range");
    }
    let u = DenseMatrix::from_fn(n, k, |_, _| rng.normal());
    let v = DenseMatrix::from_fn(k, d, |_, _| rng.normal());
    let signal = u.matmul(&v)?;
    let noise = DenseMatrix::from_fn(n, d, |_, _| match noise {
        Noise::Gaussian => level * rng.normal(),
        Noise::Laplace => level * rng.exp1() * rng.sign(),
        Noise::Sparse => {
            if rng.bernoulli(0.05) {
                level * 10.0 * rng.sign()
            } else {
                0.0
            }
        }
    });
    let a = DenseMatrix::new(n, d, signal.data().iter().zip(noise.data()).map(|(s, e)| s + e).collect())?;
    Ok(Planted { a, signal, noise, v })
}

pub fn gaussian(n: usize, d: usize, rng: &mut SeededRng) -> DenseMatrix {
    DenseMatrix::from_fn(n, d, |_, _| rng.normal())
}
