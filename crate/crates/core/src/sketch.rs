//! Oblivious sketches: dense p-stable matrices and the subsampled randomized
//! Hadamard transform.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::matrix::DenseMatrix;
use crate::rng::SeededRng;

/// One p-stable draw by Chambers–Mallows–Stuck, `0 < p ≤ 2`.
///
/// `p = 1` is the standard Cauchy and `p = 2` is `N(0, 2)`.
pub fn pstable_sample(p: f64, rng: &mut SeededRng) -> f64 {
    let v = PI * (rng.uniform_open() - 0.5);
    if (p - 1.0).abs() < 1e-12 {
        return v.tan();
    }
    let w = rng.exp1();
    (p * v).sin() / v.cos().powf(1.0 / p) * (((1.0 - p) * v).cos() / w).powf((1.0 - p) / p)
}

pub trait Sketch: Send + Sync {
    fn name(&self) -> &'static str;
    /// Output rows.
    fn rows(&self) -> usize;
    /// Input rows.
    fn input_dim(&self) -> usize;
    /// `S x` for `x` of length `input_dim`.
    fn apply_vec(&self, x: &[f64]) -> Vec<f64>;

    /// `S A`, column by column.
    fn apply(&self, a: &DenseMatrix) -> Result<DenseMatrix> {
        if a.rows() != self.input_dim() {
            return Err(Error::DimensionMismatch(format!(
                "sketch takes {} rows, A has {}",
                self.input_dim(),
                a.rows()
            )));
        }
        let cols: Vec<Vec<f64>> = (0..a.cols()).map(|j| self.apply_vec(&a.col(j))).collect();
        Ok(DenseMatrix::from_fn(self.rows(), a.cols(), |i, j| cols[j][i]))
    }
}

/// `(C / r^{1/p}) · G` with i.i.d. p-stable entries.
#[derive(Clone, Debug, Serialize)]
pub struct PStableSketch {
    pub p: f64,
    pub scale: f64,
    pub g: DenseMatrix,
}

impl PStableSketch {
    pub fn new(r: usize, n: usize, p: f64, c: f64, rng: &mut SeededRng) -> Result<Self> {
        if !(p > 0.0 && p <= 2.0) {
            return invalid(format!("p-stable needs 0 < p <= 2, got {p}"));
        }
        if r == 0 {
            return invalid("sketch needs r >= 1");
        }
        let g = DenseMatrix::from_fn(r, n, |_, _| pstable_sample(p, rng));
        Ok(Self { p, scale: c / (r as f64).powf(1.0 / p), g })
    }
}

impl Sketch for PStableSketch {
    fn name(&self) -> &'static str {
        "pstable"
    }
    fn rows(&self) -> usize {
        self.g.rows()
    }
    fn input_dim(&self) -> usize {
        self.g.cols()
    }
    fn apply_vec(&self, x: &[f64]) -> Vec<f64> {
        self.g.matvec(x).into_iter().map(|v| v * self.scale).collect()
    }
}

/// In-place unnormalised Walsh–Hadamard transform; `x.len()` a power of two.
pub fn fwht(x: &mut [f64]) {
    let n = x.len();
    debug_assert!(n.is_power_of_two());
    let mut h = 1;
    while h < n {
        for i in (0..n).step_by(2 * h) {
            for j in i..i + h {
                let (u, v) = (x[j], x[j + h]);
                x[j] = u + v;
                x[j + h] = u - v;
            }
        }
        h *= 2;
    }
}

/// `S = √(N/r)·R·H·D` on inputs zero-padded to `N = 2^⌈log₂ n⌉`, with `H`
/// the orthonormal Hadamard matrix, `D` random signs and `R` a uniform
/// choice of `r` distinct rows.
#[derive(Clone, Debug, Serialize)]
pub struct SrhtSketch {
    pub n: usize,
    pub padded: usize,
    pub signs: Vec<f64>,
    pub rows: Vec<usize>,
}

impl SrhtSketch {
    pub fn new(n: usize, r: usize, rng: &mut SeededRng) -> Result<Self> {
        let padded = n.max(1).next_power_of_two();
        if r == 0 || r > padded {
            return invalid(format!("SRHT needs 1 <= r <= {padded}, got {r}"));
        }
        let signs = (0..padded).map(|_| rng.sign()).collect();
        let rows = rng.subset(padded, r);
        Ok(Self { n, padded, signs, rows })
    }
}

impl Sketch for SrhtSketch {
    fn name(&self) -> &'static str {
        "srht"
    }
    fn rows(&self) -> usize {
        self.rows.len()
    }
    fn input_dim(&self) -> usize {
        self.n
    }
    fn apply_vec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.n);
        let mut z = vec![0.0; self.padded];
        for i in 0..self.n {
            z[i] = x[i] * self.signs[i];
        }
        fwht(&mut z);
        // 1/√N from H times √(N/r) from the row sampling
        let s = 1.0 / (self.rows.len() as f64).sqrt();
        self.rows.iter().map(|&i| z[i] * s).collect()
    }
}

pub fn srht_apply(a: &DenseMatrix, r: usize, rng: &mut SeededRng) -> Result<DenseMatrix> {
    SrhtSketch::new(a.rows(), r, rng)?.apply(a)
}

pub fn pstable_embed(a: &DenseMatrix, r: usize, p: f64, rng: &mut SeededRng) -> Result<DenseMatrix> {
    PStableSketch::new(r, a.rows(), p, 4.0, rng)?.apply(a)
}

type SketchFactory = fn(n: usize, r: usize, p: f64, rng: &mut SeededRng) -> Result<Box<dyn Sketch>>;

/// Name → constructor table for sketches.
pub fn sketches() -> BTreeMap<&'static str, SketchFactory> {
    let mut m: BTreeMap<&'static str, SketchFactory> = BTreeMap::new();
    m.insert("pstable", |n, r, p, rng| Ok(Box::new(PStableSketch::new(r, n, p, 4.0, rng)?)));
    m.insert("srht", |n, r, _, rng| Ok(Box::new(SrhtSketch::new(n, r, rng)?)));
    m
}

pub fn build_sketch(name: &str, n: usize, r: usize, p: f64, rng: &mut SeededRng) -> Result<Box<dyn Sketch>> {
    let f = sketches().get(name).copied().ok_or_else(|| Error::UnknownName(name.into()))?;
    f(n, r, p, rng)
}
