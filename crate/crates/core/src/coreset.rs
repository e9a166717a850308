use serde::Serialize;

use crate::error::{invalid, Result};
use crate::matrix::DenseMatrix;
use crate::rng::SeededRng;

/// Weighted row subset whose weighted cost tracks the full cost for every
/// query in the family it was built for.
#[derive(Clone, Debug, Serialize)]
pub struct StrongCoreset {
    pub indices: Vec<usize>,
    pub weights: Vec<f64>,
    pub probs: Vec<f64>,
    /// Cluster id per kept point, for clustering coresets.
    pub center_ids: Option<Vec<usize>>,
    /// Sensitivity estimate of every input row, in arrival order.
    pub sigma: Vec<f64>,
    /// Instantiated upper bound on `Σσ̃`.
    pub sigma_budget: f64,
    pub copies: usize,
}

impl StrongCoreset {
    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn sigma_total(&self) -> f64 {
        self.sigma.iter().sum()
    }

    pub fn rows(&self, a: &DenseMatrix) -> DenseMatrix {
        a.select_rows(&self.indices)
    }
}

/// Keep row `i` with probability `probs[i]` and weight `1/probs[i]`.
pub fn importance_sample(probs: &[f64], rng: &mut SeededRng) -> Result<(Vec<usize>, Vec<f64>, Vec<f64>)> {
    let mut idx = Vec::new();
    let mut w = Vec::new();
    let mut kept = Vec::new();
    for (i, &p) in probs.iter().enumerate() {
        if !(0.0..=1.0).contains(&p) {
            return invalid(format!("probability {p} at row {i}"));
        }
        if p > 0.0 && rng.bernoulli(p) {
            idx.push(i);
            w.push(1.0 / p);
            kept.push(p);
        }
    }
    Ok((idx, w, kept))
}
