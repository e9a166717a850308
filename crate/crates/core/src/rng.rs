//! Splittable deterministic randomness.
//!
//! Every stream is a ChaCha8 generator keyed by `sha256(seed, path)`, so a
//! component's draws depend only on its position in the call tree and never
//! on how many numbers its siblings consumed or on thread scheduling.

use rand::seq::index;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};
use sha2::{Digest, Sha256};

#[derive(Clone, Debug)]
pub struct SeededRng {
    seed: u64,
    path: Vec<u64>,
    inner: ChaCha8Rng,
}

fn key(seed: u64, path: &[u64]) -> [u8; 32] {
    let mut h = Sha256::new();
    h.update(seed.to_le_bytes());
    for p in path {
        h.update(p.to_le_bytes());
    }
    let out = h.finalize();
    let mut k = [0u8; 32];
    k.copy_from_slice(&out);
    k
}

impl SeededRng {
    pub fn new(seed: u64) -> Self {
        Self::at(seed, Vec::new())
    }

    fn at(seed: u64, path: Vec<u64>) -> Self {
        let inner = ChaCha8Rng::from_seed(key(seed, &path));
        Self { seed, path, inner }
    }

    /// Independent stream for sub-component `label`. Does not advance `self`.
    pub fn child(&self, label: u64) -> Self {
        let mut path = self.path.clone();
        path.push(label);
        Self::at(self.seed, path)
    }

    /// Child keyed by a string label, for readability at call sites.
    pub fn named(&self, label: &str) -> Self {
        let h = Sha256::digest(label.as_bytes());
        let mut b = [0u8; 8];
        b.copy_from_slice(&h[..8]);
        self.child(u64::from_le_bytes(b))
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn path(&self) -> &[u64] {
        &self.path
    }

    pub fn uniform(&mut self) -> f64 {
        self.inner.random::<f64>()
    }

    /// Uniform on the open interval `(0, 1)`.
    pub fn uniform_open(&mut self) -> f64 {
        loop {
            let u = self.uniform();
            if u > 0.0 {
                return u;
            }
        }
    }

    pub fn normal(&mut self) -> f64 {
        StandardNormal.sample(&mut self.inner)
    }

    pub fn exp1(&mut self) -> f64 {
        Exp1.sample(&mut self.inner)
    }

    pub fn bernoulli(&mut self, p: f64) -> bool {
        if p >= 1.0 {
            return true;
        }
        if p <= 0.0 {
            return false;
        }
        self.uniform() < p
    }

    pub fn sign(&mut self) -> f64 {
        if self.inner.random::<bool>() {
            1.0
        } else {
            -1.0
        }
    }

    pub fn below(&mut self, n: usize) -> usize {
        self.inner.random_range(0..n)
    }

    /// `k` distinct indices from `0..n`, sorted.
    pub fn subset(&mut self, n: usize, k: usize) -> Vec<usize> {
        let mut v = index::sample(&mut self.inner, n, k.min(n)).into_vec();
        v.sort_unstable();
        v
    }

    pub fn shuffle<T>(&mut self, xs: &mut [T]) {
        use rand::seq::SliceRandom;
        xs.shuffle(&mut self.inner);
    }
}

impl RngCore for SeededRng {
    fn next_u32(&mut self) -> u32 {
        self.inner.next_u32()
    }
    fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }
    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.inner.fill_bytes(dst)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn children_are_stable_and_distinct() {
        let root = SeededRng::new(7);
        let mut a = root.child(1);
        let _ = root.child(2).uniform();
        let mut b = SeededRng::new(7).child(1);
        assert_eq!(a.next_u64(), b.next_u64());
        let mut c = root.child(2);
        let mut d = root.child(1);
        assert_ne!(c.next_u64(), d.next_u64());
    }

    #[test]
    fn subset_is_sorted_and_distinct() {
        let mut r = SeededRng::new(3);
        let s = r.subset(50, 10);
        assert_eq!(s.len(), 10);
        assert!(s.windows(2).all(|w| w[0] < w[1]));
    }
}
