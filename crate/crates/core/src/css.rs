//! Column subset selection under g-losses and entrywise ℓp / ℓ∞.
//!
//! Strategies share [`CssStrategy`] and are looked up by name:
//! `gnorm` (sampling rounds with 160·s·log d columns per draw and d/960
//! removals), `boost` (30·s columns, d/20 removals) and `lp_rank_factor`
//! (Lewis-weighted leverage sampling of a best rank-k right factor).

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::lewis::{compute_lewis, LewisOptions};
use crate::linalg::{best_rank_k, leverage_scores, numerical_rank, pinv};
use crate::loss::LossSpec;
use crate::matrix::{lp_norm, DenseMatrix};
use crate::regression::{g_regression, lp_regression, IrlsOptions};
use crate::rng::SeededRng;

/// How one column's residual is charged.
#[derive(Clone, Debug)]
pub enum ColumnCost {
    /// `Σ g(r_i)`.
    G(LossSpec),
    /// `Σ |r_i|^p`.
    Lp(f64),
    /// Selection by `Σ|r_i|^q`, reporting `max |r_i|`.
    Linf { q: f64 },
}

impl ColumnCost {
    /// `ℓ∞` through the surrogate exponent `2⌈log₂ n⌉`.
    pub fn linf_for(n: usize) -> Self {
        ColumnCost::Linf { q: (2.0 * (n.max(2) as f64).log2().ceil()).max(2.0) }
    }

    pub fn label(&self) -> String {
        match self {
            ColumnCost::G(g) => format!("g:{}", g.name()),
            ColumnCost::Lp(p) => format!("lp:{p}"),
            ColumnCost::Linf { q } => format!("linf(q={q})"),
        }
    }

    /// Best coefficients for `col ≈ B x` and their additive cost.
    pub fn fit(&self, b: &DenseMatrix, col: &[f64]) -> Result<(Vec<f64>, f64)> {
        if b.cols() == 0 {
            return Ok((vec![], self.column_cost(col)));
        }
        let opts = IrlsOptions { max_iters: 100, tol: 1e-10 };
        match self {
            ColumnCost::G(g) => {
                let f = g_regression(b, col, g.as_ref(), opts)?;
                Ok((f.x, f.cost))
            }
            ColumnCost::Lp(p) => {
                let f = lp_regression(b, col, *p, opts)?;
                Ok((f.x, f.cost.powf(*p)))
            }
            ColumnCost::Linf { q } => {
                let f = lp_regression(b, col, *q, opts)?;
                Ok((f.x, f.cost.powf(*q)))
            }
        }
    }

    /// Additive cost of a residual column.
    pub fn column_cost(&self, r: &[f64]) -> f64 {
        match self {
            ColumnCost::G(g) => r.iter().map(|&v| g.eval(v)).sum(),
            ColumnCost::Lp(p) => r.iter().map(|v| v.abs().powf(*p)).sum(),
            ColumnCost::Linf { q } => lp_norm(r, *q).powf(*q),
        }
    }

    /// The reported residual of a full residual matrix: `Σg` for losses,
    /// `‖·‖_{p,p}` for ℓp and `max |·|` for ℓ∞.
    pub fn report(&self, resid: &DenseMatrix) -> f64 {
        match self {
            ColumnCost::G(g) => resid.data().iter().map(|&v| g.eval(v)).sum(),
            ColumnCost::Lp(p) => lp_norm(resid.data(), *p),
            ColumnCost::Linf { .. } => resid.max_abs(),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct RoundTrace {
    pub surviving: usize,
    pub sample_size: usize,
    pub chosen_draw: usize,
    pub draw_costs: Vec<f64>,
    pub removed: Vec<usize>,
    /// Largest cost among removed columns for the chosen draw.
    pub removed_max_cost: f64,
    /// Smallest cost among surviving columns for the chosen draw.
    pub kept_min_cost: f64,
    /// Residual of `A` against all columns selected so far.
    pub residual: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct CssResult {
    pub strategy: String,
    pub objective: String,
    pub selected: Vec<usize>,
    /// `|S|×d` coefficients with `A ≈ A|^S X`.
    pub x: DenseMatrix,
    pub residual: f64,
    pub rounds: Vec<RoundTrace>,
}

/// Tunables for the sampling-round strategies.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct CssConfig {
    /// `s = ⌈c_s·k·max(1, log₂log₂ k)⌉`.
    pub c_s: f64,
    /// Rounds run while `|T| ≥ guard·s`.
    pub guard: f64,
    /// Draw size factor: `t = sample_factor·s` (times `log₂|T|` when
    /// `log_sample` is set).
    pub sample_factor: f64,
    pub log_sample: bool,
    /// Each round removes `⌊|T|/removal_div⌋` (at least one) columns.
    pub removal_div: f64,
}

impl CssConfig {
    pub fn gnorm() -> Self {
        Self { c_s: 1.0, guard: 1000.0, sample_factor: 160.0, log_sample: true, removal_div: 960.0 }
    }

    pub fn boost() -> Self {
        Self { c_s: 1.0, guard: 1000.0, sample_factor: 30.0, log_sample: false, removal_div: 20.0 }
    }

    pub fn s(&self, k: usize) -> usize {
        let kf = k as f64;
        let ll = kf.log2().max(1.0).log2().max(1.0);
        (self.c_s * kf * ll).ceil().max(1.0) as usize
    }
}

pub struct CssContext<'a> {
    pub cost: ColumnCost,
    pub config: CssConfig,
    pub rng: &'a mut SeededRng,
}

pub trait CssStrategy: Send + Sync {
    fn name(&self) -> &'static str;
    fn run(&self, a: &DenseMatrix, k: usize, ctx: CssContext<'_>) -> Result<CssResult>;
}

/// Fits every column of `a` against `a|^cols`; returns `X` and the residual
/// matrix.
pub fn fit_all(a: &DenseMatrix, cols: &[usize], cost: &ColumnCost) -> Result<(DenseMatrix, DenseMatrix)> {
    let b = a.select_cols(cols);
    let fits: Vec<(Vec<f64>, f64)> =
        (0..a.cols()).into_par_iter().map(|j| cost.fit(&b, &a.col(j))).collect::<Result<_>>()?;
    let x = DenseMatrix::from_fn(cols.len(), a.cols(), |i, j| fits[j].0[i]);
    let resid = a.sub(&b.matmul(&x)?)?;
    Ok((x, resid))
}

fn check(a: &DenseMatrix, k: usize) -> Result<()> {
    if k == 0 || k > a.cols() {
        return invalid(format!("k={k} outside 1..={}", a.cols()));
    }
    if a.rows() == 0 {
        return invalid("empty matrix");
    }
    Ok(())
}

/// Shared loop of the two sampling-round strategies.
fn sampling_rounds(name: &'static str, a: &DenseMatrix, k: usize, ctx: CssContext<'_>) -> Result<CssResult> {
    check(a, k)?;
    let CssContext { cost, config, rng } = ctx;
    let d = a.cols();
    let s = config.s(k);
    let draws = ((d.max(2) as f64).log2().max(2.0).log2().ceil() as usize) + 2;
    let mut surviving: Vec<usize> = (0..d).collect();
    let mut selected: Vec<usize> = Vec::new();
    let mut rounds = Vec::new();
    let mut round = 0u64;
    while surviving.len() as f64 >= config.guard * s as f64 {
        let dl = surviving.len();
        let mut t = config.sample_factor * s as f64;
        if config.log_sample {
            t *= (dl as f64).log2();
        }
        let t = (t.ceil() as usize).clamp(1, dl);
        let remove = ((dl as f64 / config.removal_div).floor() as usize).max(1);
        let mut best: Option<(f64, Vec<usize>, Vec<(usize, f64)>, usize)> = None;
        let mut draw_costs = Vec::with_capacity(draws);
        for draw in 0..draws {
            let mut r = rng.child(round * 1000 + draw as u64);
            let h: Vec<usize> = r.subset(dl, t).into_iter().map(|i| surviving[i]).collect();
            let b = a.select_cols(&h);
            let mut costs: Vec<(usize, f64)> =
                surviving.par_iter().map(|&j| cost.fit(&b, &a.col(j)).map(|(_, c)| (j, c))).collect::<Result<_>>()?;
            costs.sort_by(|x, y| x.1.total_cmp(&y.1).then(x.0.cmp(&y.0)));
            let c: f64 = costs[..remove].iter().map(|x| x.1).sum();
            draw_costs.push(c);
            if best.as_ref().is_none_or(|b| c < b.0) {
                best = Some((c, h, costs, draw));
            }
        }
        let (_, h, costs, chosen) = best.expect("at least one draw");
        let removed: Vec<usize> = costs[..remove].iter().map(|x| x.0).collect();
        let removed_max_cost = costs[remove - 1].1;
        let kept_min_cost = costs.get(remove).map_or(f64::INFINITY, |x| x.1);
        selected.extend(h);
        selected.sort_unstable();
        selected.dedup();
        surviving.retain(|j| !removed.contains(j));
        let (_, resid) = fit_all(a, &selected, &cost)?;
        rounds.push(RoundTrace {
            surviving: dl,
            sample_size: t,
            chosen_draw: chosen,
            draw_costs,
            removed,
            removed_max_cost,
            kept_min_cost,
            residual: cost.report(&resid),
        });
        round += 1;
    }
    selected.extend(surviving);
    selected.sort_unstable();
    selected.dedup();
    let (x, resid) = fit_all(a, &selected, &cost)?;
    Ok(CssResult { strategy: name.into(), objective: cost.label(), residual: cost.report(&resid), selected, x, rounds })
}

pub struct GNormCss;

impl CssStrategy for GNormCss {
    fn name(&self) -> &'static str {
        "gnorm"
    }
    fn run(&self, a: &DenseMatrix, k: usize, ctx: CssContext<'_>) -> Result<CssResult> {
        sampling_rounds(self.name(), a, k, ctx)
    }
}

pub struct BoostCss;

impl CssStrategy for BoostCss {
    fn name(&self) -> &'static str {
        "boost"
    }
    fn run(&self, a: &DenseMatrix, k: usize, ctx: CssContext<'_>) -> Result<CssResult> {
        sampling_rounds(self.name(), a, k, ctx)
    }
}

/// Columns picked by leverage of `W^{1/2−1/p}V` where `UVᵀ` is the best
/// rank-k approximation and `W` the ℓp Lewis weights of `V`.
pub struct LpRankFactor {
    /// Expected sample size is about `c·k·ln(k+1)`.
    pub c: f64,
    pub retries: usize,
}

impl Default for LpRankFactor {
    fn default() -> Self {
        Self { c: 4.0, retries: 50 }
    }
}

impl CssStrategy for LpRankFactor {
    fn name(&self) -> &'static str {
        "lp_rank_factor"
    }

    fn run(&self, a: &DenseMatrix, k: usize, ctx: CssContext<'_>) -> Result<CssResult> {
        check(a, k)?;
        if k > a.rows() {
            return invalid("k exceeds the row count");
        }
        let CssContext { cost, rng, .. } = ctx;
        let p = match &cost {
            ColumnCost::Lp(p) => *p,
            _ => return invalid("lp_rank_factor needs an entrywise ℓp objective"),
        };
        let v = best_rank_k(a, k)?.v; // d×k
        let lw = compute_lewis(&v, p, LewisOptions::default())?;
        let e = 0.5 - 1.0 / p;
        let scale: Vec<f64> = lw.w.iter().map(|&w| if w > 0.0 { w.powf(e) } else { 0.0 }).collect();
        let m = v.scale_rows(&scale);
        let tau = leverage_scores(&m);
        let kf = k as f64;
        let beta = self.c * (kf + 1.0).ln().max(1.0);
        let probs: Vec<f64> = tau.iter().map(|t| (beta * t).min(1.0)).collect();
        for attempt in 0..self.retries {
            let mut r = rng.child(attempt as u64);
            let picked: Vec<usize> = (0..a.cols()).filter(|&j| r.bernoulli(probs[j])).collect();
            if picked.is_empty() || numerical_rank(&m.select_rows(&picked)) < numerical_rank(&m) {
                continue;
            }
            // sketched (p,2) solve for the left factor, written in A's columns
            let s_j: Vec<f64> = picked.iter().map(|&j| 1.0 / probs[j].sqrt()).collect();
            let ms = m.select_rows(&picked).scale_rows(&s_j);
            let coef = pinv(&ms.transpose()).matmul(&v.transpose())?; // |S|×d
            let x_sketch =
                DenseMatrix::from_fn(picked.len(), a.cols(), |i, j| coef.get(i, j) * scale[picked[i]] * s_j[i]);
            let b = a.select_cols(&picked);
            let resid_sketch = a.sub(&b.matmul(&x_sketch)?)?;
            let (x_fit, resid_fit) = fit_all(a, &picked, &cost)?;
            let (x, resid) = if cost.report(&resid_fit) <= cost.report(&resid_sketch) {
                (x_fit, resid_fit)
            } else {
                (x_sketch, resid_sketch)
            };
            return Ok(CssResult {
                strategy: self.name().into(),
                objective: cost.label(),
                residual: cost.report(&resid),
                selected: picked,
                x,
                rounds: Vec::new(),
            });
        }
        Err(Error::NonConvergence(format!("no full-rank column sample in {} draws", self.retries)))
    }
}

/// Name → strategy table.
pub fn css_strategies() -> BTreeMap<&'static str, Box<dyn CssStrategy>> {
    let mut m: BTreeMap<&'static str, Box<dyn CssStrategy>> = BTreeMap::new();
    for s in [Box::new(GNormCss) as Box<dyn CssStrategy>, Box::new(BoostCss), Box::new(LpRankFactor::default())] {
        m.insert(s.name(), s);
    }
    m
}

pub fn css_strategy(name: &str) -> Result<Box<dyn CssStrategy>> {
    css_strategies().remove(name).ok_or_else(|| Error::UnknownName(name.into()))
}

pub fn css_gnorm(a: &DenseMatrix, k: usize, loss: LossSpec, rng: &mut SeededRng) -> Result<CssResult> {
    GNormCss.run(a, k, CssContext { cost: ColumnCost::G(loss), config: CssConfig::gnorm(), rng })
}

pub fn css_boost(a: &DenseMatrix, k: usize, cost: ColumnCost, rng: &mut SeededRng) -> Result<CssResult> {
    BoostCss.run(a, k, CssContext { cost, config: CssConfig::boost(), rng })
}

pub fn lp_rank_factor(a: &DenseMatrix, k: usize, p: f64, rng: &mut SeededRng) -> Result<CssResult> {
    LpRankFactor::default().run(a, k, CssContext { cost: ColumnCost::Lp(p), config: CssConfig::boost(), rng })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::loss::Huber;
    use std::sync::Arc;

    #[test]
    fn small_d_selects_everything_by_default() {
        let a = DenseMatrix::from_fn(10, 5, |i, j| ((i * 3 + j * 7) % 11) as f64);
        let r = css_gnorm(&a, 2, Arc::new(Huber), &mut SeededRng::new(0)).unwrap();
        assert_eq!(r.selected, vec![0, 1, 2, 3, 4]);
        assert!(r.residual < 1e-12);
        assert!(r.rounds.is_empty());
    }

    #[test]
    fn s_formula() {
        assert_eq!(CssConfig::gnorm().s(1), 1);
        assert_eq!(CssConfig::gnorm().s(4), 4);
        assert_eq!(CssConfig::gnorm().s(16), 32);
    }

    #[test]
    fn k_bounds() {
        let a = DenseMatrix::identity(3);
        assert!(css_gnorm(&a, 0, Arc::new(Huber), &mut SeededRng::new(0)).is_err());
        assert!(css_gnorm(&a, 4, Arc::new(Huber), &mut SeededRng::new(0)).is_err());
    }
}
