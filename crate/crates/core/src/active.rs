//! Active ℓp regression: solve `min ‖Ax − b‖_p` while reading few labels.

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader, Read, Seek, SeekFrom};
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;

use crate::ellipsoid::{linf_embedding_subset, CoordinateAscent};
use crate::error::{invalid, Error, Result};
use crate::lewis::{
    compute_lewis, lewis_beta, reweight_p_to_q, sample_rows, LewisOptions, LewisSampleConfig, OnlineLewis,
};
use crate::linalg::numerical_rank;
use crate::matrix::{lp_norm, DenseMatrix};
use crate::regression::{chebyshev, lp_regression, IrlsOptions};
use crate::rng::SeededRng;

pub trait LabelSource: Send {
    fn len(&self) -> usize;
    fn is_empty(&self) -> bool {
        self.len() == 0
    }
    fn read(&mut self, i: usize) -> Result<f64>;
}

impl LabelSource for Vec<f64> {
    fn len(&self) -> usize {
        self.as_slice().len()
    }
    fn read(&mut self, i: usize) -> Result<f64> {
        self.get(i).copied().ok_or_else(|| Error::InvalidInput(format!("label {i} out of range")))
    }
}

/// One label per line; `#` lines are skipped. Line offsets are indexed on
/// the first read and values are parsed only when asked for.
pub struct FileLabels {
    path: PathBuf,
    offsets: Option<Vec<(u64, usize)>>,
    file: Option<File>,
}

impl FileLabels {
    pub fn new(path: impl AsRef<Path>) -> Self {
        Self { path: path.as_ref().to_path_buf(), offsets: None, file: None }
    }

    fn index(&mut self) -> Result<&[(u64, usize)]> {
        if self.offsets.is_none() {
            let mut r = BufReader::new(File::open(&self.path)?);
            let mut out = Vec::new();
            let mut pos = 0u64;
            let mut line = String::new();
            let mut lineno = 0;
            loop {
                line.clear();
                let k = r.read_line(&mut line)?;
                if k == 0 {
                    break;
                }
                lineno += 1;
                let t = line.trim();
                if !t.is_empty() && !t.starts_with('#') {
                    out.push((pos, lineno));
                }
                pos += k as u64;
            }
            self.offsets = Some(out);
        }
        Ok(self.offsets.as_deref().expect("just built"))
    }
}

impl LabelSource for FileLabels {
    fn len(&self) -> usize {
        self.offsets.as_ref().map_or(0, |o| o.len())
    }

    fn read(&mut self, i: usize) -> Result<f64> {
        let (off, lineno) =
            *self.index()?.get(i).ok_or_else(|| Error::InvalidInput(format!("label {i} out of range")))?;
        if self.file.is_none() {
            self.file = Some(File::open(&self.path)?);
        }
        let f = self.file.as_mut().expect("opened");
        f.seek(SeekFrom::Start(off))?;
        let mut buf = Vec::new();
        let mut byte = [0u8; 1];
        while f.read(&mut byte)? == 1 && byte[0] != b'\n' {
            buf.push(byte[0]);
        }
        let s = String::from_utf8_lossy(&buf);
        let first = s.split(',').next().unwrap_or("").trim();
        first.parse::<f64>().map_err(|e| Error::Parse { line: lineno, msg: format!("{first:?}: {e}") })
    }
}

/// Reads labels on demand and counts each index once.
pub struct LabelOracle {
    source: Box<dyn LabelSource>,
    cache: HashMap<usize, f64>,
}

impl LabelOracle {
    pub fn new(source: impl LabelSource + 'static) -> Self {
        Self { source: Box::new(source), cache: HashMap::new() }
    }

    pub fn from_vec(b: Vec<f64>) -> Self {
        Self::new(b)
    }

    pub fn read(&mut self, i: usize) -> Result<f64> {
        if let Some(v) = self.cache.get(&i) {
            return Ok(*v);
        }
        let v = self.source.read(i)?;
        self.cache.insert(i, v);
        Ok(v)
    }

    /// Distinct indices read so far.
    pub fn reads(&self) -> usize {
        self.cache.len()
    }

    pub fn read_indices(&self) -> Vec<usize> {
        let mut v: Vec<usize> = self.cache.keys().copied().collect();
        v.sort_unstable();
        v
    }
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct ActiveConfig {
    /// Constant in front of the keep probability.
    pub c: f64,
    /// `γ = ε / (log₂(2/ε))^polylog_exp`.
    pub polylog_exp: f64,
    /// Number of plans; `⌈8 ln(1/δ)⌉` when unset.
    pub plans: Option<usize>,
    pub irls: IrlsOptions,
}

impl Default for ActiveConfig {
    fn default() -> Self {
        Self { c: 4.0, polylog_exp: 2.0, plans: None, irls: IrlsOptions { max_iters: 200, tol: 1e-8 } }
    }
}

impl ActiveConfig {
    pub fn plan_count(&self, delta: f64) -> usize {
        self.plans.unwrap_or_else(|| (8.0 * (1.0 / delta).ln()).ceil().max(1.0) as usize)
    }

    pub fn gamma(&self, eps: f64) -> f64 {
        eps / (2.0 / eps).log2().powf(self.polylog_exp)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ActivePlan {
    pub probs: Vec<f64>,
    pub beta: f64,
    pub gamma: f64,
    pub eps: f64,
    /// Failure rate handed to each plan.
    pub delta: f64,
    pub alpha: f64,
    pub queries_expected: f64,
}

/// `p_i = min{c (p/2)^{(p/2)/(1−2/p)} α^{−p/2} w_i / (d β), 1}` with
/// `β = α ε^p / (γ ‖w‖₁^{p/2} [ln²(d‖w‖₁) ln n + ln(1/δ)])`.
pub fn plan_probs(
    w: &[f64],
    w_total: f64,
    alpha: f64,
    d: usize,
    p: f64,
    eps: f64,
    delta: f64,
    cfg: &ActiveConfig,
) -> ActivePlan {
    let n = w.len().max(2) as f64;
    let gamma = cfg.gamma(eps);
    let logs = (d as f64 * w_total).ln().max(1.0).powi(2) * n.ln() + (1.0 / delta).ln();
    let beta = alpha * eps.powf(p) / (gamma * w_total.powf(p / 2.0) * logs);
    let lead = cfg.c * (p / 2.0).powf((p / 2.0) / (1.0 - 2.0 / p)) / alpha.powf(p / 2.0);
    let probs: Vec<f64> = w.iter().map(|&wi| (lead * wi / (d as f64 * beta)).min(1.0)).collect();
    let queries_expected = probs.iter().sum();
    ActivePlan { probs, beta, gamma, eps, delta, alpha, queries_expected }
}

/// `d^{p/2} ε^{−(p−1)} [(ln d)² ln n + ln(1/δ)] (log₂(2/ε))^e ln(1/δ)`.
pub fn query_budget(n: usize, d: usize, p: f64, eps: f64, delta: f64, cfg: &ActiveConfig) -> f64 {
    let ld = (d as f64).ln().max(1.0);
    (d as f64).powf(p / 2.0) / eps.powf(p - 1.0)
        * (ld * ld * (n.max(2) as f64).ln() + (1.0 / delta).ln())
        * (2.0 / eps).log2().powf(cfg.polylog_exp)
        * (1.0 / delta).ln().max(1.0)
}

#[derive(Clone, Debug, Serialize)]
pub struct Candidate {
    pub x: Vec<f64>,
    pub sampled: usize,
    pub sampled_cost: f64,
    pub kkt: f64,
    pub converged: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct ActiveResult {
    pub x: Vec<f64>,
    pub chosen: usize,
    pub candidates: Vec<Candidate>,
    pub plan: ActivePlan,
    pub queries_realized: usize,
    pub queries_expected: f64,
    pub query_budget: f64,
}

/// Index `i` of the first candidate within the 80th-percentile pairwise
/// distance `τ` of at least half the candidates.
pub fn median_select(a: &DenseMatrix, cands: &[Vec<f64>], p: f64) -> usize {
    let l = cands.len();
    if l <= 1 {
        return 0;
    }
    let ax: Vec<Vec<f64>> = cands.iter().map(|x| a.matvec(x)).collect();
    let mut dist = vec![0.0; l * l];
    for i in 0..l {
        for j in 0..i {
            let diff: Vec<f64> = ax[i].iter().zip(&ax[j]).map(|(u, v)| u - v).collect();
            let v = lp_norm(&diff, p);
            dist[i * l + j] = v;
            dist[j * l + i] = v;
        }
    }
    let mut sorted = dist.clone();
    sorted.sort_by(f64::total_cmp);
    let tau = sorted[((l * l) as f64 * 0.8).floor() as usize - 1];
    (0..l).find(|&i| 2 * (0..l).filter(|&j| dist[i * l + j] <= tau).count() >= l).unwrap_or(0)
}

fn solve_plan(
    a: &DenseMatrix,
    idx: &[usize],
    scales: &[f64],
    labels: &HashMap<usize, f64>,
    p: f64,
    opts: IrlsOptions,
) -> Result<Candidate> {
    if idx.is_empty() {
        return Ok(Candidate { x: vec![0.0; a.cols()], sampled: 0, sampled_cost: 0.0, kkt: 0.0, converged: true });
    }
    let sa = a.select_rows(idx).scale_rows(scales);
    let sb: Vec<f64> = idx.iter().zip(scales).map(|(i, s)| labels[i] * s).collect();
    let f = lp_regression(&sa, &sb, p, opts)?;
    Ok(Candidate { sampled: idx.len(), sampled_cost: f.cost.powf(p), kkt: f.kkt, converged: f.converged, x: f.x })
}

fn finish(
    a: &DenseMatrix,
    plan: ActivePlan,
    draws: Vec<(Vec<usize>, Vec<f64>)>,
    oracle: &mut LabelOracle,
    p: f64,
    budget: f64,
    cfg: &ActiveConfig,
) -> Result<ActiveResult> {
    let before = oracle.reads();
    let mut labels = HashMap::new();
    for (idx, _) in &draws {
        for &i in idx {
            labels.insert(i, oracle.read(i)?);
        }
    }
    let candidates: Vec<Candidate> =
        draws.par_iter().map(|(idx, sc)| solve_plan(a, idx, sc, &labels, p, cfg.irls)).collect::<Result<_>>()?;
    let xs: Vec<Vec<f64>> = candidates.iter().map(|c| c.x.clone()).collect();
    let chosen = median_select(a, &xs, p);
    let queries_expected = plan.queries_expected;
    Ok(ActiveResult {
        x: xs[chosen].clone(),
        chosen,
        candidates,
        plan,
        queries_realized: oracle.reads() - before,
        queries_expected,
        query_budget: budget,
    })
}

fn check_inputs(a: &DenseMatrix, p: f64, eps: f64, delta: f64) -> Result<()> {
    if !(p > 2.0) || !p.is_finite() {
        return invalid(format!("active regression needs finite p > 2, got {p}"));
    }
    if !(eps > 0.0 && eps < 1.0) || !(delta > 0.0 && delta < 1.0) {
        return invalid("eps and delta must lie in (0, 1)");
    }
    if numerical_rank(a) < a.cols() {
        return Err(Error::RankDeficient(format!("rank(A) < d = {}", a.cols())));
    }
    Ok(())
}

pub fn active_lp_solve(
    a: &DenseMatrix,
    oracle: &mut LabelOracle,
    p: f64,
    eps: f64,
    delta: f64,
    rng: &mut SeededRng,
    cfg: ActiveConfig,
) -> Result<ActiveResult> {
    check_inputs(a, p, eps, delta)?;
    let (n, d) = a.shape();
    let lw = compute_lewis(a, p, LewisOptions::default())?;
    let l = cfg.plan_count(delta);
    let plan_delta = delta / (l as f64 * (1.0 / eps).ln().ln().max(1.0));
    let plan = plan_probs(&lw.w, lw.total(), lw.alpha, d, p, eps, plan_delta, &cfg);
    let draws: Vec<(Vec<usize>, Vec<f64>)> = (0..l)
        .map(|j| {
            let s = sample_rows(&plan.probs, p, &mut rng.child(j as u64));
            (s.indices, s.scales)
        })
        .collect();
    finish(a, plan, draws, oracle, p, query_budget(n, d, p, eps, delta, &cfg), &cfg)
}

/// Same as [`active_lp_solve`] with online Lewis weights; each row's read
/// decision is made on arrival. `‖w‖₁` in `β` is taken to be `d`.
pub fn active_online_lp_solve(
    a: &DenseMatrix,
    oracle: &mut LabelOracle,
    p: f64,
    eps: f64,
    delta: f64,
    rng: &mut SeededRng,
    cfg: ActiveConfig,
) -> Result<ActiveResult> {
    check_inputs(a, p, eps, delta)?;
    let (n, d) = a.shape();
    let l = cfg.plan_count(delta);
    let plan_delta = delta / (l as f64 * (1.0 / eps).ln().ln().max(1.0));
    let mut ol = OnlineLewis::new(d, p, 0.0)?;
    let mut coins: Vec<SeededRng> = (0..l).map(|j| rng.child(j as u64)).collect();
    let mut draws: Vec<(Vec<usize>, Vec<f64>)> = vec![(Vec::new(), Vec::new()); l];
    let mut w = Vec::with_capacity(n);
    let mut probs = Vec::with_capacity(n);
    // unit weights over n rows, so the log factor sees the stream length
    let unit = plan_probs(&vec![1.0; n], d as f64, 1.0, d, p, eps, plan_delta, &cfg);
    let scale = cfg.c * (p / 2.0).powf((p / 2.0) / (1.0 - 2.0 / p)) / (d as f64 * unit.beta);
    let mut before = None;
    for (i, row) in a.row_iter().enumerate() {
        let wi = ol.push_weight(row);
        w.push(wi);
        // the probability is linear in w_i below the cap
        let pi = (scale * wi).min(1.0);
        probs.push(pi);
        let mut read = false;
        for (c, dr) in coins.iter_mut().zip(draws.iter_mut()) {
            if pi > 0.0 && c.bernoulli(pi) {
                dr.0.push(i);
                dr.1.push(pi.powf(-1.0 / p));
                read = true;
            }
        }
        if read {
            before.get_or_insert(oracle.reads());
            oracle.read(i)?;
        }
    }
    let queries_expected = probs.iter().sum();
    let plan = ActivePlan { probs, queries_expected, ..unit };
    let realized_before = before.unwrap_or(oracle.reads());
    let mut res = finish(a, plan, draws, oracle, p, online_query_budget(n, d, p, eps, delta, &cfg, None), &cfg)?;
    res.queries_realized = oracle.reads() - realized_before;
    Ok(res)
}

/// Offline budget inflated by `(ln(nκ))^{p/2+1}`; `κ = n` when unknown.
pub fn online_query_budget(
    n: usize,
    d: usize,
    p: f64,
    eps: f64,
    delta: f64,
    cfg: &ActiveConfig,
    kappa: Option<f64>,
) -> f64 {
    let k = kappa.unwrap_or(n as f64);
    query_budget(n, d, p, eps, delta, cfg) * (n as f64 * k).ln().max(1.0).powf(p / 2.0 + 1.0)
}

#[derive(Clone, Copy, Debug, Serialize)]
pub enum DistortionMode {
    Linf,
    LpQ { p: f64, q: f64 },
}

#[derive(Clone, Debug, Serialize)]
pub struct LargeDistortionResult {
    pub x: Vec<f64>,
    pub indices: Vec<usize>,
    pub queries_realized: usize,
    /// A-priori bound on `‖Ax̃ − b‖ / OPT` in the mode's norm.
    pub certificate: f64,
}

pub fn active_large_distortion(
    a: &DenseMatrix,
    oracle: &mut LabelOracle,
    mode: DistortionMode,
    rng: &mut SeededRng,
) -> Result<LargeDistortionResult> {
    let d = a.cols();
    let before = oracle.reads();
    let opts = IrlsOptions { max_iters: 200, tol: 1e-10 };
    match mode {
        DistortionMode::Linf => {
            let (ss, kappa) = linf_embedding_subset(a, 0.25, &CoordinateAscent::default(), rng)?;
            let sb: Vec<f64> = ss.support.iter().map(|&i| oracle.read(i)).collect::<Result<_>>()?;
            let factor = 1.1;
            let (fit, _) = chebyshev(&a.select_rows(&ss.support), &sb, factor, opts)?;
            Ok(LargeDistortionResult {
                x: fit.x,
                queries_realized: oracle.reads() - before,
                certificate: (factor + 1.0) * kappa + 1.0,
                indices: ss.support,
            })
        }
        DistortionMode::LpQ { p, q } => {
            if !(2.0 <= q && q < p) || !p.is_finite() {
                return invalid(format!("lp_q needs 2 <= q < p < inf, got p={p}, q={q}"));
            }
            let lw = compute_lewis(a, p, LewisOptions::default())?;
            let r = reweight_p_to_q(&lw, q);
            let wa = a.scale_rows(&r);
            let lq = compute_lewis(&wa, q, LewisOptions::default())?;
            let (eps, delta) = (0.5, 0.01);
            let beta = lewis_beta(a.rows(), d, q, eps, delta, LewisSampleConfig::default());
            let probs: Vec<f64> = lq.w.iter().map(|w| (beta * w).min(1.0)).collect();
            let s = sample_rows(&probs, q, rng);
            let scales: Vec<f64> = s.indices.iter().zip(&s.scales).map(|(&i, sc)| sc * r[i]).collect();
            let sb: Vec<f64> =
                s.indices.iter().zip(&scales).map(|(&i, sc)| oracle.read(i).map(|v| v * sc)).collect::<Result<_>>()?;
            let fit = lp_regression(&a.select_rows(&s.indices).scale_rows(&scales), &sb, q, opts)?;
            let dist = (d as f64).powf(0.5 * (1.0 - q / p)) * (1.0 + eps) / (1.0 - eps);
            Ok(LargeDistortionResult {
                x: fit.x,
                queries_realized: oracle.reads() - before,
                certificate: 2.0 * dist + 1.0,
                indices: s.indices,
            })
        }
    }
}

/// `‖Ax − b‖_p^p` for finite `p`, `‖Ax − b‖_∞` otherwise.
pub fn regression_cost(a: &DenseMatrix, x: &[f64], b: &[f64], p: f64) -> f64 {
    let r: Vec<f64> = a.matvec(x).iter().zip(b).map(|(u, v)| u - v).collect();
    if p.is_infinite() {
        lp_norm(&r, p)
    } else {
        lp_norm(&r, p).powf(p)
    }
}

/// Uniform row sample of expected size `m`, weights `(n/m)^{1/p}`.
pub fn uniform_solve(a: &DenseMatrix, b: &[f64], p: f64, m: f64, rng: &mut SeededRng) -> Result<Vec<f64>> {
    let n = a.rows();
    let q = (m / n as f64).min(1.0);
    let s = sample_rows(&vec![q; n], p, rng);
    if s.is_empty() {
        return Ok(vec![0.0; a.cols()]);
    }
    let sb = s.apply_vec(b);
    Ok(lp_regression(&s.apply(a), &sb, p, IrlsOptions { max_iters: 200, tol: 1e-8 })?.x)
}
