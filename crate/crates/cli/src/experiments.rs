use std::collections::BTreeMap;
use std::path::Path;

use coreset_kit::active::{
    active_large_distortion, active_lp_solve, active_online_lp_solve, regression_cost, ActiveConfig, DistortionMode,
    FileLabels, LabelOracle, LabelSource,
};
use coreset_kit::clustering::{
    center_budget, cluster_coreset, cluster_size_check, clustering_cost, default_cost_hints, kmeans_pp, online_cluster,
    ClusterCoresetConfig, OnlineClusterState,
};
use coreset_kit::css::{css_strategy, ColumnCost, CssConfig, CssContext};
use coreset_kit::ellipsoid::{
    linf_embedding_subset, mvee_coreset, mvee_method, spanning_budget, spanning_coefficients,
};
use coreset_kit::instances::gaussian;
use coreset_kit::lewis::{compute_lewis, lewis_beta, lewis_sample, LewisOptions, LewisSampleConfig};
use coreset_kit::loss::LossRegistry;
use coreset_kit::matrix::lp_norm;
use coreset_kit::online_subspace::{online_subspace_coreset, sensitivity_budget, OnlineSubspaceConfig};
use coreset_kit::oracles::{
    binomial, brute_css, center_lattice, cluster_coreset_check, exact_cluster_sensitivity, exact_lp_regression,
    instance_hash, strong_coreset_check, OracleCache,
};
use coreset_kit::regression::{chebyshev, lp_regression, IrlsOptions};
use coreset_kit::sketch::{build_sketch, PStableSketch, Sketch};
use coreset_kit::{DenseMatrix, SeededRng};
use serde_json::json;

use crate::config::{usage, ExperimentConfig, UsageError};
use crate::data::{load, synthetic_labels};
use crate::report::{Budget, Outcome, Series};

pub trait Experiment: Send + Sync {
    fn about(&self) -> &'static str;
    fn run(&self, cfg: &ExperimentConfig) -> anyhow::Result<Outcome>;
}

pub fn registry() -> BTreeMap<&'static str, Box<dyn Experiment>> {
    let mut m: BTreeMap<&'static str, Box<dyn Experiment>> = BTreeMap::new();
    m.insert("spanning-set", Box::new(SpanningSetExp));
    m.insert("lewis", Box::new(LewisExp));
    m.insert("ose-bench", Box::new(OseExp));
    m.insert("css", Box::new(CssExp));
    m.insert("online-subspace", Box::new(OnlineSubspaceExp));
    m.insert("online-cluster", Box::new(OnlineClusterExp));
    m.insert("active-regression", Box::new(ActiveExp));
    m.insert("oracle", Box::new(OracleExp));
    m.insert("verify", Box::new(VerifyExp));
    m
}

pub fn lookup(name: &str) -> anyhow::Result<Box<dyn Experiment>> {
    registry().remove(name).ok_or_else(|| {
        let names: Vec<&str> = registry().keys().copied().collect();
        UsageError(format!("unknown experiment `{name}`; expected one of {}", names.join(", "))).into()
    })
}

/// Unit-norm Gaussian directions.
fn directions(d: usize, count: usize, rng: &mut SeededRng) -> Vec<Vec<f64>> {
    (0..count)
        .map(|_| {
            let v: Vec<f64> = (0..d).map(|_| rng.normal()).collect();
            let n = lp_norm(&v, 2.0);
            v.into_iter().map(|x| x / n).collect()
        })
        .collect()
}

struct SpanningSetExp;

impl Experiment for SpanningSetExp {
    fn about(&self) -> &'static str {
        "ellipsoid coreset, l2 spanning set and l-infinity embedding"
    }

    fn run(&self, cfg: &ExperimentConfig) -> anyhow::Result<Outcome> {
        let a = load(cfg, "heavy:300x5")?;
        let eps = cfg.eps_or(0.25);
        let name = cfg.method.as_deref().unwrap_or("coordinate_ascent");
        let method = mvee_method(name)?;
        let ec = mvee_coreset(&a, eps, method.as_ref(), &mut cfg.rng("spanning"))?;
        let coef = spanning_coefficients(&a, &ec.support);
        let (ss, kappa) = linf_embedding_subset(&a, eps, method.as_ref(), &mut cfg.rng("spanning"))?;
        let sub = a.select_rows(&ss.support);
        let ratio = directions(a.cols(), cfg.c("directions", 10_000.0) as usize, &mut cfg.rng("directions"))
            .iter()
            .map(|x| lp_norm(&a.matvec(x), f64::INFINITY) / lp_norm(&sub.matvec(x), f64::INFINITY))
            .fold(0.0, f64::max);
        let d = a.cols();
        let max_coef = coef.iter().copied().fold(0.0, f64::max);
        let mut budgets = vec![
            (
                "witness".into(),
                Budget::upper("1 + eps + 1e-6", json!({"eps": eps}), 1.0 + eps + 1e-6, ec.max_witness()),
            ),
            ("coefficients".into(), Budget::upper("1 + eps", json!({"eps": eps}), 1.0 + eps, max_coef)),
            ("linf_upper".into(), Budget::upper("kappa", json!({"kappa": kappa}), kappa, ratio)),
        ];
        if name == "coordinate_ascent" {
            budgets.push((
                "size".into(),
                Budget::upper(
                    "8 * d * max(1, log2(log2 d))",
                    json!({"d": d}),
                    spanning_budget(d),
                    ec.support.len() as f64,
                ),
            ));
        }
        let mut series = Series::new(&["row", "coef_norm", "in_support", "weight"]);
        for (i, c) in coef.iter().enumerate() {
            let pos = ec.support.binary_search(&i).ok();
            series.push(vec![i as f64, *c, pos.is_some() as u8 as f64, ec.weights[i]]);
        }
        let results = json!({
            "method": ec.method, "n": a.rows(), "d": d, "support": ec.support, "weights": ec.weights,
            "max_witness": ec.max_witness(), "max_coef": max_coef, "kappa": kappa, "linf_max_ratio": ratio,
            "iterations": ec.iterations,
        });
        let lower_ok = sub.rows() <= a.rows();
        Ok(Outcome::new(results, budgets, vec![("linf_lower_structural".into(), lower_ok)], series))
    }
}

struct LewisExp;

impl Experiment for LewisExp {
    fn about(&self) -> &'static str {
        "one-sided lp Lewis weights and Lewis-weight sampling"
    }

    fn run(&self, cfg: &ExperimentConfig) -> anyhow::Result<Outcome> {
        let a = load(cfg, "gaussian:500x3")?;
        let (p, eps, delta) = (cfg.p_or(3.0), cfg.eps_or(0.3), cfg.delta_or(0.05));
        let d = a.cols();
        let lw = compute_lewis(&a, p, LewisOptions::default())?;
        let scfg = LewisSampleConfig { c: cfg.c("c", 10.0), beta_override: None };
        let s = lewis_sample(&lw, d, eps, delta, &mut cfg.rng("sample"), scfg)?;
        let sa = s.apply(&a);
        let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
        for x in directions(d, cfg.c("directions", 200.0) as usize, &mut cfg.rng("directions")) {
            let r = lp_norm(&sa.matvec(&x), p) / lp_norm(&a.matvec(&x), p);
            lo = lo.min(r);
            hi = hi.max(r);
        }
        let beta = lewis_beta(a.rows(), d, p, eps, delta, scfg);
        let mut series = Series::new(&["row", "weight", "prob"]);
        for (i, w) in lw.w.iter().enumerate() {
            series.push(vec![i as f64, *w, (beta * w).min(1.0)]);
        }
        let budgets = vec![
            ("weight_total".into(), Budget::upper("4 * d", json!({"d": d}), 4.0 * d as f64, lw.total())),
            ("embedding_upper".into(), Budget::upper("1 + eps", json!({"eps": eps}), 1.0 + eps, hi)),
            ("embedding_lower".into(), Budget::lower("1 - eps", json!({"eps": eps}), 1.0 - eps, lo)),
        ];
        let results = json!({
            "p": p, "alpha": lw.alpha, "converged": lw.converged, "iterations": lw.iterations,
            "weight_total": lw.total(), "sample_size": s.len(), "beta": beta, "min_ratio": lo, "max_ratio": hi,
        });
        Ok(Outcome::new(results, budgets, vec![("one_sided".into(), lw.alpha >= 0.99)], series))
    }
}

struct OseExp;

impl Experiment for OseExp {
    fn about(&self) -> &'static str {
        "p-stable and SRHT subspace embedding distortion"
    }

    fn run(&self, cfg: &ExperimentConfig) -> anyhow::Result<Outcome> {
        let a = load(cfg, "gaussian:300x5")?;
        let (n, d) = a.shape();
        let kind = cfg.method.as_deref().unwrap_or("pstable");
        let r_mult = cfg.c("r_mult", 40.0);
        let r = (r_mult * d as f64 * (d as f64).ln().max(1.0)).ceil() as usize;
        let mut rng = cfg.rng("sketch");
        let (sketch, p): (Box<dyn Sketch>, f64) = match kind {
            "pstable" => {
                let p = cfg.p_or(1.0);
                (Box::new(PStableSketch::new(r, n, p, cfg.c("C", 4.0), &mut rng)?), p)
            }
            "srht" => (build_sketch("srht", n, r.min(n.next_power_of_two()), 2.0, &mut rng)?, 2.0),
            other => return usage(format!("unknown sketch `{other}`")),
        };
        let sa = sketch.apply(&a)?;
        let mut series = Series::new(&["direction", "ratio"]);
        let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
        for (j, x) in directions(d, cfg.c("directions", 100.0) as usize, &mut cfg.rng("directions")).iter().enumerate()
        {
            let q = lp_norm(&sa.matvec(x), p) / lp_norm(&a.matvec(x), p);
            lo = lo.min(q);
            hi = hi.max(q);
            series.push(vec![j as f64, q]);
        }
        let budgets = if kind == "pstable" {
            vec![
                ("no_contraction".into(), Budget::lower("0.9", json!({}), 0.9, lo)),
                ("expansion".into(), Budget::upper("8 * d", json!({"d": d}), 8.0 * d as f64, hi)),
            ]
        } else {
            let eps = cfg.eps_or(0.5);
            vec![
                ("no_contraction".into(), Budget::lower("1 - eps", json!({"eps": eps}), 1.0 - eps, lo)),
                ("expansion".into(), Budget::upper("1 + eps", json!({"eps": eps}), 1.0 + eps, hi)),
            ]
        };
        let results = json!({"sketch": sketch.name(), "rows": sketch.rows(), "p": p, "min_ratio": lo, "max_ratio": hi});
        Ok(Outcome::new(results, budgets, vec![], series))
    }
}

fn column_cost(spec: &str, n: usize) -> anyhow::Result<ColumnCost> {
    if spec == "linf" {
        return Ok(ColumnCost::linf_for(n));
    }
    if let Some(p) = spec.strip_prefix("lp:") {
        let p: f64 = p.parse().map_err(|_| UsageError(format!("bad exponent in `{spec}`")))?;
        return Ok(ColumnCost::Lp(p));
    }
    Ok(ColumnCost::G(LossRegistry::default().parse(spec)?))
}

struct CssExp;

impl Experiment for CssExp {
    fn about(&self) -> &'static str {
        "column subset selection under g-norm, lp and l-infinity objectives"
    }

    fn run(&self, cfg: &ExperimentConfig) -> anyhow::Result<Outcome> {
        let a = load(cfg, "planted:40x12:2")?;
        let k = cfg.k_or(2);
        let spec = cfg.loss.as_deref().unwrap_or("huber");
        let cost = column_cost(spec, a.rows())?;
        let default = if matches!(cost, ColumnCost::G(_)) { "gnorm" } else { "boost" };
        let name = cfg.method.as_deref().unwrap_or(default);
        let strategy = css_strategy(name)?;
        let mut config = if name == "gnorm" { CssConfig::gnorm() } else { CssConfig::boost() };
        config.c_s = cfg.c("c_s", config.c_s);
        config.guard = cfg.c("guard", config.guard);
        config.sample_factor = cfg.c("sample_factor", config.sample_factor);
        config.removal_div = cfg.c("removal_div", config.removal_div);
        let mut rng = cfg.rng("css");
        let res = strategy.run(&a, k, CssContext { cost: cost.clone(), config, rng: &mut rng })?;
        let mut series = Series::new(&["round", "surviving", "sample_size", "removed", "residual"]);
        for (i, r) in res.rounds.iter().enumerate() {
            series.push(vec![i as f64, r.surviving as f64, r.sample_size as f64, r.removed.len() as f64, r.residual]);
        }
        let mut budgets = Vec::new();
        let mut oracle = serde_json::Value::Null;
        let size = res.selected.len();
        if a.cols() <= 12 && binomial(a.cols(), size) <= 1_000_000 {
            let b = brute_css(&a, size, &cost)?;
            let ratio = if b.residual == 0.0 {
                if res.residual == 0.0 {
                    1.0
                } else {
                    f64::INFINITY
                }
            } else {
                res.residual / b.residual
            };
            budgets.push(("oracle_ratio".into(), Budget::upper("2", json!({"subset_size": size}), 2.0, ratio)));
            oracle = json!({"subset": b.subset, "residual": b.residual, "evaluated": b.evaluated});
        }
        let results = json!({
            "strategy": res.strategy, "objective": res.objective, "k": k, "selected": res.selected,
            "residual": res.residual, "rounds": res.rounds.len(), "oracle": oracle,
        });
        Ok(Outcome::new(results, budgets, vec![], series))
    }
}

fn subspace_config(cfg: &ExperimentConfig) -> OnlineSubspaceConfig {
    let d = OnlineSubspaceConfig::default();
    OnlineSubspaceConfig {
        c0: cfg.c("c0", d.c0),
        c_mult: cfg.c("c_mult", d.c_mult),
        c_t: cfg.c("c_t", d.c_t),
        c_lewis: cfg.c("c_lewis", d.c_lewis),
        c_beta: cfg.c("c_beta", d.c_beta),
        delta_range: cfg.c("delta_range", d.delta_range),
        copies: cfg.consts.get("copies").map(|v| *v as usize),
    }
}

struct OnlineSubspaceExp;

impl Experiment for OnlineSubspaceExp {
    fn about(&self) -> &'static str {
        "online strong coreset for (k, p) subspace approximation"
    }

    fn run(&self, cfg: &ExperimentConfig) -> anyhow::Result<Outcome> {
        let a = load(cfg, "gaussian:60x3")?;
        let (k, p, eps, delta) = (cfg.k_or(1), cfg.p_or(1.0), cfg.eps_or(0.5), cfg.delta_or(0.1));
        let sc = subspace_config(cfg);
        let run = || online_subspace_coreset(&a, k, p, eps, delta, &mut cfg.rng("online"), sc);
        let cs = run()?;
        let replay = run()?;
        let (n, d) = a.shape();
        let t = sc.sketch_dim(k, n);
        let bound = sensitivity_budget(t, n, p, &sc, cs.copies);
        let mut budgets = vec![(
            "sigma_total".into(),
            Budget::upper(
                "R * (c_mult t^2 ln^2(n Delta))^max(1,p/2) * ln^2 t * ln n",
                json!({"R": cs.copies, "c_mult": sc.c_mult, "t": t, "n": n, "Delta": sc.delta_range, "p": p}),
                bound,
                cs.sigma_total(),
            ),
        )];
        let mut deviation = serde_json::Value::Null;
        if d <= 4 && k <= 2 {
            let res = cfg.c("net_deg", if d <= 3 { 2.0 } else { 10.0 });
            let dev = strong_coreset_check(&a, &cs.indices, &cs.weights, k, p, res)?;
            budgets.push(("net_deviation".into(), Budget::upper("eps", json!({"eps": eps, "net_deg": res}), eps, dev)));
            deviation = json!(dev);
        }
        let mut series = Series::new(&["row", "sigma", "kept_so_far"]);
        let mut kept = 0;
        for (i, s) in cs.sigma.iter().enumerate() {
            if cs.indices.get(kept) == Some(&i) {
                kept += 1;
            }
            series.push(vec![i as f64, *s, kept as f64]);
        }
        let mut csv = String::from("index,weight\n");
        for (i, w) in cs.indices.iter().zip(&cs.weights) {
            csv.push_str(&format!("{i},{w:?}\n"));
        }
        let results = json!({
            "n": n, "d": d, "k": k, "p": p, "eps": eps, "size": cs.len(), "copies": cs.copies, "sketch_dim": t,
            "sigma_total": cs.sigma_total(), "net_deviation": deviation, "constants": sc,
        });
        let checks = vec![
            ("replay_identical".into(), replay.indices == cs.indices && replay.weights == cs.weights),
            ("append_only".into(), cs.indices.windows(2).all(|w| w[0] < w[1])),
        ];
        Ok(Outcome::new(results, budgets, checks, series).with_file("coreset.csv", csv))
    }
}

struct OnlineClusterExp;

impl Experiment for OnlineClusterExp {
    fn about(&self) -> &'static str {
        "online (k, p)-clustering and its strong coreset"
    }

    fn run(&self, cfg: &ExperimentConfig) -> anyhow::Result<Outcome> {
        let a = load(cfg, "blobs:200x2:3")?;
        let (k, p, eps, delta) = (cfg.k_or(3), cfg.p_or(2.0), cfg.eps_or(0.5), cfg.delta_or(0.1));
        let (ws_default, w_upper) = default_cost_hints(&a, k, p);
        let w_star = cfg.c("w_star", ws_default);
        let st = online_cluster(&a, k, p, w_star, &mut cfg.rng("cluster"))?;
        let (_, base) = kmeans_pp(&a, k, p, 5, &mut cfg.rng("kmeans"))?;
        let cc = cluster_coreset(
            &a,
            k,
            p,
            eps,
            delta,
            &mut cfg.rng("coreset"),
            ClusterCoresetConfig { c: cfg.c("c", 2.0), w_star: Some(w_star) },
        )?;
        let n = a.rows();
        let mut budgets = vec![
            (
                "centers".into(),
                Budget::upper(
                    "16 k ln n ln(W/w*)",
                    json!({"k": k, "n": n, "W": w_upper, "w_star": w_star}),
                    center_budget(k, n, w_star, w_upper),
                    st.centers.len() as f64,
                ),
            ),
            (
                "cost_vs_kmeanspp".into(),
                Budget::upper("8 * offline", json!({"offline": base}), 8.0 * base, st.total_cost()),
            ),
        ];
        if a.cols() == 2 && k <= 2 {
            let cands = center_lattice(&a, 10, 5);
            let dev = cluster_coreset_check(&a, &cc.coreset.indices, &cc.coreset.weights, &cands, k, p);
            budgets
                .push(("grid_deviation".into(), Budget::upper("eps", json!({"eps": eps, "grid": "50x50"}), eps, dev)));
        }
        let sizes = cluster_size_check(&cc);
        let worst = sizes.iter().map(|(s, w)| (w / *s as f64 - 1.0).abs()).fold(0.0, f64::max);
        budgets.push(("cluster_sizes".into(), Budget::upper("eps", json!({"eps": eps}), eps, worst)));
        let mut series = Series::new(&["row", "center", "arrival_cost"]);
        let mut assign = String::from("index,center_id\n");
        for (i, (c, v)) in st.assignment.iter().zip(&st.arrival_cost).enumerate() {
            series.push(vec![i as f64, *c as f64, *v]);
            assign.push_str(&format!("{i},{c}\n"));
        }
        let mut csv = String::from("index,weight,center_id\n");
        let ids = cc.coreset.center_ids.clone().unwrap_or_default();
        for ((i, w), c) in cc.coreset.indices.iter().zip(&cc.coreset.weights).zip(&ids) {
            csv.push_str(&format!("{i},{w:?},{c}\n"));
        }
        let results = json!({
            "n": n, "k": k, "p": p, "centers": st.centers.len(), "rounds": st.round, "online_cost": st.total_cost(),
            "kmeanspp_cost": base, "coreset_size": cc.coreset.len(), "beta1": cc.beta1, "beta2": cc.beta2,
            "coreset_cost_at_offline": clustering_cost(&a, Some((&cc.coreset.indices, &cc.coreset.weights)), &st.centers, p),
        });
        Ok(Outcome::new(results, budgets, vec![], series)
            .with_file("coreset.csv", csv)
            .with_file("assignments.csv", assign))
    }
}

fn read_all_labels(path: &str) -> anyhow::Result<Vec<f64>> {
    let mut f = FileLabels::new(path);
    let mut out = Vec::new();
    // first read builds the index
    out.push(f.read(0)?);
    for i in 1..f.len() {
        out.push(f.read(i)?);
    }
    Ok(out)
}

struct ActiveExp;

impl Experiment for ActiveExp {
    fn about(&self) -> &'static str {
        "active lp regression (offline, online, l-infinity and lp->lq modes)"
    }

    fn run(&self, cfg: &ExperimentConfig) -> anyhow::Result<Outcome> {
        let a = load(cfg, "gaussian:4000x5")?;
        let (b, mut oracle) = match &cfg.labels {
            Some(path) => (read_all_labels(path)?, LabelOracle::new(FileLabels::new(path))),
            None if cfg.input.is_none() && cfg.stream.is_none() => {
                let b = synthetic_labels(&a, &mut cfg.rng("labels"));
                (b.clone(), LabelOracle::from_vec(b))
            }
            None => return usage("--labels is required with --input or --stream"),
        };
        if b.len() != a.rows() {
            return usage(format!("{} labels for {} rows", b.len(), a.rows()));
        }
        let mode = cfg.method.as_deref().unwrap_or("lp");
        let (eps, delta) = (cfg.eps_or(0.2), cfg.delta_or(0.1));
        let d = a.cols();
        let mut rng = cfg.rng("active");
        let full_opts = IrlsOptions { max_iters: 500, tol: 1e-12 };
        match mode {
            "lp" | "online" => {
                let p = cfg.p_or(4.0);
                let acfg = ActiveConfig {
                    c: cfg.c("c", 4.0),
                    polylog_exp: cfg.c("polylog_exp", 2.0),
                    plans: cfg.consts.get("plans").map(|v| *v as usize),
                    ..ActiveConfig::default()
                };
                let res = if mode == "lp" {
                    active_lp_solve(&a, &mut oracle, p, eps, delta, &mut rng, acfg)?
                } else {
                    active_online_lp_solve(&a, &mut oracle, p, eps, delta, &mut rng, acfg)?
                };
                let opt = lp_regression(&a, &b, p, full_opts)?.cost.powf(p);
                let rel = if opt == 0.0 { 1.0 } else { regression_cost(&a, &res.x, &b, p) / opt };
                let mut series = Series::new(&["plan", "sampled", "sampled_cost", "kkt"]);
                for (j, c) in res.candidates.iter().enumerate() {
                    series.push(vec![j as f64, c.sampled as f64, c.sampled_cost, c.kkt]);
                }
                let budgets = vec![
                    ("relative_error".into(), Budget::upper("1 + eps", json!({"eps": eps}), 1.0 + eps, rel)),
                    (
                        "queries".into(),
                        Budget::upper(
                            "d^(p/2) eps^-(p-1) [(ln d)^2 ln n + ln(1/delta)] (log2(2/eps))^e ln(1/delta)",
                            json!({"d": d, "p": p, "eps": eps, "delta": delta, "n": a.rows(), "e": acfg.polylog_exp}),
                            res.query_budget,
                            res.queries_realized as f64,
                        ),
                    ),
                ];
                let results = json!({
                    "mode": mode, "x": res.x, "chosen": res.chosen, "plans": res.candidates.len(),
                    "queries_expected": res.queries_expected, "queries_realized": res.queries_realized,
                    "relative_error": rel, "gamma": res.plan.gamma, "beta": res.plan.beta, "alpha": res.plan.alpha,
                });
                let kkt_ok = res.candidates.iter().all(|c| c.sampled == 0 || c.kkt <= 1e-8 || c.sampled_cost <= 1e-20);
                Ok(Outcome::new(results, budgets, vec![("kkt".into(), kkt_ok)], series))
            }
            "linf" | "lpq" => {
                let (m, p) = if mode == "linf" {
                    (DistortionMode::Linf, f64::INFINITY)
                } else {
                    let p = cfg.p_or(8.0);
                    (DistortionMode::LpQ { p, q: cfg.c("q", 2.0) }, p)
                };
                let res = active_large_distortion(&a, &mut oracle, m, &mut rng)?;
                let opt = if p.is_infinite() {
                    chebyshev(&a, &b, 1.01, full_opts)?.0.cost
                } else {
                    lp_regression(&a, &b, p, full_opts)?.cost
                };
                let got = if p.is_infinite() {
                    regression_cost(&a, &res.x, &b, p)
                } else {
                    regression_cost(&a, &res.x, &b, p).powf(1.0 / p)
                };
                let ratio = if opt == 0.0 {
                    if got == 0.0 {
                        1.0
                    } else {
                        f64::INFINITY
                    }
                } else {
                    got / opt
                };
                let mut series = Series::new(&["query", "row"]);
                for (j, i) in res.indices.iter().enumerate() {
                    series.push(vec![j as f64, *i as f64]);
                }
                let budgets = vec![(
                    "distortion".into(),
                    Budget::upper("certificate", json!({"certificate": res.certificate}), res.certificate, ratio),
                )];
                let results = json!({"mode": mode, "x": res.x, "queries_realized": res.queries_realized, "ratio": ratio, "certificate": res.certificate});
                Ok(Outcome::new(results, budgets, vec![], series))
            }
            other => usage(format!("unknown active mode `{other}`")),
        }
    }
}

struct OracleExp;

impl Experiment for OracleExp {
    fn about(&self) -> &'static str {
        "brute-force references: exact-lp, brute-css, cluster-sensitivity"
    }

    fn run(&self, cfg: &ExperimentConfig) -> anyhow::Result<Outcome> {
        let cache = OracleCache::new(Path::new(&cfg.out).join("cache"))?;
        let method = cfg.method.as_deref().unwrap_or("exact-lp");
        let mut series = Series::new(&["index", "value"]);
        let (report, certified, extra) = match method {
            "exact-lp" => {
                let a = load(cfg, "gaussian:30x2")?;
                let b = match &cfg.labels {
                    Some(p) => read_all_labels(p)?,
                    None => synthetic_labels(&a, &mut cfg.rng("labels")),
                };
                let p = cfg.p_or(2.0);
                let fit = exact_lp_regression(&a, &b, p)?;
                let hash = instance_hash(&a, Some(&b), &format!("exact-lp:p={p}"));
                let r = cache.get_or_compute(&hash, "exact-lp", || Ok(fit.opt))?;
                for (j, v) in fit.x.iter().enumerate() {
                    series.push(vec![j as f64, *v]);
                }
                (r, fit.certified, json!({"x": fit.x, "kkt": fit.kkt, "solver": fit.method}))
            }
            "brute-css" => {
                let a = load(cfg, "planted:30x8:2")?;
                let k = cfg.k_or(2);
                let cost = column_cost(cfg.loss.as_deref().unwrap_or("lp:2"), a.rows())?;
                let b = brute_css(&a, k, &cost)?;
                let hash = instance_hash(&a, None, &format!("brute-css:k={k}:{}", cost.label()));
                let r = cache.get_or_compute(&hash, "brute-css", || Ok(b.residual))?;
                for (j, c) in b.subset.iter().enumerate() {
                    series.push(vec![j as f64, *c as f64]);
                }
                (r, true, json!({"subset": b.subset, "evaluated": b.evaluated}))
            }
            "cluster-sensitivity" => {
                let a = load(cfg, "blobs:30x2:2")?;
                let (k, p) = (cfg.k_or(2), cfg.p_or(2.0));
                let grid = cfg.c("grid", 20.0) as usize;
                let s = exact_cluster_sensitivity(&a, k, p, grid)?;
                let total: f64 = s.iter().sum();
                let hash = instance_hash(&a, None, &format!("cluster-sensitivity:k={k}:p={p}:grid={grid}"));
                let r = cache.get_or_compute(&hash, "cluster-sensitivity", || Ok(total))?;
                for (i, v) in s.iter().enumerate() {
                    series.push(vec![i as f64, *v]);
                }
                (r, true, json!({"sensitivities": s}))
            }
            other => return usage(format!("unknown oracle `{other}`")),
        };
        let results = json!({
            "method": report.method, "instance_hash": report.instance_hash, "value": report.value,
            "details": extra,
        });
        Ok(Outcome::new(results, vec![], vec![("certified".into(), certified)], series))
    }
}

struct VerifyExp;

/// One named invariant evaluated on a batch of seeded instances.
type Check = (String, bool);

fn verify_spanning(seed: u64) -> anyhow::Result<Vec<Check>> {
    let mut out = Vec::new();
    let method = mvee_method("coordinate_ascent")?;
    for s in 0..10 {
        let mut rng = SeededRng::new(seed).child(s);
        let d = 2 + (s as usize % 6);
        let a = DenseMatrix::from_fn(100 + 40 * s as usize, d, |_, _| rng.normal() / (rng.uniform() + 0.05));
        let ec = mvee_coreset(&a, 0.25, method.as_ref(), &mut rng)?;
        let coef = spanning_coefficients(&a, &ec.support).into_iter().fold(0.0, f64::max);
        out.push((format!("witness[{s}]"), ec.max_witness() <= 1.25 + 1e-6));
        out.push((format!("coefficients[{s}]"), coef <= 1.25));
        out.push((format!("size[{s}]"), ec.support.len() as f64 <= spanning_budget(d)));
    }
    Ok(out)
}

fn verify_lewis(seed: u64) -> anyhow::Result<Vec<Check>> {
    let mut out = Vec::new();
    for s in 0..10 {
        let mut rng = SeededRng::new(seed).child(s);
        let a = gaussian(80, 3, &mut rng);
        for p in [1.0, 1.5, 3.0, 4.0, 6.0] {
            let lw = compute_lewis(&a, p, LewisOptions::default())?;
            out.push((format!("total[{s},p={p}]"), lw.total() <= 12.0));
            out.push((format!("one_sided[{s},p={p}]"), lw.alpha >= 0.99));
        }
    }
    let dup = DenseMatrix::from_rows(&[vec![1.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0]])?;
    let lw = compute_lewis(&dup, 3.0, LewisOptions::default())?;
    let want = [0.5, 0.5, 1.0];
    out.push(("duplicated_rows".into(), lw.w.iter().zip(want).all(|(a, b)| (a - b).abs() <= 1e-8)));
    Ok(out)
}

fn verify_online(seed: u64) -> anyhow::Result<Vec<Check>> {
    let mut out = Vec::new();
    let sc = OnlineSubspaceConfig { c_beta: 1e-3, copies: Some(2), ..OnlineSubspaceConfig::default() };
    for s in 0..5 {
        let a = gaussian(80, 3, &mut SeededRng::new(seed).child(s));
        // same prefix, different future
        let mut other = a.clone();
        for i in 50..80 {
            for j in 0..3 {
                other.set(i, j, 3.0 * a.get(i, j) + 1.0);
            }
        }
        let run = |m: &DenseMatrix| {
            online_subspace_coreset(m, 1, 1.0, 0.5, 0.1, &mut SeededRng::new(seed).child(100 + s), sc)
        };
        let full = run(&a)?;
        let alt = run(&other)?;
        let head =
            |c: &coreset_kit::coreset::StrongCoreset| c.indices.iter().copied().filter(|&i| i < 50).collect::<Vec<_>>();
        out.push((format!("irrevocable[{s}]"), head(&full) == head(&alt) && full.sigma[..50] == alt.sigma[..50]));
        out.push((format!("replay[{s}]"), run(&a)?.indices == full.indices));
    }
    Ok(out)
}

fn verify_cluster(seed: u64) -> anyhow::Result<Vec<Check>> {
    let mut out = Vec::new();
    for s in 0..5 {
        let mut rng = SeededRng::new(seed).child(s);
        let a = DenseMatrix::from_fn(120, 2, |i, _| 30.0 * (i % 3) as f64 + rng.normal());
        let (w, _) = default_cost_hints(&a, 3, 2.0);
        let mut rng = SeededRng::new(seed).child(50 + s);
        let mut st = OnlineClusterState::new(3, 2.0, a.rows(), w)?;
        let mut snapshot = Vec::new();
        for (i, x) in a.row_iter().enumerate() {
            st.push(x, &mut rng);
            if i == 59 {
                snapshot = st.assignment.clone();
            }
        }
        out.push((format!("assignments_immutable[{s}]"), st.assignment[..60] == snapshot[..]));
        out.push((
            format!("rounds_double[{s}]"),
            st.rounds.windows(2).all(|r| (r[1].threshold - 2.0 * r[0].threshold).abs() <= 1e-9 * r[1].threshold),
        ));
        out.push((format!("round_cap[{s}]"), st.q < st.round_cap()));
    }
    Ok(out)
}

impl Experiment for VerifyExp {
    fn about(&self) -> &'static str {
        "invariant suites: spanning, lewis, online, cluster, all"
    }

    fn run(&self, cfg: &ExperimentConfig) -> anyhow::Result<Outcome> {
        let suite = cfg.suite.as_deref().unwrap_or("all");
        let suites: Vec<&str> = match suite {
            "all" => vec!["spanning", "lewis", "online", "cluster"],
            s @ ("spanning" | "lewis" | "online" | "cluster") => vec![s],
            other => return usage(format!("unknown suite `{other}`")),
        };
        let mut checks = Vec::new();
        for s in &suites {
            let got = match *s {
                "spanning" => verify_spanning(cfg.seed)?,
                "lewis" => verify_lewis(cfg.seed)?,
                "online" => verify_online(cfg.seed)?,
                _ => verify_cluster(cfg.seed)?,
            };
            checks.extend(got.into_iter().map(|(n, ok)| (format!("{s}/{n}"), ok)));
        }
        let mut series = Series::new(&["check", "pass"]);
        for (i, (_, ok)) in checks.iter().enumerate() {
            series.push(vec![i as f64, *ok as u8 as f64]);
        }
        let failed: Vec<&str> = checks.iter().filter(|(_, ok)| !ok).map(|(n, _)| n.as_str()).collect();
        let results = json!({"suites": suites, "checks": checks.len(), "failed": failed});
        Ok(Outcome::new(results, vec![], checks, series))
    }
}
