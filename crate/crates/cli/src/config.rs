use std::collections::BTreeMap;
use std::path::PathBuf;

use clap::Parser;
use serde::Serialize;

#[derive(Debug)]
pub struct UsageError(pub String);

impl std::error::Error for UsageError {}

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

pub fn usage<T>(msg: impl Into<String>) -> anyhow::Result<T> {
    Err(UsageError(msg.into()).into())
}

fn parse_const(s: &str) -> Result<(String, f64), String> {
    let (k, v) = s.split_once('=').ok_or_else(|| format!("expected name=value, got `{s}`"))?;
    let v: f64 = v.trim().parse().map_err(|_| format!("`{v}` is not a number"))?;
    Ok((k.trim().to_string(), v))
}

#[derive(Parser, Debug)]
#[command(name = "coreset-kit", version, about = "Run coreset, sketching and active-regression experiments")]
pub struct Cli {
    /// Experiment name, or `list`.
    pub command: String,
    /// Matrix file with a `# rows=n cols=d` header.
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Row stream, one comma-separated row per line.
    #[arg(long)]
    pub stream: Option<PathBuf>,
    /// Label file, one value per line.
    #[arg(long)]
    pub labels: Option<PathBuf>,
    /// Synthetic input instead of a file, e.g. `gaussian:200x4`.
    #[arg(long)]
    pub generator: Option<String>,
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long)]
    pub p: Option<f64>,
    #[arg(long)]
    pub eps: Option<f64>,
    #[arg(long)]
    pub delta: Option<f64>,
    /// Required by every experiment.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Override a constant, `--const name=value`; repeatable.
    #[arg(long = "const", value_parser = parse_const)]
    pub consts: Vec<(String, f64)>,
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
    /// Loss for `css`, e.g. `huber`, `lp:4`, `linf`, `cauchy:2`.
    #[arg(long)]
    pub loss: Option<String>,
    /// Invariant suite for `verify`.
    #[arg(long)]
    pub suite: Option<String>,
    /// Method or mode selector where an experiment has several.
    #[arg(long)]
    pub method: Option<String>,
}

/// Everything that determines a run; echoed into every report.
#[derive(Clone, Debug, Serialize)]
pub struct ExperimentConfig {
    pub command: String,
    pub input: Option<String>,
    pub stream: Option<String>,
    pub labels: Option<String>,
    pub generator: Option<String>,
    pub k: Option<usize>,
    pub p: Option<f64>,
    pub eps: Option<f64>,
    pub delta: Option<f64>,
    pub seed: u64,
    pub consts: BTreeMap<String, f64>,
    pub out: String,
    pub loss: Option<String>,
    pub suite: Option<String>,
    pub method: Option<String>,
}

fn path_str(p: &Option<PathBuf>) -> Option<String> {
    p.as_ref().map(|p| p.display().to_string())
}

impl ExperimentConfig {
    pub fn from_cli(cli: &Cli) -> anyhow::Result<Self> {
        let Some(seed) = cli.seed else {
            return usage("--seed is required");
        };
        let mut consts = BTreeMap::new();
        for (k, v) in &cli.consts {
            if consts.insert(k.clone(), *v).is_some() {
                return usage(format!("constant `{k}` given twice"));
            }
        }
        for (name, v) in [("eps", cli.eps), ("delta", cli.delta)] {
            if let Some(v) = v {
                if !(v > 0.0 && v < 1.0) {
                    return usage(format!("--{name} must lie in (0, 1)"));
                }
            }
        }
        if let Some(p) = cli.p {
            if p.is_nan() || p < 1.0 {
                return usage("--p must be at least 1");
            }
        }
        Ok(Self {
            command: cli.command.clone(),
            input: path_str(&cli.input),
            stream: path_str(&cli.stream),
            labels: path_str(&cli.labels),
            generator: cli.generator.clone(),
            k: cli.k,
            p: cli.p,
            eps: cli.eps,
            delta: cli.delta,
            seed,
            consts,
            out: cli.out.display().to_string(),
            loss: cli.loss.clone(),
            suite: cli.suite.clone(),
            method: cli.method.clone(),
        })
    }

    /// Constant `name`, or `default` when not overridden.
    pub fn c(&self, name: &str, default: f64) -> f64 {
        self.consts.get(name).copied().unwrap_or(default)
    }

    pub fn k_or(&self, v: usize) -> usize {
        self.k.unwrap_or(v)
    }

    pub fn p_or(&self, v: f64) -> f64 {
        self.p.unwrap_or(v)
    }

    pub fn eps_or(&self, v: f64) -> f64 {
        self.eps.unwrap_or(v)
    }

    pub fn delta_or(&self, v: f64) -> f64 {
        self.delta.unwrap_or(v)
    }

    pub fn rng(&self, label: &str) -> coreset_kit::SeededRng {
        coreset_kit::SeededRng::new(self.seed).named(label)
    }
}
