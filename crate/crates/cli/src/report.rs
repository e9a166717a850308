use std::fs;
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;
use serde_json::{json, Map, Value};

use crate::config::ExperimentConfig;

/// A bound instantiated with its constants next to the measured value.
#[derive(Clone, Debug, Serialize)]
pub struct Budget {
    pub formula: String,
    pub constants: Map<String, Value>,
    pub bound: f64,
    pub measured: f64,
    pub holds: bool,
}

impl Budget {
    /// `measured ≤ bound`.
    pub fn upper(formula: &str, constants: Value, bound: f64, measured: f64) -> Self {
        Self::new(formula, constants, bound, measured, measured <= bound)
    }

    /// `measured ≥ bound`.
    pub fn lower(formula: &str, constants: Value, bound: f64, measured: f64) -> Self {
        Self::new(formula, constants, bound, measured, measured >= bound)
    }

    fn new(formula: &str, constants: Value, bound: f64, measured: f64, holds: bool) -> Self {
        let constants = match constants {
            Value::Object(m) => m,
            _ => Map::new(),
        };
        Self { formula: formula.into(), constants, bound, measured, holds }
    }
}

#[derive(Clone, Debug, Default)]
pub struct Series {
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Series {
    pub fn new(header: &[&str]) -> Self {
        Self { header: header.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }
}

pub struct Outcome {
    pub results: Value,
    pub budgets: Vec<(String, Budget)>,
    /// Extra pass conditions that are not bounds.
    pub checks: Vec<(String, bool)>,
    pub series: Series,
    /// Additional files written next to the report.
    pub files: Vec<(String, String)>,
    pub pass: bool,
}

impl Outcome {
    pub fn new(results: Value, budgets: Vec<(String, Budget)>, checks: Vec<(String, bool)>, series: Series) -> Self {
        let pass = budgets.iter().all(|(_, b)| b.holds) && checks.iter().all(|(_, c)| *c);
        Self { results, budgets, checks, series, files: Vec::new(), pass }
    }

    pub fn with_file(mut self, name: &str, contents: String) -> Self {
        self.files.push((name.into(), contents));
        self
    }
}

fn timestamp() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0)
}

/// Writes `report.json`, `series.csv` and any extra files under `cfg.out`.
pub fn write(cfg: &ExperimentConfig, outcome: Outcome) -> anyhow::Result<()> {
    let dir = Path::new(&cfg.out);
    fs::create_dir_all(dir)?;
    let budgets: Map<String, Value> = outcome
        .budgets
        .iter()
        .map(|(k, b)| Ok((k.clone(), serde_json::to_value(b)?)))
        .collect::<anyhow::Result<_>>()?;
    let checks: Map<String, Value> = outcome.checks.iter().map(|(k, v)| (k.clone(), Value::Bool(*v))).collect();
    let report = json!({
        "experiment": cfg.command,
        "config": cfg,
        "pass": outcome.pass,
        "results": outcome.results,
        "budgets": budgets,
        "checks": checks,
        "timestamp": timestamp(),
    });
    fs::write(dir.join("report.json"), serde_json::to_string_pretty(&report)? + "\n")?;
    let mut w = csv::Writer::from_path(dir.join("series.csv"))?;
    w.write_record(&outcome.series.header)?;
    for r in &outcome.series.rows {
        w.write_record(r.iter().map(|v| format!("{v:?}")))?;
    }
    w.flush()?;
    for (name, body) in outcome.files {
        fs::write(dir.join(name), body)?;
    }
    println!("{} {}", if outcome.pass { "PASS" } else { "FAIL" }, dir.join("report.json").display());
    Ok(())
}
