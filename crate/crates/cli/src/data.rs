use std::path::Path;

use coreset_kit::instances::{gaussian, hard_instance, planted_low_rank, HardKind, Noise};
use coreset_kit::io::{read_matrix, read_stream};
use coreset_kit::{DenseMatrix, SeededRng};

use crate::config::{usage, ExperimentConfig};

fn dims(s: &str) -> anyhow::Result<(usize, usize)> {
    let (n, d) = s.split_once('x').ok_or_else(|| crate::config::UsageError(format!("expected NxD, got `{s}`")))?;
    let parse = |v: &str| v.trim().parse::<usize>().map_err(|_| crate::config::UsageError(format!("bad size `{v}`")));
    Ok((parse(n)?, parse(d)?))
}

/// `gaussian:NxD`, `heavy:NxD`, `planted:NxD:K`, `blobs:NxD:K`,
/// `spanning_lb:D`.
pub fn generate(spec: &str, rng: &mut SeededRng) -> anyhow::Result<DenseMatrix> {
    let parts: Vec<&str> = spec.split(':').collect();
    let extra = |i: usize, default: usize| -> anyhow::Result<usize> {
        match parts.get(i) {
            None => Ok(default),
            Some(v) => {
                v.parse().map_err(|_| crate::config::UsageError(format!("bad parameter `{v}` in `{spec}`")).into())
            }
        }
    };
    match parts[0] {
        "gaussian" => {
            let (n, d) = dims(parts.get(1).copied().unwrap_or("200x4"))?;
            Ok(gaussian(n, d, rng))
        }
        "heavy" => {
            let (n, d) = dims(parts.get(1).copied().unwrap_or("200x4"))?;
            Ok(DenseMatrix::from_fn(n, d, |_, _| rng.normal() / (rng.uniform() + 0.05)))
        }
        "planted" => {
            let (n, d) = dims(parts.get(1).copied().unwrap_or("40x12"))?;
            let k = extra(2, 2)?;
            Ok(planted_low_rank(n, d, k, Noise::Sparse, 1.0, rng)?.a)
        }
        "blobs" => {
            let (n, d) = dims(parts.get(1).copied().unwrap_or("200x2"))?;
            let k = extra(2, 3)?.max(1);
            let centers: Vec<Vec<f64>> = (0..k).map(|_| (0..d).map(|_| 40.0 * rng.normal()).collect()).collect();
            Ok(DenseMatrix::from_fn(n, d, |i, j| centers[i % k][j] + rng.normal()))
        }
        "spanning_lb" => {
            let d = extra(1, 5)?;
            Ok(hard_instance(HardKind::SpanningLb { d }, rng)?.a)
        }
        other => usage(format!("unknown generator `{other}`")),
    }
}

/// The experiment's input rows: `--input`, else `--stream`, else the
/// generator (falling back to `default_gen`).
pub fn load(cfg: &ExperimentConfig, default_gen: &str) -> anyhow::Result<DenseMatrix> {
    if let Some(p) = &cfg.input {
        return Ok(read_matrix(Path::new(p))?);
    }
    if let Some(p) = &cfg.stream {
        return Ok(read_stream(Path::new(p))?);
    }
    let spec = cfg.generator.as_deref().unwrap_or(default_gen);
    generate(spec, &mut cfg.rng("generator"))
}

/// Labels `b = A x₀ + N(0, 1)` for generated inputs.
pub fn synthetic_labels(a: &DenseMatrix, rng: &mut SeededRng) -> Vec<f64> {
    let x0: Vec<f64> = (0..a.cols()).map(|_| rng.normal()).collect();
    a.matvec(&x0).into_iter().map(|v| v + rng.normal()).collect()
}
