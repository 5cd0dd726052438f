//! Many runs at once: every config crossed with optional seed and horizon
//! lists, executed in parallel and aggregated per config and horizon.

use std::collections::BTreeMap;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::config::ExperimentConfig;
use crate::output::write_outputs;
use crate::run::run_experiment;
use crate::BenchError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub configs: Vec<ExperimentConfig>,
    /// Replaces each config's seed; one run per entry.
    #[serde(default)]
    pub seeds: Vec<u64>,
    /// Replaces each config's horizon; one run per entry.
    #[serde(default)]
    pub rounds: Vec<usize>,
}

impl SweepConfig {
    pub fn parse(text: &str) -> Result<Self, BenchError> {
        let cfg: SweepConfig =
            serde_json::from_str(text).map_err(|e| BenchError::Config(e.to_string()))?;
        if cfg.configs.is_empty() {
            return Err(BenchError::Config("configs: must not be empty".into()));
        }
        for c in &cfg.configs {
            c.validate()?;
        }
        if cfg.rounds.contains(&0) {
            return Err(BenchError::Config("rounds: must be at least 1".into()));
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, BenchError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| BenchError::Config(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// `(config index, concrete config)` for every run.
    pub fn expand(&self) -> Vec<(usize, ExperimentConfig)> {
        let mut out = Vec::new();
        for (i, base) in self.configs.iter().enumerate() {
            let seeds: Vec<Option<u64>> = if self.seeds.is_empty() {
                vec![None]
            } else {
                self.seeds.iter().copied().map(Some).collect()
            };
            let horizons: Vec<Option<usize>> = if self.rounds.is_empty() {
                vec![None]
            } else {
                self.rounds.iter().copied().map(Some).collect()
            };
            for &r in &horizons {
                for &s in &seeds {
                    let mut c = base.clone();
                    if let Some(s) = s {
                        c.set_seed(s);
                    }
                    if let Some(r) = r {
                        c.set_rounds(r);
                    }
                    out.push((i, c));
                }
            }
        }
        out
    }
}

fn horizon(c: &ExperimentConfig) -> Option<usize> {
    match c {
        ExperimentConfig::Frechet(c) => Some(c.rounds),
        ExperimentConfig::Quadgame(c) => Some(c.rounds),
        ExperimentConfig::RobustPca(c) => Some(c.rounds),
        ExperimentConfig::Verify(_) => None,
    }
}

type Metrics = BTreeMap<String, f64>;

/// Scalar end-of-run metrics per algorithm, keyed `algorithm/metric`.
pub fn final_metrics(summary: &Value) -> BTreeMap<String, f64> {
    let mut out = BTreeMap::new();
    if let Some(algs) = summary.get("algorithms").and_then(Value::as_object) {
        for (name, a) in algs {
            for key in [
                "final_cumulative_loss",
                "final_regret",
                "average_duality_gap",
                "max_distance_to_reference",
            ] {
                if let Some(v) = a.get(key).and_then(Value::as_f64) {
                    out.insert(format!("{name}/{key}"), v);
                }
            }
            if let Some(v) = a.pointer("/grad_norm/best").and_then(Value::as_f64) {
                out.insert(format!("{name}/best_grad_norm"), v);
            }
            if let Some(v) = a.pointer("/grad_norm/last").and_then(Value::as_f64) {
                out.insert(format!("{name}/last_grad_norm"), v);
            }
        }
    }
    if let Some(v) = summary.get("max_violation").and_then(Value::as_f64) {
        out.insert("max_violation".into(), v);
    }
    out
}

fn mean_std(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    let var = if v.len() > 1 {
        v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)
    } else {
        0.0
    };
    (mean, var.sqrt())
}

/// Runs the sweep. Each run's files go to `out/run-<k>/`; failures are
/// recorded per run and do not stop the others.
pub fn sweep(cfg: &SweepConfig, out: Option<&Path>) -> Result<Value, BenchError> {
    let runs = cfg.expand();
    let results: Vec<Result<Value, BenchError>> = runs
        .par_iter()
        .enumerate()
        .map(|(k, (_, c))| {
            let res = run_experiment(c)?;
            if let Some(dir) = out {
                write_outputs(&dir.join(format!("run-{k:03}")), c.name(), &res)?;
            }
            let bad = crate::run::diverged(&res.summary);
            if !bad.is_empty() {
                return Err(BenchError::Numeric(format!("diverged: {}", bad.join(", "))));
            }
            Ok(res.summary)
        })
        .collect();

    let mut entries = Vec::new();
    let mut groups: BTreeMap<(usize, Option<usize>), Vec<Metrics>> = BTreeMap::new();
    let mut failures = 0;
    for (k, ((i, c), r)) in runs.iter().zip(results).enumerate() {
        match r {
            Ok(summary) => {
                let metrics = final_metrics(&summary);
                entries.push(json!({
                    "run": k, "config": i, "experiment": c.name(), "seed": c.seed(),
                    "rounds": horizon(c), "metrics": metrics,
                }));
                groups.entry((*i, horizon(c))).or_default().push(metrics);
            }
            Err(e) => {
                failures += 1;
                entries.push(json!({
                    "run": k, "config": i, "experiment": c.name(), "seed": c.seed(),
                    "rounds": horizon(c), "error": e.to_string(),
                }));
            }
        }
    }

    let aggregates: Vec<Value> = groups
        .iter()
        .map(|((i, rounds), ms)| {
            let mut keys: Vec<&String> = ms.iter().flat_map(|m| m.keys()).collect();
            keys.sort();
            keys.dedup();
            let stats: BTreeMap<&String, Value> = keys
                .into_iter()
                .map(|key| {
                    let vals: Vec<f64> = ms.iter().filter_map(|m| m.get(key).copied()).collect();
                    let (mean, std) = mean_std(&vals);
                    (key, json!({ "mean": mean, "std": std, "n": vals.len() }))
                })
                .collect();
            json!({ "config": i, "rounds": rounds, "runs": ms.len(), "metrics": stats })
        })
        .collect();

    Ok(json!({
        "runs": entries,
        "failures": failures,
        "aggregates": aggregates,
    }))
}
