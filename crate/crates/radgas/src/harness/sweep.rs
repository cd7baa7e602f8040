use std::collections::VecDeque;
use std::path::Path;
use std::sync::Mutex;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{RadgasError, Result};
use crate::harness::config::ExperimentConfig;
use crate::harness::presets::{preset_config, run_preset};
use crate::harness::runner::{run_experiment, RunSummary};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepItem {
    #[serde(default)]
    pub preset: Option<String>,
    #[serde(default)]
    pub config: Option<Value>,
    /// JSON-merged onto the preset's config (deep merge, arrays replaced).
    #[serde(default)]
    pub overrides: Option<Value>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepPlan {
    pub runs: Vec<SweepItem>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepAggregate {
    /// Summaries ordered by config digest, independent of completion order.
    pub summaries: Vec<RunSummary>,
    pub failures: Vec<String>,
    pub all_pass: bool,
}

fn deep_merge(base: &mut Value, patch: &Value) {
    match (base, patch) {
        (Value::Object(b), Value::Object(p)) => {
            for (k, v) in p {
                deep_merge(b.entry(k.clone()).or_insert(Value::Null), v);
            }
        }
        (b, p) => *b = p.clone(),
    }
}

fn resolve_item(item: &SweepItem) -> Result<ResolvedItem> {
    match (&item.preset, &item.config) {
        (Some(name), None) => {
            if item.overrides.is_none() && name != "convergence" {
                return Ok(ResolvedItem::Config(preset_config(name)?));
            }
            if name == "convergence" {
                return Ok(ResolvedItem::Preset(name.clone()));
            }
            let base = preset_config(name)?;
            let mut v = serde_json::to_value(&base).map_err(RadgasError::Json)?;
            deep_merge(&mut v, item.overrides.as_ref().unwrap());
            let cfg: ExperimentConfig =
                serde_json::from_value(v).map_err(|e| RadgasError::Config(e.to_string()))?;
            cfg.validate()?;
            Ok(ResolvedItem::Config(cfg))
        }
        (None, Some(v)) => {
            let mut v = v.clone();
            if let Some(p) = &item.overrides {
                deep_merge(&mut v, p);
            }
            let cfg: ExperimentConfig =
                serde_json::from_value(v).map_err(|e| RadgasError::Config(e.to_string()))?;
            cfg.validate()?;
            Ok(ResolvedItem::Config(cfg))
        }
        _ => Err(RadgasError::Config(
            "each sweep item needs exactly one of preset or config".into(),
        )),
    }
}

enum ResolvedItem {
    Config(ExperimentConfig),
    Preset(String),
}

pub fn parse_plan(path: &Path) -> Result<SweepPlan> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| RadgasError::Config(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| RadgasError::Config(e.to_string()))
}

/// Run every item of the plan, up to `jobs` concurrently. Each experiment is
/// an isolated sequential unit; aggregation is a pure fold over the finished
/// summaries ordered by config digest, so the result does not depend on the
/// parallelism level or completion order.
pub fn sweep(plan: &SweepPlan, jobs: usize, out: Option<&Path>) -> Result<SweepAggregate> {
    let jobs = jobs.max(1);
    let items: Vec<ResolvedItem> = plan.runs.iter().map(resolve_item).collect::<Result<_>>()?;
    let queue: Mutex<VecDeque<(usize, ResolvedItem)>> =
        Mutex::new(items.into_iter().enumerate().collect());
    let results: Mutex<Vec<(usize, Result<RunSummary>)>> = Mutex::new(Vec::new());

    std::thread::scope(|scope| {
        for _ in 0..jobs {
            scope.spawn(|| loop {
                let next = queue.lock().unwrap().pop_front();
                let Some((idx, item)) = next else { break };
                let res = match item {
                    ResolvedItem::Config(cfg) => run_experiment(&cfg, out),
                    ResolvedItem::Preset(name) => run_preset(&name, out),
                };
                results.lock().unwrap().push((idx, res));
            });
        }
    });

    let mut summaries = Vec::new();
    let mut failures = Vec::new();
    for (idx, res) in results.into_inner().unwrap() {
        match res {
            Ok(s) => summaries.push(s),
            Err(e) => failures.push(format!("run {idx}: {e}")),
        }
    }
    summaries.sort_by(|a, b| a.digest.cmp(&b.digest));
    failures.sort();
    let all_pass = failures.is_empty() && summaries.iter().all(|s| s.verdict);
    let agg = SweepAggregate {
        summaries,
        failures,
        all_pass,
    };
    if let Some(dir) = out {
        std::fs::create_dir_all(dir).map_err(RadgasError::Io)?;
        let json = serde_json::to_string_pretty(&agg).map_err(RadgasError::Json)?;
        std::fs::write(dir.join("sweep.json"), json + "\n").map_err(RadgasError::Io)?;
    }
    Ok(agg)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_plan_gives_empty_aggregate() {
        let agg = sweep(&SweepPlan { runs: vec![] }, 3, None).unwrap();
        assert!(agg.summaries.is_empty() && agg.failures.is_empty() && agg.all_pass);
    }

    #[test]
    fn deep_merge_overrides_nested_fields() {
        let mut base = serde_json::json!({"a": {"b": 1, "c": 2}, "d": [1, 2]});
        deep_merge(&mut base, &serde_json::json!({"a": {"c": 3}, "d": [9]}));
        assert_eq!(base, serde_json::json!({"a": {"b": 1, "c": 3}, "d": [9]}));
    }

    #[test]
    fn items_need_exactly_one_source() {
        let bad = SweepItem {
            preset: None,
            config: None,
            overrides: None,
        };
        assert!(resolve_item(&bad).is_err());
    }
}
