use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::analysis::{pearson, saturation_front, SaturationFront};
use super::grid::{Metric, SweepGrid};
use super::sweep::{per_seed_path, runtime_path, RuntimeRecord, TIMESCALES_FILE};
use crate::error::{Error, Result};
use crate::timescales::TimescaleReport;

pub const SUMMARY_JSON: &str = "summary.json";
pub const SUMMARY_TEXT: &str = "summary.txt";

const SWEPT: [Metric; 2] = [Metric::IpcTotal, Metric::KrylovObservability];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricSummary {
    pub metric: Metric,
    pub seeds: Vec<u64>,
    pub saturation: SaturationFront,
    pub runtime: RuntimeRecord,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub metrics: Vec<MetricSummary>,
    /// Correlation of the mean capacity and observability grids, when both
    /// were swept.
    pub pearson: Option<f64>,
    pub timescales: Option<TimescaleReport>,
}

/// Mean grid recomputed from the per-seed grids listed in a runtime record.
fn load_mean(
    dir: &Path,
    runtime: &RuntimeRecord,
    missing: &mut Vec<PathBuf>,
) -> Result<Option<SweepGrid>> {
    let mut grids = Vec::new();
    for &seed in &runtime.seeds {
        let path = per_seed_path(dir, runtime.metric, seed);
        if path.exists() {
            grids.push(SweepGrid::read_csv(&path)?);
        } else {
            missing.push(path);
        }
    }
    if grids.len() < runtime.seeds.len() {
        return Ok(None);
    }
    SweepGrid::mean_of(&grids).map(Some)
}

/// Summarizes a run directory: saturation fronts, the capacity/observability
/// correlation, timescales and runtimes.
pub fn report(dir: &Path) -> Result<RunSummary> {
    let mut missing = Vec::new();
    let mut metrics = Vec::new();
    let mut means = BTreeMap::new();
    for metric in SWEPT {
        let path = runtime_path(dir, metric);
        if !path.exists() {
            continue;
        }
        let runtime: RuntimeRecord = serde_json::from_str(&std::fs::read_to_string(&path)?)?;
        if let Some(mean) = load_mean(dir, &runtime, &mut missing)? {
            metrics.push(MetricSummary {
                metric,
                seeds: runtime.seeds.clone(),
                saturation: saturation_front(&mean)?,
                runtime,
            });
            means.insert(metric.name(), mean);
        }
    }
    if metrics.is_empty() && missing.is_empty() {
        missing.extend(SWEPT.iter().map(|&m| runtime_path(dir, m)));
    }
    if !missing.is_empty() {
        return Err(Error::MissingInputs(missing));
    }
    let pearson = match (
        means.get(Metric::IpcTotal.name()),
        means.get(Metric::KrylovObservability.name()),
    ) {
        (Some(ipc), Some(obs)) => Some(pearson(ipc, obs)?),
        _ => None,
    };
    let ts_path = dir.join(TIMESCALES_FILE);
    let timescales = if ts_path.exists() {
        Some(serde_json::from_str(&std::fs::read_to_string(ts_path)?)?)
    } else {
        None
    };
    Ok(RunSummary {
        metrics,
        pearson,
        timescales,
    })
}

impl RunSummary {
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        if let Some(p) = self.pearson {
            out.push_str(&format!(
                "Pearson correlation (IPC vs observability): {p:.4}\n"
            ));
        }
        for m in &self.metrics {
            out.push_str(&format!(
                "{}: seeds {:?}, maximum {:.4}, saturation T = {}, V = {}, runtime {:.1} s ({:.1} s per reservoir)\n",
                m.metric,
                m.seeds,
                m.saturation.maximum,
                m.saturation.t_sat,
                m.saturation.v_sat,
                m.runtime.wall_seconds,
                m.runtime.seconds_per_reservoir
            ));
        }
        if let Some(ts) = &self.timescales {
            out.push_str(&format!(
                "mean Zeno time {}, mean Heisenberg time {:.4}\n",
                ts.zeno_mean.0, ts.heisenberg_time
            ));
        }
        out
    }

    pub fn write(&self, dir: &Path) -> Result<()> {
        std::fs::write(dir.join(SUMMARY_JSON), serde_json::to_string_pretty(self)?)?;
        std::fs::write(dir.join(SUMMARY_TEXT), self.to_text())?;
        Ok(())
    }
}
