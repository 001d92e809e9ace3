use std::fmt;
use std::path::Path;
use std::str::FromStr;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::reservoir::state::csv_error;

/// Quantity stored in a sweep grid.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    IpcTotal,
    KrylovObservability,
    /// Forward difference along the multiplexing axis.
    DeltaPerV,
}

impl Metric {
    pub fn name(self) -> &'static str {
        match self {
            Metric::IpcTotal => "ipc_total",
            Metric::KrylovObservability => "krylov_observability",
            Metric::DeltaPerV => "delta_per_v",
        }
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Metric {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ipc_total" => Ok(Metric::IpcTotal),
            "krylov_observability" => Ok(Metric::KrylovObservability),
            "delta_per_v" => Ok(Metric::DeltaPerV),
            other => Err(Error::invalid(format!("unknown metric `{other}`"))),
        }
    }
}

/// Whether a grid holds one ensemble member or the ensemble mean.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Aggregation {
    Mean,
    PerSeed { seed: u64 },
}

impl fmt::Display for Aggregation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Aggregation::Mean => f.write_str("mean"),
            Aggregation::PerSeed { seed } => write!(f, "seed:{seed}"),
        }
    }
}

impl FromStr for Aggregation {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        if s == "mean" {
            return Ok(Aggregation::Mean);
        }
        s.strip_prefix("seed:")
            .and_then(|n| n.parse().ok())
            .map(|seed| Aggregation::PerSeed { seed })
            .ok_or_else(|| Error::invalid(format!("unknown aggregation `{s}`")))
    }
}

/// A metric evaluated on a clock-cycle × multiplexing grid; rows follow
/// `t_values`, columns follow `v_values`.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepGrid {
    pub metric: Metric,
    pub aggregation: Aggregation,
    pub ensemble: Vec<u64>,
    pub t_values: Vec<f64>,
    pub v_values: Vec<usize>,
    pub cells: DMatrix<f64>,
}

impl SweepGrid {
    pub fn new(
        metric: Metric,
        aggregation: Aggregation,
        ensemble: Vec<u64>,
        t_values: Vec<f64>,
        v_values: Vec<usize>,
        cells: DMatrix<f64>,
    ) -> Result<Self> {
        check_axes(&t_values, &v_values)?;
        if cells.shape() != (t_values.len(), v_values.len()) {
            return Err(Error::invalid(format!(
                "cells are {}×{}, axes are {}×{}",
                cells.nrows(),
                cells.ncols(),
                t_values.len(),
                v_values.len()
            )));
        }
        Ok(Self {
            metric,
            aggregation,
            ensemble,
            t_values,
            v_values,
            cells,
        })
    }

    pub fn same_axes(&self, other: &SweepGrid) -> bool {
        self.t_values == other.t_values && self.v_values == other.v_values
    }

    /// Entrywise mean of grids sharing a metric and axes.
    pub fn mean_of(grids: &[SweepGrid]) -> Result<SweepGrid> {
        let first = grids
            .first()
            .ok_or_else(|| Error::invalid("mean of an empty ensemble"))?;
        let mut sum = DMatrix::zeros(first.cells.nrows(), first.cells.ncols());
        let mut ensemble = Vec::new();
        for g in grids {
            if !g.same_axes(first) || g.metric != first.metric {
                return Err(Error::invalid("grids to average differ in metric or axes"));
            }
            sum += &g.cells;
            ensemble.extend(&g.ensemble);
        }
        Self::new(
            first.metric,
            Aggregation::Mean,
            ensemble,
            first.t_values.clone(),
            first.v_values.clone(),
            sum / grids.len() as f64,
        )
    }

    /// CSV with the metadata and axes in `#` comment lines, then a header
    /// `T,<V values…>` and one row per clock cycle.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut text = String::new();
        text.push_str(&format!("# metric={}\n", self.metric));
        text.push_str(&format!("# aggregation={}\n", self.aggregation));
        text.push_str(&format!("# ensemble={}\n", join(&self.ensemble)));
        text.push_str(&format!("# t_values={}\n", join(&self.t_values)));
        text.push_str(&format!("# v_values={}\n", join(&self.v_values)));
        let mut w = csv::Writer::from_writer(Vec::new());
        let mut header = vec!["T".to_owned()];
        header.extend(self.v_values.iter().map(usize::to_string));
        w.write_record(&header).map_err(|e| csv_error(path, e))?;
        for (r, t) in self.t_values.iter().enumerate() {
            let mut row = vec![t.to_string()];
            row.extend(self.cells.row(r).iter().map(f64::to_string));
            w.write_record(&row).map_err(|e| csv_error(path, e))?;
        }
        let body = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
        text.push_str(std::str::from_utf8(&body).expect("csv output is UTF-8"));
        std::fs::write(path, text)?;
        Ok(())
    }

    pub fn read_csv(path: &Path) -> Result<SweepGrid> {
        let text = std::fs::read_to_string(path)?;
        let bad = |reason: String| Error::Format {
            path: path.to_owned(),
            reason,
        };
        let meta = |key: &str| -> Result<&str> {
            text.lines()
                .filter_map(|l| l.strip_prefix("# "))
                .find_map(|l| l.strip_prefix(key).and_then(|rest| rest.strip_prefix('=')))
                .ok_or_else(|| bad(format!("missing `{key}` comment")))
        };
        let metric: Metric = meta("metric")?
            .parse()
            .map_err(|e: Error| bad(e.to_string()))?;
        let aggregation: Aggregation = meta("aggregation")?
            .parse()
            .map_err(|e: Error| bad(e.to_string()))?;
        let ensemble: Vec<u64> = split(meta("ensemble")?).map_err(bad)?;
        let t_values: Vec<f64> = split(meta("t_values")?).map_err(bad)?;
        let v_values: Vec<usize> = split(meta("v_values")?).map_err(bad)?;
        let mut r = csv::ReaderBuilder::new()
            .comment(Some(b'#'))
            .from_reader(text.as_bytes());
        let header: Vec<String> = r
            .headers()
            .map_err(|e| csv_error(path, e))?
            .iter()
            .map(str::to_owned)
            .collect();
        if header.len() != v_values.len() + 1 {
            return Err(bad("header does not match v_values".into()));
        }
        let mut data = Vec::new();
        let mut rows = 0;
        for rec in r.records() {
            let rec = rec.map_err(|e| csv_error(path, e))?;
            for field in rec.iter().skip(1) {
                data.push(field.parse::<f64>().map_err(|e| bad(e.to_string()))?);
            }
            rows += 1;
        }
        if rows != t_values.len() || data.len() != rows * v_values.len() {
            return Err(bad("row count does not match t_values".into()));
        }
        Self::new(
            metric,
            aggregation,
            ensemble,
            t_values,
            v_values,
            DMatrix::from_row_slice(rows, header.len() - 1, &data),
        )
    }
}

fn check_axes(t_values: &[f64], v_values: &[usize]) -> Result<()> {
    if t_values.is_empty() || v_values.is_empty() {
        return Err(Error::invalid("grid axes must be non-empty"));
    }
    if t_values.windows(2).any(|w| !(w[0] < w[1]))
        || t_values.iter().any(|t| !(*t > 0.0 && t.is_finite()))
    {
        return Err(Error::invalid(
            "clock cycles must be positive and strictly ascending",
        ));
    }
    if v_values.windows(2).any(|w| w[0] >= w[1]) || v_values[0] == 0 {
        return Err(Error::invalid(
            "multiplexing values must be positive and strictly ascending",
        ));
    }
    Ok(())
}

fn join<T: ToString>(values: &[T]) -> String {
    values
        .iter()
        .map(T::to_string)
        .collect::<Vec<_>>()
        .join(";")
}

fn split<T: FromStr>(text: &str) -> std::result::Result<Vec<T>, String>
where
    T::Err: fmt::Display,
{
    if text.is_empty() {
        return Ok(Vec::new());
    }
    text.split(';')
        .map(|p| p.parse::<T>().map_err(|e| e.to_string()))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(seed: u64, offset: f64) -> SweepGrid {
        SweepGrid::new(
            Metric::KrylovObservability,
            Aggregation::PerSeed { seed },
            vec![seed],
            vec![4.0, 8.5, 12.0],
            vec![10, 30],
            DMatrix::from_fn(3, 2, |i, j| offset + i as f64 * 0.1 + j as f64 / 3.0),
        )
        .unwrap()
    }

    #[test]
    fn csv_round_trip_is_exact() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("g.csv");
        let g = grid(7, 1.25);
        g.write_csv(&path).unwrap();
        assert_eq!(SweepGrid::read_csv(&path).unwrap(), g);
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.contains("# t_values=4;8.5;12\n# v_values=10;30\nT,10,30\n"));
    }

    #[test]
    fn mean_of_identical_members() {
        let g = grid(1, 0.5);
        let m = SweepGrid::mean_of(&[g.clone(), g.clone()]).unwrap();
        assert!((&m.cells - &g.cells).abs().max() < 1e-12);
        assert_eq!(m.aggregation, Aggregation::Mean);
        let m = SweepGrid::mean_of(&[grid(1, 0.0), grid(2, 1.0)]).unwrap();
        assert!((m.cells[(0, 0)] - 0.5).abs() < 1e-15);
        assert_eq!(m.ensemble, vec![1, 2]);
    }

    #[test]
    fn rejects_bad_axes() {
        let cells = DMatrix::zeros(2, 2);
        let mk = |t: Vec<f64>, v: Vec<usize>| {
            SweepGrid::new(
                Metric::IpcTotal,
                Aggregation::Mean,
                vec![0],
                t,
                v,
                cells.clone(),
            )
        };
        assert!(mk(vec![2.0, 1.0], vec![1, 2]).is_err());
        assert!(mk(vec![1.0, 2.0], vec![2, 2]).is_err());
        assert!(mk(vec![1.0, 2.0, 3.0], vec![1, 2]).is_err());
        assert!(mk(vec![1.0, 2.0], vec![1, 2]).is_ok());
    }

    #[test]
    fn names_round_trip() {
        for m in [
            Metric::IpcTotal,
            Metric::KrylovObservability,
            Metric::DeltaPerV,
        ] {
            assert_eq!(m.name().parse::<Metric>().unwrap(), m);
        }
        assert_eq!(
            "seed:12".parse::<Aggregation>().unwrap(),
            Aggregation::PerSeed { seed: 12 }
        );
        assert!("median".parse::<Aggregation>().is_err());
    }
}
