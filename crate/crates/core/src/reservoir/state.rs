use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One readout feature: an observable measured at multiplexing slot `slot`
/// (1-based, time `slot·T/V` after injection).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ColumnLabel {
    pub observable: String,
    pub slot: usize,
}

impl ColumnLabel {
    fn header(&self) -> String {
        format!("{}@{}", self.observable, self.slot)
    }

    fn parse(text: &str) -> Option<Self> {
        let (observable, slot) = text.rsplit_once('@')?;
        Some(Self {
            observable: observable.to_owned(),
            slot: slot.parse().ok()?,
        })
    }
}

/// Measured expectation values: one row per kept input, one column per
/// (observable, slot) pair, slots varying fastest within an observable.
#[derive(Clone, Debug, PartialEq)]
pub struct StateMatrix {
    values: DMatrix<f64>,
    columns: Vec<ColumnLabel>,
    /// Index into the input sequence of the input that produced row 0.
    first_input: usize,
}

#[derive(Debug, Serialize, Deserialize)]
struct Sidecar {
    format: String,
    rows: usize,
    cols: usize,
    first_input: usize,
    columns: Vec<ColumnLabel>,
}

const BINARY_FORMAT: &str = "f64-le-row-major";

impl StateMatrix {
    pub fn new(
        values: DMatrix<f64>,
        columns: Vec<ColumnLabel>,
        first_input: usize,
    ) -> Result<Self> {
        if values.ncols() != columns.len() {
            return Err(Error::DimensionMismatch {
                expected: columns.len(),
                found: values.ncols(),
            });
        }
        Ok(Self {
            values,
            columns,
            first_input,
        })
    }

    /// Labels `O@1 … O@V` for each observable in turn.
    pub fn labels_for(observables: &[String], multiplexing: usize) -> Vec<ColumnLabel> {
        observables
            .iter()
            .flat_map(|o| {
                (1..=multiplexing).map(move |slot| ColumnLabel {
                    observable: o.clone(),
                    slot,
                })
            })
            .collect()
    }

    pub fn rows(&self) -> usize {
        self.values.nrows()
    }

    pub fn cols(&self) -> usize {
        self.values.ncols()
    }

    pub fn values(&self) -> &DMatrix<f64> {
        &self.values
    }

    pub fn columns(&self) -> &[ColumnLabel] {
        &self.columns
    }

    pub fn first_input(&self) -> usize {
        self.first_input
    }

    /// Rows `start..start+len` as a new state matrix.
    pub fn row_block(&self, start: usize, len: usize) -> Result<StateMatrix> {
        if start + len > self.rows() {
            return Err(Error::invalid(format!(
                "rows {start}..{} exceed the {} available",
                start + len,
                self.rows()
            )));
        }
        Ok(Self {
            values: self.values.rows(start, len).into_owned(),
            columns: self.columns.clone(),
            first_input: self.first_input + start,
        })
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path).map_err(|e| csv_error(path, e))?;
        w.write_record(self.columns.iter().map(ColumnLabel::header))
            .map_err(|e| csv_error(path, e))?;
        for r in 0..self.rows() {
            w.write_record(self.values.row(r).iter().map(|v| v.to_string()))
                .map_err(|e| csv_error(path, e))?;
        }
        w.flush()?;
        Ok(())
    }

    /// Reads a CSV written by [`StateMatrix::write_csv`]; `first_input` is not
    /// stored in CSV and must be supplied.
    pub fn read_csv(path: &Path, first_input: usize) -> Result<Self> {
        let mut r = csv::Reader::from_path(path).map_err(|e| csv_error(path, e))?;
        let columns = r
            .headers()
            .map_err(|e| csv_error(path, e))?
            .iter()
            .map(|h| {
                ColumnLabel::parse(h).ok_or_else(|| Error::Format {
                    path: path.to_owned(),
                    reason: format!("bad column label `{h}`"),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let mut data = Vec::new();
        let mut rows = 0;
        for rec in r.records() {
            let rec = rec.map_err(|e| csv_error(path, e))?;
            for field in rec.iter() {
                data.push(field.parse::<f64>().map_err(|e| Error::Format {
                    path: path.to_owned(),
                    reason: e.to_string(),
                })?);
            }
            rows += 1;
        }
        let values = DMatrix::from_row_slice(rows, columns.len(), &data);
        Self::new(values, columns, first_input)
    }

    /// Writes `path` as little-endian row-major doubles and `path.json` with
    /// the shape and labels.
    pub fn write_binary(&self, path: &Path) -> Result<()> {
        let mut w = BufWriter::new(File::create(path)?);
        for r in 0..self.rows() {
            for v in self.values.row(r).iter() {
                w.write_all(&v.to_le_bytes())?;
            }
        }
        w.flush()?;
        let sidecar = Sidecar {
            format: BINARY_FORMAT.into(),
            rows: self.rows(),
            cols: self.cols(),
            first_input: self.first_input,
            columns: self.columns.clone(),
        };
        std::fs::write(sidecar_path(path), serde_json::to_string_pretty(&sidecar)?)?;
        Ok(())
    }

    pub fn read_binary(path: &Path) -> Result<Self> {
        let sidecar: Sidecar = serde_json::from_str(&std::fs::read_to_string(sidecar_path(path))?)?;
        if sidecar.format != BINARY_FORMAT || sidecar.columns.len() != sidecar.cols {
            return Err(Error::Format {
                path: path.to_owned(),
                reason: "inconsistent sidecar".into(),
            });
        }
        let mut bytes = Vec::new();
        BufReader::new(File::open(path)?).read_to_end(&mut bytes)?;
        if bytes.len() != sidecar.rows * sidecar.cols * 8 {
            return Err(Error::Format {
                path: path.to_owned(),
                reason: format!(
                    "expected {} bytes, found {}",
                    sidecar.rows * sidecar.cols * 8,
                    bytes.len()
                ),
            });
        }
        let data: Vec<f64> = bytes
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().expect("8-byte chunk")))
            .collect();
        let values = DMatrix::from_row_slice(sidecar.rows, sidecar.cols, &data);
        Self::new(values, sidecar.columns, sidecar.first_input)
    }
}

fn sidecar_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".json");
    PathBuf::from(s)
}

pub(crate) fn csv_error(path: &Path, e: csv::Error) -> Error {
    Error::Format {
        path: path.to_owned(),
        reason: e.to_string(),
    }
}
