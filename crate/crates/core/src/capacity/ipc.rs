use std::collections::BTreeMap;
use std::path::Path;

use nalgebra::DMatrix;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::target::{build_target, enumerate_targets, TargetSpec, DEFAULT_ENUMERATION_CAP};
use crate::error::{Error, Result};
use crate::reservoir::readout::pseudo_inverse;
use crate::reservoir::state::{csv_error, StateMatrix};

/// Variance below which a held-out target or prediction counts as constant.
pub const ZERO_VARIANCE: f64 = 1e-24;
/// Slack on the readout-dimension bound of the total capacity.
pub const CAPACITY_BOUND_SLACK: f64 = 1e-6;
/// Targets per batch when evaluating many capacities at once.
const BATCH: usize = 128;

/// How the spurious-capacity threshold is chosen.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Threshold {
    Fixed {
        value: f64,
    },
    /// Quantile of capacities of row-shuffled targets, which carry no
    /// information about the inputs.
    Surrogate {
        shuffles: usize,
        quantile: f64,
        seed: u64,
    },
}

impl Default for Threshold {
    fn default() -> Self {
        Threshold::Surrogate {
            shuffles: 200,
            quantile: 0.99,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IpcConfig {
    #[serde(default = "default_max_degree")]
    pub max_degree: usize,
    #[serde(default = "default_max_delay")]
    pub max_delay: usize,
    #[serde(default = "default_train")]
    pub train_len: usize,
    #[serde(default = "default_test")]
    pub test_len: usize,
    #[serde(default)]
    pub threshold: Threshold,
    #[serde(default = "default_cap")]
    pub enumeration_cap: usize,
}

fn default_max_degree() -> usize {
    3
}
fn default_max_delay() -> usize {
    15
}
fn default_train() -> usize {
    5000
}
fn default_test() -> usize {
    1000
}
fn default_cap() -> usize {
    DEFAULT_ENUMERATION_CAP
}

impl Default for IpcConfig {
    fn default() -> Self {
        Self {
            max_degree: default_max_degree(),
            max_delay: default_max_delay(),
            train_len: default_train(),
            test_len: default_test(),
            threshold: Threshold::default(),
            enumeration_cap: default_cap(),
        }
    }
}

impl IpcConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_degree == 0 || self.max_delay == 0 {
            return Err(Error::Config(
                "max_degree and max_delay must be at least 1".into(),
            ));
        }
        if self.train_len < 2 || self.test_len < 2 {
            return Err(Error::Config(
                "train and test splits need at least 2 rows".into(),
            ));
        }
        match self.threshold {
            Threshold::Fixed { value } if !(0.0..=1.0).contains(&value) => Err(Error::Config(
                format!("fixed threshold {value} outside [0, 1]"),
            )),
            Threshold::Surrogate {
                shuffles, quantile, ..
            } if shuffles == 0 || !(0.0..=1.0).contains(&quantile) => Err(Error::Config(
                "surrogate threshold needs shuffles ≥ 1 and a quantile in [0, 1]".into(),
            )),
            _ => Ok(()),
        }
    }

    /// Number of inputs a reservoir run must produce after washout.
    pub fn rows_needed(&self) -> usize {
        self.train_len + self.test_len
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TargetCapacity {
    pub target: TargetSpec,
    pub capacity: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CapacityReport {
    /// Retained targets, in enumeration order.
    pub per_target: Vec<TargetCapacity>,
    /// Total degree → summed retained capacity.
    pub per_order: BTreeMap<usize, f64>,
    pub total: f64,
    pub threshold: f64,
    pub readout_dim: usize,
    pub evaluated_targets: usize,
    pub config: IpcConfig,
}

impl CapacityReport {
    pub fn write_json(&self, path: &Path) -> Result<()> {
        std::fs::write(path, serde_json::to_string_pretty(self)?)?;
        Ok(())
    }

    /// One row per retained target; delays and degrees are `;`-joined.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path).map_err(|e| csv_error(path, e))?;
        w.write_record(["delays", "degrees", "capacity"])
            .map_err(|e| csv_error(path, e))?;
        let join = |v: Vec<usize>| v.iter().map(usize::to_string).collect::<Vec<_>>().join(";");
        for t in &self.per_target {
            w.write_record([
                join(t.target.delays()),
                join(t.target.degrees()),
                t.capacity.to_string(),
            ])
            .map_err(|e| csv_error(path, e))?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Readout trained once per state matrix split and reused for any number of
/// targets.
#[derive(Clone, Debug)]
pub struct CapacityEvaluator {
    pinv_train: DMatrix<f64>,
    s_test: DMatrix<f64>,
}

impl CapacityEvaluator {
    pub fn new(s_train: &DMatrix<f64>, s_test: &DMatrix<f64>) -> Result<Self> {
        if s_train.nrows() < 2 || s_test.nrows() < 2 {
            return Err(Error::invalid("train and test splits need at least 2 rows"));
        }
        if s_train.ncols() != s_test.ncols() {
            return Err(Error::DimensionMismatch {
                expected: s_train.ncols(),
                found: s_test.ncols(),
            });
        }
        Ok(Self {
            pinv_train: pseudo_inverse(s_train)?,
            s_test: s_test.clone(),
        })
    }

    pub fn train_len(&self) -> usize {
        self.pinv_train.ncols()
    }

    pub fn test_len(&self) -> usize {
        self.s_test.nrows()
    }

    /// Capacities of the target columns of `z_train` / `z_test`.
    pub fn evaluate(&self, z_train: &DMatrix<f64>, z_test: &DMatrix<f64>) -> Result<Vec<f64>> {
        if z_train.nrows() != self.train_len() {
            return Err(Error::DimensionMismatch {
                expected: self.train_len(),
                found: z_train.nrows(),
            });
        }
        if z_test.nrows() != self.test_len() || z_test.ncols() != z_train.ncols() {
            return Err(Error::DimensionMismatch {
                expected: self.test_len(),
                found: z_test.nrows(),
            });
        }
        let prediction = &self.s_test * (&self.pinv_train * z_train);
        Ok((0..z_test.ncols())
            .map(|c| {
                squared_correlation(prediction.column(c).as_slice(), z_test.column(c).as_slice())
            })
            .collect())
    }
}

/// Squared Pearson correlation clamped to `[0, 1]`; zero if either side is
/// constant.
pub fn squared_correlation(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len() as f64;
    let mean_a = a.iter().sum::<f64>() / n;
    let mean_b = b.iter().sum::<f64>() / n;
    let (mut cov, mut var_a, mut var_b) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        let (dx, dy) = (x - mean_a, y - mean_b);
        cov += dx * dy;
        var_a += dx * dx;
        var_b += dy * dy;
    }
    if var_a / n < ZERO_VARIANCE || var_b / n < ZERO_VARIANCE {
        return 0.0;
    }
    (cov * cov / (var_a * var_b)).clamp(0.0, 1.0)
}

/// Capacity of one target: train on the first split, squared correlation of
/// the prediction with the target on the held-out split.
pub fn capacity_of_target(
    s_train: &DMatrix<f64>,
    s_test: &DMatrix<f64>,
    z_train: &[f64],
    z_test: &[f64],
) -> Result<f64> {
    let evaluator = CapacityEvaluator::new(s_train, s_test)?;
    let c = evaluator.evaluate(
        &DMatrix::from_column_slice(z_train.len(), 1, z_train),
        &DMatrix::from_column_slice(z_test.len(), 1, z_test),
    )?;
    Ok(c[0])
}

/// Aligned train and test splits of a state matrix and its input sequence.
struct Splits<'a> {
    inputs: &'a [f64],
    train_start: usize,
    test_start: usize,
    train_len: usize,
    test_len: usize,
}

impl Splits<'_> {
    fn targets(&self, specs: &[TargetSpec]) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
        let mut z_train = DMatrix::zeros(self.train_len, specs.len());
        let mut z_test = DMatrix::zeros(self.test_len, specs.len());
        for (c, spec) in specs.iter().enumerate() {
            z_train.set_column(
                c,
                &nalgebra::DVector::from_vec(build_target(
                    self.inputs,
                    spec,
                    self.train_start,
                    self.train_len,
                )?),
            );
            z_test.set_column(
                c,
                &nalgebra::DVector::from_vec(build_target(
                    self.inputs,
                    spec,
                    self.test_start,
                    self.test_len,
                )?),
            );
        }
        Ok((z_train, z_test))
    }
}

/// Capacities of every target in `specs`, in order.
fn capacities(
    evaluator: &CapacityEvaluator,
    splits: &Splits<'_>,
    specs: &[TargetSpec],
) -> Result<Vec<f64>> {
    let chunks: Vec<Vec<f64>> = specs
        .par_chunks(BATCH)
        .map(|chunk| {
            let (z_train, z_test) = splits.targets(chunk)?;
            evaluator.evaluate(&z_train, &z_test)
        })
        .collect::<Result<_>>()?;
    Ok(chunks.into_iter().flatten().collect())
}

fn surrogate_threshold(
    evaluator: &CapacityEvaluator,
    splits: &Splits<'_>,
    specs: &[TargetSpec],
    shuffles: usize,
    quantile: f64,
    seed: u64,
) -> Result<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let total = splits.train_len + splits.test_len;
    let mut z_train = DMatrix::zeros(splits.train_len, shuffles);
    let mut z_test = DMatrix::zeros(splits.test_len, shuffles);
    for i in 0..shuffles {
        let mut z = build_target(
            splits.inputs,
            &specs[i % specs.len()],
            splits.train_start,
            total,
        )?;
        z.shuffle(&mut rng);
        z_train
            .column_mut(i)
            .copy_from_slice(&z[..splits.train_len]);
        z_test.column_mut(i).copy_from_slice(&z[splits.train_len..]);
    }
    let mut spurious = evaluator.evaluate(&z_train, &z_test)?;
    spurious.sort_by(f64::total_cmp);
    Ok(nearest_rank(&spurious, quantile))
}

/// Nearest-rank quantile of sorted data.
fn nearest_rank(sorted: &[f64], quantile: f64) -> f64 {
    let rank = (quantile * sorted.len() as f64).ceil() as usize;
    sorted[rank.clamp(1, sorted.len()) - 1]
}

/// Total information processing capacity of a state matrix.
///
/// Row `r` of `s` belongs to input `s.first_input() + r`; the first
/// `train_len` rows train the readout and the next `test_len` rows score it.
pub fn total_ipc(s: &StateMatrix, inputs: &[f64], config: &IpcConfig) -> Result<CapacityReport> {
    config.validate()?;
    if s.rows() < config.rows_needed() {
        return Err(Error::invalid(format!(
            "state matrix has {} rows, {} needed",
            s.rows(),
            config.rows_needed()
        )));
    }
    if s.first_input() < config.max_delay {
        return Err(Error::invalid(format!(
            "first state row is input {}, delay {} needs more history",
            s.first_input(),
            config.max_delay
        )));
    }
    if s.first_input() + config.rows_needed() > inputs.len() {
        return Err(Error::DimensionMismatch {
            expected: s.first_input() + config.rows_needed(),
            found: inputs.len(),
        });
    }
    let specs = enumerate_targets(config.max_degree, config.max_delay, config.enumeration_cap)?;
    let values = s.values();
    let s_train = values.rows(0, config.train_len).into_owned();
    let s_test = values.rows(config.train_len, config.test_len).into_owned();
    let evaluator = CapacityEvaluator::new(&s_train, &s_test)?;
    let splits = Splits {
        inputs,
        train_start: s.first_input(),
        test_start: s.first_input() + config.train_len,
        train_len: config.train_len,
        test_len: config.test_len,
    };
    let threshold = match config.threshold {
        Threshold::Fixed { value } => value,
        Threshold::Surrogate {
            shuffles,
            quantile,
            seed,
        } => surrogate_threshold(&evaluator, &splits, &specs, shuffles, quantile, seed)?,
    };
    let all = capacities(&evaluator, &splits, &specs)?;
    let mut per_order = BTreeMap::new();
    for order in 1..=config.max_degree {
        per_order.insert(order, 0.0);
    }
    let mut per_target = Vec::new();
    for (spec, capacity) in specs.iter().zip(all) {
        if capacity > threshold {
            *per_order.entry(spec.total_degree()).or_insert(0.0) += capacity;
            per_target.push(TargetCapacity {
                target: spec.clone(),
                capacity,
            });
        }
    }
    let total = per_order.values().sum();
    Ok(CapacityReport {
        per_target,
        per_order,
        total,
        threshold,
        readout_dim: s.cols(),
        evaluated_targets: specs.len(),
        config: config.clone(),
    })
}
