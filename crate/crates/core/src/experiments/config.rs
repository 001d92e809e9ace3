use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::capacity::IpcConfig;
use crate::error::{Error, Result};
use crate::krylov::RankTolerance;
use crate::quantum::ising::DEFAULT_FIELD;
use crate::reservoir::config::{
    ReservoirConfig, CONFIG_SCHEMA_VERSION, DEFAULT_NOISE, DEFAULT_WASHOUT,
};

pub const DEFAULT_ENSEMBLE_SIZE: usize = 10;

/// Everything a sweep needs: reservoir parameters, grid axes, the ensemble
/// of coupling seeds and the capacity truncation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default = "default_schema")]
    pub schema_version: u32,
    #[serde(default = "default_sites")]
    pub n_sites: usize,
    #[serde(default = "default_field")]
    pub field_h: f64,
    #[serde(default = "default_observables")]
    pub observables: Vec<String>,
    #[serde(default = "default_noise")]
    pub noise_eta: f64,
    #[serde(default)]
    pub noise_seed: u64,
    #[serde(default = "default_washout")]
    pub washout: usize,
    #[serde(default = "default_input_site")]
    pub input_site: usize,
    pub t_values: Vec<f64>,
    pub v_values: Vec<usize>,
    /// First coupling seed; the ensemble is `seed..seed + ensemble_size`.
    pub seed: u64,
    #[serde(default = "default_ensemble")]
    pub ensemble_size: usize,
    /// Seed of the i.i.d. uniform input sequence shared by all cells.
    #[serde(default)]
    pub input_seed: u64,
    #[serde(default)]
    pub rank_tol: RankTolerance,
    #[serde(default)]
    pub ipc: IpcConfig,
    #[serde(default = "default_output")]
    pub output_dir: PathBuf,
}

fn default_schema() -> u32 {
    CONFIG_SCHEMA_VERSION
}
fn default_sites() -> usize {
    4
}
fn default_field() -> f64 {
    DEFAULT_FIELD
}
fn default_observables() -> Vec<String> {
    vec!["Z_1".into()]
}
fn default_noise() -> f64 {
    DEFAULT_NOISE
}
fn default_washout() -> usize {
    DEFAULT_WASHOUT
}
fn default_input_site() -> usize {
    1
}
fn default_ensemble() -> usize {
    DEFAULT_ENSEMBLE_SIZE
}
fn default_output() -> PathBuf {
    PathBuf::from("runs")
}

impl ExperimentConfig {
    pub fn new(seed: u64, t_values: Vec<f64>, v_values: Vec<usize>) -> Self {
        Self {
            schema_version: CONFIG_SCHEMA_VERSION,
            n_sites: default_sites(),
            field_h: DEFAULT_FIELD,
            observables: default_observables(),
            noise_eta: DEFAULT_NOISE,
            noise_seed: 0,
            washout: DEFAULT_WASHOUT,
            input_site: 1,
            t_values,
            v_values,
            seed,
            ensemble_size: DEFAULT_ENSEMBLE_SIZE,
            input_seed: 0,
            rank_tol: RankTolerance::default(),
            ipc: IpcConfig::default(),
            output_dir: default_output(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.ensemble_size == 0 {
            return Err(Error::Config("ensemble_size must be at least 1".into()));
        }
        if self.t_values.is_empty() || self.v_values.is_empty() {
            return Err(Error::Config(
                "t_values and v_values must be non-empty".into(),
            ));
        }
        if self.t_values.windows(2).any(|w| !(w[0] < w[1]))
            || self.v_values.windows(2).any(|w| w[0] >= w[1])
        {
            return Err(Error::Config(
                "sweep axes must be strictly ascending".into(),
            ));
        }
        self.ipc.validate()?;
        for &t in &self.t_values {
            for &v in &self.v_values {
                self.reservoir_config(self.seed, t, v).validate()?;
            }
        }
        Ok(())
    }

    /// Reads TOML and overlays it on `base`: keys present in the file win.
    pub fn overlay_toml(base: &ExperimentConfig, text: &str) -> Result<Self> {
        let file: toml::Table = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        let mut merged = toml::Table::try_from(base).map_err(|e| Error::Config(e.to_string()))?;
        merge(&mut merged, file);
        let cfg: Self = merged
            .try_into()
            .map_err(|e: toml::de::Error| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml_str(&std::fs::read_to_string(path)?)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn ensemble(&self) -> Vec<u64> {
        (0..self.ensemble_size as u64)
            .map(|i| self.seed + i)
            .collect()
    }

    pub fn reservoir_config(
        &self,
        coupling_seed: u64,
        clock_cycle: f64,
        multiplexing: usize,
    ) -> ReservoirConfig {
        ReservoirConfig {
            schema_version: self.schema_version,
            n_sites: self.n_sites,
            field_h: self.field_h,
            coupling_seed,
            clock_cycle,
            multiplexing,
            observables: self.observables.clone(),
            noise_eta: self.noise_eta,
            noise_seed: self.noise_seed,
            washout: self.washout,
            input_site: self.input_site,
        }
    }

    /// Uniform inputs on `[−1, 1]`, long enough for washout plus both splits.
    pub fn inputs(&self) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.input_seed);
        (0..self.washout + self.ipc.rows_needed())
            .map(|_| rng.gen_range(-1.0..=1.0))
            .collect()
    }
}

fn merge(into: &mut toml::Table, from: toml::Table) {
    for (key, value) in from {
        match (into.get_mut(&key), value) {
            (Some(toml::Value::Table(dst)), toml::Value::Table(src)) => merge(dst, src),
            (_, value) => {
                into.insert(key, value);
            }
        }
    }
}
