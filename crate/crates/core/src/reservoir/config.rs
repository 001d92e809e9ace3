use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quantum::ising::{IsingModel, DEFAULT_FIELD};
use crate::quantum::operator::Operator;
use crate::quantum::pauli::{parse_pauli_label, SpinRegister};
use crate::quantum::spectral::Hamiltonian;

pub const CONFIG_SCHEMA_VERSION: u32 = 1;
pub const DEFAULT_WASHOUT: usize = 200;
pub const DEFAULT_NOISE: f64 = 1e-4;

/// Reservoir parameters, read from TOML.
///
/// ```toml
/// schema_version = 1
/// n_sites = 4
/// field_h = 0.5
/// coupling_seed = 0
/// clock_cycle = 20.0
/// multiplexing = 50
/// observables = ["Z_1"]
/// noise_eta = 1e-4
/// noise_seed = 1
/// washout = 200
/// ```
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReservoirConfig {
    #[serde(default = "default_schema")]
    pub schema_version: u32,
    pub n_sites: usize,
    #[serde(default = "default_field")]
    pub field_h: f64,
    pub coupling_seed: u64,
    pub clock_cycle: f64,
    pub multiplexing: usize,
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
}

fn default_schema() -> u32 {
    CONFIG_SCHEMA_VERSION
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

impl ReservoirConfig {
    pub fn new(n_sites: usize, coupling_seed: u64, clock_cycle: f64, multiplexing: usize) -> Self {
        Self {
            schema_version: CONFIG_SCHEMA_VERSION,
            n_sites,
            field_h: DEFAULT_FIELD,
            coupling_seed,
            clock_cycle,
            multiplexing,
            observables: default_observables(),
            noise_eta: DEFAULT_NOISE,
            noise_seed: 0,
            washout: DEFAULT_WASHOUT,
            input_site: 1,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema_version != CONFIG_SCHEMA_VERSION {
            return Err(Error::Config(format!(
                "unsupported schema_version {} (expected {CONFIG_SCHEMA_VERSION})",
                self.schema_version
            )));
        }
        SpinRegister::with_input_site(self.n_sites, self.input_site)?;
        if !(self.clock_cycle > 0.0 && self.clock_cycle.is_finite()) {
            return Err(Error::Config(format!(
                "clock_cycle must be positive, got {}",
                self.clock_cycle
            )));
        }
        if self.multiplexing == 0 {
            return Err(Error::Config("multiplexing must be at least 1".into()));
        }
        if !(self.noise_eta >= 0.0 && self.noise_eta.is_finite()) {
            return Err(Error::Config(format!(
                "noise_eta must be non-negative, got {}",
                self.noise_eta
            )));
        }
        if self.observables.is_empty() {
            return Err(Error::Config("at least one observable is required".into()));
        }
        if !self.field_h.is_finite() {
            return Err(Error::Config("field_h must be finite".into()));
        }
        Ok(())
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

    pub fn register(&self) -> Result<SpinRegister> {
        SpinRegister::with_input_site(self.n_sites, self.input_site)
    }

    pub fn ising(&self) -> Result<IsingModel> {
        IsingModel::random(self.n_sites, self.field_h, self.coupling_seed)
    }

    pub fn hamiltonian(&self) -> Result<Hamiltonian> {
        self.ising()?.hamiltonian()
    }

    pub fn observable_operators(&self) -> Result<Vec<Operator>> {
        self.observables
            .iter()
            .map(|l| parse_pauli_label(l, self.n_sites))
            .collect()
    }
}
