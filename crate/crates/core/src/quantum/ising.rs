use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Uniform};
use serde::{Deserialize, Serialize};

use super::operator::Operator;
use super::pauli::{pauli_on_site, Pauli, SpinRegister};
use super::spectral::Hamiltonian;
use crate::error::{Error, Result};

pub const DEFAULT_FIELD: f64 = 0.5;
pub const COUPLING_RANGE: (f64, f64) = (0.25, 0.75);

/// All-to-all transverse-field Ising model `Σ_{i<j} J_ij X_i X_j + Σ_i h Z_i`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IsingModel {
    pub n_sites: usize,
    pub field: f64,
    /// `(i, j, J_ij)` with 1-based sites and `i < j`, row-major order.
    pub couplings: Vec<(usize, usize, f64)>,
    pub coupling_seed: Option<u64>,
}

impl IsingModel {
    /// Draws `J_ij ~ U[0.25, 0.75]` in row-major order over `i < j`.
    pub fn random(n_sites: usize, field: f64, coupling_seed: u64) -> Result<Self> {
        SpinRegister::new(n_sites)?;
        let mut rng = ChaCha8Rng::seed_from_u64(coupling_seed);
        let dist = Uniform::new_inclusive(COUPLING_RANGE.0, COUPLING_RANGE.1);
        let mut couplings = Vec::with_capacity(n_sites * (n_sites - 1) / 2);
        for i in 1..=n_sites {
            for j in (i + 1)..=n_sites {
                couplings.push((i, j, dist.sample(&mut rng)));
            }
        }
        Ok(Self {
            n_sites,
            field,
            couplings,
            coupling_seed: Some(coupling_seed),
        })
    }

    pub fn with_couplings(
        n_sites: usize,
        field: f64,
        couplings: Vec<(usize, usize, f64)>,
    ) -> Result<Self> {
        SpinRegister::new(n_sites)?;
        for &(i, j, _) in &couplings {
            if i == 0 || j > n_sites || i >= j {
                return Err(Error::invalid(format!("bad coupling pair ({i}, {j})")));
            }
        }
        Ok(Self {
            n_sites,
            field,
            couplings,
            coupling_seed: None,
        })
    }

    pub fn hamiltonian(&self) -> Result<Hamiltonian> {
        if !self.field.is_finite() {
            return Err(Error::invalid("field strength must be finite"));
        }
        let dim = 1usize << self.n_sites;
        let mut m = DMatrix::<Complex64>::zeros(dim, dim);
        for &(i, j, coupling) in &self.couplings {
            let xx = pauli_on_site(Pauli::X, i, self.n_sites)?.into_matrix()
                * pauli_on_site(Pauli::X, j, self.n_sites)?.into_matrix();
            m += xx * Complex64::new(coupling, 0.0);
        }
        for i in 1..=self.n_sites {
            m += pauli_on_site(Pauli::Z, i, self.n_sites)?.into_matrix()
                * Complex64::new(self.field, 0.0);
        }
        let label = match self.coupling_seed {
            Some(seed) => format!("H_I(n={},h={},seed={seed})", self.n_sites, self.field),
            None => format!("H_I(n={},h={})", self.n_sites, self.field),
        };
        Hamiltonian::new(Operator::from_parts(label, m, true))
    }
}

pub fn build_ising(n_sites: usize, field: f64, coupling_seed: u64) -> Result<Hamiltonian> {
    IsingModel::random(n_sites, field, coupling_seed)?.hamiltonian()
}
