use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::config::ReservoirConfig;
use super::state::StateMatrix;
use crate::error::{Error, Result};
use crate::quantum::density::{encode_input, reset_site, DensityMatrix};
use crate::quantum::evolution::OperatorFrame;
use crate::quantum::pauli::SpinRegister;
use crate::quantum::spectral::Hamiltonian;

/// Positivity slack allowed when states are checked during a run.
pub const RUN_POSITIVITY_TOL: f64 = 1e-9;

/// A configured Ising reservoir with its propagator and measurement operators
/// precomputed.
#[derive(Clone, Debug)]
pub struct Reservoir {
    config: ReservoirConfig,
    register: SpinRegister,
    hamiltonian: Hamiltonian,
    clock_propagator: DMatrix<Complex64>,
    /// Row `k·V + j − 1` holds `(Re, Im)` of the Heisenberg operator
    /// `O_k(jT/V)`, flattened row-major, so that one product with the
    /// flattened state yields every feature of an input.
    readout: DMatrix<f64>,
}

impl Reservoir {
    pub fn new(config: &ReservoirConfig) -> Result<Self> {
        config.validate()?;
        Self::with_hamiltonian(config, config.hamiltonian()?)
    }

    /// Uses `hamiltonian` instead of building one from the coupling seed.
    pub fn with_hamiltonian(config: &ReservoirConfig, hamiltonian: Hamiltonian) -> Result<Self> {
        config.validate()?;
        let register = config.register()?;
        if hamiltonian.dim() != register.dim() {
            return Err(Error::DimensionMismatch {
                expected: register.dim(),
                found: hamiltonian.dim(),
            });
        }
        let observables = config.observable_operators()?;
        let n = register.dim();
        let v = config.multiplexing;
        let mut readout = DMatrix::zeros(observables.len() * v, 2 * n * n);
        for (k, op) in observables.iter().enumerate() {
            let frame = OperatorFrame::new(&hamiltonian, op)?;
            for j in 1..=v {
                let evolved = frame.at(j as f64 * config.clock_cycle / v as f64)?;
                let m = evolved.matrix();
                let row = k * v + j - 1;
                for a in 0..n {
                    for b in 0..n {
                        readout[(row, a * n + b)] = m[(a, b)].re;
                        readout[(row, n * n + a * n + b)] = m[(a, b)].im;
                    }
                }
            }
        }
        let clock_propagator = hamiltonian.spectral().propagator(config.clock_cycle);
        Ok(Self {
            config: config.clone(),
            register,
            hamiltonian,
            clock_propagator,
            readout,
        })
    }

    pub fn config(&self) -> &ReservoirConfig {
        &self.config
    }

    pub fn hamiltonian(&self) -> &Hamiltonian {
        &self.hamiltonian
    }

    /// Runs from the maximally mixed state.
    pub fn run(&self, inputs: &[f64]) -> Result<StateMatrix> {
        self.run_from(
            inputs,
            &DensityMatrix::maximally_mixed(self.register.dim()),
            false,
        )
    }

    /// Runs from `initial`; with `check_states` every intermediate density
    /// matrix is checked for unit trace and positivity.
    pub fn run_from(
        &self,
        inputs: &[f64],
        initial: &DensityMatrix,
        check_states: bool,
    ) -> Result<StateMatrix> {
        let washout = self.config.washout;
        if inputs.len() <= washout {
            return Err(Error::invalid(format!(
                "{} inputs do not exceed the washout of {washout}",
                inputs.len()
            )));
        }
        if let Some(u) = inputs.iter().find(|u| !(-1.0..=1.0).contains(*u)) {
            return Err(Error::invalid(format!("input {u} outside [-1, 1]")));
        }
        let n = self.register.dim();
        if initial.dim() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: initial.dim(),
            });
        }
        let kept = inputs.len() - washout;
        let cols = self.readout.nrows();
        let mut values = DMatrix::zeros(kept, cols);
        let mut flat = DVector::zeros(2 * n * n);
        let u_adj = self.clock_propagator.adjoint();
        let mut evolved = initial.matrix().clone();
        for (step, &u) in inputs.iter().enumerate() {
            let psi = encode_input(u)?;
            let rho = if self.register.input_site() == 1 {
                reset_first_site(&evolved, psi.amplitudes())
            } else {
                let current = DensityMatrix::new(evolved.clone())?;
                reset_site(
                    &current,
                    &psi,
                    self.register.input_site(),
                    self.register.n_sites(),
                )?
                .matrix()
                .clone()
            };
            if check_states {
                check_state(&rho, step)?;
            }
            if step >= washout {
                for a in 0..n {
                    for b in 0..n {
                        flat[a * n + b] = rho[(a, b)].re;
                        flat[n * n + a * n + b] = rho[(a, b)].im;
                    }
                }
                let features = &self.readout * &flat;
                values
                    .row_mut(step - washout)
                    .copy_from(&features.transpose());
            }
            let next = &self.clock_propagator * &rho * &u_adj;
            evolved = (&next + next.adjoint()) * Complex64::new(0.5, 0.0);
        }
        if self.config.noise_eta > 0.0 {
            let mut rng = ChaCha8Rng::seed_from_u64(self.config.noise_seed);
            for r in 0..kept {
                for c in 0..cols {
                    let z: f64 = StandardNormal.sample(&mut rng);
                    values[(r, c)] += self.config.noise_eta * z;
                }
            }
        }
        StateMatrix::new(
            values,
            StateMatrix::labels_for(&self.config.observables, self.config.multiplexing),
            washout,
        )
    }
}

pub fn run_reservoir(config: &ReservoirConfig, inputs: &[f64]) -> Result<StateMatrix> {
    Reservoir::new(config)?.run(inputs)
}

/// `|ψ⟩⟨ψ| ⊗ Tr_1 ρ` for a real qubit state on the leftmost site.
fn reset_first_site(rho: &DMatrix<Complex64>, amp: [f64; 2]) -> DMatrix<Complex64> {
    let n = rho.nrows();
    let rest = n / 2;
    let reduced = rho.view((0, 0), (rest, rest)) + rho.view((rest, rest), (rest, rest));
    let mut out = DMatrix::zeros(n, n);
    for a in 0..2 {
        for b in 0..2 {
            let w = Complex64::new(amp[a] * amp[b], 0.0);
            out.view_mut((a * rest, b * rest), (rest, rest))
                .copy_from(&(&reduced * w));
        }
    }
    out
}

fn check_state(rho: &DMatrix<Complex64>, step: usize) -> Result<()> {
    let trace = rho.trace().re;
    if (trace - 1.0).abs() > 1e-10 {
        return Err(Error::Numerical(format!(
            "state trace {trace} at input {step}"
        )));
    }
    let min = nalgebra::SymmetricEigen::new(rho.clone())
        .eigenvalues
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min);
    if min < -RUN_POSITIVITY_TOL {
        return Err(Error::Numerical(format!(
            "state eigenvalue {min:e} at input {step}"
        )));
    }
    Ok(())
}
