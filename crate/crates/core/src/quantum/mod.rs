//! Dense operator algebra on spin registers.

pub mod density;
pub mod evolution;
pub mod ising;
pub mod operator;
pub mod pauli;
pub mod spectral;

pub use density::{encode_input, partial_trace_first, reset_site, DensityMatrix, InputState};
pub use evolution::{evolve_density, evolve_operator, OperatorFrame};
pub use ising::{build_ising, IsingModel};
pub use operator::{commutator, fidelity, hs_inner, Operator};
pub use pauli::{parse_pauli_label, pauli_on_site, pauli_string, Pauli, SpinRegister};
pub use spectral::{spectral_decompose, Hamiltonian, SpectralDecomposition};
