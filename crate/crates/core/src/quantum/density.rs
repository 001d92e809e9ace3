use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::operator::{
    hermitian_deviation, matrix_from_row_major, matrix_to_row_major, Operator, OperatorJson,
    HERMITIAN_TOL,
};
use crate::error::{Error, Result};

pub const TRACE_TOL: f64 = 1e-10;
pub const POSITIVITY_TOL: f64 = 1e-10;

/// Trace-one positive semidefinite Hermitian matrix.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(into = "OperatorJson", try_from = "OperatorJson")]
pub struct DensityMatrix {
    matrix: DMatrix<Complex64>,
}

impl DensityMatrix {
    /// Validates trace, Hermiticity and positivity.
    pub fn new(matrix: DMatrix<Complex64>) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() || matrix.nrows() == 0 {
            return Err(Error::invalid(
                "density matrix must be square and non-empty",
            ));
        }
        let dev = hermitian_deviation(&matrix);
        if dev > HERMITIAN_TOL {
            return Err(Error::NotHermitian {
                label: "rho".into(),
                deviation: dev,
            });
        }
        let rho = Self { matrix };
        let tr = rho.trace();
        if (tr - 1.0).abs() > TRACE_TOL {
            return Err(Error::invalid(format!(
                "density matrix trace {tr} differs from 1"
            )));
        }
        let min = rho.min_eigenvalue();
        if min < -POSITIVITY_TOL {
            return Err(Error::invalid(format!(
                "density matrix has eigenvalue {min:e}"
            )));
        }
        Ok(rho)
    }

    /// Skips validation for results that are valid by construction.
    pub(crate) fn from_trusted(matrix: DMatrix<Complex64>) -> Self {
        Self { matrix }
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        let w = Complex64::new(1.0 / dim as f64, 0.0);
        Self::from_trusted(DMatrix::identity(dim, dim) * w)
    }

    /// `|ψ⟩⟨ψ|` for a normalized state vector.
    pub fn pure(psi: &[Complex64]) -> Result<Self> {
        let norm: f64 = psi.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if psi.is_empty() || (norm - 1.0).abs() > TRACE_TOL {
            return Err(Error::invalid(format!(
                "state vector norm {norm} differs from 1"
            )));
        }
        let n = psi.len();
        Ok(Self::from_trusted(DMatrix::from_fn(n, n, |i, j| {
            psi[i] * psi[j].conj()
        })))
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    pub fn trace(&self) -> f64 {
        self.matrix.trace().re
    }

    pub fn min_eigenvalue(&self) -> f64 {
        let eig = SymmetricEigen::new(self.matrix.clone());
        eig.eigenvalues
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min)
    }

    /// Re-checks all invariants; used by debug-mode reservoir runs.
    pub fn validate(&self) -> Result<()> {
        Self::new(self.matrix.clone()).map(|_| ())
    }

    /// `Re Tr(O ρ)`.
    pub fn expectation(&self, op: &Operator) -> Result<f64> {
        if op.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: op.dim(),
            });
        }
        // Tr(Oρ) = Σ_ij O_ij ρ_ji = Σ_ij conj(O†)_ji ρ_ji; for Hermitian O this is ⟨O, ρ⟩_HS.
        Ok(op.matrix().adjoint().dotc(&self.matrix).re)
    }
}

impl From<DensityMatrix> for OperatorJson {
    fn from(rho: DensityMatrix) -> Self {
        let (re, im) = matrix_to_row_major(&rho.matrix);
        OperatorJson {
            dim: rho.dim(),
            label: "rho".into(),
            re,
            im,
        }
    }
}

impl TryFrom<OperatorJson> for DensityMatrix {
    type Error = Error;

    fn try_from(json: OperatorJson) -> Result<Self> {
        DensityMatrix::new(matrix_from_row_major(json.dim, &json.re, &json.im)?)
    }
}

/// `Tr_1 ρ` over the leftmost factor of dimension `first_dim`.
pub fn partial_trace_first(rho: &DensityMatrix, first_dim: usize) -> Result<DensityMatrix> {
    let n = rho.dim();
    if first_dim == 0 || !n.is_multiple_of(first_dim) {
        return Err(Error::invalid(format!(
            "dimension {n} is not divisible by {first_dim}"
        )));
    }
    let rest = n / first_dim;
    let m = rho.matrix();
    let reduced = DMatrix::from_fn(rest, rest, |i, j| {
        (0..first_dim)
            .map(|k| m[(k * rest + i, k * rest + j)])
            .sum()
    });
    Ok(DensityMatrix::from_trusted(reduced))
}

/// Replaces the qubit at `site` (1-based, site 1 leftmost) of an `n_sites`
/// register by the pure state `psi`: `|ψ⟩⟨ψ|_site ⊗ Tr_site(ρ)`.
pub fn reset_site(
    rho: &DensityMatrix,
    psi: &InputState,
    site: usize,
    n_sites: usize,
) -> Result<DensityMatrix> {
    let dim = 1usize << n_sites;
    if rho.dim() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            found: rho.dim(),
        });
    }
    if site == 0 || site > n_sites {
        return Err(Error::invalid(format!("site {site} outside 1..={n_sites}")));
    }
    let amp = psi.amplitudes();
    if site == 1 {
        let reduced = partial_trace_first(rho, 2)?;
        let rest = dim / 2;
        let m = reduced.matrix();
        let out = DMatrix::from_fn(dim, dim, |i, j| {
            let (a, ri) = (i / rest, i % rest);
            let (b, rj) = (j / rest, j % rest);
            Complex64::new(amp[a] * amp[b], 0.0) * m[(ri, rj)]
        });
        return Ok(DensityMatrix::from_trusted(out));
    }
    let shift = n_sites - site;
    let bit = |x: usize| (x >> shift) & 1;
    let m = rho.matrix();
    let out = DMatrix::from_fn(dim, dim, |i, j| {
        let (a, b) = (bit(i), bit(j));
        let mask = !(1usize << shift);
        let traced: Complex64 = (0..2)
            .map(|k| m[((i & mask) | (k << shift), (j & mask) | (k << shift))])
            .sum();
        Complex64::new(amp[a] * amp[b], 0.0) * traced
    });
    Ok(DensityMatrix::from_trusted(out))
}

/// Real single-qubit input state `(√((1−u)/2), √((1+u)/2))`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct InputState([f64; 2]);

impl InputState {
    pub fn amplitudes(&self) -> [f64; 2] {
        self.0
    }

    pub fn to_complex(&self) -> [Complex64; 2] {
        [
            Complex64::new(self.0[0], 0.0),
            Complex64::new(self.0[1], 0.0),
        ]
    }
}

pub fn encode_input(u: f64) -> Result<InputState> {
    if !(-1.0..=1.0).contains(&u) {
        return Err(Error::invalid(format!("input {u} outside [-1, 1]")));
    }
    Ok(InputState([
        ((1.0 - u) / 2.0).sqrt(),
        ((1.0 + u) / 2.0).sqrt(),
    ]))
}
