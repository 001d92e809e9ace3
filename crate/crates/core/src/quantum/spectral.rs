use std::ops::Deref;
use std::sync::{Arc, OnceLock};

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use super::operator::Operator;
use crate::error::{Error, Result};

/// Eigenpairs of a Hermitian matrix, eigenvalues ascending.
#[derive(Clone, Debug)]
pub struct SpectralDecomposition {
    eigenvalues: DVector<f64>,
    eigenvectors: DMatrix<Complex64>,
}

impl SpectralDecomposition {
    pub fn of(h: &Operator) -> Result<Self> {
        if !h.is_hermitian() {
            return Err(Error::NotHermitian {
                label: h.label().to_owned(),
                deviation: h.hermitian_deviation(),
            });
        }
        Ok(Self::of_hermitian_matrix(h.matrix().clone()))
    }

    fn of_hermitian_matrix(m: DMatrix<Complex64>) -> Self {
        let eig = SymmetricEigen::new(m);
        let n = eig.eigenvalues.len();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let eigenvalues = DVector::from_iterator(n, order.iter().map(|&k| eig.eigenvalues[k]));
        let eigenvectors = DMatrix::from_fn(n, n, |i, j| eig.eigenvectors[(i, order[j])]);
        Self {
            eigenvalues,
            eigenvectors,
        }
    }

    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn eigenvalues(&self) -> &DVector<f64> {
        &self.eigenvalues
    }

    /// Eigenvectors as columns.
    pub fn eigenvectors(&self) -> &DMatrix<Complex64> {
        &self.eigenvectors
    }

    /// `V diag(ε) V†`.
    pub fn reconstruct(&self) -> DMatrix<Complex64> {
        let v = &self.eigenvectors;
        let mut scaled = v.clone();
        for (j, mut col) in scaled.column_iter_mut().enumerate() {
            col *= Complex64::new(self.eigenvalues[j], 0.0);
        }
        scaled * v.adjoint()
    }

    /// `V† A V`.
    pub fn to_eigenbasis(&self, a: &DMatrix<Complex64>) -> DMatrix<Complex64> {
        self.eigenvectors.adjoint() * a * &self.eigenvectors
    }

    /// `V Ã V†`.
    pub fn from_eigenbasis(&self, a: &DMatrix<Complex64>) -> DMatrix<Complex64> {
        &self.eigenvectors * a * self.eigenvectors.adjoint()
    }

    /// Phase factors `exp(i (ε_a − ε_b) t)` of the Heisenberg-picture propagation
    /// `U†(t) A U(t)` written in the eigenbasis.
    pub fn heisenberg_phases(&self, t: f64) -> DMatrix<Complex64> {
        let e = &self.eigenvalues;
        DMatrix::from_fn(self.dim(), self.dim(), |a, b| {
            Complex64::from_polar(1.0, (e[a] - e[b]) * t)
        })
    }

    /// `U(t) = exp(−iHt)`.
    pub fn propagator(&self, t: f64) -> DMatrix<Complex64> {
        let mut scaled = self.eigenvectors.clone();
        for (j, mut col) in scaled.column_iter_mut().enumerate() {
            col *= Complex64::from_polar(1.0, -self.eigenvalues[j] * t);
        }
        scaled * self.eigenvectors.adjoint()
    }
}

/// A Hermitian operator used as a generator of dynamics.
///
/// The spectral decomposition is computed on first use and shared between
/// clones and threads.
#[derive(Clone, Debug)]
pub struct Hamiltonian {
    op: Operator,
    spectrum: Arc<OnceLock<SpectralDecomposition>>,
}

impl Hamiltonian {
    pub fn new(op: Operator) -> Result<Self> {
        if !op.is_hermitian() {
            return Err(Error::NotHermitian {
                label: op.label().to_owned(),
                deviation: op.hermitian_deviation(),
            });
        }
        Ok(Self {
            op,
            spectrum: Arc::new(OnceLock::new()),
        })
    }

    pub fn operator(&self) -> &Operator {
        &self.op
    }

    pub fn spectral(&self) -> &SpectralDecomposition {
        self.spectrum
            .get_or_init(|| SpectralDecomposition::of_hermitian_matrix(self.op.matrix().clone()))
    }
}

impl Deref for Hamiltonian {
    type Target = Operator;

    fn deref(&self) -> &Operator {
        &self.op
    }
}

impl TryFrom<Operator> for Hamiltonian {
    type Error = Error;

    fn try_from(op: Operator) -> Result<Self> {
        Hamiltonian::new(op)
    }
}

pub fn spectral_decompose(h: &Operator) -> Result<SpectralDecomposition> {
    SpectralDecomposition::of(h)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::pauli::{pauli_on_site, Pauli};

    #[test]
    fn pauli_z_spectrum() {
        let z = pauli_on_site(Pauli::Z, 1, 1).unwrap();
        let s = spectral_decompose(&z).unwrap();
        assert_eq!(s.eigenvalues().as_slice(), &[-1.0, 1.0]);
    }

    #[test]
    fn identity_spectrum() {
        let s = spectral_decompose(&Operator::identity(4)).unwrap();
        for e in s.eigenvalues().iter() {
            assert!((e - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn rejects_non_hermitian() {
        let m = DMatrix::from_row_slice(
            2,
            2,
            &[
                Complex64::new(0.0, 0.0),
                Complex64::new(1.0, 0.0),
                Complex64::new(0.0, 0.0),
                Complex64::new(0.0, 0.0),
            ],
        );
        let op = Operator::new("N", m).unwrap();
        assert!(matches!(
            spectral_decompose(&op),
            Err(Error::NotHermitian { .. })
        ));
        assert!(Hamiltonian::new(op).is_err());
    }

    #[test]
    fn propagator_is_unitary_and_reconstruction_holds() {
        let h = pauli_on_site(Pauli::X, 1, 2)
            .unwrap()
            .sum(&pauli_on_site(Pauli::Z, 2, 2).unwrap())
            .unwrap();
        let s = spectral_decompose(&h).unwrap();
        let v = s.eigenvectors();
        let id = DMatrix::<Complex64>::identity(4, 4);
        assert!((v.adjoint() * v - &id).norm() < 1e-10);
        assert!((s.reconstruct() - h.matrix()).norm() < 1e-10 * h.frobenius_norm());
        let u = s.propagator(0.37);
        assert!((u.adjoint() * &u - id).norm() < 1e-12);
    }
}
