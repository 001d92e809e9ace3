use nalgebra::DMatrix;
use num_complex::Complex64;

use super::density::DensityMatrix;
use super::operator::{check_dims, Operator};
use super::spectral::Hamiltonian;
use crate::error::{Error, Result};

/// Heisenberg-picture evolution `U†(t) O U(t)` with `U(t) = exp(−iHt)`.
pub fn evolve_operator(h: &Hamiltonian, op: &Operator, t: f64) -> Result<Operator> {
    OperatorFrame::new(h, op)?.at(t)
}

/// Schrödinger-picture evolution `U(t) ρ U†(t)`.
pub fn evolve_density(h: &Hamiltonian, rho: &DensityMatrix, t: f64) -> Result<DensityMatrix> {
    if h.dim() != rho.dim() {
        return Err(Error::DimensionMismatch {
            expected: h.dim(),
            found: rho.dim(),
        });
    }
    if t == 0.0 {
        return Ok(rho.clone());
    }
    let spec = h.spectral();
    let mut tilde = spec.to_eigenbasis(rho.matrix());
    // U ρ U† in the eigenbasis multiplies entry (a, b) by exp(−i(ε_a − ε_b)t).
    tilde.component_mul_assign(&spec.heisenberg_phases(-t));
    let m = spec.from_eigenbasis(&tilde);
    Ok(DensityMatrix::from_trusted(hermitize(m)))
}

/// An operator expressed once in the eigenbasis of `H` so that evolving it
/// to many times costs two matrix products per time.
#[derive(Clone, Debug)]
pub struct OperatorFrame<'a> {
    h: &'a Hamiltonian,
    op: &'a Operator,
    tilde: DMatrix<Complex64>,
}

impl<'a> OperatorFrame<'a> {
    pub fn new(h: &'a Hamiltonian, op: &'a Operator) -> Result<Self> {
        check_dims(h, op)?;
        let tilde = h.spectral().to_eigenbasis(op.matrix());
        Ok(Self { h, op, tilde })
    }

    /// Matrix elements of `O` in the eigenbasis.
    pub fn eigen_elements(&self) -> &DMatrix<Complex64> {
        &self.tilde
    }

    pub fn at(&self, t: f64) -> Result<Operator> {
        if !t.is_finite() {
            return Err(Error::invalid(format!("time must be finite, got {t}")));
        }
        if t == 0.0 {
            return Ok(self.op.clone());
        }
        let spec = self.h.spectral();
        let evolved = self.tilde.component_mul(&spec.heisenberg_phases(t));
        let m = spec.from_eigenbasis(&evolved);
        let label = format!("{}({t})", self.op.label());
        if self.op.is_hermitian() {
            Ok(Operator::from_parts(label, m, true))
        } else {
            Operator::new(label, m)
        }
    }
}

fn hermitize(m: DMatrix<Complex64>) -> DMatrix<Complex64> {
    (&m + m.adjoint()) * Complex64::new(0.5, 0.0)
}
