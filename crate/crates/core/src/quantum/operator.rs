use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Per-entry tolerance for `A == A†`.
pub const HERMITIAN_TOL: f64 = 1e-12;

/// Dense complex square matrix with a text label.
///
/// Hermiticity is recorded at construction; constructors that require it
/// ([`Operator::hermitian`]) reject matrices whose largest entry-wise
/// deviation from the conjugate transpose exceeds [`HERMITIAN_TOL`] and store
/// the symmetrized matrix.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(into = "OperatorJson", try_from = "OperatorJson")]
pub struct Operator {
    label: String,
    matrix: DMatrix<Complex64>,
    hermitian: bool,
}

impl Operator {
    pub fn new(label: impl Into<String>, matrix: DMatrix<Complex64>) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() {
            return Err(Error::invalid(format!(
                "operator must be square, got {}x{}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        if matrix.nrows() == 0 {
            return Err(Error::invalid("operator dimension must be positive"));
        }
        let hermitian = hermitian_deviation(&matrix) <= HERMITIAN_TOL;
        Ok(Self {
            label: label.into(),
            matrix,
            hermitian,
        })
    }

    /// Builds an operator that must be Hermitian.
    pub fn hermitian(label: impl Into<String>, matrix: DMatrix<Complex64>) -> Result<Self> {
        let label = label.into();
        let op = Self::new(label.clone(), matrix)?;
        if !op.hermitian {
            return Err(Error::NotHermitian {
                deviation: hermitian_deviation(&op.matrix),
                label,
            });
        }
        Ok(op.symmetrized())
    }

    /// Internal constructor for results whose Hermiticity is known by construction.
    pub(crate) fn from_parts(label: String, matrix: DMatrix<Complex64>, hermitian: bool) -> Self {
        debug_assert_eq!(matrix.nrows(), matrix.ncols());
        let op = Self {
            label,
            matrix,
            hermitian,
        };
        if hermitian {
            op.symmetrized()
        } else {
            op
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self::from_parts("I".into(), DMatrix::identity(dim, dim), true)
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    pub fn into_matrix(self) -> DMatrix<Complex64> {
        self.matrix
    }

    pub fn is_hermitian(&self) -> bool {
        self.hermitian
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.matrix.norm()
    }

    /// `(A + A†)/2`, with the Hermitian flag set.
    pub fn symmetrized(&self) -> Self {
        let m = (&self.matrix + self.matrix.adjoint()) * Complex64::new(0.5, 0.0);
        Self {
            label: self.label.clone(),
            matrix: m,
            hermitian: true,
        }
    }

    pub fn scaled(&self, c: Complex64) -> Self {
        let hermitian = self.hermitian && c.im == 0.0;
        Self {
            label: self.label.clone(),
            matrix: &self.matrix * c,
            hermitian,
        }
    }

    pub fn product(&self, other: &Operator) -> Result<Operator> {
        check_dims(self, other)?;
        Operator::new(
            format!("{}{}", self.label, other.label),
            &self.matrix * &other.matrix,
        )
    }

    pub fn sum(&self, other: &Operator) -> Result<Operator> {
        check_dims(self, other)?;
        Operator::new(
            format!("{}+{}", self.label, other.label),
            &self.matrix + &other.matrix,
        )
    }

    pub fn hermitian_deviation(&self) -> f64 {
        hermitian_deviation(&self.matrix)
    }
}

pub(crate) fn hermitian_deviation(m: &DMatrix<Complex64>) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in i..n {
            let d = (m[(i, j)] - m[(j, i)].conj()).norm();
            worst = worst.max(d);
        }
    }
    worst
}

pub(crate) fn check_dims(a: &Operator, b: &Operator) -> Result<()> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            found: b.dim(),
        });
    }
    Ok(())
}

/// Hilbert–Schmidt inner product `Tr(A† B)`.
pub fn hs_inner(a: &Operator, b: &Operator) -> Result<Complex64> {
    check_dims(a, b)?;
    Ok(a.matrix.dotc(&b.matrix))
}

/// Normalized fidelity `|Tr(A† B)| / (‖A‖_F ‖B‖_F)`.
pub fn fidelity(a: &Operator, b: &Operator) -> Result<f64> {
    check_dims(a, b)?;
    let na = a.frobenius_norm();
    let nb = b.frobenius_norm();
    if na == 0.0 {
        return Err(Error::ZeroOperator(a.label.clone()));
    }
    if nb == 0.0 {
        return Err(Error::ZeroOperator(b.label.clone()));
    }
    Ok(fidelity_of_matrices(&a.matrix, &b.matrix, na, nb))
}

pub(crate) fn fidelity_of_matrices(
    a: &DMatrix<Complex64>,
    b: &DMatrix<Complex64>,
    na: f64,
    nb: f64,
) -> f64 {
    (a.dotc(b).norm() / (na * nb)).min(1.0)
}

/// `[A, B] = AB − BA`.
pub fn commutator(a: &Operator, b: &Operator) -> Result<Operator> {
    check_dims(a, b)?;
    let m = &a.matrix * &b.matrix - &b.matrix * &a.matrix;
    Operator::new(format!("[{},{}]", a.label, b.label), m)
}

/// JSON form shared with fixtures: row-major real and imaginary parts.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct OperatorJson {
    pub dim: usize,
    pub label: String,
    pub re: Vec<f64>,
    pub im: Vec<f64>,
}

impl From<Operator> for OperatorJson {
    fn from(op: Operator) -> Self {
        let (re, im) = matrix_to_row_major(&op.matrix);
        OperatorJson {
            dim: op.dim(),
            label: op.label,
            re,
            im,
        }
    }
}

impl TryFrom<OperatorJson> for Operator {
    type Error = Error;

    fn try_from(json: OperatorJson) -> Result<Self> {
        let m = matrix_from_row_major(json.dim, &json.re, &json.im)?;
        Operator::new(json.label, m)
    }
}

pub(crate) fn matrix_to_row_major(m: &DMatrix<Complex64>) -> (Vec<f64>, Vec<f64>) {
    let n = m.nrows();
    let mut re = Vec::with_capacity(n * n);
    let mut im = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            re.push(m[(i, j)].re);
            im.push(m[(i, j)].im);
        }
    }
    (re, im)
}

pub(crate) fn matrix_from_row_major(
    dim: usize,
    re: &[f64],
    im: &[f64],
) -> Result<DMatrix<Complex64>> {
    if dim == 0 || re.len() != dim * dim || im.len() != dim * dim {
        return Err(Error::invalid(format!(
            "expected {} entries for dim {dim}, got re={} im={}",
            dim * dim,
            re.len(),
            im.len()
        )));
    }
    Ok(DMatrix::from_fn(dim, dim, |i, j| {
        Complex64::new(re[i * dim + j], im[i * dim + j])
    }))
}
