use num_complex::Complex64;

use super::basis::{KrylovBasis, KrylovSource, RankTolerance};
use super::dd::{DdMatrix, Orthonormalizer};
use crate::error::{Error, Result};
use crate::quantum::evolution::OperatorFrame;
use crate::quantum::operator::{check_dims, commutator, hs_inner, Operator};
use crate::quantum::spectral::Hamiltonian;

/// `L(O) = HO − OH`.
pub fn liouvillian_apply(h: &Operator, op: &Operator) -> Result<Operator> {
    commutator(h, op).map(|c| c.with_label(format!("L({})", op.label())))
}

/// Krylov basis of `O, L(O), L²(O), …`.
///
/// Each new candidate is the Liouvillian image of the most recent basis
/// element rather than of the raw power `Lᵏ(O)`; both sequences span the same
/// nested spaces, but raw powers grow like `‖H‖ᵏ` and lose every small
/// direction to rounding long before the space closes.
pub fn krylov_space_liouvillian(
    h: &Operator,
    op: &Operator,
    tol: RankTolerance,
) -> Result<KrylovBasis> {
    check_dims(h, op)?;
    if op.frobenius_norm() == 0.0 {
        return Err(Error::ZeroOperator(op.label().to_owned()));
    }
    let hd = DdMatrix::from_f64(h.matrix());
    let max_grade = op.dim() * op.dim();
    let mut gs = Orthonormalizer::new();
    gs.offer(DdMatrix::from_f64(op.matrix()), tol.get());
    while gs.len() < max_grade {
        let last = gs.last().expect("seed accepted");
        let candidate = DdMatrix::commutator(&hd, last);
        if !gs.offer(candidate, tol.get()).accepted {
            break;
        }
    }
    KrylovBasis::from_dd(gs.basis(), KrylovSource::LiouvillianPowers, op.label())
}

/// Krylov-chain populations of a normalized operator over time.
#[derive(Clone, Debug)]
pub struct ComplexityProfile<'a> {
    basis: KrylovBasis,
    frame: OperatorFrame<'a>,
    norm: f64,
}

impl<'a> ComplexityProfile<'a> {
    pub fn new(h: &'a Hamiltonian, op: &'a Operator, tol: RankTolerance) -> Result<Self> {
        let basis = krylov_space_liouvillian(h, op, tol)?;
        let frame = OperatorFrame::new(h, op)?;
        Ok(Self {
            basis,
            frame,
            norm: op.frobenius_norm(),
        })
    }

    pub fn basis(&self) -> &KrylovBasis {
        &self.basis
    }

    /// `|β_n(t)|² = |⟨W_n, O(t)⟩|²` for the unit-norm `O`.
    pub fn populations(&self, t: f64) -> Result<Vec<f64>> {
        let evolved = self
            .frame
            .at(t)?
            .scaled(Complex64::new(1.0 / self.norm, 0.0));
        self.basis
            .elements()
            .iter()
            .map(|w| hs_inner(w, &evolved).map(|b| b.norm_sqr()))
            .collect()
    }

    /// `K(t) = Σ_n (n+1)|β_n(t)|²`.
    pub fn complexity(&self, t: f64) -> Result<f64> {
        Ok(self
            .populations(t)?
            .iter()
            .enumerate()
            .map(|(n, p)| (n + 1) as f64 * p)
            .sum())
    }
}

pub fn operator_complexity(
    h: &Hamiltonian,
    op: &Operator,
    t: f64,
    tol: RankTolerance,
) -> Result<f64> {
    ComplexityProfile::new(h, op, tol)?.complexity(t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::pauli::{pauli_on_site, Pauli};

    fn single_qubit(hval: f64) -> (Hamiltonian, Operator, Operator, Operator) {
        let z = pauli_on_site(Pauli::Z, 1, 1).unwrap();
        let h = Hamiltonian::new(z.scaled(Complex64::new(hval, 0.0))).unwrap();
        (
            h,
            pauli_on_site(Pauli::X, 1, 1).unwrap(),
            pauli_on_site(Pauli::Y, 1, 1).unwrap(),
            z,
        )
    }

    #[test]
    fn pauli_commutator() {
        let (_, x, y, z) = single_qubit(1.0);
        let l = liouvillian_apply(&z, &x).unwrap();
        assert!((l.matrix() - y.matrix() * Complex64::new(0.0, 2.0)).norm() < 1e-15);
        let id = Operator::identity(2);
        assert_eq!(liouvillian_apply(&z, &id).unwrap().frobenius_norm(), 0.0);
    }

    /// `[Z,[Z,X]] = [Z, 2iY] = 2i·(−2iX) = 4X`.
    #[test]
    fn nested_commutator() {
        let (_, x, _, z) = single_qubit(1.0);
        let l2 = liouvillian_apply(&z, &liouvillian_apply(&z, &x).unwrap()).unwrap();
        assert!((l2.matrix() - x.matrix() * Complex64::new(4.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn grades_of_simple_seeds() {
        let (h, x, _, _) = single_qubit(0.5);
        let b = krylov_space_liouvillian(&h, &x, RankTolerance::DEFAULT).unwrap();
        assert_eq!(b.grade(), 2);
        assert!(b.orthonormality_error() < 1e-14);
        let first = &b.elements()[0];
        assert!((first.matrix() - x.matrix() / Complex64::new(2f64.sqrt(), 0.0)).norm() < 1e-15);
        let id = Operator::identity(2);
        assert_eq!(
            krylov_space_liouvillian(&h, &id, RankTolerance::DEFAULT)
                .unwrap()
                .grade(),
            1
        );
    }

    #[test]
    fn zero_seed_is_rejected() {
        let (h, _, _, _) = single_qubit(0.5);
        let zero = Operator::new("0", nalgebra::DMatrix::zeros(2, 2)).unwrap();
        assert!(matches!(
            krylov_space_liouvillian(&h, &zero, RankTolerance::DEFAULT),
            Err(Error::ZeroOperator(_))
        ));
    }

    /// Two-level chain: `X(t) = cos(2ht) X − sin(2ht) Y` gives populations
    /// `cos²` and `sin²`, hence `K = 1 + sin²(2ht)`.
    #[test]
    fn two_level_complexity() {
        let hval = 0.35;
        let (h, x, _, _) = single_qubit(hval);
        let profile = ComplexityProfile::new(&h, &x, RankTolerance::DEFAULT).unwrap();
        assert_eq!(profile.complexity(0.0).unwrap(), 1.0);
        for &t in &[0.2, 1.0, 3.3] {
            let k = profile.complexity(t).unwrap();
            let want = 1.0 + (2.0 * hval * t).sin().powi(2);
            assert!((k - want).abs() < 1e-12, "{k} vs {want}");
        }
    }
}
