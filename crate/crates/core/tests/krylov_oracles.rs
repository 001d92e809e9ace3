//! Krylov grades against independent spectral and singular-value oracles.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use krylov_qrc::krylov::{
    disjoint_spaces, krylov_space_evolved, krylov_space_liouvillian, verify_span_equality,
    RankTolerance, SpaceGrid,
};
use krylov_qrc::quantum::ising::{IsingModel, DEFAULT_FIELD};
use krylov_qrc::quantum::pauli::parse_pauli_label;
use krylov_qrc::quantum::Operator;

const MERGE_TOL: f64 = 1e-8;
const WEIGHT_TOL: f64 = 1e-10;

/// Eigen-decomposition of `h` by nalgebra's Hermitian solver, independent of
/// the library's cached spectral decomposition.
fn eigen(h: &Operator) -> (Vec<f64>, DMatrix<Complex64>) {
    let eig = h.matrix().clone().symmetric_eigen();
    (eig.eigenvalues.iter().copied().collect(), eig.eigenvectors)
}

/// Dimension of the joint Krylov space of `observables`: the evolved
/// operators span `⊕_ω span{P_ω O_k}`, where `P_ω` keeps the matrix elements
/// whose Bohr frequency equals `ω`.
fn bohr_dimension(h: &Operator, observables: &[Operator]) -> usize {
    let (energies, vectors) = eigen(h);
    let n = energies.len();
    let tilde: Vec<DMatrix<Complex64>> = observables
        .iter()
        .map(|o| vectors.adjoint() * o.matrix() * &vectors)
        .collect();
    let mut pairs: Vec<(f64, usize, usize)> = (0..n)
        .flat_map(|a| (0..n).map(move |b| (a, b)))
        .map(|(a, b)| (energies[a] - energies[b], a, b))
        .collect();
    pairs.sort_by(|x, y| x.0.total_cmp(&y.0));
    let mut clusters: Vec<Vec<(usize, usize)>> = Vec::new();
    let mut last = f64::NEG_INFINITY;
    for (omega, a, b) in pairs {
        if omega - last > MERGE_TOL || clusters.is_empty() {
            clusters.push(Vec::new());
        }
        last = omega;
        clusters.last_mut().unwrap().push((a, b));
    }
    let mut total = 0;
    for cluster in &clusters {
        let block = DMatrix::from_fn(cluster.len(), observables.len(), |r, k| {
            let (a, b) = cluster[r];
            tilde[k][(a, b)] / observables[k].frobenius_norm()
        });
        let sv = block.singular_values();
        total += sv.iter().filter(|&&s| s > WEIGHT_TOL).count();
    }
    total
}

#[test]
fn liouvillian_grade_matches_bohr_count() {
    for seed in 0..6 {
        for n_sites in 2..=4 {
            let h = IsingModel::random(n_sites, DEFAULT_FIELD, seed)
                .unwrap()
                .hamiltonian()
                .unwrap();
            for label in ["Z_1", "X_1", "Z_1Z_2", "Y_2"] {
                let op = parse_pauli_label(label, n_sites).unwrap();
                let grade = krylov_space_liouvillian(&h, &op, RankTolerance::DEFAULT)
                    .unwrap()
                    .grade();
                assert_eq!(
                    grade,
                    bohr_dimension(&h, &[op]),
                    "seed {seed}, {n_sites} sites, {label}"
                );
            }
        }
    }
}

#[test]
fn joint_disjoint_dimension_matches_bohr_oracle() {
    let observables: Vec<Operator> = ["Z_1", "Z_2", "Z_3", "Z_4"]
        .iter()
        .map(|l| parse_pauli_label(l, 4).unwrap())
        .collect();
    for seed in 0..3 {
        let h = IsingModel::random(4, DEFAULT_FIELD, seed)
            .unwrap()
            .hamiltonian()
            .unwrap();
        let grid = SpaceGrid::default_for(&h).unwrap();
        let spaces =
            disjoint_spaces(&h, &observables, &grid.times(), RankTolerance::DEFAULT).unwrap();
        assert_eq!(
            spaces.full.grade(),
            bohr_dimension(&h, &observables),
            "seed {seed}"
        );
        assert_eq!(spaces.grades().iter().sum::<usize>(), spaces.full.grade());
        assert!(spaces.full.orthonormality_error() < 1e-8);
    }
}

fn vectorize(m: &DMatrix<Complex64>) -> DVector<Complex64> {
    DVector::from_iterator(m.len(), m.iter().copied())
}

/// Numerical rank of evolved samples at scattered times via the SVD; only
/// well conditioned for small registers.
#[test]
fn evolved_grade_matches_svd_rank_on_two_sites() {
    for seed in 0..5 {
        let h = IsingModel::random(2, DEFAULT_FIELD, seed)
            .unwrap()
            .hamiltonian()
            .unwrap();
        let op = parse_pauli_label("X_1", 2).unwrap();
        let (energies, vectors) = eigen(&h);
        let tilde = vectors.adjoint() * op.matrix() * &vectors;
        let times: Vec<f64> = (0..40)
            .map(|j| 0.37 * j as f64 + 0.05 * (j * j % 7) as f64)
            .collect();
        let columns: Vec<DVector<Complex64>> = times
            .iter()
            .map(|&t| {
                let evolved = DMatrix::from_fn(4, 4, |a, b| {
                    tilde[(a, b)] * Complex64::from_polar(1.0, (energies[a] - energies[b]) * t)
                });
                vectorize(&evolved)
            })
            .collect();
        let stacked = DMatrix::from_columns(&columns);
        let sv = stacked.singular_values();
        let rank = sv.iter().filter(|&&s| s > 1e-8 * sv.max()).count();
        let evolved = krylov_space_evolved(&h, &op, &times, RankTolerance::DEFAULT).unwrap();
        let liouvillian = krylov_space_liouvillian(&h, &op, RankTolerance::DEFAULT).unwrap();
        assert_eq!(evolved.grade(), rank, "seed {seed}");
        assert!(verify_span_equality(&liouvillian, &evolved).unwrap().equal);
    }
}
