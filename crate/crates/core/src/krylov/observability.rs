use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::basis::{KrylovBasis, KrylovSource, RankTolerance};
use super::dd::{DdMatrix, Orthonormalizer};
use super::evolved::{default_time_step, PropagatorWalk};
use crate::error::{Error, Result};
use crate::quantum::operator::{check_dims, fidelity_of_matrices, Operator};
use crate::quantum::spectral::Hamiltonian;

/// Equidistant sampling grid `t_j = j·t_max/count`, `j = 1..=count`, used to
/// build the disjoint observability spaces.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpaceGrid {
    pub count: usize,
    pub t_max: f64,
}

impl SpaceGrid {
    pub fn new(count: usize, t_max: f64) -> Result<Self> {
        if count == 0 {
            return Err(Error::invalid("space grid needs at least one time"));
        }
        if !(t_max > 0.0 && t_max.is_finite()) {
            return Err(Error::invalid(format!(
                "t_max must be positive, got {t_max}"
            )));
        }
        Ok(Self { count, t_max })
    }

    /// `N²` points spaced by [`default_time_step`], enough samples to reach
    /// every direction of the `N²`-dimensional operator space.
    pub fn default_for(h: &Hamiltonian) -> Result<Self> {
        let count = h.dim() * h.dim();
        Self::new(count, count as f64 * default_time_step(h)?)
    }

    pub fn step(&self) -> f64 {
        self.t_max / self.count as f64
    }

    pub fn times(&self) -> Vec<f64> {
        let step = self.step();
        (1..=self.count).map(|j| j as f64 * step).collect()
    }
}

/// Output of the disjoint-space construction.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DisjointSpaces {
    pub full: KrylovBasis,
    pub per_observable: Vec<KrylovBasis>,
}

impl DisjointSpaces {
    pub fn grades(&self) -> Vec<usize> {
        self.per_observable.iter().map(KrylovBasis::grade).collect()
    }
}

/// Greedy construction of disjoint Krylov spaces: times in the outer loop,
/// observables in the inner loop; `O_k(t_j)` joins the space of observable `k`
/// iff it is linearly independent of everything accepted so far.
pub fn disjoint_spaces(
    h: &Operator,
    observables: &[Operator],
    times: &[f64],
    tol: RankTolerance,
) -> Result<DisjointSpaces> {
    if observables.is_empty() {
        return Err(Error::invalid("observable list is empty"));
    }
    if times.is_empty() {
        return Err(Error::invalid("time list is empty"));
    }
    for o in observables {
        check_dims(h, o)?;
        if o.frobenius_norm() == 0.0 {
            return Err(Error::ZeroOperator(o.label().to_owned()));
        }
    }
    let seeds: Vec<DdMatrix> = observables
        .iter()
        .map(|o| DdMatrix::from_f64(o.matrix()))
        .collect();
    let mut full = Orthonormalizer::new();
    let mut accepted: Vec<Vec<(f64, DdMatrix)>> = vec![Vec::new(); observables.len()];
    for (t, u) in PropagatorWalk::new(h, times)? {
        for (k, seed) in seeds.iter().enumerate() {
            let candidate = seed.conjugate_by(&u);
            if full.offer(candidate.clone(), tol.get()).accepted {
                accepted[k].push((t, candidate));
            }
        }
    }
    let mut per_observable = Vec::with_capacity(observables.len());
    for (k, raw) in accepted.into_iter().enumerate() {
        let mut own = Orthonormalizer::new();
        let mut own_times = Vec::with_capacity(raw.len());
        for (t, candidate) in raw {
            // A subset of jointly independent candidates is independent with
            // residuals no smaller than in the joint pass.
            let offer = own.offer(candidate, tol.get());
            debug_assert!(offer.accepted);
            own_times.push(t);
        }
        per_observable.push(KrylovBasis::from_dd(
            own.basis(),
            KrylovSource::EvolvedTimes { times: own_times },
            observables[k].label(),
        )?);
    }
    let label = observables
        .iter()
        .map(Operator::label)
        .collect::<Vec<_>>()
        .join(",");
    let full = KrylovBasis::from_dd(
        full.basis(),
        KrylovSource::EvolvedTimes {
            times: times.to_vec(),
        },
        &label,
    )?;
    Ok(DisjointSpaces {
        full,
        per_observable,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ObservableTerm {
    pub label: String,
    /// Dimension `M_k` of the observable's disjoint space.
    pub grade: usize,
    /// Number of sampling times `R_k`.
    pub samples: usize,
    pub observability: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ObservabilityReport {
    pub per_observable: Vec<ObservableTerm>,
    pub total: f64,
    pub clock_cycle: f64,
    pub multiplexing: usize,
}

/// Observables of one Hamiltonian with their disjoint-space grades resolved,
/// ready to be evaluated on many `(T, V)` cells.
#[derive(Clone, Debug)]
pub struct ObservabilityModel {
    labels: Vec<String>,
    grades: Vec<usize>,
    /// Observables in the eigenbasis of `H`; the fidelity is invariant under
    /// that change of basis.
    eigen_elements: Vec<DMatrix<Complex64>>,
    norms: Vec<f64>,
    eigenvalues: Vec<f64>,
}

impl ObservabilityModel {
    pub fn new(
        h: &Hamiltonian,
        observables: &[Operator],
        grid: SpaceGrid,
        tol: RankTolerance,
    ) -> Result<Self> {
        let spaces = disjoint_spaces(h, observables, &grid.times(), tol)?;
        Self::with_grades(h, observables, spaces.grades())
    }

    /// Uses precomputed grades `M_k`.
    pub fn with_grades(
        h: &Hamiltonian,
        observables: &[Operator],
        grades: Vec<usize>,
    ) -> Result<Self> {
        if observables.is_empty() {
            return Err(Error::invalid("observable list is empty"));
        }
        if grades.len() != observables.len() {
            return Err(Error::DimensionMismatch {
                expected: observables.len(),
                found: grades.len(),
            });
        }
        let spec = h.spectral();
        let mut eigen_elements = Vec::with_capacity(observables.len());
        let mut norms = Vec::with_capacity(observables.len());
        for o in observables {
            check_dims(h, o)?;
            let norm = o.frobenius_norm();
            if norm == 0.0 {
                return Err(Error::ZeroOperator(o.label().to_owned()));
            }
            eigen_elements.push(spec.to_eigenbasis(o.matrix()));
            norms.push(norm);
        }
        Ok(Self {
            labels: observables.iter().map(|o| o.label().to_owned()).collect(),
            grades,
            eigen_elements,
            norms,
            eigenvalues: spec.eigenvalues().iter().copied().collect(),
        })
    }

    pub fn grades(&self) -> &[usize] {
        &self.grades
    }

    fn evolved(&self, k: usize, t: f64) -> DMatrix<Complex64> {
        let e = &self.eigenvalues;
        let tilde = &self.eigen_elements[k];
        DMatrix::from_fn(tilde.nrows(), tilde.ncols(), |a, b| {
            tilde[(a, b)] * Complex64::from_polar(1.0, (e[a] - e[b]) * t)
        })
    }

    /// `p_k = 1 + Σ_{j=1}^{R_k−1} (1 − F(O_k(τ_j), O_k(τ_{j+1})))` with
    /// `R_k = min(V, M_k)` and `τ_j = j·T/R_k`, summed over observables.
    pub fn report(&self, clock_cycle: f64, multiplexing: usize) -> Result<ObservabilityReport> {
        if !(clock_cycle > 0.0 && clock_cycle.is_finite()) {
            return Err(Error::invalid(format!(
                "clock cycle must be positive, got {clock_cycle}"
            )));
        }
        if multiplexing == 0 {
            return Err(Error::invalid("multiplexing must be at least 1"));
        }
        let mut per_observable = Vec::with_capacity(self.grades.len());
        for (k, &grade) in self.grades.iter().enumerate() {
            // An observable whose directions were all claimed earlier still
            // contributes its single measurement.
            let samples = multiplexing.min(grade).max(1);
            let step = clock_cycle / samples as f64;
            let norm = self.norms[k];
            let mut p = 1.0;
            let mut prev = self.evolved(k, step);
            for j in 2..=samples {
                let next = self.evolved(k, j as f64 * step);
                p += 1.0 - fidelity_of_matrices(&prev, &next, norm, norm);
                prev = next;
            }
            per_observable.push(ObservableTerm {
                label: self.labels[k].clone(),
                grade,
                samples,
                observability: p,
            });
        }
        let total = per_observable.iter().map(|t| t.observability).sum();
        Ok(ObservabilityReport {
            per_observable,
            total,
            clock_cycle,
            multiplexing,
        })
    }
}

/// Krylov observability with the default disjoint-space grid.
pub fn krylov_observability(
    h: &Hamiltonian,
    observables: &[Operator],
    clock_cycle: f64,
    multiplexing: usize,
    tol: RankTolerance,
) -> Result<ObservabilityReport> {
    if !(clock_cycle > 0.0 && clock_cycle.is_finite()) {
        return Err(Error::invalid(format!(
            "clock cycle must be positive, got {clock_cycle}"
        )));
    }
    ObservabilityModel::new(h, observables, SpaceGrid::default_for(h)?, tol)?
        .report(clock_cycle, multiplexing)
}
