use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::basis::{KrylovBasis, KrylovSource, RankTolerance};
use super::dd::{propagator, DdMatrix, Orthonormalizer};
use crate::error::{Error, Result};
use crate::quantum::operator::{check_dims, Operator};
use crate::quantum::spectral::Hamiltonian;

/// Propagators `U(t_j)` for an increasing list of times, in double-double.
///
/// Equidistant grids `t_j = j·τ` are stepped with a single `U(τ)`; other grids
/// compose per-increment propagators.
pub(crate) struct PropagatorWalk {
    h: DdMatrix,
    times: Vec<f64>,
    step: Option<DdMatrix>,
    current: DdMatrix,
    prev_time: f64,
    next: usize,
}

impl PropagatorWalk {
    pub(crate) fn new(h: &Operator, times: &[f64]) -> Result<Self> {
        for w in times.windows(2) {
            if w[1] == w[0] {
                return Err(Error::invalid(format!("time {} is repeated", w[0])));
            }
            if w[1] < w[0] {
                return Err(Error::invalid("times must be ascending"));
            }
        }
        if times.iter().any(|t| !t.is_finite()) {
            return Err(Error::invalid("times must be finite"));
        }
        let hd = DdMatrix::from_f64(h.matrix());
        let step = equidistant_step(times).map(|tau| propagator(&hd, tau));
        Ok(Self {
            current: DdMatrix::identity(h.dim()),
            h: hd,
            times: times.to_vec(),
            step,
            prev_time: 0.0,
            next: 0,
        })
    }
}

impl Iterator for PropagatorWalk {
    type Item = (f64, DdMatrix);

    fn next(&mut self) -> Option<Self::Item> {
        let t = *self.times.get(self.next)?;
        if t != self.prev_time || self.next > 0 {
            self.current = match &self.step {
                Some(u) => self.current.matmul(u),
                None => self
                    .current
                    .matmul(&propagator(&self.h, t - self.prev_time)),
            };
        }
        self.prev_time = t;
        self.next += 1;
        Some((t, self.current.clone()))
    }
}

/// Returns `τ` when `times` is `{0, τ, 2τ, …}` or `{τ, 2τ, …}` to relative 1e-12.
fn equidistant_step(times: &[f64]) -> Option<f64> {
    let offset = usize::from(times.first() == Some(&0.0));
    let tau = *times.get(offset)?;
    if tau <= 0.0 {
        return None;
    }
    let ok = times.iter().enumerate().all(|(i, &t)| {
        let j = (i + 1 - offset) as f64;
        (t - j * tau).abs() <= 1e-12 * t.abs().max(tau)
    });
    ok.then_some(tau)
}

/// Krylov basis spanned by `O(t_0), O(t_1), …` with `O(t) = e^{iHt} O e^{−iHt}`.
pub fn krylov_space_evolved(
    h: &Operator,
    op: &Operator,
    times: &[f64],
    tol: RankTolerance,
) -> Result<KrylovBasis> {
    check_dims(h, op)?;
    if op.frobenius_norm() == 0.0 {
        return Err(Error::ZeroOperator(op.label().to_owned()));
    }
    if times.first() != Some(&0.0) {
        return Err(Error::invalid("evolved Krylov times must start at 0"));
    }
    let od = DdMatrix::from_f64(op.matrix());
    let mut gs = Orthonormalizer::new();
    for (_, u) in PropagatorWalk::new(h, times)? {
        gs.offer(od.conjugate_by(&u), tol.get());
    }
    KrylovBasis::from_dd(
        gs.basis(),
        KrylovSource::EvolvedTimes {
            times: times.to_vec(),
        },
        op.label(),
    )
}

/// Default sampling step in units of `t_H/N`. Integer and half-integer
/// multiples make the phases of ±ω coincide for two-level systems, so the
/// factor sits between them.
pub const DEFAULT_STEP_FACTOR: f64 = 1.5;

/// `DEFAULT_STEP_FACTOR · t_H / N` for a Hamiltonian of dimension `N`.
pub fn default_time_step(h: &Hamiltonian) -> Result<f64> {
    Ok(DEFAULT_STEP_FACTOR * crate::timescales::heisenberg_time(h)? / h.dim() as f64)
}

/// Search range of [`conditioned_time_step`] in units of `t_H/N`.
pub const STEP_SEARCH_RANGE: (f64, f64) = (1.0, 3.0);
/// Number of candidate steps tried by [`conditioned_time_step`].
pub const STEP_SEARCH_POINTS: usize = 201;
/// Matrix elements below this fraction of the largest are ignored when
/// collecting Bohr frequencies.
const BOHR_WEIGHT_CUTOFF: f64 = 1e-12;
/// Bohr frequencies closer than this are merged.
const BOHR_MERGE_TOL: f64 = 1e-8;

/// Distinct Bohr frequencies `ε_a − ε_b` carried by `op` in the eigenbasis
/// of `h`, ascending.
pub fn bohr_frequencies(h: &Hamiltonian, op: &Operator) -> Result<Vec<f64>> {
    check_dims(h, op)?;
    let spec = h.spectral();
    let tilde = spec.to_eigenbasis(op.matrix());
    let e = spec.eigenvalues();
    let largest = tilde.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if largest == 0.0 {
        return Err(Error::ZeroOperator(op.label().to_owned()));
    }
    let mut omegas: Vec<f64> = (0..e.len())
        .flat_map(|a| (0..e.len()).map(move |b| (a, b)))
        .filter(|&(a, b)| tilde[(a, b)].norm() > BOHR_WEIGHT_CUTOFF * largest)
        .map(|(a, b)| e[a] - e[b])
        .collect();
    omegas.sort_by(f64::total_cmp);
    omegas.dedup_by(|later, kept| (*later - *kept).abs() < BOHR_MERGE_TOL);
    Ok(omegas)
}

/// `log |det V|` of the Vandermonde matrix of the phases `e^{iωτ}`.
fn vandermonde_log_det(omegas: &[f64], tau: f64) -> f64 {
    let mut sum = 0.0;
    for (i, a) in omegas.iter().enumerate() {
        for b in &omegas[i + 1..] {
            sum += (2.0 * (0.5 * (a - b) * tau).sin().abs()).ln();
        }
    }
    sum
}

/// Equidistant step for sampling the evolved Krylov space of `op`.
///
/// Equidistant samples of `O(t)` are a Vandermonde combination of the Bohr
/// components, so the step that keeps that matrix best conditioned keeps the
/// sampled span numerically full. Among `f·t_H/N` for `f` in
/// [`STEP_SEARCH_RANGE`] the step maximizing the Vandermonde log-determinant
/// is returned.
pub fn conditioned_time_step(h: &Hamiltonian, op: &Operator) -> Result<f64> {
    let unit = crate::timescales::heisenberg_time(h)? / h.dim() as f64;
    let omegas = bohr_frequencies(h, op)?;
    let (lo, hi) = STEP_SEARCH_RANGE;
    let mut best = (f64::NEG_INFINITY, lo * unit);
    for k in 0..STEP_SEARCH_POINTS {
        let tau = (lo + (hi - lo) * k as f64 / (STEP_SEARCH_POINTS - 1) as f64) * unit;
        let score = vandermonde_log_det(&omegas, tau);
        if score > best.0 {
            best = (score, tau);
        }
    }
    Ok(best.1)
}

/// `t_j = j·τ` for `j = 0..count`.
pub fn equidistant_times(tau: f64, count: usize) -> Vec<f64> {
    (0..count).map(|j| j as f64 * tau).collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpanComparison {
    pub equal: bool,
    /// `‖P_A − P_B‖_F` of the orthogonal projectors on vectorized operators.
    pub distance: f64,
}

pub const SPAN_EQUALITY_TOL: f64 = 1e-8;

/// Compares two spans through their orthogonal projectors.
pub fn verify_span_equality(a: &KrylovBasis, b: &KrylovBasis) -> Result<SpanComparison> {
    let dim = match (a.operator_dim(), b.operator_dim()) {
        (Some(x), Some(y)) if x != y => {
            return Err(Error::DimensionMismatch {
                expected: x,
                found: y,
            });
        }
        (Some(x), _) | (None, Some(x)) => x,
        (None, None) => {
            return Ok(SpanComparison {
                equal: true,
                distance: 0.0,
            })
        }
    };
    let diff = projector(a, dim) - projector(b, dim);
    let distance = diff.norm();
    Ok(SpanComparison {
        equal: a.grade() == b.grade() && distance < SPAN_EQUALITY_TOL,
        distance,
    })
}

fn projector(basis: &KrylovBasis, dim: usize) -> DMatrix<Complex64> {
    let n2 = dim * dim;
    let cols = DMatrix::from_fn(n2, basis.grade(), |r, k| {
        basis.elements()[k].matrix()[(r / dim, r % dim)]
    });
    &cols * cols.adjoint()
}
