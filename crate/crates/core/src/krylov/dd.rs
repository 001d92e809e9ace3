//! Double-double complex kernels for rank decisions.
//!
//! Krylov grades at four sites live in a 256-dimensional operator space where
//! the weakest genuine directions sit only a few orders of magnitude above f64
//! rounding. Orthogonalization and propagation are therefore carried out with
//! ~32 significant digits, and results are rounded back to f64 at the end.

use nalgebra::DMatrix;
use num_complex::{Complex, Complex64};
use twofloat::TwoFloat;

pub(crate) type Cdd = Complex<TwoFloat>;

const ZERO: Cdd = Complex {
    re: TwoFloat::from_f64(0.0),
    im: TwoFloat::from_f64(0.0),
};

#[inline]
fn lift(z: Complex64) -> Cdd {
    Complex::new(TwoFloat::from(z.re), TwoFloat::from(z.im))
}

#[inline]
fn lower(z: Cdd) -> Complex64 {
    Complex64::new(z.re.hi() + z.re.lo(), z.im.hi() + z.im.lo())
}

/// Reciprocal to double-double accuracy.
///
/// `TwoFloat`'s own division forms its correction term without a fused
/// multiply-add and is only accurate to f64 precision.
#[inline]
pub(crate) fn recip(x: TwoFloat) -> TwoFloat {
    let q = 1.0 / x.hi();
    let r = TwoFloat::from(1.0) - x * q;
    q + r * q
}

#[inline]
fn norm_sqr(z: &Cdd) -> TwoFloat {
    z.re * z.re + z.im * z.im
}

/// Square matrix stored row-major; doubles as a vectorized operator.
#[derive(Clone, Debug)]
pub(crate) struct DdMatrix {
    n: usize,
    data: Vec<Cdd>,
}

impl DdMatrix {
    pub(crate) fn from_f64(m: &DMatrix<Complex64>) -> Self {
        let n = m.nrows();
        let mut data = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                data.push(lift(m[(i, j)]));
            }
        }
        Self { n, data }
    }

    pub(crate) fn identity(n: usize) -> Self {
        let mut data = vec![ZERO; n * n];
        for i in 0..n {
            data[i * n + i] = Complex::new(TwoFloat::from(1.0), TwoFloat::from(0.0));
        }
        Self { n, data }
    }

    pub(crate) fn to_f64(&self) -> DMatrix<Complex64> {
        let n = self.n;
        DMatrix::from_fn(n, n, |i, j| lower(self.data[i * n + j]))
    }

    pub(crate) fn matmul(&self, other: &DdMatrix) -> DdMatrix {
        let n = self.n;
        let mut out = vec![ZERO; n * n];
        for i in 0..n {
            let row = &mut out[i * n..(i + 1) * n];
            for k in 0..n {
                let a = self.data[i * n + k];
                if a.re == 0.0 && a.im == 0.0 {
                    continue;
                }
                let brow = &other.data[k * n..(k + 1) * n];
                for (o, b) in row.iter_mut().zip(brow) {
                    *o += a * *b;
                }
            }
        }
        DdMatrix { n, data: out }
    }

    pub(crate) fn adjoint(&self) -> DdMatrix {
        let n = self.n;
        let mut data = vec![ZERO; n * n];
        for i in 0..n {
            for j in 0..n {
                data[j * n + i] = self.data[i * n + j].conj();
            }
        }
        DdMatrix { n, data }
    }

    /// `A·B − B·A`.
    pub(crate) fn commutator(a: &DdMatrix, b: &DdMatrix) -> DdMatrix {
        let mut ab = a.matmul(b);
        let ba = b.matmul(a);
        for (x, y) in ab.data.iter_mut().zip(&ba.data) {
            *x -= *y;
        }
        ab
    }

    /// `U† A U`.
    pub(crate) fn conjugate_by(&self, u: &DdMatrix) -> DdMatrix {
        u.adjoint().matmul(&self.matmul(u))
    }

    pub(crate) fn inner(&self, other: &DdMatrix) -> Cdd {
        self.data
            .iter()
            .zip(&other.data)
            .fold(ZERO, |acc, (a, b)| acc + a.conj() * *b)
    }

    pub(crate) fn norm(&self) -> TwoFloat {
        self.data
            .iter()
            .fold(TwoFloat::from(0.0), |acc, z| acc + norm_sqr(z))
            .sqrt()
    }

    pub(crate) fn scale_real(&mut self, s: TwoFloat) {
        for z in &mut self.data {
            z.re *= s;
            z.im *= s;
        }
    }

    fn scale(&mut self, c: Cdd) {
        for z in &mut self.data {
            *z *= c;
        }
    }

    /// `self −= c·other`.
    pub(crate) fn sub_scaled(&mut self, c: Cdd, other: &DdMatrix) {
        for (x, y) in self.data.iter_mut().zip(&other.data) {
            *x -= c * *y;
        }
    }

    fn add_assign(&mut self, other: &DdMatrix) {
        for (x, y) in self.data.iter_mut().zip(&other.data) {
            *x += *y;
        }
    }

    fn max_abs_row_sum(&self) -> f64 {
        let n = self.n;
        (0..n)
            .map(|i| {
                self.data[i * n..(i + 1) * n]
                    .iter()
                    .map(|z| lower(*z).norm())
                    .sum::<f64>()
            })
            .fold(0.0, f64::max)
    }
}

/// `exp(−iHt)` by scaled Taylor series followed by repeated squaring.
pub(crate) fn propagator(h: &DdMatrix, t: f64) -> DdMatrix {
    let n = h.n;
    let bound = h.max_abs_row_sum() * t.abs();
    let squarings = if bound > 0.25 {
        (bound / 0.25).log2().ceil() as i32
    } else {
        0
    };
    let factor = t / 2f64.powi(squarings);
    let mut a = h.clone();
    a.scale(Complex::new(TwoFloat::from(0.0), -TwoFloat::from(factor)));
    let mut sum = DdMatrix::identity(n);
    let mut term = DdMatrix::identity(n);
    for k in 1..=60 {
        term = term.matmul(&a);
        term.scale_real(recip(TwoFloat::from(k as f64)));
        sum.add_assign(&term);
        if term.norm() < 1e-34 {
            break;
        }
    }
    for _ in 0..squarings {
        sum = sum.matmul(&sum);
    }
    sum
}

/// Modified Gram–Schmidt with a second pass and a relative residual test.
#[derive(Clone, Debug, Default)]
pub(crate) struct Orthonormalizer {
    basis: Vec<DdMatrix>,
}

/// Result of offering a candidate to the orthonormalizer.
#[derive(Clone, Copy, Debug)]
pub(crate) struct Offer {
    pub accepted: bool,
    /// Residual norm after projection, relative to the candidate norm.
    #[cfg_attr(not(test), allow(dead_code))]
    pub residual: f64,
}

impl Orthonormalizer {
    pub(crate) fn new() -> Self {
        Self::default()
    }

    pub(crate) fn len(&self) -> usize {
        self.basis.len()
    }

    pub(crate) fn basis(&self) -> &[DdMatrix] {
        &self.basis
    }

    pub(crate) fn last(&self) -> Option<&DdMatrix> {
        self.basis.last()
    }

    /// Projects `candidate` off the current span and accepts it iff the
    /// remaining norm is strictly above `tol` times its original norm.
    pub(crate) fn offer(&mut self, mut candidate: DdMatrix, tol: f64) -> Offer {
        let norm = candidate.norm();
        if norm == 0.0 {
            return Offer {
                accepted: false,
                residual: 0.0,
            };
        }
        candidate.scale_real(recip(norm));
        for _ in 0..2 {
            for w in &self.basis {
                let c = w.inner(&candidate);
                candidate.sub_scaled(c, w);
            }
        }
        let residual = candidate.norm();
        let r = residual.hi() + residual.lo();
        let accepted = r > tol;
        if accepted {
            candidate.scale_real(recip(residual));
            self.basis.push(candidate);
        }
        Offer {
            accepted,
            residual: r,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn propagator_matches_closed_form() {
        // H = a·X: exp(−iaXt) = cos(at) I − i sin(at) X.
        let a = 0.8;
        let h = DMatrix::from_row_slice(2, 2, &[c(0., 0.), c(a, 0.), c(a, 0.), c(0., 0.)]);
        let t = 7.3;
        let u = propagator(&DdMatrix::from_f64(&h), t).to_f64();
        let (co, si) = ((a * t).cos(), (a * t).sin());
        let want = DMatrix::from_row_slice(2, 2, &[c(co, 0.), c(0., -si), c(0., -si), c(co, 0.)]);
        assert!((u - want).norm() < 1e-14);
    }

    #[test]
    fn reciprocal_is_double_double_accurate() {
        for x in [3.0, 7.0, 0.1, 1e5, -11.0] {
            let err = recip(TwoFloat::from(x)) * TwoFloat::from(x) - TwoFloat::from(1.0);
            assert!(err.hi().abs() < 1e-30, "{x}: {err:?}");
        }
    }

    #[test]
    fn propagator_is_unitary_to_double_double() {
        let h = crate::quantum::ising::build_ising(3, 0.5, 8).unwrap();
        let u = propagator(&DdMatrix::from_f64(h.matrix()), 2.7);
        let mut defect = u.adjoint().matmul(&u);
        defect.sub_scaled(
            Complex::new(TwoFloat::from(1.0), TwoFloat::from(0.0)),
            &DdMatrix::identity(8),
        );
        assert!(defect.norm().hi() < 1e-28);
    }

    #[test]
    fn orthonormalizer_rejects_dependent_candidates() {
        let x = DMatrix::from_row_slice(2, 2, &[c(0., 0.), c(1., 0.), c(1., 0.), c(0., 0.)]);
        let z = DMatrix::from_row_slice(2, 2, &[c(1., 0.), c(0., 0.), c(0., 0.), c(-1., 0.)]);
        let mut g = Orthonormalizer::new();
        assert!(g.offer(DdMatrix::from_f64(&x), 1e-10).accepted);
        assert!(g.offer(DdMatrix::from_f64(&z), 1e-10).accepted);
        let combo = &x * c(0.3, 0.1) + &z * c(-2.0, 0.0);
        let offer = g.offer(DdMatrix::from_f64(&combo), 1e-10);
        assert!(!offer.accepted);
        assert!(offer.residual < 1e-25);
        let ip = g.basis()[0].inner(&g.basis()[1]);
        assert!(lower(ip).norm() < 1e-30);
    }
}
