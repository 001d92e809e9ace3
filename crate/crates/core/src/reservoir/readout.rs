use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Singular values below this fraction of the largest are discarded.
pub const PINV_RELATIVE_CUTOFF: f64 = 1e-12;

/// Linear readout `Y = S W`.
#[derive(Clone, Debug, PartialEq)]
pub struct ReadoutWeights {
    /// `N_R × m` for `m` targets.
    pub weights: DMatrix<f64>,
    /// Mean squared training error over all target entries.
    pub training_residual: f64,
}

/// Moore–Penrose pseudo-inverse of `S` with a relative singular-value cut.
pub fn pseudo_inverse(s: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    if s.nrows() == 0 || s.ncols() == 0 {
        return Err(Error::invalid("pseudo-inverse of an empty matrix"));
    }
    let svd = s.clone().svd(true, true);
    let sigma_max = svd.singular_values.max();
    let cutoff = if sigma_max > 0.0 {
        PINV_RELATIVE_CUTOFF * sigma_max
    } else {
        f64::MIN_POSITIVE
    };
    let u = svd.u.as_ref().expect("requested U");
    let v_t = svd.v_t.as_ref().expect("requested Vᵀ");
    let mut out = DMatrix::zeros(s.ncols(), s.nrows());
    for (k, &sv) in svd.singular_values.iter().enumerate() {
        if sv > cutoff {
            out += (v_t.row(k).transpose() / sv) * u.column(k).transpose();
        }
    }
    Ok(out)
}

/// Least-squares weights through the pseudo-inverse.
pub fn train_readout(s_train: &DMatrix<f64>, targets: &DMatrix<f64>) -> Result<ReadoutWeights> {
    if s_train.nrows() != targets.nrows() {
        return Err(Error::DimensionMismatch {
            expected: s_train.nrows(),
            found: targets.nrows(),
        });
    }
    let weights = pseudo_inverse(s_train)? * targets;
    let residual = s_train * &weights - targets;
    let training_residual =
        residual.norm_squared() / (targets.nrows() * targets.ncols()).max(1) as f64;
    Ok(ReadoutWeights {
        weights,
        training_residual,
    })
}

pub fn predict(s: &DMatrix<f64>, w: &ReadoutWeights) -> Result<DMatrix<f64>> {
    if s.ncols() != w.weights.nrows() {
        return Err(Error::DimensionMismatch {
            expected: w.weights.nrows(),
            found: s.ncols(),
        });
    }
    Ok(s * &w.weights)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random(rows: usize, cols: usize, seed: u64) -> DMatrix<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        DMatrix::from_fn(rows, cols, |_, _| rng.gen_range(-1.0..1.0))
    }

    #[test]
    fn column_target_selects_that_column() {
        let s = random(40, 5, 1);
        let target = s.column(3).into_owned();
        let w = train_readout(&s, &DMatrix::from_column_slice(40, 1, target.as_slice())).unwrap();
        for k in 0..5 {
            let want = if k == 3 { 1.0 } else { 0.0 };
            assert!((w.weights[(k, 0)] - want).abs() < 1e-10);
        }
        assert!(w.training_residual < 1e-20);
    }

    #[test]
    fn orthogonal_target_gives_zero_weights() {
        let mut s = DMatrix::zeros(4, 2);
        s[(0, 0)] = 1.0;
        s[(1, 1)] = 2.0;
        let y = DMatrix::from_column_slice(4, 1, &[0.0, 0.0, 3.0, -1.0]);
        let w = train_readout(&s, &y).unwrap();
        assert!(w.weights.norm() < 1e-15);
        assert!((w.training_residual - 10.0 / 4.0).abs() < 1e-15);
    }

    /// `(SᵀS)⁻¹ Sᵀ y` computed with an explicit inverse.
    #[test]
    fn matches_normal_equations() {
        let s = random(60, 6, 2);
        let y = random(60, 2, 3);
        let oracle = (s.transpose() * &s).try_inverse().unwrap() * s.transpose() * &y;
        let w = train_readout(&s, &y).unwrap();
        assert!((w.weights - oracle).norm() < 1e-8);
    }

    #[test]
    fn predict_checks_and_reproduces() {
        let s = random(30, 4, 4);
        let y = random(30, 1, 5);
        let w = train_readout(&s, &y).unwrap();
        let p = predict(&s, &w).unwrap();
        let mse = (&p - &y).norm_squared() / 30.0;
        assert!((mse - w.training_residual).abs() < 1e-12);
        let zero = ReadoutWeights {
            weights: DMatrix::zeros(4, 1),
            training_residual: 0.0,
        };
        assert_eq!(predict(&s, &zero).unwrap().norm(), 0.0);
        assert!(predict(&random(3, 5, 6), &w).is_err());
        let picker = DMatrix::<f64>::identity(4, 4);
        assert_eq!(predict(&picker, &w).unwrap(), w.weights);
    }
}
