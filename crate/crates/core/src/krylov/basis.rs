use serde::{Deserialize, Serialize};

use super::dd::DdMatrix;
use crate::error::{Error, Result};
use crate::quantum::operator::{hs_inner, Operator};

/// Relative residual below which a candidate is treated as linearly dependent.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct RankTolerance(f64);

impl RankTolerance {
    pub const DEFAULT: RankTolerance = RankTolerance(1e-10);

    pub fn new(tol: f64) -> Result<Self> {
        if !(tol > 0.0 && tol < 1.0) {
            return Err(Error::invalid(format!(
                "rank tolerance must lie in (0, 1), got {tol}"
            )));
        }
        Ok(Self(tol))
    }

    pub fn get(self) -> f64 {
        self.0
    }
}

impl Default for RankTolerance {
    fn default() -> Self {
        Self::DEFAULT
    }
}

impl TryFrom<f64> for RankTolerance {
    type Error = Error;

    fn try_from(tol: f64) -> Result<Self> {
        RankTolerance::new(tol)
    }
}

impl From<RankTolerance> for f64 {
    fn from(tol: RankTolerance) -> f64 {
        tol.0
    }
}

/// How a basis was generated.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum KrylovSource {
    LiouvillianPowers,
    EvolvedTimes { times: Vec<f64> },
}

/// Hilbert–Schmidt orthonormal operators spanning a Krylov space.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KrylovBasis {
    elements: Vec<Operator>,
    source: KrylovSource,
    seed_label: String,
}

impl KrylovBasis {
    pub(crate) fn from_dd(
        elements: &[DdMatrix],
        source: KrylovSource,
        seed_label: &str,
    ) -> Result<Self> {
        let elements = elements
            .iter()
            .enumerate()
            .map(|(i, w)| Operator::new(format!("W_{i}"), w.to_f64()))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            elements,
            source,
            seed_label: seed_label.to_owned(),
        })
    }

    pub fn grade(&self) -> usize {
        self.elements.len()
    }

    pub fn elements(&self) -> &[Operator] {
        &self.elements
    }

    pub fn source(&self) -> &KrylovSource {
        &self.source
    }

    pub fn seed_label(&self) -> &str {
        &self.seed_label
    }

    /// Operator dimension `N` (elements are `N × N`), `None` for an empty basis.
    pub fn operator_dim(&self) -> Option<usize> {
        self.elements.first().map(Operator::dim)
    }

    /// `max |⟨W_i, W_j⟩ − δ_ij|`.
    pub fn orthonormality_error(&self) -> f64 {
        let mut worst = 0.0f64;
        for (i, a) in self.elements.iter().enumerate() {
            for (j, b) in self.elements.iter().enumerate().skip(i) {
                let ip = hs_inner(a, b).expect("basis elements share a dimension");
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((ip - target).norm());
            }
        }
        worst
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tolerance_bounds() {
        assert!(RankTolerance::new(0.0).is_err());
        assert!(RankTolerance::new(1.0).is_err());
        assert!(RankTolerance::new(f64::NAN).is_err());
        assert_eq!(RankTolerance::default().get(), 1e-10);
        let parsed: RankTolerance = serde_json::from_str("1e-8").unwrap();
        assert_eq!(parsed.get(), 1e-8);
        assert!(serde_json::from_str::<RankTolerance>("-1").is_err());
    }
}
