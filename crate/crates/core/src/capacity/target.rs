use std::fmt;

use serde::{Deserialize, Serialize};

use super::legendre::legendre;
use crate::error::{Error, Result};

/// Default guard on the number of enumerated targets.
pub const DEFAULT_ENUMERATION_CAP: usize = 200_000;

/// One factor `l_degree(u_{n − delay})` of a target product.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct TargetTerm {
    pub delay: usize,
    pub degree: usize,
}

/// A product of Legendre polynomials of the input at distinct delays.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<TargetTerm>", into = "Vec<TargetTerm>")]
pub struct TargetSpec {
    /// Sorted by delay.
    terms: Vec<TargetTerm>,
}

impl TargetSpec {
    pub fn new(mut terms: Vec<TargetTerm>) -> Result<Self> {
        if terms.is_empty() {
            return Err(Error::invalid("a target needs at least one term"));
        }
        if terms.iter().any(|t| t.degree == 0) {
            return Err(Error::invalid("target degrees must be at least 1"));
        }
        terms.sort();
        if terms.windows(2).any(|w| w[0].delay == w[1].delay) {
            return Err(Error::invalid("target delays must be distinct"));
        }
        Ok(Self { terms })
    }

    /// Convenience constructor from `(delay, degree)` pairs.
    pub fn from_pairs(pairs: &[(usize, usize)]) -> Result<Self> {
        Self::new(
            pairs
                .iter()
                .map(|&(delay, degree)| TargetTerm { delay, degree })
                .collect(),
        )
    }

    pub fn terms(&self) -> &[TargetTerm] {
        &self.terms
    }

    pub fn total_degree(&self) -> usize {
        self.terms.iter().map(|t| t.degree).sum()
    }

    pub fn max_delay(&self) -> usize {
        self.terms.last().map_or(0, |t| t.delay)
    }

    pub fn delays(&self) -> Vec<usize> {
        self.terms.iter().map(|t| t.delay).collect()
    }

    pub fn degrees(&self) -> Vec<usize> {
        self.terms.iter().map(|t| t.degree).collect()
    }

    /// Sort key: total degree, then delays, then degrees.
    fn order_key(&self) -> (usize, Vec<usize>, Vec<usize>) {
        (self.total_degree(), self.delays(), self.degrees())
    }

    /// Value of the target for input index `n`.
    fn value_at(&self, inputs: &[f64], n: usize) -> f64 {
        self.terms
            .iter()
            .map(|t| legendre(t.degree, inputs[n - t.delay]))
            .product()
    }
}

impl TryFrom<Vec<TargetTerm>> for TargetSpec {
    type Error = Error;
    fn try_from(terms: Vec<TargetTerm>) -> Result<Self> {
        Self::new(terms)
    }
}

impl From<TargetSpec> for Vec<TargetTerm> {
    fn from(spec: TargetSpec) -> Self {
        spec.terms
    }
}

impl fmt::Display for TargetSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, t) in self.terms.iter().enumerate() {
            if i > 0 {
                f.write_str("*")?;
            }
            write!(f, "P{}(u[-{}])", t.degree, t.delay)?;
        }
        Ok(())
    }
}

fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128)
}

/// Number of targets with total degree `1..=max_degree` over delays
/// `0..=max_delay`: distinct-delay sets times compositions of the degree.
pub fn target_count(max_degree: usize, max_delay: usize) -> u128 {
    let lags = max_delay + 1;
    (1..=max_degree)
        .map(|total| {
            (1..=total.min(lags))
                .map(|m| binomial(lags, m) * binomial(total - 1, m - 1))
                .sum::<u128>()
        })
        .sum()
}

/// Every target with total degree at most `max_degree` and delays in
/// `0..=max_delay`, ordered by total degree, then delays, then degrees.
pub fn enumerate_targets(
    max_degree: usize,
    max_delay: usize,
    cap: usize,
) -> Result<Vec<TargetSpec>> {
    if max_degree == 0 {
        return Err(Error::invalid("max_degree must be at least 1"));
    }
    let count = target_count(max_degree, max_delay);
    if count > cap as u128 {
        return Err(Error::EnumerationCap {
            count: usize::try_from(count).unwrap_or(usize::MAX),
            cap,
        });
    }
    let mut out = Vec::with_capacity(count as usize);
    let mut terms = Vec::new();
    extend_targets(0, max_degree, max_delay, &mut terms, &mut out);
    out.sort_by_cached_key(TargetSpec::order_key);
    debug_assert_eq!(out.len() as u128, count);
    Ok(out)
}

fn extend_targets(
    next_delay: usize,
    budget: usize,
    max_delay: usize,
    terms: &mut Vec<TargetTerm>,
    out: &mut Vec<TargetSpec>,
) {
    for delay in next_delay..=max_delay {
        for degree in 1..=budget {
            terms.push(TargetTerm { delay, degree });
            out.push(TargetSpec {
                terms: terms.clone(),
            });
            extend_targets(delay + 1, budget - degree, max_delay, terms, out);
            terms.pop();
        }
    }
}

/// Target values for input indices `start..start + len`.
pub fn build_target(
    inputs: &[f64],
    spec: &TargetSpec,
    start: usize,
    len: usize,
) -> Result<Vec<f64>> {
    if start < spec.max_delay() {
        return Err(Error::invalid(format!(
            "window starting at {start} lacks history for delay {}",
            spec.max_delay()
        )));
    }
    if start + len > inputs.len() {
        return Err(Error::invalid(format!(
            "window {start}..{} exceeds the {} inputs",
            start + len,
            inputs.len()
        )));
    }
    Ok((start..start + len)
        .map(|n| spec.value_at(inputs, n))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn rejects_bad_specs() {
        assert!(TargetSpec::from_pairs(&[]).is_err());
        assert!(TargetSpec::from_pairs(&[(1, 0)]).is_err());
        assert!(TargetSpec::from_pairs(&[(2, 1), (2, 2)]).is_err());
        let s = TargetSpec::from_pairs(&[(3, 2), (1, 1)]).unwrap();
        assert_eq!(s.delays(), vec![1, 3]);
        assert_eq!(s.total_degree(), 3);
    }

    #[test]
    fn desk_scale_count() {
        assert_eq!(target_count(3, 15), 968);
        let all = enumerate_targets(3, 15, DEFAULT_ENUMERATION_CAP).unwrap();
        assert_eq!(all.len(), 968);
        let by_order: Vec<_> = (1..=3)
            .map(|d| all.iter().filter(|t| t.total_degree() == d).count())
            .collect();
        assert_eq!(by_order, vec![16, 136, 816]);
    }

    #[test]
    fn ordering_is_deterministic() {
        let all = enumerate_targets(2, 2, 100).unwrap();
        let shown: Vec<_> = all.iter().map(|t| (t.delays(), t.degrees())).collect();
        assert_eq!(
            shown,
            vec![
                (vec![0], vec![1]),
                (vec![1], vec![1]),
                (vec![2], vec![1]),
                (vec![0], vec![2]),
                (vec![0, 1], vec![1, 1]),
                (vec![0, 2], vec![1, 1]),
                (vec![1], vec![2]),
                (vec![1, 2], vec![1, 1]),
                (vec![2], vec![2]),
            ]
        );
    }

    #[test]
    fn cap_is_an_error() {
        match enumerate_targets(3, 15, 900) {
            Err(Error::EnumerationCap { count, cap }) => assert_eq!((count, cap), (968, 900)),
            other => panic!("expected cap error, got {other:?}"),
        }
    }

    #[test]
    fn shifted_and_identity_targets() {
        let u: Vec<f64> = (0..10).map(|i| (i as f64 - 4.5) / 5.0).collect();
        let id = build_target(&u, &TargetSpec::from_pairs(&[(0, 1)]).unwrap(), 0, 10).unwrap();
        assert_eq!(id, u);
        let shifted = build_target(&u, &TargetSpec::from_pairs(&[(2, 1)]).unwrap(), 2, 8).unwrap();
        assert_eq!(shifted, u[..8].to_vec());
        assert!(build_target(&u, &TargetSpec::from_pairs(&[(2, 1)]).unwrap(), 1, 5).is_err());
        assert!(build_target(&u, &TargetSpec::from_pairs(&[(0, 1)]).unwrap(), 5, 6).is_err());
    }

    /// `u_{n−1} · (3u_{n−3}² − 1)/2` evaluated by hand.
    #[test]
    fn product_target_direct_evaluation() {
        let u = [0.1, -0.7, 0.4, 0.9, -0.2, 0.55, -1.0, 0.3, 0.0, 0.8];
        let spec = TargetSpec::from_pairs(&[(1, 1), (3, 2)]).unwrap();
        let z = build_target(&u, &spec, 3, 7).unwrap();
        for (i, n) in (3..10).enumerate() {
            let want = u[n - 1] * (3.0 * u[n - 3] * u[n - 3] - 1.0) / 2.0;
            assert!((z[i] - want).abs() < 1e-15);
        }
    }

    #[test]
    fn json_round_trip() {
        let s = TargetSpec::from_pairs(&[(0, 2), (4, 1)]).unwrap();
        let text = serde_json::to_string(&s).unwrap();
        assert_eq!(serde_json::from_str::<TargetSpec>(&text).unwrap(), s);
        assert!(serde_json::from_str::<TargetSpec>(
            r#"[{"delay":1,"degree":1},{"delay":1,"degree":2}]"#
        )
        .is_err());
    }

    proptest! {
        #[test]
        fn enumeration_matches_count(max_degree in 1usize..5, max_delay in 0usize..8) {
            let all = enumerate_targets(max_degree, max_delay, usize::MAX).unwrap();
            prop_assert_eq!(all.len() as u128, target_count(max_degree, max_delay));
            let unique: std::collections::HashSet<_> = all.iter().collect();
            prop_assert_eq!(unique.len(), all.len());
            prop_assert!(all.windows(2).all(|w| w[0].order_key() < w[1].order_key()));
        }
    }
}
