//! Operator Zeno time and Heisenberg time.

use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::quantum::evolution::OperatorFrame;
use crate::quantum::operator::{check_dims, fidelity, Operator};
use crate::quantum::spectral::Hamiltonian;

/// Below this value of `τ_z⁻²` the observable is treated as frozen.
pub const FROZEN_THRESHOLD: f64 = 1e-14;
/// Mean level spacings below this are a fully degenerate spectrum.
pub const DEGENERATE_SPACING: f64 = 1e-14;

/// A Zeno time; infinite for observables that commute with `H`.
/// Serialized as a number, or as the string `"inf"`.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd)]
pub struct ZenoTime(pub f64);

impl ZenoTime {
    pub fn is_finite(self) -> bool {
        self.0.is_finite()
    }
}

impl fmt::Display for ZenoTime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_finite() {
            write!(f, "{}", self.0)
        } else {
            f.write_str("inf")
        }
    }
}

impl Serialize for ZenoTime {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        if self.0.is_finite() {
            s.serialize_f64(self.0)
        } else {
            s.serialize_str("inf")
        }
    }
}

impl<'de> Deserialize<'de> for ZenoTime {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Num(f64),
            Text(String),
        }
        match Repr::deserialize(d)? {
            Repr::Num(x) => Ok(ZenoTime(x)),
            Repr::Text(s) if s == "inf" => Ok(ZenoTime(f64::INFINITY)),
            Repr::Text(s) => Err(serde::de::Error::custom(format!("bad Zeno time `{s}`"))),
        }
    }
}

/// `τ_z⁻² = Tr(O[H,[H,O]]) − Tr(O[H,O])²` for `O` scaled to unit Frobenius norm.
pub fn zeno_rate_squared(h: &Operator, op: &Operator) -> Result<f64> {
    check_dims(h, op)?;
    let norm = op.frobenius_norm();
    if norm == 0.0 {
        return Err(Error::ZeroOperator(op.label().to_owned()));
    }
    let o = op.matrix() / Complex64::new(norm, 0.0);
    let hm = h.matrix();
    let c1 = hm * &o - &o * hm;
    let c2 = hm * &c1 - &c1 * hm;
    let first = (&o * c2).trace();
    let second = (&o * c1).trace();
    Ok((first - second * second).re)
}

pub fn zeno_time(h: &Operator, op: &Operator) -> Result<ZenoTime> {
    let rate = zeno_rate_squared(h, op)?;
    if rate < FROZEN_THRESHOLD {
        return Ok(ZenoTime(f64::INFINITY));
    }
    Ok(ZenoTime(rate.powf(-0.5)))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShortTimeCheck {
    /// `max_t ||F(t)|² − (1 − t²/τ_z²)|`.
    pub max_deviation: f64,
    /// Smallest `c` with deviation `≤ c·t³` on the grid.
    pub cubic_coefficient: f64,
    pub deviations: Vec<(f64, f64)>,
}

/// Compares the exact fidelity decay with its quadratic Zeno expansion.
pub fn short_time_fidelity_check(
    h: &Hamiltonian,
    op: &Operator,
    t_grid: &[f64],
) -> Result<ShortTimeCheck> {
    let tau = zeno_time(h, op)?.0;
    let frame = OperatorFrame::new(h, op)?;
    let mut deviations = Vec::with_capacity(t_grid.len());
    let mut max_deviation = 0.0f64;
    let mut cubic_coefficient = 0.0f64;
    for &t in t_grid {
        if t.abs() > 0.1 * tau {
            return Err(Error::invalid(format!(
                "time {t} exceeds 0.1·τ_z = {}",
                0.1 * tau
            )));
        }
        let f = fidelity(op, &frame.at(t)?)?;
        let expansion = if tau.is_finite() {
            1.0 - t * t / (tau * tau)
        } else {
            1.0
        };
        let dev = (f * f - expansion).abs();
        deviations.push((t, dev));
        max_deviation = max_deviation.max(dev);
        if t != 0.0 {
            cubic_coefficient = cubic_coefficient.max(dev / t.abs().powi(3));
        }
    }
    Ok(ShortTimeCheck {
        max_deviation,
        cubic_coefficient,
        deviations,
    })
}

/// `2π/⟨s⟩` over the ascending spectrum, degenerate spacings included.
pub fn heisenberg_time_from_eigenvalues(eigenvalues: &[f64]) -> Result<f64> {
    if eigenvalues.len() < 2 {
        return Err(Error::invalid("Heisenberg time needs at least two levels"));
    }
    let mut e = eigenvalues.to_vec();
    e.sort_by(f64::total_cmp);
    let spacings: Vec<f64> = e.windows(2).map(|w| w[1] - w[0]).collect();
    let mean = spacings.iter().sum::<f64>() / spacings.len() as f64;
    if mean < DEGENERATE_SPACING {
        return Err(Error::DegenerateSpectrum(mean));
    }
    Ok(2.0 * std::f64::consts::PI / mean)
}

pub fn heisenberg_time(h: &Hamiltonian) -> Result<f64> {
    heisenberg_time_from_eigenvalues(h.spectral().eigenvalues().as_slice())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HamiltonianTimescales {
    pub label: String,
    pub zeno_times: BTreeMap<String, ZenoTime>,
    pub heisenberg_time: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TimescaleReport {
    /// Per observable, averaged over the Hamiltonians.
    pub zeno_times: BTreeMap<String, ZenoTime>,
    /// Average over observables and Hamiltonians; infinite if any entry is.
    pub zeno_mean: ZenoTime,
    /// Average over the Hamiltonians.
    pub heisenberg_time: f64,
    pub per_hamiltonian: Vec<HamiltonianTimescales>,
}

impl TimescaleReport {
    pub fn for_ensemble(hamiltonians: &[Hamiltonian], observables: &[Operator]) -> Result<Self> {
        if hamiltonians.is_empty() || observables.is_empty() {
            return Err(Error::invalid(
                "timescales need at least one Hamiltonian and one observable",
            ));
        }
        let mut per_hamiltonian = Vec::with_capacity(hamiltonians.len());
        for h in hamiltonians {
            let zeno_times = observables
                .iter()
                .map(|o| Ok((o.label().to_owned(), zeno_time(h, o)?)))
                .collect::<Result<BTreeMap<_, _>>>()?;
            per_hamiltonian.push(HamiltonianTimescales {
                label: h.label().to_owned(),
                zeno_times,
                heisenberg_time: heisenberg_time(h)?,
            });
        }
        let count = hamiltonians.len() as f64;
        let zeno_times: BTreeMap<String, ZenoTime> = observables
            .iter()
            .map(|o| {
                let sum: f64 = per_hamiltonian
                    .iter()
                    .map(|p| p.zeno_times[o.label()].0)
                    .sum();
                (o.label().to_owned(), ZenoTime(sum / count))
            })
            .collect();
        let zeno_mean =
            ZenoTime(zeno_times.values().map(|z| z.0).sum::<f64>() / zeno_times.len() as f64);
        let heisenberg_time = per_hamiltonian
            .iter()
            .map(|p| p.heisenberg_time)
            .sum::<f64>()
            / count;
        Ok(Self {
            zeno_times,
            zeno_mean,
            heisenberg_time,
            per_hamiltonian,
        })
    }
}
