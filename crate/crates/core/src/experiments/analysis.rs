use std::path::Path;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::grid::{Metric, SweepGrid};
use crate::error::{Error, Result};

/// Fraction of the grid maximum that defines saturation.
pub const SATURATION_FRACTION: f64 = 0.95;
/// Number of samples along an overlay line.
pub const OVERLAY_SAMPLES: usize = 101;

/// Pearson correlation over the flattened cells of two grids.
pub fn pearson(a: &SweepGrid, b: &SweepGrid) -> Result<f64> {
    if !a.same_axes(b) {
        return Err(Error::invalid("grids have different axes"));
    }
    let (xs, ys) = (a.cells.as_slice(), b.cells.as_slice());
    let n = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
    let (mut cov, mut vx, mut vy) = (0.0, 0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        cov += (x - mx) * (y - my);
        vx += (x - mx) * (x - mx);
        vy += (y - my) * (y - my);
    }
    if vx == 0.0 || vy == 0.0 {
        return Err(Error::invalid("a grid has zero variance"));
    }
    Ok((cov / (vx * vy).sqrt()).clamp(-1.0, 1.0))
}

/// `[g(V_{i+1}) − g(V_i)] / (V_{i+1} − V_i)`, labelled by the lower `V_i`.
pub fn finite_diff_v(grid: &SweepGrid) -> Result<SweepGrid> {
    let nv = grid.v_values.len();
    if nv < 2 {
        return Err(Error::invalid(
            "finite difference along V needs at least two columns",
        ));
    }
    let cells = DMatrix::from_fn(grid.t_values.len(), nv - 1, |r, c| {
        (grid.cells[(r, c + 1)] - grid.cells[(r, c)])
            / (grid.v_values[c + 1] - grid.v_values[c]) as f64
    });
    SweepGrid::new(
        Metric::DeltaPerV,
        grid.aggregation,
        grid.ensemble.clone(),
        grid.t_values.clone(),
        grid.v_values[..nv - 1].to_vec(),
        cells,
    )
}

/// Axis-aligned box of a sweep in `(T, V)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridBox {
    pub t_min: f64,
    pub t_max: f64,
    pub v_min: f64,
    pub v_max: f64,
}

impl GridBox {
    pub fn of(grid: &SweepGrid) -> Self {
        Self {
            t_min: grid.t_values[0],
            t_max: *grid.t_values.last().expect("non-empty axis"),
            v_min: grid.v_values[0] as f64,
            v_max: *grid.v_values.last().expect("non-empty axis") as f64,
        }
    }
}

/// The line `T = τ_z V` clipped to a grid box, plus the vertical Heisenberg
/// marker `T = t_H`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ZenoOverlay {
    pub tau_z: f64,
    /// `(T, V)` samples; empty when the line misses the box.
    pub line: Vec<(f64, f64)>,
    pub heisenberg_time: Option<f64>,
    pub bounds: GridBox,
}

pub fn zeno_overlay(
    tau_z: f64,
    bounds: GridBox,
    heisenberg_time: Option<f64>,
) -> Result<ZenoOverlay> {
    if !(tau_z > 0.0) {
        return Err(Error::invalid(format!(
            "Zeno time must be positive, got {tau_z}"
        )));
    }
    let v_lo = bounds.v_min.max(bounds.t_min / tau_z);
    let v_hi = bounds.v_max.min(bounds.t_max / tau_z);
    let line = if v_lo <= v_hi {
        (0..OVERLAY_SAMPLES)
            .map(|i| {
                let v = v_lo + (v_hi - v_lo) * i as f64 / (OVERLAY_SAMPLES - 1) as f64;
                (tau_z * v, v)
            })
            .collect()
    } else {
        Vec::new()
    };
    Ok(ZenoOverlay {
        tau_z,
        line,
        heisenberg_time,
        bounds,
    })
}

impl ZenoOverlay {
    /// Two-column `T,V` table of the Zeno line.
    pub fn write_line_csv(&self, path: &Path) -> Result<()> {
        let mut text = format!("# tau_z={}\nT,V\n", self.tau_z);
        for (t, v) in &self.line {
            text.push_str(&format!("{t},{v}\n"));
        }
        std::fs::write(path, text)?;
        Ok(())
    }

    /// Two-row `T,V` table spanning the box at `T = t_H`; nothing is written
    /// without a Heisenberg time.
    pub fn write_marker_csv(&self, path: &Path) -> Result<()> {
        if let Some(t_h) = self.heisenberg_time {
            let b = &self.bounds;
            std::fs::write(
                path,
                format!(
                    "# heisenberg_time={t_h}\nT,V\n{t_h},{}\n{t_h},{}\n",
                    b.v_min, b.v_max
                ),
            )?;
        }
        Ok(())
    }
}

/// Smallest clock cycle and multiplexing at which the metric first reaches
/// [`SATURATION_FRACTION`] of its grid maximum, maximizing over the other axis.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SaturationFront {
    pub t_sat: f64,
    pub v_sat: usize,
    pub maximum: f64,
}

pub fn saturation_front(grid: &SweepGrid) -> Result<SaturationFront> {
    let maximum = grid.cells.max();
    if !(maximum > 0.0) {
        return Err(Error::invalid("saturation needs a positive grid maximum"));
    }
    let level = SATURATION_FRACTION * maximum;
    let r = (0..grid.t_values.len())
        .find(|&r| grid.cells.row(r).max() >= level)
        .expect("the maximum lies in some row");
    let c = (0..grid.v_values.len())
        .find(|&c| grid.cells.column(c).max() >= level)
        .expect("the maximum lies in some column");
    Ok(SaturationFront {
        t_sat: grid.t_values[r],
        v_sat: grid.v_values[c],
        maximum,
    })
}

/// Mean of the difference grid over cells with `V > T/τ_z` and `T ≤ t_limit`,
/// together with the largest positive difference anywhere in the grid.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ZenoFrontCheck {
    pub cells: usize,
    pub mean_beyond_front: f64,
    pub max_positive: f64,
}

pub fn zeno_front_check(diff: &SweepGrid, tau_z: f64, t_limit: f64) -> Result<ZenoFrontCheck> {
    let mut sum = 0.0;
    let mut cells = 0;
    for (r, &t) in diff.t_values.iter().enumerate() {
        if t > t_limit {
            continue;
        }
        for (c, &v) in diff.v_values.iter().enumerate() {
            if v as f64 > t / tau_z {
                sum += diff.cells[(r, c)];
                cells += 1;
            }
        }
    }
    if cells == 0 {
        return Err(Error::invalid("no cells lie beyond the Zeno front"));
    }
    Ok(ZenoFrontCheck {
        cells,
        mean_beyond_front: sum / cells as f64,
        max_positive: diff.cells.max().max(0.0),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::grid::Aggregation;

    fn grid_from(t: Vec<f64>, v: Vec<usize>, f: impl Fn(f64, f64) -> f64) -> SweepGrid {
        let cells = DMatrix::from_fn(t.len(), v.len(), |r, c| f(t[r], v[c] as f64));
        SweepGrid::new(
            Metric::KrylovObservability,
            Aggregation::Mean,
            vec![0],
            t,
            v,
            cells,
        )
        .unwrap()
    }

    fn axes() -> (Vec<f64>, Vec<usize>) {
        (
            (1..=10).map(|i| 4.0 * i as f64).collect(),
            (1..=10).map(|i| 12 * i).collect(),
        )
    }

    #[test]
    fn pearson_identity_and_negation() {
        let (t, v) = axes();
        let g = grid_from(t.clone(), v.clone(), |a, b| (a * 0.3).sin() + b.sqrt());
        assert!((pearson(&g, &g).unwrap() - 1.0).abs() < 1e-12);
        let neg = grid_from(t.clone(), v.clone(), |a, b| -(a * 0.3).sin() - b.sqrt());
        assert!((pearson(&g, &neg).unwrap() + 1.0).abs() < 1e-12);
        let flat = grid_from(t, v, |_, _| 2.0);
        assert!(pearson(&g, &flat).is_err());
        let other = grid_from(vec![1.0], vec![1], |_, _| 0.0);
        assert!(pearson(&g, &other).is_err());
    }

    #[test]
    fn finite_differences() {
        let (t, v) = axes();
        let constant = finite_diff_v(&grid_from(t.clone(), v.clone(), |_, _| 3.0)).unwrap();
        assert_eq!(constant.v_values.len(), 9);
        assert!(constant.cells.iter().all(|x| *x == 0.0));
        let linear = finite_diff_v(&grid_from(t.clone(), v, |a, b| a + 0.7 * b)).unwrap();
        assert!(linear.cells.iter().all(|x| (x - 0.7).abs() < 1e-12));
        assert_eq!(linear.metric, Metric::DeltaPerV);
        assert!(finite_diff_v(&grid_from(t, vec![5], |_, _| 1.0)).is_err());
    }

    #[test]
    fn overlay_diagonal_and_clipping() {
        let square = GridBox {
            t_min: 0.0,
            t_max: 10.0,
            v_min: 0.0,
            v_max: 10.0,
        };
        let o = zeno_overlay(1.0, square, Some(3.0)).unwrap();
        assert_eq!(o.line.len(), OVERLAY_SAMPLES);
        assert!(o.line.iter().all(|(t, v)| (t - v).abs() < 1e-12));
        assert_eq!(o.line.last().unwrap(), &(10.0, 10.0));
        let steep = zeno_overlay(50.0, square, None).unwrap();
        let (t_end, v_end) = *steep.line.last().unwrap();
        assert!((t_end - 10.0).abs() < 1e-12 && (v_end - 0.2).abs() < 1e-12);
        assert!(zeno_overlay(0.0, square, None).is_err());
        let dir = tempfile::tempdir().unwrap();
        o.write_line_csv(&dir.path().join("l.csv")).unwrap();
        o.write_marker_csv(&dir.path().join("m.csv")).unwrap();
        let marker = std::fs::read_to_string(dir.path().join("m.csv")).unwrap();
        assert_eq!(marker, "# heisenberg_time=3\nT,V\n3,0\n3,10\n");
    }

    /// `min(T/28, 1)·min(V/84, 1)` reaches 95% first at `T = 28`, `V = 84`.
    #[test]
    fn saturation_front_recovers_synthetic_front() {
        let (t, v) = axes();
        let g = grid_from(t, v, |a, b| (a / 28.0).min(1.0) * (b / 84.0).min(1.0));
        let front = saturation_front(&g).unwrap();
        assert_eq!((front.t_sat, front.v_sat), (28.0, 84));
        assert_eq!(front.maximum, 1.0);
    }

    #[test]
    fn zeno_front_selects_cells_beyond_line() {
        let g = grid_from(vec![2.0, 4.0, 20.0], vec![1, 2, 4, 8], |t, v| {
            if v > t {
                0.0
            } else {
                1.0
            }
        });
        let check = zeno_front_check(&g, 1.0, 10.0).unwrap();
        assert_eq!(check.cells, 3);
        assert_eq!(check.mean_beyond_front, 0.0);
        assert_eq!(check.max_positive, 1.0);
    }
}
