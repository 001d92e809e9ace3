use std::path::{Path, PathBuf};
use std::time::Instant;

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::ExperimentConfig;
use super::grid::{Aggregation, Metric, SweepGrid};
use crate::capacity::{total_ipc, CapacityReport};
use crate::error::{Error, Result};
use crate::krylov::{ObservabilityModel, SpaceGrid};
use crate::quantum::ising::IsingModel;
use crate::quantum::spectral::Hamiltonian;
use crate::reservoir::Reservoir;
use crate::timescales::TimescaleReport;

/// One evaluated `(seed, T, V)` cell.
#[derive(Clone, Debug, PartialEq)]
pub struct CellResult {
    pub seed: u64,
    pub clock_cycle: f64,
    pub multiplexing: usize,
    pub value: f64,
    /// Present for capacity sweeps.
    pub capacity: Option<CapacityReport>,
}

/// Wall-clock cost of a sweep.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RuntimeRecord {
    pub metric: Metric,
    pub seeds: Vec<u64>,
    pub cells: usize,
    pub wall_seconds: f64,
    /// Wall time divided by the ensemble size.
    pub seconds_per_reservoir: f64,
}

#[derive(Clone, Debug)]
pub struct SweepOutcome {
    pub per_seed: Vec<SweepGrid>,
    pub mean: SweepGrid,
    pub cells: Vec<CellResult>,
    pub runtime: RuntimeRecord,
}

pub fn ensemble_hamiltonians(config: &ExperimentConfig) -> Result<Vec<Hamiltonian>> {
    config
        .ensemble()
        .into_iter()
        .map(|seed| IsingModel::random(config.n_sites, config.field_h, seed)?.hamiltonian())
        .collect()
}

/// Evaluates `metric` on every `(seed, T, V)` cell of the configured grid.
pub fn sweep(config: &ExperimentConfig, metric: Metric) -> Result<SweepOutcome> {
    config.validate()?;
    let start = Instant::now();
    let seeds = config.ensemble();
    let hamiltonians = ensemble_hamiltonians(config)?;
    let coords: Vec<(usize, f64, usize)> = (0..seeds.len())
        .flat_map(|s| {
            config
                .t_values
                .iter()
                .flat_map(move |&t| config.v_values.iter().map(move |&v| (s, t, v)))
        })
        .collect();
    let cell_error = |s: usize, t: f64, v: usize| {
        let seed = seeds[s];
        move |e: Error| Error::Cell {
            seed,
            t,
            v,
            source: Box::new(e),
        }
    };
    let cells: Vec<CellResult> = match metric {
        Metric::KrylovObservability => {
            let observables = config
                .reservoir_config(seeds[0], config.t_values[0], 1)
                .observable_operators()?;
            let models: Vec<ObservabilityModel> = hamiltonians
                .par_iter()
                .enumerate()
                .map(|(s, h)| {
                    let grid = SpaceGrid::default_for(h)?;
                    ObservabilityModel::new(h, &observables, grid, config.rank_tol)
                        .map_err(cell_error(s, config.t_values[0], config.v_values[0]))
                })
                .collect::<Result<_>>()?;
            coords
                .par_iter()
                .map(|&(s, t, v)| {
                    let report = models[s].report(t, v).map_err(cell_error(s, t, v))?;
                    Ok(CellResult {
                        seed: seeds[s],
                        clock_cycle: t,
                        multiplexing: v,
                        value: report.total,
                        capacity: None,
                    })
                })
                .collect::<Result<_>>()?
        }
        Metric::IpcTotal => {
            let inputs = config.inputs();
            coords
                .par_iter()
                .map(|&(s, t, v)| {
                    let run = || -> Result<CapacityReport> {
                        let rc = config.reservoir_config(seeds[s], t, v);
                        let states = Reservoir::with_hamiltonian(&rc, hamiltonians[s].clone())?
                            .run(&inputs)?;
                        total_ipc(&states, &inputs, &config.ipc)
                    };
                    let report = run().map_err(cell_error(s, t, v))?;
                    Ok(CellResult {
                        seed: seeds[s],
                        clock_cycle: t,
                        multiplexing: v,
                        value: report.total,
                        capacity: Some(report),
                    })
                })
                .collect::<Result<_>>()?
        }
        Metric::DeltaPerV => {
            return Err(Error::invalid(
                "difference grids are derived with finite_diff_v, not swept",
            ));
        }
    };
    let (nt, nv) = (config.t_values.len(), config.v_values.len());
    let per_seed = seeds
        .iter()
        .enumerate()
        .map(|(s, &seed)| {
            let block = &cells[s * nt * nv..(s + 1) * nt * nv];
            SweepGrid::new(
                metric,
                Aggregation::PerSeed { seed },
                vec![seed],
                config.t_values.clone(),
                config.v_values.clone(),
                DMatrix::from_row_iterator(nt, nv, block.iter().map(|c| c.value)),
            )
        })
        .collect::<Result<Vec<_>>>()?;
    let mean = SweepGrid::mean_of(&per_seed)?;
    let wall_seconds = start.elapsed().as_secs_f64();
    Ok(SweepOutcome {
        per_seed,
        mean,
        runtime: RuntimeRecord {
            metric,
            seeds: seeds.clone(),
            cells: cells.len(),
            wall_seconds,
            seconds_per_reservoir: wall_seconds / seeds.len() as f64,
        },
        cells,
    })
}

pub fn per_seed_path(dir: &Path, metric: Metric, seed: u64) -> PathBuf {
    dir.join(format!("{metric}_seed{seed}.csv"))
}

pub fn mean_path(dir: &Path, metric: Metric) -> PathBuf {
    dir.join(format!("{metric}_mean.csv"))
}

pub fn runtime_path(dir: &Path, metric: Metric) -> PathBuf {
    dir.join(format!("runtime_{metric}.json"))
}

pub const TIMESCALES_FILE: &str = "timescales.json";

impl SweepOutcome {
    /// Writes per-seed and mean grids and the runtime record into `dir`.
    pub fn persist(&self, dir: &Path) -> Result<Vec<PathBuf>> {
        std::fs::create_dir_all(dir)?;
        let metric = self.mean.metric;
        let mut written = Vec::new();
        for g in &self.per_seed {
            let Aggregation::PerSeed { seed } = g.aggregation else {
                unreachable!("per-seed grids carry their seed")
            };
            let path = per_seed_path(dir, metric, seed);
            g.write_csv(&path)?;
            written.push(path);
        }
        let path = mean_path(dir, metric);
        self.mean.write_csv(&path)?;
        written.push(path);
        let path = runtime_path(dir, metric);
        std::fs::write(&path, serde_json::to_string_pretty(&self.runtime)?)?;
        written.push(path);
        Ok(written)
    }
}

/// Timescales of the configured ensemble and observables.
pub fn ensemble_timescales(config: &ExperimentConfig) -> Result<TimescaleReport> {
    let hamiltonians = ensemble_hamiltonians(config)?;
    let observables = config
        .reservoir_config(config.seed, config.t_values[0], 1)
        .observable_operators()?;
    TimescaleReport::for_ensemble(&hamiltonians, &observables)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::krylov::krylov_observability;

    fn small(seed: u64, size: usize) -> ExperimentConfig {
        let mut cfg = ExperimentConfig::new(seed, vec![3.0, 9.0], vec![2, 5]);
        cfg.n_sites = 2;
        cfg.ensemble_size = size;
        cfg
    }

    #[test]
    fn single_cell_matches_direct_call() {
        let mut cfg = small(4, 1);
        cfg.t_values = vec![6.0];
        cfg.v_values = vec![7];
        let out = sweep(&cfg, Metric::KrylovObservability).unwrap();
        let h = IsingModel::random(2, 0.5, 4)
            .unwrap()
            .hamiltonian()
            .unwrap();
        let obs = cfg
            .reservoir_config(4, 6.0, 7)
            .observable_operators()
            .unwrap();
        let direct = krylov_observability(&h, &obs, 6.0, 7, cfg.rank_tol).unwrap();
        assert_eq!(out.mean.cells[(0, 0)], direct.total);
        assert_eq!(out.per_seed.len(), 1);
    }

    #[test]
    fn mean_is_average_of_members() {
        let out = sweep(&small(0, 3), Metric::KrylovObservability).unwrap();
        let manual =
            (&out.per_seed[0].cells + &out.per_seed[1].cells + &out.per_seed[2].cells) / 3.0;
        assert!((manual - &out.mean.cells).abs().max() < 1e-12);
        assert_eq!(out.mean.ensemble, vec![0, 1, 2]);
    }

    #[test]
    fn ipc_sweep_small() {
        let mut cfg = small(1, 1);
        cfg.ipc.train_len = 400;
        cfg.ipc.test_len = 200;
        cfg.ipc.max_delay = 3;
        cfg.ipc.max_degree = 2;
        cfg.washout = 20;
        let out = sweep(&cfg, Metric::IpcTotal).unwrap();
        for c in &out.cells {
            let report = c.capacity.as_ref().unwrap();
            assert!(report.total <= report.readout_dim as f64 + 1e-6);
            assert!(report
                .per_target
                .iter()
                .all(|t| (0.0..=1.0).contains(&t.capacity)));
        }
        let dir = tempfile::tempdir().unwrap();
        let written = out.persist(dir.path()).unwrap();
        assert_eq!(written.len(), 3);
        let back = SweepGrid::read_csv(&mean_path(dir.path(), Metric::IpcTotal)).unwrap();
        assert_eq!(back, out.mean);
    }

    #[test]
    fn failing_cell_reports_coordinates() {
        let mut cfg = small(2, 1);
        cfg.ipc.train_len = 400;
        cfg.ipc.test_len = 200;
        cfg.washout = 2;
        match sweep(&cfg, Metric::IpcTotal) {
            Err(Error::Cell { seed, .. }) => assert_eq!(seed, 2),
            other => panic!("expected a cell error, got {other:?}"),
        }
        assert!(sweep(&cfg, Metric::DeltaPerV).is_err());
    }
}
