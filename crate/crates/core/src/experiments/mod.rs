//! Ensemble sweeps over clock cycle and multiplexing, grid analysis and run
//! summaries.

pub mod analysis;
pub mod config;
pub mod grid;
pub mod report;
pub mod sweep;

pub use analysis::{
    finite_diff_v, pearson, saturation_front, zeno_front_check, zeno_overlay, GridBox,
    SaturationFront, ZenoFrontCheck, ZenoOverlay,
};
pub use config::ExperimentConfig;
pub use grid::{Aggregation, Metric, SweepGrid};
pub use report::{report, RunSummary};
pub use sweep::{
    ensemble_hamiltonians, ensemble_timescales, sweep, CellResult, RuntimeRecord, SweepOutcome,
};
