//! Information processing capacity over delayed Legendre targets.

pub mod ipc;
pub mod legendre;
pub mod target;

pub use ipc::{
    capacity_of_target, squared_correlation, total_ipc, CapacityEvaluator, CapacityReport,
    IpcConfig, TargetCapacity, Threshold,
};
pub use legendre::legendre;
pub use target::{build_target, enumerate_targets, target_count, TargetSpec, TargetTerm};
