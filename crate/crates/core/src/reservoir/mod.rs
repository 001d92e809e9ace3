//! Ising quantum reservoir: input injection, time-multiplexed readout and
//! linear training.

pub mod config;
pub mod readout;
pub mod sim;
pub mod state;

pub use config::ReservoirConfig;
pub use readout::{predict, pseudo_inverse, train_readout, ReadoutWeights};
pub use sim::{run_reservoir, Reservoir};
pub use state::{ColumnLabel, StateMatrix};
