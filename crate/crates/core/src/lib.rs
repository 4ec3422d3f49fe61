//! Memristive 1T1R crossbar routers: sensing margin under IR drop and
//! transistor parasitics, coincidence error probability under Poisson spike
//! traffic, off-current accumulation, and end-to-end router emulation.

// `!(x > 0.0)` is used on purpose: it rejects NaN along with the bad range.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analytic;
pub mod config;
pub mod error;
pub mod io;
pub mod rng;
pub mod sim;
pub mod solver;
pub mod sweep;
pub mod types;

pub use config::{ensure_valid, validate_config, ConfigDocument, SimulationSection, Violation};
pub use error::{Error, Result};
pub use types::{
    CellState, ChannelConfig, ChannelSolution, DeviceParams, LineModel, SpikeTrainSet,
    SwitchMatrix, TransistorParams,
};
