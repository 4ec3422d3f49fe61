//! Nodal solvers for a single routing channel.

mod dense;
mod instance;
mod ladder;
mod leak;
mod profile;

pub use dense::{dense_oracle_solve, ORACLE_MAX_ROWS};
pub use instance::{sample_cell_resistances, ChannelInstance, InstanceSpec};
pub use ladder::solve_channel;
pub use leak::{calibrate_fet_leak, i_cc_leak, i_cc_leak_with, FetLeak, LeakReport, Placement};
pub use profile::{ir_drop_profile, profile_from_solution, IrDropRow};
