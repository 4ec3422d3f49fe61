//! Off-current accumulation on a channel whose cells are all HRS.

use rand::seq::index::sample;
use serde::{Deserialize, Serialize};

use crate::config::ensure_valid;
use crate::error::{Error, Result};
use crate::rng::stream_rng;
use crate::types::{CellState, ChannelConfig};

use super::instance::ChannelInstance;
use super::ladder::solve_channel;

/// Per-FET leakage derived from a measured channel total.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FetLeak {
    pub i_leak_per_fet: f64,
    /// Equivalent linear off-resistance at the calibration voltage; infinite
    /// when leakage is zero.
    pub r_fet_off: f64,
}

/// Splits a channel's total off-state FET leakage evenly over its FETs.
pub fn calibrate_fet_leak(total_leak: f64, n_fets: usize, v_read: f64) -> Result<FetLeak> {
    if !(total_leak >= 0.0) || !total_leak.is_finite() || n_fets == 0 || !(v_read > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "calibration needs total_leak >= 0, n_fets >= 1 and v_read > 0; got {total_leak}, {n_fets}, {v_read}"
        )));
    }
    let i_leak_per_fet = total_leak / n_fets as f64;
    Ok(FetLeak {
        i_leak_per_fet,
        r_fet_off: if i_leak_per_fet > 0.0 {
            v_read / i_leak_per_fet
        } else {
            f64::INFINITY
        },
    })
}

/// Which rows receive the simultaneous inputs.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "mode")]
pub enum Placement {
    /// Rows at the centres of `n_si` equal slices of the channel.
    #[default]
    Even,
    Random {
        seed: u64,
    },
}

impl Placement {
    pub fn rows(&self, n_rows: usize, n_si: usize) -> Vec<usize> {
        match *self {
            Placement::Even => (0..n_si)
                .map(|j| ((2 * j + 1) * n_rows) / (2 * n_si))
                .collect(),
            Placement::Random { seed } => {
                let mut rows = sample(&mut stream_rng(seed, n_si as u64), n_rows, n_si).into_vec();
                rows.sort_unstable();
                rows
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LeakReport {
    pub n_si: usize,
    /// Total channel current with `n_si` active HRS rows.
    pub i_cc_leak: f64,
    /// Total channel current with a single active HRS row.
    pub i_off_single: f64,
    pub ratio: f64,
    /// Part of `i_cc_leak` through the driven HRS cells.
    pub i_cells: f64,
    /// Part of `i_cc_leak` through idle rows' off-state FETs.
    pub i_fet_leak: f64,
}

fn accumulate(cfg: &ChannelConfig, rows: &[usize]) -> Result<(f64, f64, f64)> {
    let inst = ChannelInstance::from_rows(*cfg, &[], rows)?;
    debug_assert!(inst.cell_state.iter().all(|&s| s == CellState::Off));
    let sol = solve_channel(&inst)?;
    let (mut cells, mut fets) = (0.0, 0.0);
    for (b, &active) in sol.branch_currents.iter().zip(&inst.row_active) {
        if active {
            cells += b;
        } else {
            fets += b;
        }
    }
    Ok((sol.i_sl, cells, fets))
}

/// Accumulated off current of `n_si` simultaneous inputs on evenly spaced rows.
pub fn i_cc_leak(cfg: &ChannelConfig, n_si: usize) -> Result<LeakReport> {
    i_cc_leak_with(cfg, n_si, Placement::Even)
}

pub fn i_cc_leak_with(cfg: &ChannelConfig, n_si: usize, placement: Placement) -> Result<LeakReport> {
    ensure_valid(cfg)?;
    if n_si == 0 || n_si > cfg.n_rows {
        return Err(Error::InvalidArgument(format!(
            "n_si must lie in 1..={}, got {n_si}",
            cfg.n_rows
        )));
    }
    let (i_cc_leak, i_cells, i_fet_leak) = accumulate(cfg, &placement.rows(cfg.n_rows, n_si))?;
    let (i_off_single, _, _) = accumulate(cfg, &placement.rows(cfg.n_rows, 1))?;
    Ok(LeakReport {
        n_si,
        i_cc_leak,
        i_off_single,
        ratio: i_cc_leak / i_off_single,
        i_cells,
        i_fet_leak,
    })
}
