//! Closed-form sensed currents and on/off ratios of a single channel.
//!
//! Row indices are zero-based. Row `i` sits `i + 1` line segments from the
//! driver and `n - 1 - i` segments from the sense terminal, so every single
//! branch path crosses exactly `n·r` of line resistance. The access FET's
//! on-resistance `R_T` is folded into each branch, which makes the
//! transistor-free expressions the `R_T = 0` special case.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::types::{CellState, ChannelConfig};

/// Device ratio against the ratio the sense circuit actually sees.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MarginReport {
    pub k: f64,
    pub k_eff: f64,
    /// `k_eff / k`, the surviving fraction of the sensing window.
    pub margin_fraction: f64,
}

/// Device ratio and HRS resistance needed to reach a sensed ratio.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeviceRequirement {
    pub k: f64,
    pub r_off_min: f64,
}

/// Sensed ratio for a device ratio `k` behind a series parasitic.
///
/// `(k - 1) / (1 + parasitic / r_on) + 1`
pub fn sensed_ratio(k: f64, r_on: f64, parasitic: f64) -> f64 {
    (k - 1.0) / (1.0 + parasitic / r_on) + 1.0
}

/// Sensed ratio with line resistance only, no access transistor.
pub fn sensed_ratio_line_only(cfg: &ChannelConfig) -> f64 {
    sensed_ratio(cfg.device.k(), cfg.device.r_on, cfg.line_resistance())
}

/// Sense current when a single spike reads one LRS cell.
pub fn i_sl_single_on(cfg: &ChannelConfig) -> f64 {
    cfg.v_read / (cfg.device.r_on + cfg.series_parasitic())
}

pub fn effective_onoff_ratio(cfg: &ChannelConfig) -> MarginReport {
    let k = cfg.device.k();
    let k_eff = sensed_ratio(k, cfg.device.r_on, cfg.series_parasitic());
    MarginReport {
        k,
        k_eff,
        margin_fraction: k_eff / k,
    }
}

/// Inverts [`effective_onoff_ratio`]: the device ratio whose sensed ratio
/// under `cfg`'s parasitics equals `k_eff_target`.
pub fn required_device_ratio(k_eff_target: f64, cfg: &ChannelConfig) -> Result<DeviceRequirement> {
    if !(k_eff_target > 1.0) || !k_eff_target.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "sensed ratio target must exceed 1, got {k_eff_target}"
        )));
    }
    let k = (k_eff_target - 1.0) * (1.0 + cfg.series_parasitic() / cfg.device.r_on) + 1.0;
    Ok(DeviceRequirement {
        k,
        r_off_min: k * cfg.device.r_on,
    })
}

/// Sense current with an LRS cell at row `i` and a second active cell at
/// row `j > i`, on a shared drive rail.
///
/// The two branches split between the rail tap of row `i` and the source
/// line node of row `j`; the `(i+1)·r` of rail before the split and the
/// `(n-1-j)·r` of source line after the merge are shared.
pub fn i_sl_two_active(cfg: &ChannelConfig, i: usize, j: usize, state_j: CellState) -> Result<f64> {
    let n = cfg.n_rows;
    if j >= n {
        return Err(Error::RowOutOfRange { index: j, n_rows: n });
    }
    if i >= j {
        return Err(Error::InvalidArgument(format!(
            "rows must satisfy i < j, got i = {i}, j = {j}"
        )));
    }
    let r = cfg.r_line;
    let r_t = cfg.transistor.r_t;
    let gap = (j - i) as f64 * r;
    let first = cfg.device.r_on + r_t + gap;
    let second = gap + cfg.device.resistance(state_j) + r_t;
    let split = first * second / (first + second);
    Ok(cfg.v_read / ((i + 1) as f64 * r + split + (n - 1 - j) as f64 * r))
}

/// One grid point of a margin sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MarginPoint {
    pub n_rows: usize,
    pub r_line: f64,
    pub r_on: f64,
    pub r_off: f64,
    pub r_t: f64,
    pub report: MarginReport,
}

/// Evaluates [`effective_onoff_ratio`] on the `n_rows × r_line` grid, rows
/// outer, keeping every other field of `template`.
pub fn margin_sweep(
    template: &ChannelConfig,
    n_rows: &[usize],
    r_line: &[f64],
) -> Result<Vec<MarginPoint>> {
    if n_rows.is_empty() || r_line.is_empty() {
        return Err(Error::InvalidArgument("margin sweep axes must be non-empty".into()));
    }
    Ok(n_rows
        .iter()
        .flat_map(|&n| r_line.iter().map(move |&r| (n, r)))
        .map(|(n, r)| {
            let cfg = template.with_rows(n).with_r_line(r);
            MarginPoint {
                n_rows: n,
                r_line: r,
                r_on: cfg.device.r_on,
                r_off: cfg.device.r_off,
                r_t: cfg.transistor.r_t,
                report: effective_onoff_ratio(&cfg),
            }
        })
        .collect())
}
