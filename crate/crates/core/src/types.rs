//! Shared domain types.
//!
//! Every quantity is stored in SI base units: ohms, volts, amperes and
//! seconds. There is no kΩ or µA scaling anywhere in the data model.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Binary memristor state of a cross-point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CellState {
    /// Low resistive state, the "on" routing state.
    #[serde(alias = "lrs")]
    On,
    /// High resistive state, the "off" routing state.
    #[serde(alias = "hrs")]
    Off,
}

impl CellState {
    pub fn is_on(self) -> bool {
        matches!(self, CellState::On)
    }
}

/// Memristor resistances and optional device-to-device spread.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DeviceParams {
    pub r_on: f64,
    pub r_off: f64,
    /// Lognormal spread of each cell's resistance; zero is deterministic.
    #[serde(default)]
    pub sigma_log: f64,
}

impl DeviceParams {
    /// Device on/off ratio `r_off / r_on`.
    pub fn k(&self) -> f64 {
        self.r_off / self.r_on
    }

    pub fn resistance(&self, state: CellState) -> f64 {
        match state {
            CellState::On => self.r_on,
            CellState::Off => self.r_off,
        }
    }
}

impl Default for DeviceParams {
    fn default() -> Self {
        Self {
            r_on: 10e3,
            r_off: 200e3,
            sigma_log: 0.0,
        }
    }
}

/// Access transistor of a 1T1R cell.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TransistorParams {
    /// On-state series resistance while reading.
    pub r_t: f64,
    /// Current through one off-state FET at the configured read voltage.
    #[serde(default)]
    pub i_leak_per_fet: f64,
}

impl Default for TransistorParams {
    fn default() -> Self {
        Self {
            r_t: 1.7e3,
            // 10 nA spread over the 256 FETs of one channel.
            i_leak_per_fet: 10e-9 / 256.0,
        }
    }
}

/// How the drive-side line resistance of a channel is wired.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LineModel {
    /// One shared drive rail with a segment `r` between adjacent rows; row
    /// `i` taps the rail `i` segments from the driver. Both lines are ladders.
    #[default]
    Distributed,
    /// Each branch carries its own lumped `i·r` drive resistance; only the
    /// source line is a ladder and the reduced system is tridiagonal.
    Lumped,
}

/// Geometry and electrical parameters of one routing channel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelConfig {
    pub n_rows: usize,
    /// Resistance of one line segment between adjacent cells, used for both
    /// the drive and the source line.
    pub r_line: f64,
    pub v_read: f64,
    /// Comparator threshold current.
    pub i_ref: f64,
    #[serde(default)]
    pub line_model: LineModel,
    pub device: DeviceParams,
    pub transistor: TransistorParams,
}

impl Default for ChannelConfig {
    fn default() -> Self {
        Self {
            n_rows: 1024,
            r_line: 2.5,
            v_read: 0.2,
            i_ref: 6e-6,
            line_model: LineModel::default(),
            device: DeviceParams::default(),
            transistor: TransistorParams::default(),
        }
    }
}

impl ChannelConfig {
    /// Total line resistance `n·r` seen by any single branch.
    pub fn line_resistance(&self) -> f64 {
        self.n_rows as f64 * self.r_line
    }

    /// Series parasitic `R_T + n·r` added to every single-branch path.
    pub fn series_parasitic(&self) -> f64 {
        self.transistor.r_t + self.line_resistance()
    }

    /// Equivalent linear resistance of an off-state FET, infinite when
    /// leakage is disabled.
    pub fn fet_off_resistance(&self) -> f64 {
        if self.transistor.i_leak_per_fet > 0.0 {
            self.v_read / self.transistor.i_leak_per_fet
        } else {
            f64::INFINITY
        }
    }

    pub fn with_rows(mut self, n_rows: usize) -> Self {
        self.n_rows = n_rows;
        self
    }

    pub fn with_r_line(mut self, r_line: f64) -> Self {
        self.r_line = r_line;
        self
    }

    pub fn without_leakage(mut self) -> Self {
        self.transistor.i_leak_per_fet = 0.0;
        self
    }
}

/// On/off state of every cross-point of an `n_wl × n_ch` router.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SwitchMatrix {
    n_wl: usize,
    n_ch: usize,
    state: Vec<bool>,
}

impl SwitchMatrix {
    /// All cells off.
    pub fn new(n_wl: usize, n_ch: usize) -> Result<Self> {
        if n_wl == 0 || n_ch == 0 {
            return Err(Error::DimensionMismatch(format!(
                "switch matrix must be non-empty, got {n_wl}x{n_ch}"
            )));
        }
        Ok(Self {
            n_wl,
            n_ch,
            state: vec![false; n_wl * n_ch],
        })
    }

    pub fn from_rows(rows: &[Vec<bool>]) -> Result<Self> {
        let n_ch = rows.first().map_or(0, Vec::len);
        let mut m = Self::new(rows.len(), n_ch)?;
        for (wl, row) in rows.iter().enumerate() {
            if row.len() != n_ch {
                return Err(Error::DimensionMismatch(format!(
                    "row {wl} has {} columns, expected {n_ch}",
                    row.len()
                )));
            }
            m.state[wl * n_ch..(wl + 1) * n_ch].copy_from_slice(row);
        }
        Ok(m)
    }

    pub fn n_wl(&self) -> usize {
        self.n_wl
    }

    pub fn n_ch(&self) -> usize {
        self.n_ch
    }

    pub fn is_on(&self, wl: usize, ch: usize) -> bool {
        self.state[wl * self.n_ch + ch]
    }

    pub fn cell(&self, wl: usize, ch: usize) -> CellState {
        if self.is_on(wl, ch) {
            CellState::On
        } else {
            CellState::Off
        }
    }

    pub fn set(&mut self, wl: usize, ch: usize, on: bool) {
        self.state[wl * self.n_ch + ch] = on;
    }

    /// Cell states of one channel, ordered by word line.
    pub fn column(&self, ch: usize) -> Vec<CellState> {
        (0..self.n_wl).map(|wl| self.cell(wl, ch)).collect()
    }

    pub fn rows(&self) -> impl Iterator<Item = &[bool]> {
        self.state.chunks(self.n_ch)
    }
}

/// Rectangular pulses of fixed width on each input line.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpikeTrainSet {
    n_inputs: usize,
    pulses: Vec<Vec<f64>>,
    t_pw: f64,
    duration: f64,
}

impl SpikeTrainSet {
    pub fn new(pulses: Vec<Vec<f64>>, t_pw: f64, duration: f64) -> Result<Self> {
        if !(t_pw > 0.0) || !(duration > 0.0) {
            return Err(Error::InvalidArgument(
                "pulse width and duration must be positive".into(),
            ));
        }
        for (input, starts) in pulses.iter().enumerate() {
            if starts.windows(2).any(|w| !(w[1] > w[0])) {
                return Err(Error::InvalidArgument(format!(
                    "pulse starts on input {input} are not strictly increasing"
                )));
            }
            if let (Some(&first), Some(&last)) = (starts.first(), starts.last()) {
                if first < 0.0 || last + t_pw > duration * (1.0 + 1e-12) {
                    return Err(Error::InvalidArgument(format!(
                        "pulses on input {input} do not fit in [0, {duration}]"
                    )));
                }
            }
        }
        Ok(Self {
            n_inputs: pulses.len(),
            pulses,
            t_pw,
            duration,
        })
    }

    pub fn empty(n_inputs: usize, t_pw: f64, duration: f64) -> Result<Self> {
        Self::new(vec![Vec::new(); n_inputs], t_pw, duration)
    }

    pub fn n_inputs(&self) -> usize {
        self.n_inputs
    }

    pub fn pulses(&self) -> &[Vec<f64>] {
        &self.pulses
    }

    pub fn t_pw(&self) -> f64 {
        self.t_pw
    }

    pub fn duration(&self) -> f64 {
        self.duration
    }

    pub fn total_pulses(&self) -> usize {
        self.pulses.iter().map(Vec::len).sum()
    }
}

/// Solved operating point of one routing channel.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelSolution {
    /// Source-line node voltages by row; the last node is the sense terminal.
    pub node_voltages: Vec<f64>,
    /// Voltage at the drive end of each branch, after drive-line IR drop.
    pub drive_voltages: Vec<f64>,
    /// Branch currents by row, positive toward the source line.
    pub branch_currents: Vec<f64>,
    /// Current sensed at the channel terminal.
    pub i_sl: f64,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spike_train_rejects_unsorted_starts() {
        assert!(SpikeTrainSet::new(vec![vec![0.2, 0.1]], 0.01, 1.0).is_err());
        assert!(SpikeTrainSet::new(vec![vec![0.1, 0.1]], 0.01, 1.0).is_err());
        assert!(SpikeTrainSet::new(vec![vec![0.995]], 0.01, 1.0).is_err());
        assert!(SpikeTrainSet::new(vec![vec![0.0, 0.99]], 0.01, 1.0).is_ok());
    }

    #[test]
    fn switch_matrix_columns() {
        let m = SwitchMatrix::from_rows(&[vec![true, false], vec![false, false], vec![true, true]])
            .unwrap();
        assert_eq!(m.n_wl(), 3);
        assert_eq!(m.column(0), vec![CellState::On, CellState::Off, CellState::On]);
        assert_eq!(m.column(1), vec![CellState::Off, CellState::Off, CellState::On]);
        assert!(SwitchMatrix::from_rows(&[vec![true], vec![true, false]]).is_err());
        assert!(SwitchMatrix::new(0, 4).is_err());
    }

    #[test]
    fn fet_off_resistance_from_leak() {
        let cfg = ChannelConfig::default();
        assert!((cfg.fet_off_resistance() - 5.12e9).abs() < 1.0);
        assert!(cfg.without_leakage().fet_off_resistance().is_infinite());
    }
}
