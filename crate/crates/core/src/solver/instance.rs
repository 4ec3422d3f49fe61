use rand_distr::{Distribution, LogNormal};
use serde::{Deserialize, Serialize};

use crate::config::{ensure_valid, ConfigDocument};
use crate::error::{Error, Result};
use crate::rng::stream_rng;
use crate::types::{CellState, ChannelConfig, DeviceParams};

/// One routing channel with a concrete cell pattern and input activity.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelInstance {
    pub cfg: ChannelConfig,
    pub cell_state: Vec<CellState>,
    /// Input pulse present on the row, i.e. its access FET is on.
    pub row_active: Vec<bool>,
    /// Per-row memristor resistance replacing the nominal LRS/HRS value.
    pub cell_resistance: Option<Vec<f64>>,
}

impl ChannelInstance {
    pub fn new(cfg: ChannelConfig, cell_state: Vec<CellState>, row_active: Vec<bool>) -> Result<Self> {
        let inst = Self {
            cfg,
            cell_state,
            row_active,
            cell_resistance: None,
        };
        inst.validate()?;
        Ok(inst)
    }

    /// Builds an instance from row index lists; unlisted rows are HRS and idle.
    pub fn from_rows(cfg: ChannelConfig, on_rows: &[usize], active_rows: &[usize]) -> Result<Self> {
        let n = cfg.n_rows;
        let mut cell_state = vec![CellState::Off; n];
        let mut row_active = vec![false; n];
        for &i in on_rows {
            *cell_state
                .get_mut(i)
                .ok_or(Error::RowOutOfRange { index: i, n_rows: n })? = CellState::On;
        }
        for &i in active_rows {
            *row_active
                .get_mut(i)
                .ok_or(Error::RowOutOfRange { index: i, n_rows: n })? = true;
        }
        Self::new(cfg, cell_state, row_active)
    }

    pub fn with_cell_resistance(mut self, resistance: Vec<f64>) -> Result<Self> {
        self.cell_resistance = Some(resistance);
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        ensure_valid(&self.cfg)?;
        let n = self.cfg.n_rows;
        if self.cell_state.len() != n || self.row_active.len() != n {
            return Err(Error::DimensionMismatch(format!(
                "instance has {} cell states and {} activity flags for {n} rows",
                self.cell_state.len(),
                self.row_active.len()
            )));
        }
        if let Some(r) = &self.cell_resistance {
            if r.len() != n {
                return Err(Error::DimensionMismatch(format!(
                    "{} cell resistances for {n} rows",
                    r.len()
                )));
            }
            if r.iter().any(|&x| !(x > 0.0) || !x.is_finite()) {
                return Err(Error::InvalidArgument(
                    "cell resistances must be finite and positive".into(),
                ));
            }
        }
        Ok(())
    }

    pub fn n_rows(&self) -> usize {
        self.cfg.n_rows
    }

    pub fn cell_resistance(&self, row: usize) -> f64 {
        match &self.cell_resistance {
            Some(r) => r[row],
            None => self.cfg.device.resistance(self.cell_state[row]),
        }
    }

    /// Access FET resistance: `R_T` when driven, the calibrated off-state
    /// resistance otherwise (infinite with leakage disabled).
    pub fn fet_resistance(&self, row: usize) -> f64 {
        if self.row_active[row] {
            self.cfg.transistor.r_t
        } else {
            self.cfg.fet_off_resistance()
        }
    }

    /// Cell plus FET, excluding line segments. Infinite for an open branch.
    pub fn branch_resistance(&self, row: usize) -> f64 {
        self.cell_resistance(row) + self.fet_resistance(row)
    }

    pub fn has_active_on_row(&self) -> bool {
        self.row_active
            .iter()
            .zip(&self.cell_state)
            .any(|(&a, s)| a && s.is_on())
    }
}

/// Samples lognormal resistance multipliers (median 1) around the nominal
/// LRS/HRS values. Returns the nominal values unchanged when `sigma_log` is 0.
pub fn sample_cell_resistances(device: &DeviceParams, states: &[CellState], seed: u64, stream: u64) -> Vec<f64> {
    let nominal = states.iter().map(|&s| device.resistance(s));
    if device.sigma_log == 0.0 {
        return nominal.collect();
    }
    let spread = LogNormal::new(0.0, device.sigma_log).expect("sigma_log validated non-negative");
    let mut rng = stream_rng(seed, stream);
    nominal.map(|r| r * spread.sample(&mut rng)).collect()
}

/// JSON form of an instance for the command line.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceSpec {
    #[serde(default)]
    pub on_rows: Vec<usize>,
    #[serde(default)]
    pub active_rows: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cell_resistance: Option<Vec<f64>>,
    /// Optional embedded configuration overriding the command's.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub config: Option<ConfigDocument>,
}

impl InstanceSpec {
    pub fn into_instance(self, fallback: &ChannelConfig) -> Result<ChannelInstance> {
        let cfg = self.config.as_ref().map_or(*fallback, ConfigDocument::channel_config);
        let inst = ChannelInstance::from_rows(cfg, &self.on_rows, &self.active_rows)?;
        match self.cell_resistance {
            Some(r) => inst.with_cell_resistance(r),
            None => Ok(inst),
        }
    }
}
