//! Switch-matrix routing with comparator thresholding.
//!
//! Every channel (column) sums the currents of its driven rows and fires
//! when the sensed current exceeds `I_ref`. The ideal output of a channel is
//! the OR over driven rows of the cell state: it should fire iff at least
//! one driven cell is LRS.

use serde::{Deserialize, Serialize};

use crate::config::ensure_valid;
use crate::error::{Error, Result};
use crate::solver::{sample_cell_resistances, solve_channel, ChannelInstance};
use crate::types::{ChannelConfig, SpikeTrainSet, SwitchMatrix};

use super::trains::boundary_events;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RouteMode {
    /// Parallel sum of `V_read / (R_cell + R_T)`; no line resistance and no
    /// idle-row leakage.
    Ideal,
    /// Full channel solve including IR drop and FET leakage.
    #[default]
    Solver,
}

impl std::str::FromStr for RouteMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ideal" => Ok(RouteMode::Ideal),
            "solver" => Ok(RouteMode::Solver),
            other => Err(Error::Parse(format!("unknown route mode `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ChannelOutput {
    pub channel: usize,
    pub i_sl: f64,
    pub fired: bool,
    pub expected: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ErrorClass {
    None,
    /// Output fired with no LRS path, from accumulated off currents.
    FalseOutput,
    /// An LRS path was driven but the sensed current stayed below `I_ref`.
    MissedOutput,
}

impl ErrorClass {
    pub fn of(fired: bool, expected: bool) -> Self {
        match (fired, expected) {
            (true, false) => ErrorClass::FalseOutput,
            (false, true) => ErrorClass::MissedOutput,
            _ => ErrorClass::None,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ErrorClass::None => "none",
            ErrorClass::FalseOutput => "false_output",
            ErrorClass::MissedOutput => "missed_output",
        }
    }
}

/// A crossbar router: switch matrix, channel electrics and evaluation mode.
#[derive(Debug, Clone)]
pub struct Router<'a> {
    matrix: &'a SwitchMatrix,
    cfg: ChannelConfig,
    mode: RouteMode,
    /// Per-channel cell resistances when device spread is enabled.
    resistances: Option<Vec<Vec<f64>>>,
}

impl<'a> Router<'a> {
    pub fn new(matrix: &'a SwitchMatrix, cfg: &ChannelConfig, mode: RouteMode) -> Result<Self> {
        ensure_valid(cfg)?;
        if matrix.n_wl() != cfg.n_rows {
            return Err(Error::DimensionMismatch(format!(
                "switch matrix has {} word lines but the channel has {} rows",
                matrix.n_wl(),
                cfg.n_rows
            )));
        }
        Ok(Self {
            matrix,
            cfg: *cfg,
            mode,
            resistances: None,
        })
    }

    /// Draws each cell's resistance once from the device spread; a no-op
    /// when `sigma_log` is zero.
    pub fn with_variability(mut self, seed: u64) -> Self {
        if self.cfg.device.sigma_log > 0.0 {
            self.resistances = Some(
                (0..self.matrix.n_ch())
                    .map(|ch| {
                        sample_cell_resistances(&self.cfg.device, &self.matrix.column(ch), seed, ch as u64)
                    })
                    .collect(),
            );
        }
        self
    }

    fn cell_resistance(&self, wl: usize, ch: usize) -> f64 {
        match &self.resistances {
            Some(r) => r[ch][wl],
            None => self.cfg.device.resistance(self.matrix.cell(wl, ch)),
        }
    }

    fn channel_current(&self, ch: usize, active: &[bool], active_rows: &[usize]) -> Result<f64> {
        match self.mode {
            RouteMode::Ideal => Ok(active_rows
                .iter()
                .map(|&wl| self.cfg.v_read / (self.cell_resistance(wl, ch) + self.cfg.transistor.r_t))
                .sum()),
            RouteMode::Solver => {
                let mut inst =
                    ChannelInstance::new(self.cfg, self.matrix.column(ch), active.to_vec())?;
                if let Some(r) = &self.resistances {
                    inst = inst.with_cell_resistance(r[ch].clone())?;
                }
                Ok(solve_channel(&inst)?.i_sl)
            }
        }
    }

    /// Evaluates every channel for one set of simultaneously driven rows.
    pub fn route(&self, active_rows: &[usize]) -> Result<Vec<ChannelOutput>> {
        let n = self.matrix.n_wl();
        let mut active = vec![false; n];
        for &wl in active_rows {
            *active
                .get_mut(wl)
                .ok_or(Error::RowOutOfRange { index: wl, n_rows: n })? = true;
        }
        let rows: Vec<usize> = (0..n).filter(|&wl| active[wl]).collect();
        (0..self.matrix.n_ch())
            .map(|ch| {
                let i_sl = if rows.is_empty() {
                    0.0
                } else {
                    self.channel_current(ch, &active, &rows)?
                };
                Ok(ChannelOutput {
                    channel: ch,
                    i_sl,
                    fired: i_sl > self.cfg.i_ref,
                    expected: rows.iter().any(|&wl| self.matrix.is_on(wl, ch)),
                })
            })
            .collect()
    }
}

/// Routes one input event through the matrix.
pub fn route_event(
    matrix: &SwitchMatrix,
    active_rows: &[usize],
    cfg: &ChannelConfig,
    mode: RouteMode,
) -> Result<Vec<ChannelOutput>> {
    Router::new(matrix, cfg, mode)?.route(active_rows)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TraceEvent {
    /// Start of the interval over which the input pattern is constant.
    pub time: f64,
    pub channel: usize,
    pub i_sl: f64,
    pub fired: bool,
    pub expected: bool,
}

impl TraceEvent {
    pub fn error_class(&self) -> ErrorClass {
        ErrorClass::of(self.fired, self.expected)
    }
}

/// Outcome of an emulation run. Events are kept for every channel that fired
/// or should have fired; quiet and correct channels are only counted.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct RoutingTrace {
    pub events: Vec<TraceEvent>,
    pub false_output: usize,
    pub missed_output: usize,
}

impl RoutingTrace {
    pub fn total_errors(&self) -> usize {
        self.false_output + self.missed_output
    }

    pub fn is_passed(&self) -> bool {
        self.total_errors() == 0
    }

    pub fn error_classes(&self) -> Vec<ErrorClass> {
        let mut classes = Vec::new();
        if self.false_output > 0 {
            classes.push(ErrorClass::FalseOutput);
        }
        if self.missed_output > 0 {
            classes.push(ErrorClass::MissedOutput);
        }
        classes
    }

    pub fn fired_channels(&self) -> Vec<usize> {
        let mut ch: Vec<usize> = self.events.iter().filter(|e| e.fired).map(|e| e.channel).collect();
        ch.sort_unstable();
        ch.dedup();
        ch
    }
}

/// Event-driven emulation: time is cut at every pulse boundary and each
/// interval with at least one driven row is routed once.
pub fn emulate(
    matrix: &SwitchMatrix,
    trains: &SpikeTrainSet,
    cfg: &ChannelConfig,
    mode: RouteMode,
) -> Result<RoutingTrace> {
    emulate_with(&Router::new(matrix, cfg, mode)?, trains)
}

pub fn emulate_with(router: &Router<'_>, trains: &SpikeTrainSet) -> Result<RoutingTrace> {
    if trains.n_inputs() != router.matrix.n_wl() {
        return Err(Error::DimensionMismatch(format!(
            "{} input trains for {} word lines",
            trains.n_inputs(),
            router.matrix.n_wl()
        )));
    }
    let events = boundary_events(trains);
    let mut depth = vec![0u32; trains.n_inputs()];
    let mut trace = RoutingTrace::default();
    let mut idx = 0;
    while idx < events.len() {
        let t = events[idx].0;
        while idx < events.len() && events[idx].0 == t {
            let (_, delta, input) = events[idx];
            if delta > 0 {
                depth[input] += 1;
            } else {
                depth[input] -= 1;
            }
            idx += 1;
        }
        let Some(&(t_next, _, _)) = events.get(idx) else {
            break;
        };
        if t_next <= t {
            continue;
        }
        let active: Vec<usize> = (0..depth.len()).filter(|&i| depth[i] > 0).collect();
        if active.is_empty() {
            continue;
        }
        for out in router.route(&active)? {
            match ErrorClass::of(out.fired, out.expected) {
                ErrorClass::FalseOutput => trace.false_output += 1,
                ErrorClass::MissedOutput => trace.missed_output += 1,
                ErrorClass::None => {}
            }
            if out.fired || out.expected {
                trace.events.push(TraceEvent {
                    time: t,
                    channel: out.channel,
                    i_sl: out.i_sl,
                    fired: out.fired,
                    expected: out.expected,
                });
            }
        }
    }
    Ok(trace)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::types::{DeviceParams, TransistorParams};

    fn chip_cfg(n_rows: usize, r_off: f64, r_t: f64) -> ChannelConfig {
        ChannelConfig {
            n_rows,
            r_line: 2.5,
            v_read: 0.2,
            i_ref: 6e-6,
            device: DeviceParams {
                r_on: 10e3,
                r_off,
                sigma_log: 0.0,
            },
            transistor: TransistorParams {
                r_t,
                i_leak_per_fet: 10e-9 / 256.0,
            },
            ..ChannelConfig::default()
        }
    }

    #[test]
    fn single_lrs_read_fires() {
        let mut m = SwitchMatrix::new(4, 2).unwrap();
        m.set(1, 0, true);
        let out = route_event(&m, &[1], &chip_cfg(4, 250e3, 0.0), RouteMode::Ideal).unwrap();
        assert!((out[0].i_sl - 20e-6).abs() < 1e-18);
        assert!(out[0].fired && out[0].expected);
        assert!(!out[1].fired && !out[1].expected);
    }

    #[test]
    fn nine_off_cells_trip_comparator() {
        let m = SwitchMatrix::new(32, 1).unwrap();
        let rows: Vec<usize> = (0..9).collect();
        let out = route_event(&m, &rows, &chip_cfg(32, 250e3, 1.7e3), RouteMode::Ideal).unwrap();
        assert!((out[0].i_sl - 9.0 * 0.2 / 251.7e3).abs() < 1e-18);
        assert!((out[0].i_sl - 7.15e-6).abs() < 0.01e-6);
        assert!(out[0].fired && !out[0].expected);
    }

    #[test]
    fn idle_matrix_is_quiet() {
        let mut m = SwitchMatrix::new(8, 3).unwrap();
        m.set(2, 2, true);
        for mode in [RouteMode::Ideal, RouteMode::Solver] {
            let out = route_event(&m, &[], &chip_cfg(8, 250e3, 1.7e3), mode).unwrap();
            assert!(out.iter().all(|o| !o.fired && o.i_sl == 0.0));
        }
    }

    #[test]
    fn dimension_checks() {
        let m = SwitchMatrix::new(8, 3).unwrap();
        assert!(route_event(&m, &[0], &chip_cfg(16, 250e3, 0.0), RouteMode::Ideal).is_err());
        assert!(route_event(&m, &[8], &chip_cfg(8, 250e3, 0.0), RouteMode::Ideal).is_err());
        let trains = SpikeTrainSet::empty(7, 1e-6, 1e-3).unwrap();
        assert!(emulate(&m, &trains, &chip_cfg(8, 250e3, 0.0), RouteMode::Ideal).is_err());
    }

    #[test]
    fn overlapping_pulses_split_into_intervals() {
        let mut m = SwitchMatrix::new(2, 2).unwrap();
        m.set(0, 0, true);
        m.set(1, 1, true);
        let trains = SpikeTrainSet::new(vec![vec![0.0], vec![0.5e-6]], 1e-6, 2e-6).unwrap();
        let trace = emulate(&m, &trains, &chip_cfg(2, 250e3, 1.7e3), RouteMode::Solver).unwrap();
        let times: Vec<f64> = trace.events.iter().map(|e| e.time).collect();
        // [0, .5) ch0, [.5, 1) ch0 + ch1, [1, 1.5) ch1
        assert_eq!(times, vec![0.0, 0.5e-6, 0.5e-6, 1e-6]);
        assert!(trace.is_passed());
        assert_eq!(trace.fired_channels(), vec![0, 1]);
    }

    #[test]
    fn empty_trains_give_empty_trace() {
        let m = SwitchMatrix::new(4, 4).unwrap();
        let trains = SpikeTrainSet::empty(4, 1e-6, 1e-3).unwrap();
        let trace = emulate(&m, &trains, &chip_cfg(4, 250e3, 1.7e3), RouteMode::Solver).unwrap();
        assert_eq!(trace, RoutingTrace::default());
    }

    #[test]
    fn variability_is_deterministic() {
        let mut cfg = chip_cfg(16, 250e3, 1.7e3);
        cfg.device.sigma_log = 0.2;
        let mut m = SwitchMatrix::new(16, 4).unwrap();
        m.set(3, 1, true);
        let a = Router::new(&m, &cfg, RouteMode::Solver).unwrap().with_variability(5);
        let b = Router::new(&m, &cfg, RouteMode::Solver).unwrap().with_variability(5);
        assert_eq!(a.route(&[3, 4]).unwrap(), b.route(&[3, 4]).unwrap());
    }
}
