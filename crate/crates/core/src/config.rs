//! External JSON configuration document and validation.

use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::sweep::SweepSpec;
use crate::types::{ChannelConfig, DeviceParams, LineModel, TransistorParams};

/// Integral floats become integers so `64.0` can fill a count field.
fn integral(value: Value) -> Value {
    match value.as_f64() {
        Some(x) if value.is_f64() && x.fract() == 0.0 && x.abs() < 9.0e15 => {
            if x >= 0.0 {
                Value::from(x as u64)
            } else {
                Value::from(x as i64)
            }
        }
        _ => value,
    }
}

fn merge(base: &mut Value, patch: Value) {
    match (base, patch) {
        (Value::Object(base), Value::Object(patch)) => {
            for (key, value) in patch {
                match base.get_mut(&key) {
                    Some(slot) => merge(slot, value),
                    None => {
                        base.insert(key, value);
                    }
                }
            }
        }
        (slot, value) => *slot = value,
    }
}

/// One violated configuration invariant.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub field: &'static str,
    pub message: String,
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}: {}", self.field, self.message)
    }
}

/// Checks every invariant of a channel configuration. An empty list
/// certifies the configuration for all solvers.
pub fn validate_config(cfg: &ChannelConfig) -> Vec<Violation> {
    let mut out = Vec::new();
    let mut check = |ok: bool, field: &'static str, message: String| {
        if !ok {
            out.push(Violation { field, message });
        }
    };
    let d = &cfg.device;
    let t = &cfg.transistor;
    check(cfg.n_rows >= 1, "channel.n_rows", "channel needs at least one row".into());
    check(
        cfg.r_line >= 0.0 && cfg.r_line.is_finite(),
        "channel.r_line",
        format!("line resistance must be finite and >= 0, got {}", cfg.r_line),
    );
    check(
        cfg.v_read > 0.0 && cfg.v_read.is_finite(),
        "channel.v_read",
        format!("read voltage must be > 0, got {}", cfg.v_read),
    );
    check(
        cfg.i_ref > 0.0 && cfg.i_ref.is_finite(),
        "channel.i_ref",
        format!("reference current must be > 0, got {}", cfg.i_ref),
    );
    check(
        d.r_on > 0.0 && d.r_on.is_finite(),
        "device.r_on",
        format!("r_on must be > 0, got {}", d.r_on),
    );
    check(
        d.r_off > d.r_on && d.r_off.is_finite(),
        "device.r_off",
        format!("k must exceed 1 (r_off = {} <= r_on = {})", d.r_off, d.r_on),
    );
    check(
        d.sigma_log >= 0.0 && d.sigma_log.is_finite(),
        "device.sigma_log",
        format!("sigma_log must be >= 0, got {}", d.sigma_log),
    );
    check(
        t.r_t >= 0.0 && t.r_t.is_finite(),
        "transistor.r_t",
        format!("r_t must be >= 0, got {}", t.r_t),
    );
    check(
        t.i_leak_per_fet >= 0.0 && t.i_leak_per_fet.is_finite(),
        "transistor.i_leak_per_fet",
        format!("per-FET leakage must be >= 0, got {}", t.i_leak_per_fet),
    );
    out
}

/// Validates and returns the configuration, or every violation as an error.
pub fn ensure_valid(cfg: &ChannelConfig) -> Result<()> {
    let violations = validate_config(cfg);
    if violations.is_empty() {
        Ok(())
    } else {
        Err(Error::InvalidConfig(
            violations.iter().map(ToString::to_string).collect(),
        ))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelSection {
    pub n_rows: usize,
    pub r_line: f64,
    pub v_read: f64,
    pub i_ref: f64,
    #[serde(default)]
    pub line_model: LineModel,
}

/// Traffic and stochastic-simulation parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimulationSection {
    /// Spike rate of each input.
    pub f_hz: f64,
    /// Routing pulse width.
    pub t_pw: f64,
    pub duration: f64,
    pub seed: u64,
    /// Count of simultaneous off-cell inputs that triggers a false output.
    pub m_tol: u64,
    /// Simultaneous inputs for leakage accumulation queries.
    pub n_si: usize,
    pub p_target: f64,
}

impl Default for SimulationSection {
    fn default() -> Self {
        Self {
            f_hz: 732.0,
            t_pw: 1e-6,
            duration: 1.0,
            seed: 0,
            m_tol: 20,
            n_si: 10,
            p_target: 1e-10,
        }
    }
}

/// The full configuration document accepted by every command.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigDocument {
    pub channel: ChannelSection,
    pub device: DeviceParams,
    pub transistor: TransistorParams,
    #[serde(default)]
    pub simulation: SimulationSection,
    #[serde(default)]
    pub sweep: SweepSpec,
}

impl Default for ConfigDocument {
    fn default() -> Self {
        Self::from_channel(&ChannelConfig::default())
    }
}

impl ConfigDocument {
    pub fn from_channel(cfg: &ChannelConfig) -> Self {
        Self {
            channel: ChannelSection {
                n_rows: cfg.n_rows,
                r_line: cfg.r_line,
                v_read: cfg.v_read,
                i_ref: cfg.i_ref,
                line_model: cfg.line_model,
            },
            device: cfg.device,
            transistor: cfg.transistor,
            simulation: SimulationSection::default(),
            sweep: SweepSpec::default(),
        }
    }

    pub fn channel_config(&self) -> ChannelConfig {
        ChannelConfig {
            n_rows: self.channel.n_rows,
            r_line: self.channel.r_line,
            v_read: self.channel.v_read,
            i_ref: self.channel.i_ref,
            line_model: self.channel.line_model,
            device: self.device,
            transistor: self.transistor,
        }
    }

    /// Parses a document; absent fields keep their defaults.
    pub fn from_json(text: &str) -> Result<Self> {
        let mut tree = serde_json::to_value(Self::default())?;
        merge(&mut tree, serde_json::from_str(text)?);
        Ok(serde_json::from_value(tree)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    /// Applies one `section.field=value` override. The value is parsed as
    /// JSON when possible and taken as a bare string otherwise.
    pub fn set(&mut self, assignment: &str) -> Result<()> {
        let (path, raw) = assignment
            .split_once('=')
            .ok_or_else(|| Error::Parse(format!("expected key=value, got `{assignment}`")))?;
        let value: Value =
            serde_json::from_str(raw.trim()).unwrap_or_else(|_| Value::String(raw.trim().into()));
        self.set_value(path.trim(), value)
    }

    pub fn set_value(&mut self, path: &str, value: Value) -> Result<()> {
        let mut tree = serde_json::to_value(&*self)?;
        let mut slot = &mut tree;
        for key in path.split('.') {
            slot = slot
                .get_mut(key)
                .ok_or_else(|| Error::UnknownParameter(path.to_string()))?;
        }
        *slot = integral(value);
        *self = serde_json::from_value(tree)
            .map_err(|e| Error::Parse(format!("cannot apply `{path}`: {e}")))?;
        Ok(())
    }

    /// Reads a numeric field by dotted path.
    pub fn get_f64(&self, path: &str) -> Result<f64> {
        let tree = serde_json::to_value(self)?;
        let mut slot = &tree;
        for key in path.split('.') {
            slot = slot
                .get(key)
                .ok_or_else(|| Error::UnknownParameter(path.to_string()))?;
        }
        slot.as_f64()
            .ok_or_else(|| Error::Parse(format!("`{path}` is not numeric")))
    }
}
