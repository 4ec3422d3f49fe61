//! Parameter sweeps over the configuration schema, figure presets and
//! design-rule reports.

mod design;
mod presets;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::analytic::{effective_onoff_ratio, perr_analytic, ErrorModelParams};
use crate::config::{ensure_valid, ConfigDocument};
use crate::error::{Error, Result};
use crate::io::{fmt_f64, CsvTable, ERROR_HEADER, LEAK_HEADER, MARGIN_HEADER};
use crate::solver::i_cc_leak;
use crate::types::ChannelConfig;

pub use design::{design_rules, DesignReport, DesignRuleQuery};
pub use presets::{run_preset, PresetOutput, PRESET_NAMES};

/// One swept parameter: a dotted path into the configuration document and
/// the values it takes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepAxis {
    pub path: String,
    pub values: Vec<Value>,
}

/// Quantity tabulated at every grid point.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepTable {
    #[default]
    Margin,
    Error,
    Leak,
}

impl std::str::FromStr for SweepTable {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "margin" => Ok(SweepTable::Margin),
            "error" => Ok(SweepTable::Error),
            "leak" => Ok(SweepTable::Leak),
            other => Err(Error::Parse(format!("unknown sweep table `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepSpec {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub preset: Option<String>,
    pub table: SweepTable,
    pub axes: Vec<SweepAxis>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub output: Option<String>,
}

impl SweepSpec {
    /// Checks that a grid is defined and every axis resolves against `base`.
    pub fn validate(&self, base: &ConfigDocument) -> Result<()> {
        if self.preset.is_some() {
            return Ok(());
        }
        if self.axes.is_empty() {
            return Err(Error::InvalidArgument(
                "sweep needs at least one axis or a preset".into(),
            ));
        }
        for axis in &self.axes {
            let first = axis.values.first().ok_or_else(|| {
                Error::InvalidArgument(format!("axis `{}` has no values", axis.path))
            })?;
            base.clone().set_value(&axis.path, first.clone())?;
        }
        Ok(())
    }

    pub fn grid_len(&self) -> usize {
        self.axes.iter().map(|a| a.values.len()).product()
    }

    /// Document for grid point `index`; the first axis varies slowest.
    pub fn point(&self, base: &ConfigDocument, mut index: usize) -> Result<ConfigDocument> {
        let mut picks = vec![0; self.axes.len()];
        for (pick, axis) in picks.iter_mut().zip(&self.axes).rev() {
            *pick = index % axis.values.len();
            index /= axis.values.len();
        }
        let mut doc = base.clone();
        for (axis, &pick) in self.axes.iter().zip(&picks) {
            doc.set_value(&axis.path, axis.values[pick].clone())?;
        }
        Ok(doc)
    }
}

pub(crate) fn margin_row(cfg: &ChannelConfig) -> Vec<String> {
    let m = effective_onoff_ratio(cfg);
    vec![
        cfg.n_rows.to_string(),
        fmt_f64(cfg.r_line),
        fmt_f64(cfg.device.r_on),
        fmt_f64(cfg.device.r_off),
        fmt_f64(cfg.transistor.r_t),
        fmt_f64(m.k),
        fmt_f64(m.k_eff),
        fmt_f64(m.margin_fraction),
    ]
}

pub(crate) fn error_row(p: &ErrorModelParams) -> Vec<String> {
    vec![
        p.n_r.to_string(),
        fmt_f64(p.f),
        fmt_f64(p.t_pw),
        p.m_tol.to_string(),
        fmt_f64(perr_analytic(p)),
    ]
}

pub(crate) fn leak_row(cfg: &ChannelConfig, n_si: usize) -> Result<Vec<String>> {
    let rep = i_cc_leak(cfg, n_si)?;
    Ok(vec![
        cfg.n_rows.to_string(),
        fmt_f64(cfg.r_line),
        fmt_f64(cfg.device.r_off),
        n_si.to_string(),
        fmt_f64(cfg.transistor.i_leak_per_fet),
        fmt_f64(rep.i_cc_leak),
        fmt_f64(rep.i_off_single),
        fmt_f64(rep.ratio),
        fmt_f64(rep.i_cells),
        fmt_f64(rep.i_fet_leak),
    ])
}

fn table_row(kind: SweepTable, doc: &ConfigDocument) -> Result<Vec<String>> {
    let cfg = doc.channel_config();
    let sim = &doc.simulation;
    match kind {
        SweepTable::Margin => {
            ensure_valid(&cfg)?;
            Ok(margin_row(&cfg))
        }
        SweepTable::Error => Ok(error_row(&ErrorModelParams::new(
            cfg.n_rows, sim.f_hz, sim.t_pw, sim.m_tol,
        )?)),
        SweepTable::Leak => leak_row(&cfg, sim.n_si),
    }
}

pub fn table_header(kind: SweepTable) -> &'static [&'static str] {
    match kind {
        SweepTable::Margin => MARGIN_HEADER,
        SweepTable::Error => ERROR_HEADER,
        SweepTable::Leak => LEAK_HEADER,
    }
}

/// Evaluates the spec's grid on top of `base`. Points run in parallel on the
/// current rayon pool; rows come out in grid order.
pub fn run_sweep(spec: &SweepSpec, base: &ConfigDocument) -> Result<CsvTable> {
    if let Some(name) = &spec.preset {
        return Err(Error::InvalidArgument(format!(
            "sweep names preset `{name}`; run it as a preset"
        )));
    }
    spec.validate(base)?;
    let rows = (0..spec.grid_len())
        .into_par_iter()
        .map(|i| table_row(spec.table, &spec.point(base, i)?))
        .collect::<Result<Vec<_>>>()?;
    let mut table = CsvTable::new(table_header(spec.table));
    table.rows = rows;
    Ok(table)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn axis(path: &str, values: &[f64]) -> SweepAxis {
        SweepAxis {
            path: path.into(),
            values: values.iter().map(|&v| Value::from(v)).collect(),
        }
    }

    #[test]
    fn grid_order_is_row_major() {
        let spec = SweepSpec {
            axes: vec![
                axis("channel.n_rows", &[64.0, 128.0]),
                axis("channel.r_line", &[0.0, 1.0, 2.0]),
            ],
            ..SweepSpec::default()
        };
        let table = run_sweep(&spec, &ConfigDocument::default()).unwrap();
        assert_eq!(table.header, MARGIN_HEADER);
        let keys: Vec<(String, String)> = table
            .rows
            .iter()
            .map(|r| (r[0].clone(), r[1].clone()))
            .collect();
        assert_eq!(keys[0], ("64".into(), "0".into()));
        assert_eq!(keys[2], ("64".into(), "2".into()));
        assert_eq!(keys[3], ("128".into(), "0".into()));
        assert_eq!(keys.len(), 6);
    }

    #[test]
    fn error_and_leak_tables() {
        let mut spec = SweepSpec {
            table: SweepTable::Error,
            axes: vec![axis("simulation.m_tol", &[15.0, 20.0])],
            ..SweepSpec::default()
        };
        let mut base = ConfigDocument::default();
        base.set("channel.n_rows=4096").unwrap();
        let t = run_sweep(&spec, &base).unwrap();
        let p: Vec<f64> = t.rows.iter().map(|r| r[4].parse().unwrap()).collect();
        assert!(p[0] > 1e-10 && p[1] < 1e-10);

        spec.table = SweepTable::Leak;
        spec.axes = vec![axis("simulation.n_si", &[1.0, 4.0])];
        base.set("channel.n_rows=256").unwrap();
        let t = run_sweep(&spec, &base).unwrap();
        assert_eq!(t.header, LEAK_HEADER);
        assert_eq!(t.rows[0][7], "1");
    }

    #[test]
    fn bad_specs_rejected() {
        let base = ConfigDocument::default();
        assert!(run_sweep(&SweepSpec::default(), &base).is_err());
        let bogus = SweepSpec {
            axes: vec![axis("channel.nope", &[1.0])],
            ..SweepSpec::default()
        };
        assert!(matches!(
            run_sweep(&bogus, &base),
            Err(Error::UnknownParameter(_))
        ));
        let empty = SweepSpec {
            axes: vec![axis("channel.r_line", &[])],
            ..SweepSpec::default()
        };
        assert!(run_sweep(&empty, &base).is_err());
        let invalid = SweepSpec {
            axes: vec![axis("device.r_off", &[1.0])],
            ..SweepSpec::default()
        };
        assert!(matches!(
            run_sweep(&invalid, &base),
            Err(Error::InvalidConfig(_))
        ));
    }
}
