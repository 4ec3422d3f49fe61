//! Fixed data grids behind the standard figures.
//!
//! All presets start from the reference chip: r = 2.5 Ω per segment,
//! R_T = 1.7 kΩ, V_read = 0.2 V, I_ref = 6 µA and FET leakage of 10 nA per
//! 256 FETs. None of them draw random numbers; the seed is recorded in the
//! sidecar only.

use rayon::prelude::*;
use serde_json::{json, Value};

use crate::analytic::ErrorModelParams;
use crate::config::ConfigDocument;
use crate::error::{Error, Result};
use crate::io::{trace_table, CsvTable, ERROR_HEADER, LEAK_HEADER, MARGIN_HEADER};
use crate::sim::{emulate, RouteMode};
use crate::solver::calibrate_fet_leak;
use crate::types::{ChannelConfig, SpikeTrainSet, SwitchMatrix};

use super::{error_row, leak_row, margin_row};

pub const PRESET_NAMES: &[&str] = &["fig6", "fig8", "fig10", "fig11", "demo_fig2", "error_fig3"];

/// Tables keyed by file stem, the full parameter set, and for emulation
/// presets a routing summary.
#[derive(Debug, Clone, PartialEq)]
pub struct PresetOutput {
    pub name: String,
    pub tables: Vec<(String, CsvTable)>,
    pub params: Value,
    pub summary: Option<Value>,
}

fn chip() -> ChannelConfig {
    let mut cfg = ChannelConfig::default();
    cfg.transistor.i_leak_per_fet = calibrate_fet_leak(10e-9, 256, cfg.v_read)
        .expect("valid calibration")
        .i_leak_per_fet;
    cfg
}

fn table(header: &[&str], rows: Vec<Vec<String>>) -> CsvTable {
    let mut t = CsvTable::new(header);
    t.rows = rows;
    t
}

pub fn run_preset(name: &str, seed: u64) -> Result<PresetOutput> {
    let base = chip();
    let (tables, grid, summary) = match name {
        "fig6" => fig6(),
        "fig8" => fig8(&base),
        "fig10" => leak_grid(&base, &[256], &[0.0, 0.1, 1.0, 2.5, 10.0])?,
        "fig11" => leak_grid(&base, &[256, 1024], &[0.1, 2.5])?,
        "demo_fig2" => demo_fig2(&base)?,
        "error_fig3" => error_fig3(&base)?,
        other => return Err(Error::UnknownPreset(other.to_string())),
    };
    let params = json!({
        "preset": name,
        "seed": seed,
        "base": serde_json::to_value(ConfigDocument::from_channel(&base))?,
        "grid": grid,
    });
    Ok(PresetOutput {
        name: name.to_string(),
        tables,
        params,
        summary,
    })
}

type Parts = (Vec<(String, CsvTable)>, Value, Option<Value>);

fn fig6() -> Parts {
    let n_r = [256usize, 1024, 4096];
    let f = [100.0, 200.0, 500.0, 732.0, 1000.0];
    let t_pw = [1e-8, 1e-7, 1e-6];
    let m_tol: Vec<u64> = (1..=30).collect();
    let mut rows = Vec::new();
    for &n in &n_r {
        for &fi in &f {
            for &t in &t_pw {
                for &m in &m_tol {
                    let p = ErrorModelParams { n_r: n, f: fi, t_pw: t, m_tol: m };
                    rows.push(error_row(&p));
                }
            }
        }
    }
    let grid = json!({ "n_r": n_r, "f_hz": f, "t_pw_s": t_pw, "m_tol": m_tol });
    (vec![("fig6".into(), table(ERROR_HEADER, rows))], grid, None)
}

fn fig8(base: &ChannelConfig) -> Parts {
    let n_rows = [64usize, 128, 256, 512, 1024, 2048, 4096];
    let r_line = [0.1, 1.0, 2.5, 10.0];
    let r_on = [10e3, 100e3];
    let k = [10.0, 100.0];
    let mut rows = Vec::new();
    for &ron in &r_on {
        for &ki in &k {
            for &r in &r_line {
                for &n in &n_rows {
                    let mut cfg = base.with_rows(n).with_r_line(r);
                    cfg.device.r_on = ron;
                    cfg.device.r_off = ki * ron;
                    rows.push(margin_row(&cfg));
                }
            }
        }
    }
    let grid = json!({ "r_on": r_on, "k": k, "r_line": r_line, "n_rows": n_rows });
    (vec![("fig8".into(), table(MARGIN_HEADER, rows))], grid, None)
}

/// Accumulated off current over `n_r × r × leak × R_off × N_SI`, with and
/// without the calibrated FET leakage.
fn leak_grid(base: &ChannelConfig, n_r: &[usize], r_line: &[f64]) -> Result<Parts> {
    let r_off = [1e5, 1e6, 1e7, 1e8, 1e9];
    let n_si = [1usize, 2, 4, 8, 10, 16, 32];
    let leak = [0.0, base.transistor.i_leak_per_fet];
    let mut points = Vec::new();
    for &n in n_r {
        for &r in r_line {
            for &l in &leak {
                for &roff in &r_off {
                    for &s in &n_si {
                        let mut cfg = base.with_rows(n).with_r_line(r);
                        cfg.transistor.i_leak_per_fet = l;
                        cfg.device.r_off = roff;
                        points.push((cfg, s));
                    }
                }
            }
        }
    }
    let rows = points
        .par_iter()
        .map(|(cfg, s)| leak_row(cfg, *s))
        .collect::<Result<Vec<_>>>()?;
    let stem = if n_r.len() == 1 { "fig10" } else { "fig11" };
    let grid = json!({
        "n_r": n_r,
        "r_line": r_line,
        "i_leak_per_fet_a": leak,
        "r_off": r_off,
        "n_si": n_si,
        "placement": "even",
    });
    Ok((vec![(stem.into(), table(LEAK_HEADER, rows))], grid, None))
}

const CHIP_WL: usize = 32;
const CHIP_CH: usize = 128;
const DEMO_WL: usize = 10;
const DEMO_T_PW: f64 = 1e-6;

/// One LRS cell per word line at channel `4·wl + 1`, plus two extra
/// receivers for the multicast word line.
pub fn demo_matrix() -> SwitchMatrix {
    let mut m = SwitchMatrix::new(CHIP_WL, CHIP_CH).expect("non-empty");
    for wl in 0..CHIP_WL {
        m.set(wl, 4 * wl + 1, true);
    }
    m.set(DEMO_WL, 70, true);
    m.set(DEMO_WL, 99, true);
    m
}

fn routing_summary(trace: &crate::sim::RoutingTrace) -> Value {
    json!({
        "channels_fired": trace.fired_channels(),
        "false_output": trace.false_output,
        "missed_output": trace.missed_output,
        "error_classes": trace.error_classes(),
        "passed": trace.is_passed(),
    })
}

fn emulation(
    name: &str,
    cfg: &ChannelConfig,
    matrix: &SwitchMatrix,
    active: &[usize],
) -> Result<Parts> {
    let mut pulses = vec![Vec::new(); matrix.n_wl()];
    for &wl in active {
        pulses[wl].push(0.0);
    }
    let trains = SpikeTrainSet::new(pulses, DEMO_T_PW, 2.0 * DEMO_T_PW)?;
    let trace = emulate(matrix, &trains, cfg, RouteMode::Solver)?;
    let mut matrix_csv = Vec::new();
    crate::io::write_matrix_csv(matrix, &mut matrix_csv)?;
    let grid = json!({
        "n_wl": matrix.n_wl(),
        "n_ch": matrix.n_ch(),
        "active_wl": active,
        "t_pw_s": DEMO_T_PW,
        "mode": RouteMode::Solver,
        "matrix_csv": String::from_utf8(matrix_csv).expect("utf-8"),
    });
    Ok((
        vec![(name.into(), trace_table(&trace))],
        grid,
        Some(routing_summary(&trace)),
    ))
}

fn chip_channel(base: &ChannelConfig) -> ChannelConfig {
    let mut cfg = base.with_rows(CHIP_WL);
    cfg.device.r_off = 250e3;
    cfg
}

fn demo_fig2(base: &ChannelConfig) -> Result<Parts> {
    emulation("demo_fig2", &chip_channel(base), &demo_matrix(), &[DEMO_WL])
}

/// Nine coincident pulses on a router whose cells are all HRS.
fn error_fig3(base: &ChannelConfig) -> Result<Parts> {
    let matrix = SwitchMatrix::new(CHIP_WL, CHIP_CH)?;
    let active: Vec<usize> = (0..9).collect();
    emulation("error_fig3", &chip_channel(base), &matrix, &active)
}
