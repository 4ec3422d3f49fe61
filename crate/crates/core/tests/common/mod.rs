#![allow(dead_code)]

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use xbar_core::solver::ChannelInstance;
use xbar_core::{CellState, ChannelConfig, DeviceParams, LineModel, TransistorParams};

pub fn rel(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        ((a - b) / b).abs()
    }
}

/// Largest entry-wise difference over the largest magnitude.
pub fn rel_inf(a: &[f64], b: &[f64]) -> f64 {
    let scale = b.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let diff = a.iter().zip(b).fold(0.0f64, |m, (x, y)| m.max((x - y).abs()));
    if scale == 0.0 {
        diff
    } else {
        diff / scale
    }
}

/// Largest node-voltage difference as a fraction of the drive voltage.
pub fn volt_err(a: &[f64], b: &[f64], v_read: f64) -> f64 {
    a.iter().zip(b).fold(0.0f64, |m, (x, y)| m.max((x - y).abs())) / v_read
}

fn log_uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    (rng.random_range(lo.ln()..hi.ln())).exp()
}

/// Random electrical parameters spanning the regimes of interest.
pub fn random_config(rng: &mut ChaCha8Rng, n_rows: usize, leakage: bool) -> ChannelConfig {
    let r_on = log_uniform(rng, 1e3, 1e6);
    ChannelConfig {
        n_rows,
        r_line: log_uniform(rng, 1e-2, 20.0),
        v_read: rng.random_range(0.05..0.5),
        i_ref: 6e-6,
        line_model: if rng.random_bool(0.5) {
            LineModel::Distributed
        } else {
            LineModel::Lumped
        },
        device: DeviceParams {
            r_on,
            r_off: r_on * log_uniform(rng, 1.5, 1e4),
            sigma_log: 0.0,
        },
        transistor: TransistorParams {
            r_t: if rng.random_bool(0.2) { 0.0 } else { rng.random_range(0.0..5e3) },
            i_leak_per_fet: if leakage { log_uniform(rng, 1e-12, 1e-9) } else { 0.0 },
        },
    }
}

pub fn random_instance(rng: &mut ChaCha8Rng, n_rows: usize) -> ChannelInstance {
    let leakage = rng.random_bool(0.5);
    let cfg = random_config(rng, n_rows, leakage);
    let p_on = rng.random_range(0.0..0.5);
    let p_active = rng.random_range(0.0..1.0);
    let states = (0..n_rows)
        .map(|_| if rng.random_bool(p_on) { CellState::On } else { CellState::Off })
        .collect();
    let active = (0..n_rows).map(|_| rng.random_bool(p_active)).collect();
    ChannelInstance::new(cfg, states, active).unwrap()
}
