use serde::{Deserialize, Serialize};

use crate::analytic::{
    effective_onoff_ratio, min_tolerance_for_perr, perr_analytic, required_device_ratio,
    ErrorModelParams,
};
use crate::error::{Error, Result};
use crate::types::{ChannelConfig, DeviceParams, TransistorParams};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DesignRuleQuery {
    pub n_rows: usize,
    pub t_pw: f64,
    pub f_hz: f64,
    pub p_target: f64,
    pub r_on: f64,
    pub r_line: f64,
    pub r_t: f64,
    /// Largest device ratio the technology offers, if bounded.
    pub k_max: Option<f64>,
}

impl Default for DesignRuleQuery {
    fn default() -> Self {
        Self {
            n_rows: 1024,
            t_pw: 1e-6,
            f_hz: 732.0,
            p_target: 1e-10,
            r_on: 10e3,
            r_line: 2.5,
            r_t: 1.7e3,
            k_max: None,
        }
    }
}

/// Each link of the chain from traffic to minimum HRS resistance.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DesignReport {
    pub query: DesignRuleQuery,
    pub lambda: f64,
    pub m_tol: u64,
    pub p_err_at_m_tol: f64,
    pub p_err_at_m_tol_minus_1: Option<f64>,
    /// `R_T + n·r` seen in series with every branch.
    pub series_parasitic: f64,
    pub k_eff_target: f64,
    pub k: f64,
    pub r_off_min: f64,
    pub margin_fraction: f64,
    pub note: String,
}

/// Traffic → tolerance → sensed ratio → device ratio → `R_off`.
///
/// The sensed ratio target is `m_tol` itself, the largest `k'` with
/// `⌈k'⌉ = m_tol`. For `m_tol = 1` any ratio above one suffices and the
/// target sits one ulp above 1.
pub fn design_rules(q: &DesignRuleQuery) -> Result<DesignReport> {
    if !(q.r_on > 0.0) || !(q.r_line >= 0.0) || !(q.r_t >= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "design query needs r_on > 0, r_line >= 0, r_t >= 0; got {q:?}"
        )));
    }
    let m_tol = min_tolerance_for_perr(q.n_rows, q.f_hz, q.t_pw, q.p_target)?;
    let params = ErrorModelParams::new(q.n_rows, q.f_hz, q.t_pw, m_tol)?;
    let k_eff_target = if m_tol == 1 {
        1.0 + f64::EPSILON
    } else {
        m_tol as f64
    };
    let mut cfg = ChannelConfig {
        n_rows: q.n_rows,
        r_line: q.r_line,
        device: DeviceParams {
            r_on: q.r_on,
            r_off: 2.0 * q.r_on,
            sigma_log: 0.0,
        },
        transistor: TransistorParams {
            r_t: q.r_t,
            ..TransistorParams::default()
        },
        ..ChannelConfig::default()
    };
    let req = required_device_ratio(k_eff_target, &cfg)?;
    if !req.k.is_finite() || !req.r_off_min.is_finite() {
        return Err(Error::Infeasible(format!(
            "sensed ratio {k_eff_target} needs an unbounded device ratio"
        )));
    }
    if let Some(k_max) = q.k_max {
        if req.k > k_max {
            return Err(Error::Infeasible(format!(
                "sensed ratio {k_eff_target} (m_tol = {m_tol}) needs k = {:.4} > k_max = {k_max} at r_on = {}",
                req.k, q.r_on
            )));
        }
    }
    cfg.device.r_off = req.r_off_min;
    let margin_fraction = effective_onoff_ratio(&cfg).margin_fraction;
    let note = format!(
        "R_off >= {:.4e} ohm keeps {:.1}% of the device window after {:.4e} ohm of series parasitics; \
         larger R_off adds margin but lowers read current and raises leakage sensitivity",
        req.r_off_min,
        100.0 * margin_fraction,
        cfg.series_parasitic()
    );
    Ok(DesignReport {
        query: *q,
        lambda: params.lambda(),
        m_tol,
        p_err_at_m_tol: perr_analytic(&params),
        p_err_at_m_tol_minus_1: (m_tol > 1).then(|| {
            perr_analytic(&ErrorModelParams { m_tol: m_tol - 1, ..params })
        }),
        series_parasitic: cfg.series_parasitic(),
        k_eff_target,
        k: req.k,
        r_off_min: req.r_off_min,
        margin_fraction,
        note,
    })
}
