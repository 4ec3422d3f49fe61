//! Closed-form channel models and the coincidence error model.

mod coincidence;
mod margin;

pub use coincidence::{
    ln_poisson_upper_tail, min_tolerance_for_perr, perr_analytic, poisson_upper_tail,
    tolerance_from_ratio, ErrorModelParams,
};
pub use margin::{
    effective_onoff_ratio, i_sl_single_on, i_sl_two_active, margin_sweep, required_device_ratio,
    sensed_ratio, sensed_ratio_line_only, DeviceRequirement, MarginPoint, MarginReport,
};
