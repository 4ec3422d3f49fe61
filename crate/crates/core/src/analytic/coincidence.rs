//! Coincidence error probability under Poisson spike traffic.
//!
//! `N_r` independent Poisson inputs of rate `f`, each emitting rectangular
//! pulses of width `T_pw`, superpose into an M/G/∞ system: the number of
//! pulses active at a random instant is Poisson with mean
//! `λ = N_r·f·T_pw`. A false output occurs while that count reaches the
//! tolerance `m_tol`, so the error probability is the stationary
//! occupancy `P(N ≥ m_tol)`. This is a time fraction, not a per-pulse
//! probability.
//!
//! Tails are summed in the log domain so that values far below the `f64`
//! underflow of a naive term-by-term product stay representable.

use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorModelParams {
    pub n_r: usize,
    /// Spike rate of each input, Hz.
    pub f: f64,
    /// Pulse width, s.
    pub t_pw: f64,
    /// Simultaneous off-cell inputs that trip the comparator.
    pub m_tol: u64,
}

impl ErrorModelParams {
    pub fn new(n_r: usize, f: f64, t_pw: f64, m_tol: u64) -> Result<Self> {
        let p = Self { n_r, f, t_pw, m_tol };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_r == 0 || !(self.f >= 0.0) || !(self.t_pw > 0.0) || self.m_tol == 0 {
            return Err(Error::InvalidArgument(format!(
                "error model needs n_r >= 1, f >= 0, t_pw > 0, m_tol >= 1; got {self:?}"
            )));
        }
        Ok(())
    }

    /// Mean number of concurrently active pulses.
    pub fn lambda(&self) -> f64 {
        self.n_r as f64 * self.f * self.t_pw
    }
}

/// Tolerance count implied by a sensed on/off ratio, `⌈k'⌉`.
pub fn tolerance_from_ratio(k_eff: f64) -> u64 {
    k_eff.ceil().max(1.0) as u64
}

fn ln_pmf(lambda: f64, ln_lambda: f64, k: u64) -> f64 {
    let k = k as f64;
    -lambda + k * ln_lambda - ln_gamma(k + 1.0)
}

fn log_add(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    let (hi, lo) = if a > b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}

// Terms below e^-45 of the running sum are beneath f64 resolution.
const NEGLIGIBLE: f64 = 45.0;

/// `ln P(N ≥ m)` for `N ~ Poisson(lambda)`.
pub fn ln_poisson_upper_tail(lambda: f64, m: u64) -> f64 {
    if m == 0 {
        return 0.0;
    }
    if lambda <= 0.0 {
        return f64::NEG_INFINITY;
    }
    let ln_lambda = lambda.ln();
    if (m as f64) > lambda {
        // Terms decrease from k = m onward.
        let mut acc = f64::NEG_INFINITY;
        let mut k = m;
        loop {
            let t = ln_pmf(lambda, ln_lambda, k);
            acc = log_add(acc, t);
            if t < acc - NEGLIGIBLE {
                return acc;
            }
            k += 1;
        }
    }
    // Bulk of the mass lies above m: complement of the lower tail, whose
    // terms decrease from k = m - 1 downward.
    let mut lower = f64::NEG_INFINITY;
    let mut k = m - 1;
    loop {
        let t = ln_pmf(lambda, ln_lambda, k);
        lower = log_add(lower, t);
        if k == 0 || t < lower - NEGLIGIBLE {
            break;
        }
        k -= 1;
    }
    (-lower.exp()).ln_1p()
}

/// `P(N ≥ m)` for `N ~ Poisson(lambda)`.
pub fn poisson_upper_tail(lambda: f64, m: u64) -> f64 {
    ln_poisson_upper_tail(lambda, m).exp()
}

/// Stationary probability that at least `m_tol` pulses are active.
pub fn perr_analytic(p: &ErrorModelParams) -> f64 {
    poisson_upper_tail(p.lambda(), p.m_tol)
}

/// Smallest tolerance `m ≥ 1` whose error probability is below `p_target`.
pub fn min_tolerance_for_perr(n_r: usize, f: f64, t_pw: f64, p_target: f64) -> Result<u64> {
    if !(p_target > 0.0 && p_target < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "target probability must lie in (0, 1), got {p_target}"
        )));
    }
    let params = ErrorModelParams::new(n_r, f, t_pw, 1)?;
    let lambda = params.lambda();
    let ln_target = p_target.ln();
    let below = |m: u64| ln_poisson_upper_tail(lambda, m) < ln_target;

    // The tail is non-increasing in m: bracket, then bisect.
    let mut hi = 1u64;
    while !below(hi) {
        hi = hi.saturating_mul(2);
    }
    let mut lo = hi / 2;
    if lo == 0 {
        return Ok(1);
    }
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if below(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use statrs::distribution::{DiscreteCDF, Poisson};

    /// Plain forward summation of the pmf recurrence; valid while nothing
    /// underflows.
    fn direct_tail(lambda: f64, m: u64) -> f64 {
        let mut term = (-lambda).exp();
        let mut lower = 0.0;
        for k in 0..m {
            lower += term;
            term *= lambda / (k + 1) as f64;
        }
        let mut upper = 0.0;
        let mut k = m;
        while term > 1e-300 && (term > upper * 1e-18 || (k as f64) < lambda) {
            upper += term;
            k += 1;
            term *= lambda / k as f64;
        }
        if lower < 0.5 { 1.0 - lower } else { upper }
    }

    #[test]
    fn no_traffic_no_errors() {
        let p = ErrorModelParams::new(4096, 0.0, 1e-6, 20).unwrap();
        assert_eq!(perr_analytic(&p), 0.0);
        assert_eq!(min_tolerance_for_perr(4096, 0.0, 1e-6, 1e-10).unwrap(), 1);
    }

    #[test]
    fn microsecond_pulses_on_4k_rows() {
        let p = ErrorModelParams::new(4096, 732.0, 1e-6, 20).unwrap();
        assert!((p.lambda() - 2.998272).abs() < 1e-12);
        // Frozen from an independent evaluation: scipy.stats.poisson.sf(19, 2.998272).
        let frozen = 8.232601725231739e-11;
        assert!(((perr_analytic(&p) - frozen) / frozen).abs() < 1e-9);
        assert!(perr_analytic(&p) < 1e-10);
        assert_eq!(min_tolerance_for_perr(4096, 732.0, 1e-6, 1e-10).unwrap(), 20);
    }

    #[test]
    fn nanosecond_pulses_need_less_tolerance() {
        let m = min_tolerance_for_perr(4096, 732.0, 10e-9, 1e-10).unwrap();
        assert!(m <= 10, "m = {m}");
    }

    #[test]
    fn deep_tail_is_representable() {
        // Frozen from scipy.stats.poisson.sf(9, 4096 * 732 * 1e-8).
        let got = poisson_upper_tail(4096.0 * 732.0 * 1e-8, 10);
        let frozen = 1.5743853173428627e-22;
        assert!(((got - frozen) / frozen).abs() < 1e-9);
        let tiny = poisson_upper_tail(1e-3, 12);
        assert!(tiny > 0.0 && tiny < 1e-30);
    }

    #[test]
    fn matches_regularized_gamma_route() {
        for &lambda in &[0.01, 0.4, 2.998272, 17.0, 250.0] {
            let pois = Poisson::new(lambda).unwrap();
            for m in [1u64, 2, 5, 10, 20, 40, 300] {
                let want = pois.sf(m - 1);
                if want < 1e-280 {
                    continue;
                }
                let got = poisson_upper_tail(lambda, m);
                assert!(
                    ((got - want) / want).abs() < 1e-8,
                    "lambda {lambda} m {m}: {got} vs {want}"
                );
            }
        }
    }

    #[test]
    fn matches_direct_summation() {
        for &lambda in &[0.05, 1.0, 6.5, 40.0] {
            for m in 1..60u64 {
                let want = direct_tail(lambda, m);
                if want < 1e-200 {
                    continue;
                }
                let got = poisson_upper_tail(lambda, m);
                assert!(((got - want) / want).abs() < 1e-10, "{lambda} {m} {got} {want}");
            }
        }
    }

    #[test]
    fn invalid_targets_rejected() {
        assert!(min_tolerance_for_perr(16, 1.0, 1e-6, 0.0).is_err());
        assert!(min_tolerance_for_perr(16, 1.0, 1e-6, 1.0).is_err());
        assert!(ErrorModelParams::new(0, 1.0, 1e-6, 1).is_err());
        assert!(ErrorModelParams::new(4, 1.0, 0.0, 1).is_err());
    }

    #[test]
    fn tolerance_is_ceiling_of_ratio() {
        assert_eq!(tolerance_from_ratio(14.324), 15);
        assert_eq!(tolerance_from_ratio(20.0), 20);
        assert_eq!(tolerance_from_ratio(1.0001), 2);
    }

    proptest! {
        #[test]
        fn tail_is_monotone(
            n_r in 1usize..8192, f in 0.0f64..5e3, t_pw in 1e-9f64..1e-5, m in 1u64..60,
            scale in 1.0f64..4.0,
        ) {
            let base = ErrorModelParams::new(n_r, f, t_pw, m).unwrap();
            let p = perr_analytic(&base);
            prop_assert!((0.0..=1.0).contains(&p));
            let mut next = base;
            next.m_tol = m + 1;
            prop_assert!(perr_analytic(&next) <= p);
            let mut more = base;
            more.f *= scale;
            prop_assert!(perr_analytic(&more) >= p);
            let mut wider = base;
            wider.t_pw *= scale;
            prop_assert!(perr_analytic(&wider) >= p);
            let mut bigger = base;
            bigger.n_r = (n_r as f64 * scale) as usize;
            prop_assert!(perr_analytic(&bigger) >= p);
        }

        #[test]
        fn min_tolerance_is_smallest(
            n_r in 1usize..8192, f in 0.0f64..5e3, t_pw in 1e-9f64..1e-5, exp in 1.0f64..25.0,
        ) {
            let target = 10f64.powf(-exp);
            let m = min_tolerance_for_perr(n_r, f, t_pw, target).unwrap();
            let at = |m| perr_analytic(&ErrorModelParams::new(n_r, f, t_pw, m).unwrap());
            prop_assert!(at(m) < target);
            if m > 1 {
                prop_assert!(at(m - 1) >= target);
            }
        }
    }
}
