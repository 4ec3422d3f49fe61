//! Monte Carlo estimate of the coincidence error probability.
//!
//! The estimate is the fraction of simulated time during which at least
//! `m_tol` pulses are active, the same stationary quantity the analytic
//! model predicts. The run is split into independent batches, each seeded
//! from `(seed, batch index)` and each with a one-pulse-width warm-up so
//! its window starts in steady state. Batch boundaries depend only on the
//! parameters, so serial and parallel runs agree bit for bit.
//!
//! Occupancy samples taken one pulse width apart depend on disjoint arrival
//! windows and are independent Bernoulli draws. The time average is a mean
//! of such grids over all offsets, so its variance is bounded by the
//! binomial variance with `duration / t_pw` trials, which is what the
//! confidence interval uses.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{Beta, ContinuousCDF};

use crate::analytic::ErrorModelParams;
use crate::error::{Error, Result};
use crate::rng::sub_seed;

use super::trains::{concurrency_dwell_in, gen_poisson_trains};

const PULSES_PER_BATCH: f64 = (1 << 20) as f64;
const Z_95: f64 = 1.959_963_984_540_054;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub p_hat: f64,
    /// Half-width of the 95% interval.
    pub ci_halfwidth: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    /// Effective independent samples, `duration / t_pw`.
    pub n_trials: u64,
    pub seed: u64,
}

impl McEstimate {
    pub fn contains(&self, p: f64) -> bool {
        self.ci_low <= p && p <= self.ci_high
    }
}

/// 95% interval for a binomial proportion: normal approximation, or
/// Clopper-Pearson when fewer than 10 successes or failures are expected.
pub fn binomial_interval(p_hat: f64, n_trials: u64) -> (f64, f64) {
    let n = n_trials as f64;
    let x = p_hat * n;
    if x >= 10.0 && n - x >= 10.0 {
        let h = Z_95 * (p_hat * (1.0 - p_hat) / n).sqrt();
        return ((p_hat - h).max(0.0), (p_hat + h).min(1.0));
    }
    let low = if x <= 0.0 {
        0.0
    } else {
        Beta::new(x, n - x + 1.0).map_or(0.0, |b| b.inverse_cdf(0.025))
    };
    let high = if x >= n {
        1.0
    } else {
        Beta::new(x + 1.0, n - x).map_or(1.0, |b| b.inverse_cdf(0.975))
    };
    (low, high)
}

pub fn perr_monte_carlo(params: &ErrorModelParams, duration: f64, seed: u64) -> Result<McEstimate> {
    params.validate()?;
    if !(duration > 0.0) || !duration.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "duration must be positive, got {duration}"
        )));
    }
    let t_pw = params.t_pw;
    let n_trials = ((duration / t_pw).floor() as u64).max(1);
    if params.f == 0.0 {
        return Ok(McEstimate {
            p_hat: 0.0,
            ci_halfwidth: 0.0,
            ci_low: 0.0,
            ci_high: 0.0,
            n_trials,
            seed,
        });
    }

    let expected_pulses = params.n_r as f64 * params.f * duration;
    let batches = (expected_pulses / PULSES_PER_BATCH).ceil().max(1.0) as u64;
    let window = duration / batches as f64;
    let m = params.m_tol as usize;

    let per_batch: Vec<f64> = (0..batches)
        .into_par_iter()
        .map(|b| -> Result<f64> {
            let trains = gen_poisson_trains(
                params.n_r,
                params.f,
                t_pw,
                window + 2.0 * t_pw,
                sub_seed(seed, b),
            )?;
            let dwell = concurrency_dwell_in(&trains, t_pw, t_pw + window);
            Ok(dwell.iter().skip(m).sum())
        })
        .collect::<Result<_>>()?;

    let p_hat = (per_batch.iter().sum::<f64>() / duration).clamp(0.0, 1.0);
    let (ci_low, ci_high) = binomial_interval(p_hat, n_trials);
    Ok(McEstimate {
        p_hat,
        ci_halfwidth: 0.5 * (ci_high - ci_low),
        ci_low,
        ci_high,
        n_trials,
        seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic::perr_analytic;

    #[test]
    fn no_traffic() {
        let p = ErrorModelParams::new(128, 0.0, 1e-6, 3).unwrap();
        let est = perr_monte_carlo(&p, 1.0, 9).unwrap();
        assert_eq!((est.p_hat, est.ci_halfwidth), (0.0, 0.0));
    }

    #[test]
    fn busy_fraction_matches_empty_system_probability() {
        // m_tol = 1: the time with any pulse active is 1 - e^-λ.
        let p = ErrorModelParams::new(64, 200.0, 1e-4, 1).unwrap();
        let est = perr_monte_carlo(&p, 20.0, 4).unwrap();
        let want = 1.0 - (-p.lambda()).exp();
        assert!(est.contains(want), "{est:?} vs {want}");
        assert!((perr_analytic(&p) - want).abs() < 1e-15);
    }

    #[test]
    fn reproducible() {
        let p = ErrorModelParams::new(256, 300.0, 1e-5, 2).unwrap();
        assert_eq!(
            perr_monte_carlo(&p, 5.0, 77).unwrap(),
            perr_monte_carlo(&p, 5.0, 77).unwrap()
        );
    }

    #[test]
    fn small_counts_use_exact_interval() {
        let (lo, hi) = binomial_interval(0.0, 1000);
        assert_eq!(lo, 0.0);
        // Clopper-Pearson upper bound for 0/1000 is 1 - 0.025^(1/1000).
        assert!((hi - (1.0 - 0.025f64.powf(1e-3))).abs() < 1e-9);
        let (lo, hi) = binomial_interval(5e-3, 1000);
        assert!(lo > 0.0 && lo < 5e-3 && hi > 5e-3);
        let (lo, hi) = binomial_interval(0.5, 10_000);
        assert!((0.5 - lo - (hi - 0.5)).abs() < 1e-15);
    }
}
