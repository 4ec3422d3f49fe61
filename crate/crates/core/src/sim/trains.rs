//! Poisson spike trains and pulse concurrency.

use rand_distr::{Distribution, Exp};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::rng::stream_rng;
use crate::types::SpikeTrainSet;

/// Homogeneous Poisson arrivals of rate `f` on each of `n_inputs` lines.
///
/// Arrivals are drawn on `[0, duration - t_pw]` so every pulse ends inside
/// the window. Input `i` draws from stream `i` of `seed`, so trains are
/// reproducible and independent of thread count.
pub fn gen_poisson_trains(
    n_inputs: usize,
    f: f64,
    t_pw: f64,
    duration: f64,
    seed: u64,
) -> Result<SpikeTrainSet> {
    if !(f >= 0.0) || !f.is_finite() {
        return Err(Error::InvalidArgument(format!("rate must be finite and >= 0, got {f}")));
    }
    if !(duration > 0.0) || !(t_pw > 0.0) {
        return Err(Error::InvalidArgument(
            "duration and pulse width must be positive".into(),
        ));
    }
    let horizon = duration - t_pw;
    if f == 0.0 || horizon < 0.0 {
        return SpikeTrainSet::empty(n_inputs, t_pw, duration);
    }
    let gap = Exp::new(f).expect("positive rate");
    let pulses: Vec<Vec<f64>> = (0..n_inputs)
        .into_par_iter()
        .map(|input| {
            let mut rng = stream_rng(seed, input as u64);
            let mut starts = Vec::new();
            let mut t = 0.0;
            loop {
                t += gap.sample(&mut rng);
                if t > horizon {
                    break starts;
                }
                if starts.last().is_none_or(|&last| t > last) {
                    starts.push(t);
                }
            }
        })
        .collect();
    SpikeTrainSet::new(pulses, t_pw, duration)
}

/// Pulse boundaries in sweep order. At equal times ends precede starts, so
/// pulses that only touch never overlap.
pub(crate) fn boundary_events(trains: &SpikeTrainSet) -> Vec<(f64, i32, usize)> {
    let t_pw = trains.t_pw();
    let mut events: Vec<(f64, i32, usize)> = trains
        .pulses()
        .iter()
        .enumerate()
        .flat_map(|(input, starts)| {
            starts
                .iter()
                .flat_map(move |&s| [(s, 1, input), (s + t_pw, -1, input)])
        })
        .collect();
    events.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    events
}

/// Time spent at each concurrency level inside `[t0, t1]`.
pub fn concurrency_dwell_in(trains: &SpikeTrainSet, t0: f64, t1: f64) -> Vec<f64> {
    let mut dwell = vec![0.0];
    let mut level = 0usize;
    let mut t_prev = t0;
    for (t, delta, _) in boundary_events(trains) {
        let until = t.min(t1);
        if until > t_prev {
            dwell[level] += until - t_prev;
            t_prev = until;
        }
        if delta > 0 {
            level += 1;
            if dwell.len() <= level {
                dwell.resize(level + 1, 0.0);
            }
        } else {
            level -= 1;
        }
    }
    if t1 > t_prev {
        dwell[level] += t1 - t_prev;
    }
    dwell
}

/// Time spent at each concurrency level over the whole train duration; the
/// entries sum to the duration.
pub fn concurrency_dwell_histogram(trains: &SpikeTrainSet) -> Vec<f64> {
    concurrency_dwell_in(trains, 0.0, trains.duration())
}

/// Largest number of simultaneously active pulses.
pub fn max_concurrency(trains: &SpikeTrainSet) -> usize {
    let mut level = 0i64;
    let mut max = 0i64;
    for (_, delta, _) in boundary_events(trains) {
        level += i64::from(delta);
        max = max.max(level);
    }
    max as usize
}
