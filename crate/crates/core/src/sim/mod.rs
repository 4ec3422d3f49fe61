//! Spike traffic, coincidence statistics and router emulation.

mod montecarlo;
mod router;
mod trains;

pub use montecarlo::{binomial_interval, perr_monte_carlo, McEstimate};
pub use router::{
    emulate, emulate_with, route_event, ChannelOutput, ErrorClass, RouteMode, Router,
    RoutingTrace, TraceEvent,
};
pub use trains::{
    concurrency_dwell_histogram, concurrency_dwell_in, gen_poisson_trains, max_concurrency,
};
