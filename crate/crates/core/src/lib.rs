//! Performance evaluation for a NOMA downlink served by a single UAV, with
//! receivers scattered in 3-D: a near user in a ball around the UAV and a far
//! user in the surrounding shell, under bounded path loss and Nakagami-m
//! fading.
//!
//! * [`model`] – parameters, thresholds and feasibility.
//! * [`specfun`] – incomplete gamma and exponential-integral kernel.
//! * [`analytic`] – closed-form outage, ergodic rate and spectrum efficiency.
//! * [`montecarlo`] – the independent simulation oracle.
//! * [`metrics`] – diversity order, high-SNR slope and summary tables.

pub mod analytic;
pub mod metrics;
pub mod model;
pub mod montecarlo;
pub mod specfun;

pub use model::{
    ChannelConfig, GeometryConfig, LinkBudget, MetricEstimate, Method, OutageInputs, RateTargets,
    Scenario,
};
