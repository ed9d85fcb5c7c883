//! Closed-form performance expressions.
//!
//! Outage probabilities are evaluated from the distance integral
//! `P = 1 − 3/(b³−a³) Σₙ (c^n/n!) ∫ₐᵇ r^{αn+2} e^{−c r^α} dr`, `c = m·M·σ²`,
//! reduced to lower incomplete gammas of order `n + 3/α`. Ergodic rates use
//! the double series in upper incomplete gammas of negative integer order.

mod ergodic;
mod outage;

pub use ergodic::{
    ergodic_far_noma, ergodic_near_noma, ergodic_oma, ergodic_rate, ergodic_series_partial_sums,
    spectrum_efficiency, ErgodicSeriesControl, SpectrumEfficiency,
};
pub use outage::{
    los_mixture_combine, no_fading_radius, outage, outage_asymptotic, outage_exact,
    outage_los_mixture, outage_no_fading, outage_threshold, printed_form_outage, OutageThreshold,
};

pub use crate::model::OutageInputs;

use thiserror::Error;

use crate::model::{ModelError, Scenario};
use crate::specfun::SpecFunError;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AnalyticError {
    #[error(transparent)]
    Invalid(#[from] ModelError),
    #[error("closed forms need an integer fading shape, got m = {0}")]
    NonIntegerFading(f64),
    #[error("{operation} is not defined for scenario {scenario}")]
    UnsupportedScenario {
        operation: &'static str,
        scenario: Scenario,
    },
    #[error("LoS mixture requested but the channel has no los_mix")]
    MissingLosMixture,
    #[error("ergodic series did not reach tolerance within {terms} terms (estimate {estimate}, error estimate {error_estimate})")]
    SeriesNotConverged {
        estimate: f64,
        error_estimate: f64,
        terms: usize,
    },
    #[error("invalid series control: {0}")]
    BadControl(String),
    #[error(transparent)]
    SpecFun(#[from] SpecFunError),
}

pub(crate) fn require_integer_m(m: f64) -> Result<u32, AnalyticError> {
    crate::model::integer_shape(m).ok_or(AnalyticError::NonIntegerFading(m))
}
