//! Special functions used by the closed forms: incomplete gamma functions
//! (including non-positive integer order), exponential integrals, and an
//! adaptive quadrature used to check them.

mod expint;
mod gamma;
pub mod quadrature;

pub use expint::{exp_integral_e1, scaled_exp_integral_en, scaled_exp_integral_table};
pub use gamma::{
    gamma, ln_gamma, ln_lower_inc_gamma, ln_upper_inc_gamma_scaled, lower_inc_gamma,
    regularized_lower_gamma, regularized_upper_gamma, upper_inc_gamma, upper_inc_gamma_scaled,
};
pub use quadrature::{quadrature_oracle, QuadratureError};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SpecFunError {
    #[error("{function}: argument outside domain ({detail})")]
    Domain {
        function: &'static str,
        detail: String,
    },
    #[error("{function}: no convergence after {iterations} iterations")]
    NoConvergence {
        function: &'static str,
        iterations: usize,
    },
    #[error("{function}: result not representable as f64 (ln = {ln_value})")]
    Overflow { function: &'static str, ln_value: f64 },
}

pub(crate) const EPS: f64 = 1e-16;
pub(crate) const FPMIN: f64 = 1e-300;
pub(crate) const MAX_ITER: usize = 100_000;
pub(crate) const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;
