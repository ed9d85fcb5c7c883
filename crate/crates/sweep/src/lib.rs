//! Configuration-driven parameter sweeps over the `u2x-core` evaluators.
//!
//! A sweep is a JSON file naming one swept parameter, its grid, the receiver
//! roles, metrics and evaluation methods, and optionally several labelled
//! runs that override base parameters. Each run becomes one CSV file.

pub mod config;
pub mod sweep;

pub use config::{Axis, Config, ConfigError, Overrides, Params, Plan, Run, SweepMetric};
pub use sweep::{evaluate_point, execute, run_cells, write_csv, Cell, Subject, Summary, SweepError};
