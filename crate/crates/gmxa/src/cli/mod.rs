//! Config-driven experiment harness: sweeps, fits and reports.

mod config;
mod fit;
pub mod pipelines;
mod report;
mod run;

pub use config::{option_keys, ExperimentConfig, Kind, Options, RawConfig, Reader};
pub use fit::{fit_scaling, least_squares, Fit, FitModel};
pub use pipelines::{maxavg_quotient, nikodym_weak_quotient, run_point, PointOutput};
pub use report::{emit_report, PointRecord, ScalingReport};
pub use run::{exit_code, run_experiment, RunOptions, RunOutcome};
