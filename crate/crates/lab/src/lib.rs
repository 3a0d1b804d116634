//! Experiment harness for the `gdnls` laboratory: TOML-configured named
//! experiments, run directories with manifests and CSV outputs, and
//! parameter sweeps.

pub mod config;
mod datum;
pub mod error;
pub mod experiments;
pub mod run;
pub mod sweep;
pub mod table;

pub use config::{Config, Datum, Tolerances};
pub use error::{LabError, LabResult};
pub use experiments::{formula_anchors, run as run_experiment, Command, Criterion, Outcome};
pub use run::{run_in, Manifest, RunReport, SCHEMA};
pub use sweep::{expand, run_sweep, SweepReport};
