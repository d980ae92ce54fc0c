//! Manifest-driven front end for `seqwarp-core`.
//!
//! A manifest declares charts, one construction, named vector fields and a
//! list of runs. [`run_manifest`] executes the runs in declaration order and
//! writes `report.json` plus trajectory CSVs.

pub mod error;
pub mod manifest;
pub mod model;
pub mod run;

pub use error::CliError;
pub use manifest::{parse_manifest, Manifest, RunSpec};
pub use model::{build, Model};
pub use run::{load, run_manifest, Outcome, Report, RunOptions, RunReport};

/// Exit code for manifest, parse and domain errors.
pub const EXIT_INPUT: i32 = 2;
