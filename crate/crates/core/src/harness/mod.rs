//! Configuration, sweeps, fits, CSV output and the verification suites behind
//! the `bdlab` binary.

pub mod config;
pub mod csv;
pub mod fit;
pub mod report;
pub mod suites;
pub mod sweep;
pub mod verify;

pub use config::{ModelKind, SweepConfig};
pub use report::{Check, Report};
