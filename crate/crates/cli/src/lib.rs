//! Scenario files, the built-in catalog, and deterministic reports for the
//! `e1dirac` command.

pub mod catalog;
pub mod run;
pub mod scenario;

pub use catalog::{catalog, lookup, CATALOG};
pub use run::{error_code, run, ActionReport, ErrorInfo, Report, Status};
pub use scenario::{parse_scenario, Action, ErrorKind, Expectation, Overrides, Scenario, ScenarioError};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
