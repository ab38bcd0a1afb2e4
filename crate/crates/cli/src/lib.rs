//! Scenario-driven front end: parses scenario documents, runs their tasks
//! against the `lipfree` library and renders certified reports.

pub mod report;
pub mod runner;
pub mod scenario;

pub use report::{summarize, Report, TaskReport};
pub use runner::{
    exit_code, run_path, run_scenario, Flags, EXIT_CAPACITY, EXIT_INVARIANT, EXIT_OK, EXIT_PARSE, EXIT_VALIDATION,
};
pub use scenario::{Literal, ParseError, Scenario, TaskSpec};
