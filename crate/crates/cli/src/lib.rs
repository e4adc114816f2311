//! Command-line layer: scenario files in, report bundles out.
//!
//! Exit codes: 0 success, 2 input error (parse/validation), 3 runtime
//! failure.

pub mod report;
pub mod scenario;

use thiserror::Error;

pub use report::{
    compare, compute_bundle, emit_figure_data, run_scenario, summary_lines, write_bundle,
    write_compare_csv, CompareRow, CompareTable, ReportBundle,
};
pub use scenario::{load_scenario, Overrides, ResolvedScenario, Scenario};

#[derive(Debug, Error)]
pub enum CliError {
    /// Bad scenario input: parse or validation failure (exit 2).
    #[error("{file}: {message}")]
    Input { file: String, message: String },
    /// Failure while computing or writing a run (exit 3).
    #[error("{0}")]
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input { .. } => 2,
            CliError::Runtime(_) => 3,
        }
    }
}
