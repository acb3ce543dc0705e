//! Convergence sweeps over the manufactured problems, scheme comparisons,
//! delimited-table output and dense-oracle self checks.

mod config;
mod custom;
mod report;
mod runner;
mod verify;

pub use config::{
    coupled_n, ErrorMode, ExperimentConfig, OutputSection, ParamGrid, Rounding, SchemeChoice,
    SolverSection, Sweep,
};
pub use custom::{CustomProblem, CustomWeighting};
pub use report::{
    write_outputs, write_w2_curve, OutputFiles, COMPARISON_HEADER, DETAIL_HEADER, TABLE_HEADER,
};
pub use runner::{
    compare_schemes, run_experiment, ComparisonRow, ExperimentReport, RunRecord, RunnerOptions,
};
pub use verify::{dense_reference_solution, verify, CheckResult};

/// Failures of a whole experiment, each mapped to a process exit code.
#[derive(Debug, thiserror::Error)]
pub enum ExperimentError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("run {row} failed: {source}")]
    Solver {
        row: String,
        #[source]
        source: crate::Error,
    },
    #[error("i/o error: {0}")]
    Io(String),
}

impl ExperimentError {
    /// 2 for configuration errors, 3 for solver failures, 1 for I/O.
    pub fn exit_code(&self) -> i32 {
        match self {
            ExperimentError::Config(_) => 2,
            ExperimentError::Solver { .. } => 3,
            ExperimentError::Io(_) => 1,
        }
    }
}
