//! Experiment plumbing: scenario files, seeded batteries, QGA-vs-QIGA-2
//! summaries, and CSV / SVG / JSON emission. Everything here works in `f64`.

mod batch;
mod compare;
mod emit;
mod scenario_file;

use std::path::PathBuf;

use thiserror::Error;

use crate::engine::{Algorithm, EngineError};

pub use batch::{parse_seeds, run_experiment, Execution};
pub use compare::{
    aggregate, compare, scenario_digest, AlgorithmAggregate, AlgorithmRuns, ColumnComparison,
    ColumnStats, ComparisonSummary, RunSummary, Winner,
};
pub use emit::{
    emit_csv, emit_report, emit_svg, render_csv, render_report, render_svg, Report, CSV_HEADER,
    REPORT_SCHEMA,
};
pub use scenario_file::{
    load_scenario, read_scenario_file, save_scenario, EngineSection, Placement, ScenarioFile,
    SCENARIO_SCHEMA,
};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("{}: file not found", path.display())]
    NotFound { path: PathBuf },
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{}: not valid JSON: {message}", path.display())]
    Parse { path: PathBuf, message: String },
    #[error("{}: schema violation: {message}", path.display())]
    Schema { path: PathBuf, message: String },
    #[error("invalid scenario: {0}")]
    Semantic(String),
    #[error("{algorithm} run with seed {seed} failed: {source}")]
    Run {
        algorithm: Algorithm,
        seed: u64,
        #[source]
        source: EngineError,
    },
    #[error("invalid experiment: {0}")]
    Experiment(String),
}

impl HarnessError {
    /// Process exit code for the CLI, one per error class.
    pub fn exit_code(&self) -> u8 {
        match self {
            HarnessError::NotFound { .. } => 3,
            HarnessError::Parse { .. } => 4,
            HarnessError::Schema { .. } => 5,
            HarnessError::Semantic(_) => 6,
            HarnessError::Run { .. } => 7,
            HarnessError::Io { .. } => 8,
            HarnessError::Experiment(_) => 9,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        HarnessError::Io {
            path: path.into(),
            source,
        }
    }
}
