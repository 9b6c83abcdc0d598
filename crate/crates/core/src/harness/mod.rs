//! Scenarios, generators, trial runs and the demonstration experiments.

pub mod baseline;
pub mod demos;
pub mod generate;
pub mod history;
pub mod runner;
pub mod scenario;

use thiserror::Error;

use crate::error::{EngineError, GraphError};

pub use baseline::deterministic_baseline;
pub use generate::{generate_scenario, ScenarioKind};
pub use history::{history_independence_demo, HistoryReport};
pub use runner::{run_scenario, ChangeRecord, RunConfig, RunOutput, Schedule, TrialStats};
pub use scenario::{InitialGraph, MutedSpec, Scenario, Step};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("line {line}: {msg}")]
    Malformed { line: usize, msg: String },
    #[error("i/o: {0}")]
    Io(String),
    #[error("step {step}: {source}")]
    Invalid { step: usize, source: GraphError },
    #[error("bad parameters: {0}")]
    Params(String),
    #[error("trial {trial}, change {change_idx}: {source}")]
    Engine { trial: u64, change_idx: usize, source: EngineError },
    #[error("csv: {0}")]
    Csv(String),
    #[error("construction {sequence} does not build the target graph")]
    WrongTarget { sequence: usize },
    #[error("{count} constructions ended in a different MIS")]
    HistoryMismatch { count: usize },
}

impl HarnessError {
    /// Process exit code: 1 for a protocol failure, 2 for bad input.
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Engine { source, .. } => match source {
                EngineError::Graph(_) => 2,
                _ => 1,
            },
            HarnessError::HistoryMismatch { .. } => 1,
            _ => 2,
        }
    }
}

impl From<csv::Error> for HarnessError {
    fn from(e: csv::Error) -> Self {
        HarnessError::Csv(e.to_string())
    }
}

impl From<std::io::Error> for HarnessError {
    fn from(e: std::io::Error) -> Self {
        HarnessError::Io(e.to_string())
    }
}
