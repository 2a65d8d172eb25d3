//! Replicated synthetic benchmarks for `truncreg` and the `truncreg` command
//! line tool.

pub mod cli;
pub mod scenario;
pub mod tables;

pub use scenario::{
    append_rows, csv_record, run_replications, run_scenario, summarize_ci, MeanCi, Replication,
    ScenarioConfig, ScenarioRun, ScenarioSummary, CSV_HEADER,
};
pub use tables::Suite;

#[derive(Debug, thiserror::Error)]
pub enum BenchError {
    #[error(transparent)]
    Core(#[from] truncreg::Error),
    #[error("{0}")]
    Input(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("replication failed: {0}")]
    Replication(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, BenchError>;
