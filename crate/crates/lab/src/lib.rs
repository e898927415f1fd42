//! Experiment harness for `bmap-core`: configuration, CSV reports,
//! estimators and the desk-scale experiments.

pub mod config;
pub mod experiments;
pub mod report;
pub mod stats;

pub use config::{ExperimentCfg, WeightSpec};
pub use report::Report;

#[derive(Debug, thiserror::Error)]
pub enum LabError {
    #[error(transparent)]
    Core(#[from] bmap_core::Error),
    #[error("config line {line}: {msg}")]
    Config { line: usize, msg: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error("wrong regime: {0}")]
    WrongRegime(String),
    #[error("grid needs at least two sizes for a slope")]
    GridTooSmall,
    #[error(transparent)]
    Threads(#[from] rayon::ThreadPoolBuildError),
}
