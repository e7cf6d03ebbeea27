//! Pricing and benchmark driver behind the `jdoi` binary.

pub mod commands;
pub mod config;
pub mod report;

pub use commands::{histogram, price, scaling, summarize, table2, Axis, Summary};
pub use config::{OutputConfig, Overrides, RunConfig};
pub use report::{Cell, Report};

#[derive(Debug, thiserror::Error)]
pub enum BenchError {
    #[error("config error: {0}")]
    Config(String),
    #[error("numerical failure: {0}")]
    Numerical(#[from] jdoi_core::Error),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl BenchError {
    /// Process exit code: 1 for configuration and I/O problems, 2 for numerical failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            BenchError::Numerical(_) => 2,
            _ => 1,
        }
    }
}
