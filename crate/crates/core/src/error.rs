use std::path::PathBuf;

use thiserror::Error;

/// Everything that can go wrong inside the workbench.
#[derive(Debug, Error)]
pub enum Error {
    #[error("resource limit: {0}")]
    Resource(String),
    #[error("simulation mode: {0}")]
    Mode(String),
    #[error("qubit index {index} out of bounds for {num_qubits} qubits")]
    Bounds { index: usize, num_qubits: usize },
    #[error("invalid gate: {0}")]
    InvalidGate(String),
    #[error("invalid state: {0}")]
    InvalidState(String),
    #[error("circuit constraint violated: {0}")]
    Constraint(String),
    #[error("binding: {0}")]
    Binding(String),
    #[error("ingestion error in {path} at row {row}, column {column}: {message}")]
    Ingestion {
        path: PathBuf,
        row: usize,
        column: usize,
        message: String,
    },
    #[error("dataset: {0}")]
    Dataset(String),
    #[error("column {column} has zero variance in the training split")]
    ZeroVariance { column: usize },
    #[error("pca: {0}")]
    Pca(String),
    #[error("noise model: {0}")]
    Noise(String),
    #[error("target error {target} is outside the achievable range [{min:.4}, {max:.4}]")]
    UnreachableTarget { target: f64, min: f64, max: f64 },
    #[error("training: {0}")]
    Training(String),
    #[error("config: {0}")]
    Config(String),
    #[error("circuit {circuit_id} (seed {seed}) failed: {source}")]
    Record {
        circuit_id: usize,
        seed: u64,
        #[source]
        source: Box<Error>,
    },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
