//! Feature files: a JSON manifest next to a CSV or binary matrix, plus the
//! synthetic datasets used by tests and the benchmark harness.

mod manifest;
mod synthetic;

use std::path::PathBuf;

use thiserror::Error;

use crate::math::MathError;

pub use manifest::{
    export_dataset, load_dataset, read_manifest, AbstractionLevel, Dataset, DatasetManifest,
    DatasetMetadata, MatrixEncoding, MANIFEST_FILE, MAX_FEATURES,
};
pub use synthetic::{
    concept_encoding, generate_synthetic, ConceptEncoding, Regime, SyntheticDataset,
    SyntheticRegimeSpec, TaskVariant,
};

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: malformed manifest: {source}")]
    Manifest {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
    #[error("checksum mismatch for {path}: manifest says {expected}, file hashes to {found}")]
    Checksum {
        path: PathBuf,
        expected: String,
        found: String,
    },
    #[error("{what}: expected {expected}, found {found}")]
    Dimension {
        what: &'static str,
        expected: usize,
        found: usize,
    },
    #[error("non-finite value at row {row}, column {column}")]
    NonFinite { row: usize, column: usize },
    #[error("{0}")]
    Invalid(String),
    #[error(transparent)]
    Math(#[from] MathError),
}

impl IngestError {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        IngestError::Io {
            path: path.into(),
            source,
        }
    }
}
