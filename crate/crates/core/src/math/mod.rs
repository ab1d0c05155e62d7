//! Numerical kernel: weighted distances, normalized stress and its gradients,
//! the forward weighted-MDS solver, the inverse weight solver and rigid
//! alignment of successive layouts.

mod distance;
mod forward;
mod inverse;
mod normalize;
mod procrustes;
mod stress;
mod types;

pub use distance::{pairwise_distances, weighted_distance};
pub use forward::{classical_embedding, wmds_solve, wmds_solve_with, ForwardOptions};
pub use inverse::{
    moved_pair_stress, wmds_inverse, wmds_inverse_with, InverseOptions, LOW_INFORMATION_MOVED,
};
pub use normalize::normalize_features;
pub use procrustes::{procrustes_align, procrustes_fit, RigidTransform};
pub use stress::{stress, stress_gradients, StressGradients};
pub use types::{
    planar_distance, CancelToken, DistanceVector, FeatureMatrix, Layout, PairDistance, SolveReport,
    WeightVector, WEIGHT_FLOOR,
};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MathError {
    #[error("contract violation: {0}")]
    Contract(String),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("need at least 2 items to form a pair, got {0}")]
    InsufficientPairs(usize),
    #[error("need at least 2 anchor items, got {0}")]
    InsufficientAnchors(usize),
    #[error("all moved positions coincide; the expressed distances carry no information")]
    DegenerateLayout,
    #[error("non-finite value at row {row}, column {column}")]
    NonFinite { row: usize, column: usize },
}

impl MathError {
    pub(crate) fn contract(msg: impl Into<String>) -> Self {
        MathError::Contract(msg.into())
    }
}
