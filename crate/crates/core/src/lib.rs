//! Observation-level interaction engine.
//!
//! Items described by normalized feature vectors are projected to 2D with
//! weighted multidimensional scaling. Dragging items expresses new pairwise
//! distances, from which the feature weights are re-learned and the
//! projection updated.

pub mod ingest;
pub mod math;
pub mod session;
pub mod sim;

#[cfg(feature = "testing")]
pub mod testing;

pub use math::{
    normalize_features, pairwise_distances, procrustes_align, stress, stress_gradients,
    weighted_distance, wmds_inverse, wmds_solve, CancelToken, DistanceVector, FeatureMatrix,
    Layout, MathError, SolveReport, WeightVector,
};
