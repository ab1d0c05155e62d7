//! Fixtures shared by the benchmarks.

use std::collections::BTreeMap;
use std::sync::Arc;

use oli_core::ingest::{generate_synthetic, Regime, SyntheticRegimeSpec, TaskVariant};
use oli_core::FeatureMatrix;

/// Planted distributed-regime features, the hardest regime the engine learns.
pub fn features(n_items: usize, n_features: usize) -> Arc<FeatureMatrix> {
    let spec = SyntheticRegimeSpec::new(
        Regime::Distributed,
        TaskVariant::LinearCombination,
        n_items,
        n_features,
    );
    Arc::new(generate_synthetic(&spec).expect("valid spec").features)
}

/// Six items pulled into two tight groups.
pub fn two_group_drags(n_items: usize) -> BTreeMap<usize, [f64; 2]> {
    (0..3)
        .map(|k| (k, [-1.0 + 0.05 * k as f64, -1.0]))
        .chain((0..3).map(|k| (n_items - 1 - k, [1.0 - 0.05 * k as f64, 1.0])))
        .collect()
}
