use super::types::{DistanceVector, FeatureMatrix, PairDistance, WeightVector};
use super::MathError;

/// Weighted Euclidean distance `sqrt(sum_k w_k (a_k - b_k)^2)`.
pub fn weighted_distance(a: &[f64], b: &[f64], w: &WeightVector) -> Result<f64, MathError> {
    if a.len() != b.len() {
        return Err(MathError::DimensionMismatch {
            expected: a.len(),
            found: b.len(),
        });
    }
    if w.len() != a.len() {
        return Err(MathError::DimensionMismatch {
            expected: a.len(),
            found: w.len(),
        });
    }
    Ok(weighted_sq(a, b, w.as_slice()).sqrt())
}

#[inline]
pub(crate) fn weighted_sq(a: &[f64], b: &[f64], w: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .zip(w)
        .map(|((x, y), wk)| {
            let diff = x - y;
            wk * diff * diff
        })
        .sum()
}

/// Sorted, deduplicated copy of `subset`, validated against `n`.
pub(crate) fn canonical_subset(subset: &[usize], n: usize) -> Result<Vec<usize>, MathError> {
    let mut s = subset.to_vec();
    s.sort_unstable();
    s.dedup();
    if let Some(&bad) = s.iter().find(|&&i| i >= n) {
        return Err(MathError::contract(format!(
            "item index {bad} out of range for {n} items"
        )));
    }
    if s.len() < 2 {
        return Err(MathError::InsufficientPairs(s.len()));
    }
    Ok(s)
}

/// Weighted distances for every unordered pair in `subset`, ordered
/// lexicographically by `(i, j)`.
pub fn pairwise_distances(
    f: &FeatureMatrix,
    w: &WeightVector,
    subset: &[usize],
) -> Result<DistanceVector, MathError> {
    if w.len() != f.n_features() {
        return Err(MathError::DimensionMismatch {
            expected: f.n_features(),
            found: w.len(),
        });
    }
    let subset = canonical_subset(subset, f.n_items())?;
    let ws = w.as_slice();
    let mut pairs = Vec::with_capacity(subset.len() * (subset.len() - 1) / 2);
    for (a, &i) in subset.iter().enumerate() {
        for &j in &subset[a + 1..] {
            pairs.push(PairDistance {
                i,
                j,
                distance: weighted_sq(f.row(i), f.row(j), ws).sqrt(),
            });
        }
    }
    Ok(DistanceVector { pairs })
}
