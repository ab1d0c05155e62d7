use std::collections::HashSet;
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::MathError;

/// Lower bound applied to every feature weight.
pub const WEIGHT_FLOOR: f64 = 1e-6;

/// Normalized feature values for `n_items` observations, stored row-major.
///
/// Values are kept at single precision (stored widened to `f64`) so that the
/// binary matrix encoding round-trips bit for bit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureMatrix {
    n_items: usize,
    n_features: usize,
    values: Vec<f64>,
    item_ids: Vec<String>,
}

impl FeatureMatrix {
    /// Builds a matrix from already normalized row-major values.
    pub fn new(
        n_items: usize,
        n_features: usize,
        values: Vec<f64>,
        item_ids: Vec<String>,
    ) -> Result<Self, MathError> {
        if n_items < 2 {
            return Err(MathError::contract(format!(
                "feature matrix needs at least 2 items, got {n_items}"
            )));
        }
        if n_features < 1 {
            return Err(MathError::contract(
                "feature matrix needs at least 1 feature",
            ));
        }
        if values.len() != n_items * n_features {
            return Err(MathError::DimensionMismatch {
                expected: n_items * n_features,
                found: values.len(),
            });
        }
        if item_ids.len() != n_items {
            return Err(MathError::DimensionMismatch {
                expected: n_items,
                found: item_ids.len(),
            });
        }
        if let Some(pos) = values
            .iter()
            .position(|v| !v.is_finite() || *v < 0.0 || *v > 1.0)
        {
            return Err(MathError::contract(format!(
                "value {} at row {}, column {} is outside [0, 1]",
                values[pos],
                pos / n_features,
                pos % n_features
            )));
        }
        let mut seen = HashSet::with_capacity(n_items);
        for id in &item_ids {
            if !seen.insert(id.as_str()) {
                return Err(MathError::contract(format!("duplicate item id {id:?}")));
            }
        }
        Ok(Self {
            n_items,
            n_features,
            values,
            item_ids,
        })
    }

    pub fn n_items(&self) -> usize {
        self.n_items
    }

    pub fn n_features(&self) -> usize {
        self.n_features
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.n_features..(i + 1) * self.n_features]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.values.chunks_exact(self.n_features)
    }

    pub fn item_ids(&self) -> &[String] {
        &self.item_ids
    }

    pub fn index_of(&self, item_id: &str) -> Option<usize> {
        self.item_ids.iter().position(|id| id == item_id)
    }
}

/// Nonnegative per-feature weights with a floor of [`WEIGHT_FLOOR`] and total
/// mass equal to the number of features.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct WeightVector(Vec<f64>);

impl WeightVector {
    /// All-ones weights, the neutral starting point.
    pub fn uniform(n_features: usize) -> Self {
        WeightVector(vec![1.0; n_features])
    }

    /// Projects arbitrary nonnegative values onto the feasible set: every
    /// weight at least the floor, total mass equal to the length.
    pub fn from_raw(raw: &[f64]) -> Result<Self, MathError> {
        if raw.is_empty() {
            return Err(MathError::contract("weight vector must not be empty"));
        }
        if let Some(v) = raw.iter().find(|v| !v.is_finite() || **v < 0.0) {
            return Err(MathError::contract(format!(
                "weights must be finite and nonnegative, got {v}"
            )));
        }
        Ok(WeightVector(project_to_feasible(raw)))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn mass(&self) -> f64 {
        self.0.iter().sum()
    }

    pub fn argmax(&self) -> usize {
        self.0
            .iter()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |best, (k, &w)| {
                if w > best.1 {
                    (k, w)
                } else {
                    best
                }
            })
            .0
    }

    pub(crate) fn from_feasible_unchecked(weights: Vec<f64>) -> Self {
        WeightVector(weights)
    }
}

impl TryFrom<Vec<f64>> for WeightVector {
    type Error = MathError;

    fn try_from(raw: Vec<f64>) -> Result<Self, Self::Error> {
        WeightVector::from_raw(&raw)
    }
}

impl From<WeightVector> for Vec<f64> {
    fn from(w: WeightVector) -> Self {
        w.0
    }
}

/// Finds the scale `s` with `sum_k max(floor, s * w_k) = len` and applies it.
/// The objective downstream is scale-free in the weights, so this is the
/// floor-respecting rescale rather than a Euclidean projection.
pub(crate) fn project_to_feasible(raw: &[f64]) -> Vec<f64> {
    let d = raw.len();
    let target = d as f64;
    let w: Vec<f64> = raw.iter().map(|&v| v.max(0.0)).collect();
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| w[b].total_cmp(&w[a]));

    // Try the largest free set first; entries outside it sit on the floor.
    let mut prefix = 0.0;
    let mut best = None;
    let mut sums = Vec::with_capacity(d);
    for &k in &order {
        prefix += w[k];
        sums.push(prefix);
    }
    for m in (1..=d).rev() {
        let free_sum = sums[m - 1];
        if free_sum <= 0.0 {
            continue;
        }
        let scale = (target - WEIGHT_FLOOR * (d - m) as f64) / free_sum;
        let smallest_free = w[order[m - 1]] * scale;
        if smallest_free >= WEIGHT_FLOOR {
            best = Some((m, scale));
            break;
        }
    }
    let Some((m, scale)) = best else {
        return vec![1.0; d];
    };
    let mut out = vec![WEIGHT_FLOOR; d];
    for &k in &order[..m] {
        out[k] = w[k] * scale;
    }
    out
}

/// 2D positions, one per item.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Layout {
    positions: Vec<[f64; 2]>,
}

impl Layout {
    pub fn new(positions: Vec<[f64; 2]>) -> Result<Self, MathError> {
        if positions.iter().flatten().any(|c| !c.is_finite()) {
            return Err(MathError::contract("layout coordinates must be finite"));
        }
        Ok(Layout { positions })
    }

    pub fn zeros(n: usize) -> Self {
        Layout {
            positions: vec![[0.0; 2]; n],
        }
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn positions(&self) -> &[[f64; 2]] {
        &self.positions
    }

    pub fn position(&self, i: usize) -> [f64; 2] {
        self.positions[i]
    }

    pub(crate) fn positions_mut(&mut self) -> &mut [[f64; 2]] {
        &mut self.positions
    }

    pub fn distance(&self, i: usize, j: usize) -> f64 {
        planar_distance(self.positions[i], self.positions[j])
    }

    pub fn centroid(&self, subset: &[usize]) -> [f64; 2] {
        let mut c = [0.0; 2];
        for &i in subset {
            c[0] += self.positions[i][0];
            c[1] += self.positions[i][1];
        }
        let m = subset.len().max(1) as f64;
        [c[0] / m, c[1] / m]
    }
}

pub fn planar_distance(a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - b[0]).hypot(a[1] - b[1])
}

/// One unordered pair `(i, j)` with `i < j` and its distance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairDistance {
    pub i: usize,
    pub j: usize,
    pub distance: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct DistanceVector {
    pub pairs: Vec<PairDistance>,
}

impl DistanceVector {
    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn distances(&self) -> Vec<f64> {
        self.pairs.iter().map(|p| p.distance).collect()
    }

    /// Distances between the same pairs measured in a 2D layout.
    pub fn from_layout(layout: &Layout, subset: &[usize]) -> Result<Self, MathError> {
        let subset = super::distance::canonical_subset(subset, layout.len())?;
        let mut pairs = Vec::with_capacity(subset.len() * (subset.len() - 1) / 2);
        for (a, &i) in subset.iter().enumerate() {
            for &j in &subset[a + 1..] {
                pairs.push(PairDistance {
                    i,
                    j,
                    distance: layout.distance(i, j),
                });
            }
        }
        Ok(DistanceVector { pairs })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub final_objective: f64,
    pub iterations: usize,
    pub converged: bool,
    pub objective_trace: Vec<f64>,
    /// Conditions that did not stop the solve but weaken its result.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

impl SolveReport {
    pub fn is_non_increasing(&self) -> bool {
        self.objective_trace.windows(2).all(|w| w[1] <= w[0])
    }
}

/// Shared flag polled once per solver iteration.
#[derive(Debug, Clone, Default)]
pub struct CancelToken(Arc<AtomicBool>);

impl CancelToken {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn cancel(&self) {
        self.0.store(true, Ordering::SeqCst);
    }

    pub fn is_cancelled(&self) -> bool {
        self.0.load(Ordering::SeqCst)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ids(n: usize) -> Vec<String> {
        (0..n).map(|i| format!("item-{i}")).collect()
    }

    #[test]
    fn rejects_single_item() {
        assert!(FeatureMatrix::new(1, 2, vec![0.0, 1.0], ids(1)).is_err());
    }

    #[test]
    fn rejects_duplicate_ids() {
        let err = FeatureMatrix::new(2, 1, vec![0.0, 1.0], vec!["a".into(), "a".into()]);
        assert!(err.is_err());
    }

    #[test]
    fn rejects_out_of_range_values() {
        assert!(FeatureMatrix::new(2, 1, vec![0.0, 1.5], ids(2)).is_err());
    }

    #[test]
    fn projection_keeps_floor_and_mass() {
        let w = WeightVector::from_raw(&[0.0, 0.0, 5.0, 1e-9]).unwrap();
        assert!(w.as_slice().iter().all(|&v| v >= WEIGHT_FLOOR));
        assert!((w.mass() - 4.0).abs() < 1e-12);
        assert_eq!(w.argmax(), 2);
    }

    #[test]
    fn projection_of_feasible_is_identity() {
        let w = WeightVector::from_raw(&[0.5, 1.5, 1.0, 1.0]).unwrap();
        assert_eq!(w.as_slice(), &[0.5, 1.5, 1.0, 1.0]);
    }

    #[test]
    fn all_zero_weights_fall_back_to_uniform() {
        let w = WeightVector::from_raw(&[0.0, 0.0, 0.0]).unwrap();
        assert_eq!(w, WeightVector::uniform(3));
    }

    #[test]
    fn weights_deserialize_through_projection() {
        let w: WeightVector = serde_json::from_str("[2.0, 2.0]").unwrap();
        assert_eq!(w.as_slice(), &[1.0, 1.0]);
        assert!(serde_json::from_str::<WeightVector>("[-1.0, 2.0]").is_err());
    }
}
