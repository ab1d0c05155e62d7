use serde::{Deserialize, Serialize};

use crate::math::Layout;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SuccessMetric {
    #[default]
    NearestCentroidAccuracy,
    Silhouette,
}

impl SuccessMetric {
    pub fn evaluate(self, layout: &Layout, labels: &[u8]) -> f64 {
        match self {
            SuccessMetric::NearestCentroidAccuracy => nearest_centroid_accuracy(layout, labels),
            SuccessMetric::Silhouette => silhouette(layout, labels),
        }
    }
}

fn class_centroids(layout: &Layout, labels: &[u8]) -> [[f64; 2]; 2] {
    let mut sums = [[0.0; 2]; 2];
    let mut counts = [0usize; 2];
    for (p, &l) in layout.positions().iter().zip(labels) {
        let c = l as usize;
        sums[c][0] += p[0];
        sums[c][1] += p[1];
        counts[c] += 1;
    }
    let mut out = [[0.0; 2]; 2];
    for c in 0..2 {
        let m = counts[c].max(1) as f64;
        out[c] = [sums[c][0] / m, sums[c][1] / m];
    }
    out
}

/// Fraction of items whose nearest 2D class centroid is their own class.
pub fn nearest_centroid_accuracy(layout: &Layout, labels: &[u8]) -> f64 {
    let centroids = class_centroids(layout, labels);
    let correct = layout
        .positions()
        .iter()
        .zip(labels)
        .filter(|(p, &l)| {
            let d0 = (p[0] - centroids[0][0]).hypot(p[1] - centroids[0][1]);
            let d1 = (p[0] - centroids[1][0]).hypot(p[1] - centroids[1][1]);
            let predicted = if d1 < d0 { 1 } else { 0 };
            predicted == l
        })
        .count();
    correct as f64 / labels.len() as f64
}

/// Mean silhouette coefficient of the two classes in the layout.
pub fn silhouette(layout: &Layout, labels: &[u8]) -> f64 {
    let n = labels.len();
    let mut total = 0.0;
    for i in 0..n {
        let mut sums = [0.0; 2];
        let mut counts = [0usize; 2];
        for j in 0..n {
            if i == j {
                continue;
            }
            sums[labels[j] as usize] += layout.distance(i, j);
            counts[labels[j] as usize] += 1;
        }
        let own = labels[i] as usize;
        if counts[own] == 0 || counts[1 - own] == 0 {
            continue;
        }
        let a = sums[own] / counts[own] as f64;
        let b = sums[1 - own] / counts[1 - own] as f64;
        let denom = a.max(b);
        if denom > 0.0 {
            total += (b - a) / denom;
        }
    }
    total / n as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    fn layout(points: &[[f64; 2]]) -> Layout {
        Layout::new(points.to_vec()).unwrap()
    }

    #[test]
    fn separated_classes_score_perfectly() {
        let l = layout(&[[0.0, 0.0], [0.1, 0.0], [5.0, 5.0], [5.1, 5.0]]);
        let labels = [0, 0, 1, 1];
        assert_eq!(nearest_centroid_accuracy(&l, &labels), 1.0);
        assert!(silhouette(&l, &labels) > 0.95);
    }

    #[test]
    fn xor_square_is_chance() {
        let l = layout(&[[0.0, 0.0], [1.0, 1.0], [0.0, 1.0], [1.0, 0.0]]);
        let labels = [0, 0, 1, 1];
        // Both centroids sit at the centre; ties resolve to class 0.
        assert_eq!(nearest_centroid_accuracy(&l, &labels), 0.5);
        assert!(silhouette(&l, &labels) < 0.1);
    }
}
