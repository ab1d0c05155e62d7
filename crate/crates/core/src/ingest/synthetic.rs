use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::IngestError;
use crate::math::{normalize_features, FeatureMatrix};

/// How far the feature set's abstraction sits from the concept being taught.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Regime {
    /// Some single feature tracks any concept directly.
    Aligned,
    /// Concepts are spread linearly over several features.
    Distributed,
    /// Only raw single-feature concepts are linear; anything richer is
    /// entangled (XOR-like) in the features.
    Entangled,
}

impl Regime {
    pub const ALL: [Regime; 3] = [Regime::Aligned, Regime::Distributed, Regime::Entangled];

    pub fn as_str(self) -> &'static str {
        match self {
            Regime::Aligned => "aligned",
            Regime::Distributed => "distributed",
            Regime::Entangled => "entangled",
        }
    }
}

/// Concept the simulated analyst tries to express, in increasing abstraction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TaskVariant {
    SingleFeature,
    #[default]
    LinearCombination,
    Xor,
}

impl TaskVariant {
    pub const ALL: [TaskVariant; 3] = [
        TaskVariant::SingleFeature,
        TaskVariant::LinearCombination,
        TaskVariant::Xor,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            TaskVariant::SingleFeature => "single_feature",
            TaskVariant::LinearCombination => "linear_combination",
            TaskVariant::Xor => "xor",
        }
    }
}

/// The way the concept label is planted into the features.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConceptEncoding {
    /// Feature 0 is the label plus noise.
    Direct,
    /// Features 0..4 each carry a weak, noisy shift toward the label.
    Distributed,
    /// The label is the XOR of thresholded features 0 and 1.
    Xor,
}

impl ConceptEncoding {
    fn min_features(self) -> usize {
        match self {
            ConceptEncoding::Direct => 1,
            ConceptEncoding::Distributed => DISTRIBUTED_FEATURES,
            ConceptEncoding::Xor => 2,
        }
    }
}

pub fn concept_encoding(regime: Regime, task: TaskVariant) -> ConceptEncoding {
    match (regime, task) {
        (Regime::Aligned, _) | (_, TaskVariant::SingleFeature) => ConceptEncoding::Direct,
        (Regime::Distributed, TaskVariant::LinearCombination) => ConceptEncoding::Distributed,
        _ => ConceptEncoding::Xor,
    }
}

/// Informative features in the distributed encoding.
const DISTRIBUTED_FEATURES: usize = 4;
/// Per-feature class shift in the distributed encoding, before noise.
const DISTRIBUTED_SHIFT: f64 = 0.35;
/// Per-feature noise in the distributed encoding, added to `noise_sigma`.
const DISTRIBUTED_NOISE: f64 = 0.08;
/// Half-width of the jitter around each XOR quadrant centre.
const XOR_JITTER: f64 = 0.2;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticRegimeSpec {
    pub regime: Regime,
    #[serde(default)]
    pub task: TaskVariant,
    pub n_items: usize,
    pub n_features: usize,
    /// Explicit balanced 0/1 labels; alternating labels when absent.
    #[serde(default)]
    pub concept_labels: Option<Vec<u8>>,
    pub noise_sigma: f64,
    pub seed: u64,
}

impl SyntheticRegimeSpec {
    pub fn new(regime: Regime, task: TaskVariant, n_items: usize, n_features: usize) -> Self {
        SyntheticRegimeSpec {
            regime,
            task,
            n_items,
            n_features,
            concept_labels: None,
            noise_sigma: 0.05,
            seed: 7,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_noise(mut self, sigma: f64) -> Self {
        self.noise_sigma = sigma;
        self
    }

    pub fn encoding(&self) -> ConceptEncoding {
        concept_encoding(self.regime, self.task)
    }

    fn labels(&self) -> Result<Vec<u8>, IngestError> {
        let n = self.n_items;
        if n < 2 || !n.is_multiple_of(2) {
            return Err(IngestError::Invalid(format!(
                "synthetic datasets need an even item count >= 2, got {n}"
            )));
        }
        let labels = match &self.concept_labels {
            Some(l) => l.clone(),
            None => (0..n).map(|i| (i % 2) as u8).collect(),
        };
        if labels.len() != n {
            return Err(IngestError::Dimension {
                what: "concept_labels length",
                expected: n,
                found: labels.len(),
            });
        }
        if labels.iter().any(|&l| l > 1) {
            return Err(IngestError::Invalid("concept labels must be 0 or 1".into()));
        }
        let ones = labels.iter().filter(|&&l| l == 1).count();
        if ones * 2 != n {
            return Err(IngestError::Invalid(format!(
                "concept labels must be balanced, got {ones} of {n} positive"
            )));
        }
        Ok(labels)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticDataset {
    pub features: FeatureMatrix,
    pub labels: Vec<u8>,
}

/// Deterministic synthetic dataset with a planted binary concept.
pub fn generate_synthetic(spec: &SyntheticRegimeSpec) -> Result<SyntheticDataset, IngestError> {
    let labels = spec.labels()?;
    if !spec.noise_sigma.is_finite() || spec.noise_sigma < 0.0 {
        return Err(IngestError::Invalid(format!(
            "noise_sigma must be finite and >= 0, got {}",
            spec.noise_sigma
        )));
    }
    let encoding = spec.encoding();
    if spec.n_features < encoding.min_features() {
        return Err(IngestError::Invalid(format!(
            "{encoding:?} encoding needs at least {} features, got {}",
            encoding.min_features(),
            spec.n_features
        )));
    }
    if encoding == ConceptEncoding::Xor && !spec.n_items.is_multiple_of(4) {
        return Err(IngestError::Invalid(format!(
            "XOR encoding needs a multiple of 4 items, got {}",
            spec.n_items
        )));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let (n, d) = (spec.n_items, spec.n_features);
    let mut rows = vec![vec![0.0; d]; n];
    match encoding {
        ConceptEncoding::Direct => {
            let noise = Normal::new(0.0, spec.noise_sigma).expect("sigma validated");
            for (row, &l) in rows.iter_mut().zip(&labels) {
                row[0] = (l as f64 + noise.sample(&mut rng)).clamp(0.0, 1.0);
                for v in &mut row[1..] {
                    *v = rng.random_range(0.0..1.0);
                }
            }
        }
        ConceptEncoding::Distributed => {
            let noise =
                Normal::new(0.0, spec.noise_sigma + DISTRIBUTED_NOISE).expect("sigma validated");
            for (row, &l) in rows.iter_mut().zip(&labels) {
                let centre = 0.5 + (l as f64 - 0.5) * DISTRIBUTED_SHIFT;
                for v in &mut row[..DISTRIBUTED_FEATURES] {
                    *v = (centre + noise.sample(&mut rng)).clamp(0.0, 1.0);
                }
                for v in &mut row[DISTRIBUTED_FEATURES..] {
                    *v = rng.random_range(0.0..1.0);
                }
            }
        }
        ConceptEncoding::Xor => fill_xor(&mut rows, &labels, &mut rng),
    }

    let ids = (0..n).map(|i| format!("item-{i:04}")).collect();
    let features = normalize_features(&rows, ids)?;
    Ok(SyntheticDataset { features, labels })
}

/// Antithetic XOR layout. Items are handled in groups of two negatives and
/// two positives sharing the same quadrant jitter, and each negative shares
/// its remaining features with one positive, so every feature has exactly
/// equal class-conditional means.
fn fill_xor(rows: &mut [Vec<f64>], labels: &[u8], rng: &mut ChaCha8Rng) {
    let negatives: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == 0).collect();
    let positives: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == 1).collect();
    let d = rows[0].len();
    for g in (0..negatives.len()).step_by(2) {
        let u = rng.random_range(-XOR_JITTER..XOR_JITTER);
        let v = rng.random_range(-XOR_JITTER..XOR_JITTER);
        let (lo, hi) = (0.25, 0.75);
        let corners = [
            (negatives[g], [lo + u, lo + v]),
            (negatives[g + 1], [hi + u, hi + v]),
            (positives[g], [lo + u, hi + v]),
            (positives[g + 1], [hi + u, lo + v]),
        ];
        for (item, xy) in corners {
            rows[item][0] = xy[0];
            rows[item][1] = xy[1];
        }
        for partner in 0..2 {
            let shared: Vec<f64> = (2..d).map(|_| rng.random_range(0.0..1.0)).collect();
            rows[negatives[g + partner]][2..].copy_from_slice(&shared);
            rows[positives[g + partner]][2..].copy_from_slice(&shared);
        }
    }
}
