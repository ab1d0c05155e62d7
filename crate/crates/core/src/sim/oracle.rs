use super::metrics::SuccessMetric;
use super::SimError;
use crate::math::{wmds_solve, FeatureMatrix, WeightVector};

/// Largest number of independently weighted feature groups the exhaustive
/// search accepts.
pub const MAX_SEARCH_GROUPS: usize = 4;

#[derive(Debug, Clone, PartialEq)]
pub struct OracleResult {
    pub weights: WeightVector,
    pub metric: f64,
}

fn compositions(parts: usize, steps: usize) -> Vec<Vec<usize>> {
    if parts == 1 {
        return vec![vec![steps]];
    }
    let mut out = Vec::new();
    for first in 0..=steps {
        for mut rest in compositions(parts - 1, steps - first) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

/// Exhaustive search over the simplex of group weights at the given
/// resolution. Features in the same group share a weight; features outside
/// every group stay at the floor. Each candidate is projected with the
/// forward solver and scored against `labels`.
pub fn oracle_best_weights(
    f: &FeatureMatrix,
    labels: &[u8],
    groups: &[Vec<usize>],
    resolution: f64,
    metric: SuccessMetric,
) -> Result<OracleResult, SimError> {
    if groups.is_empty() || groups.len() > MAX_SEARCH_GROUPS {
        return Err(SimError::SearchTooLarge(groups.len()));
    }
    if !(resolution > 0.0 && resolution <= 1.0) {
        return Err(SimError::InvalidSpec(format!(
            "resolution must be in (0, 1], got {resolution}"
        )));
    }
    if labels.len() != f.n_items() {
        return Err(SimError::MissingLabels(format!(
            "{} labels for {} items",
            labels.len(),
            f.n_items()
        )));
    }
    let d = f.n_features();
    for g in groups {
        if g.is_empty() || g.iter().any(|&k| k >= d) {
            return Err(SimError::InvalidSpec(format!("bad feature group {g:?}")));
        }
    }
    let steps = (1.0 / resolution).round() as usize;
    let mut best: Option<OracleResult> = None;
    for parts in compositions(groups.len(), steps) {
        let mut raw = vec![0.0; d];
        for (g, &q) in groups.iter().zip(&parts) {
            let share = q as f64 / steps as f64 * d as f64 / g.len() as f64;
            for &k in g {
                raw[k] = share;
            }
        }
        let weights = WeightVector::from_raw(&raw).map_err(crate::session::SessionError::from)?;
        let (layout, _) =
            wmds_solve(f, &weights, None).map_err(crate::session::SessionError::from)?;
        let score = metric.evaluate(&layout, labels);
        if best.as_ref().is_none_or(|b| score > b.metric) {
            best = Some(OracleResult {
                weights,
                metric: score,
            });
        }
    }
    Ok(best.expect("at least one composition"))
}
