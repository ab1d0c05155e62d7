use std::collections::BTreeMap;

use super::stress::{scaled_stress, scaled_stress_partials, ZERO_DISTANCE};
use super::types::{
    planar_distance, project_to_feasible, CancelToken, FeatureMatrix, SolveReport, WeightVector,
};
use super::MathError;

#[derive(Debug, Clone)]
pub struct InverseOptions {
    pub max_iter: usize,
    /// Stop once the relative objective decrease drops below this.
    pub tolerance: f64,
    pub cancel: Option<CancelToken>,
}

impl Default for InverseOptions {
    fn default() -> Self {
        InverseOptions {
            max_iter: 500,
            tolerance: 1e-7,
            cancel: None,
        }
    }
}

/// Fixed data of one inverse problem: the user-expressed 2D distances among
/// moved items and the per-feature squared differences of the same pairs.
struct MovedPairs {
    expressed: Vec<f64>,
    sq_diffs: Vec<Vec<f64>>,
}

impl MovedPairs {
    fn build(
        f: &FeatureMatrix,
        w: &WeightVector,
        moved: &BTreeMap<usize, [f64; 2]>,
    ) -> Result<Self, MathError> {
        if w.len() != f.n_features() {
            return Err(MathError::DimensionMismatch {
                expected: f.n_features(),
                found: w.len(),
            });
        }
        if moved.len() < 2 {
            return Err(MathError::InsufficientPairs(moved.len()));
        }
        for (&i, p) in moved {
            if i >= f.n_items() {
                return Err(MathError::contract(format!(
                    "moved item {i} out of range for {} items",
                    f.n_items()
                )));
            }
            if !p[0].is_finite() || !p[1].is_finite() {
                return Err(MathError::contract(format!(
                    "moved position for item {i} is not finite"
                )));
            }
        }
        let items: Vec<(usize, [f64; 2])> = moved.iter().map(|(&i, &p)| (i, p)).collect();
        let mut expressed = Vec::new();
        let mut sq_diffs = Vec::new();
        for (a, &(i, pi)) in items.iter().enumerate() {
            for &(j, pj) in &items[a + 1..] {
                expressed.push(planar_distance(pi, pj));
                sq_diffs.push(
                    f.row(i)
                        .iter()
                        .zip(f.row(j))
                        .map(|(x, y)| (x - y) * (x - y))
                        .collect(),
                );
            }
        }
        if expressed.iter().all(|&d| d < ZERO_DISTANCE) {
            return Err(MathError::DegenerateLayout);
        }
        Ok(MovedPairs {
            expressed,
            sq_diffs,
        })
    }

    fn targets(&self, w: &[f64]) -> Vec<f64> {
        self.sq_diffs
            .iter()
            .map(|sq| sq.iter().zip(w).map(|(s, wk)| s * wk).sum::<f64>().sqrt())
            .collect()
    }

    fn objective(&self, w: &[f64]) -> f64 {
        scaled_stress(&self.expressed, &self.targets(w))
    }

    fn objective_and_gradient(&self, w: &[f64]) -> (f64, Vec<f64>) {
        let t = self.targets(w);
        let (value, _, d_target) = scaled_stress_partials(&self.expressed, &t);
        let mut grad = vec![0.0; w.len()];
        for (p, sq) in self.sq_diffs.iter().enumerate() {
            if t[p] < ZERO_DISTANCE {
                continue;
            }
            let coef = d_target[p] / (2.0 * t[p]);
            for (g, s) in grad.iter_mut().zip(sq) {
                *g += coef * s;
            }
        }
        (value, grad)
    }
}

/// Stress between the expressed 2D distances of `moved` and the weighted
/// feature distances of the same pairs.
pub fn moved_pair_stress(
    f: &FeatureMatrix,
    w: &WeightVector,
    moved: &BTreeMap<usize, [f64; 2]>,
) -> Result<f64, MathError> {
    Ok(MovedPairs::build(f, w, moved)?.objective(w.as_slice()))
}

/// Fewer moved items than this raise a warning on the report.
pub const LOW_INFORMATION_MOVED: usize = 3;

/// Learns feature weights whose distances best match the pairwise distances
/// among the moved items, starting from `w_current`.
pub fn wmds_inverse(
    f: &FeatureMatrix,
    w_current: &WeightVector,
    moved: &BTreeMap<usize, [f64; 2]>,
) -> Result<(WeightVector, SolveReport), MathError> {
    wmds_inverse_with(f, w_current, moved, &InverseOptions::default())
}

pub fn wmds_inverse_with(
    f: &FeatureMatrix,
    w_current: &WeightVector,
    moved: &BTreeMap<usize, [f64; 2]>,
    opts: &InverseOptions,
) -> Result<(WeightVector, SolveReport), MathError> {
    let problem = MovedPairs::build(f, w_current, moved)?;
    let mut w = w_current.as_slice().to_vec();
    let (mut value, mut grad) = problem.objective_and_gradient(&w);
    let mut trace = vec![value];
    let mut iterations = 0;
    let mut converged = false;

    let gmax = grad.iter().fold(0.0f64, |m, g| m.max(g.abs()));
    let mut step = if gmax > 0.0 {
        0.1 * w.len() as f64 / gmax
    } else {
        1.0
    };

    while iterations < opts.max_iter {
        if opts.cancel.as_ref().is_some_and(|c| c.is_cancelled()) {
            break;
        }
        if value <= f64::EPSILON * f64::EPSILON || grad.iter().all(|g| *g == 0.0) {
            converged = true;
            break;
        }

        let mut accepted = None;
        for _ in 0..60 {
            let trial: Vec<f64> = w.iter().zip(&grad).map(|(wk, g)| wk - step * g).collect();
            let candidate = project_to_feasible(&trial);
            let cand_value = problem.objective(&candidate);
            if cand_value < value {
                accepted = Some((candidate, cand_value));
                break;
            }
            step *= 0.5;
        }
        let Some((candidate, cand_value)) = accepted else {
            converged = true;
            break;
        };

        let (_, cand_grad) = problem.objective_and_gradient(&candidate);
        // Barzilai-Borwein guess for the next trial step.
        let (mut ss, mut sy) = (0.0, 0.0);
        for k in 0..w.len() {
            let s = candidate[k] - w[k];
            ss += s * s;
            sy += s * (cand_grad[k] - grad[k]);
        }
        step = if sy > 0.0 { ss / sy } else { step * 2.0 };

        let decrease = value - cand_value;
        let previous = value;
        w = candidate;
        value = cand_value;
        grad = cand_grad;
        trace.push(value);
        iterations += 1;
        if decrease <= opts.tolerance * previous {
            converged = true;
            break;
        }
    }

    let mut warnings = Vec::new();
    if moved.len() < LOW_INFORMATION_MOVED {
        warnings.push(format!(
            "only {} items moved; a single expressed distance weakly constrains the weights",
            moved.len()
        ));
    }
    let report = SolveReport {
        final_objective: value,
        iterations,
        converged,
        objective_trace: trace,
        warnings,
    };
    Ok((WeightVector::from_feasible_unchecked(w), report))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ids(n: usize) -> Vec<String> {
        (0..n).map(|i| format!("m{i}")).collect()
    }

    #[test]
    fn single_moved_item_is_rejected() {
        let f = FeatureMatrix::new(2, 1, vec![0.0, 1.0], ids(2)).unwrap();
        let moved = BTreeMap::from([(0, [0.0, 0.0])]);
        assert_eq!(
            wmds_inverse(&f, &WeightVector::uniform(1), &moved).unwrap_err(),
            MathError::InsufficientPairs(1)
        );
    }

    #[test]
    fn one_pair_is_accepted_with_a_warning() {
        let f = FeatureMatrix::new(3, 2, vec![0.0, 0.0, 1.0, 0.2, 0.5, 0.9], ids(3)).unwrap();
        let pair = BTreeMap::from([(0, [0.0, 0.0]), (1, [1.0, 0.0])]);
        let (_, report) = wmds_inverse(&f, &WeightVector::uniform(2), &pair).unwrap();
        assert_eq!(report.warnings.len(), 1);
        let three = BTreeMap::from([(0, [0.0, 0.0]), (1, [1.0, 0.0]), (2, [0.0, 1.0])]);
        let (_, report) = wmds_inverse(&f, &WeightVector::uniform(2), &three).unwrap();
        assert!(report.warnings.is_empty());
    }

    #[test]
    fn coincident_drags_are_degenerate() {
        let f = FeatureMatrix::new(3, 1, vec![0.0, 0.5, 1.0], ids(3)).unwrap();
        let moved = BTreeMap::from([(0, [1.0, 1.0]), (1, [1.0, 1.0]), (2, [1.0, 1.0])]);
        assert_eq!(
            wmds_inverse(&f, &WeightVector::uniform(1), &moved).unwrap_err(),
            MathError::DegenerateLayout
        );
    }

    #[test]
    fn non_finite_drag_is_rejected() {
        let f = FeatureMatrix::new(2, 1, vec![0.0, 1.0], ids(2)).unwrap();
        let moved = BTreeMap::from([(0, [0.0, 0.0]), (1, [f64::NAN, 0.0])]);
        assert!(wmds_inverse(&f, &WeightVector::uniform(1), &moved).is_err());
    }

    #[test]
    fn separating_feature_is_upweighted() {
        // Feature 1 splits the items into two groups; features 0 and 2 are noise.
        let values = vec![
            0.3, 0.0, 0.9, //
            0.8, 0.0, 0.1, //
            0.1, 0.0, 0.5, //
            0.6, 1.0, 0.4, //
            0.2, 1.0, 0.8, //
            0.9, 1.0, 0.2,
        ];
        let f = FeatureMatrix::new(6, 3, values, ids(6)).unwrap();
        let moved = BTreeMap::from([
            (0, [0.0, 0.0]),
            (1, [0.1, 0.0]),
            (2, [0.0, 0.1]),
            (3, [5.0, 5.0]),
            (4, [5.1, 5.0]),
            (5, [5.0, 5.1]),
        ]);
        let (w, report) = wmds_inverse(&f, &WeightVector::uniform(3), &moved).unwrap();
        assert_eq!(w.argmax(), 1);
        assert!(report.is_non_increasing());
        assert!((w.mass() - 3.0).abs() < 1e-9);
    }
}
