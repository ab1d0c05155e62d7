use super::distance::{canonical_subset, weighted_sq};
use super::types::{DistanceVector, FeatureMatrix, Layout, WeightVector};
use super::MathError;

/// Pairs whose distance falls below this contribute no gradient through the
/// square root.
pub(crate) const ZERO_DISTANCE: f64 = 1e-12;

/// Scale-free stress between layout distances `a` and target distances `t`:
///
/// `sum_p (s a_p - t_p)^2 / sum_p t_p^2` with `s = (a . t) / (a . a)`.
///
/// All-zero targets fall back to the unnormalized `sum_p a_p^2`; an all-zero
/// layout against nonzero targets has `s = 0` and stress 1.
pub(crate) fn scaled_stress(a: &[f64], t: &[f64]) -> f64 {
    let tt: f64 = t.iter().map(|v| v * v).sum();
    let aa: f64 = a.iter().map(|v| v * v).sum();
    if tt == 0.0 {
        return aa;
    }
    let scale = if aa > 0.0 {
        a.iter().zip(t).map(|(x, y)| x * y).sum::<f64>() / aa
    } else {
        0.0
    };
    let residual: f64 = a
        .iter()
        .zip(t)
        .map(|(x, y)| {
            let r = scale * x - y;
            r * r
        })
        .sum();
    residual / tt
}

/// Value and partial derivatives of [`scaled_stress`] with respect to each
/// layout distance and each target distance. The optimal scale is treated as
/// a function of its arguments, so the envelope terms vanish.
pub(crate) fn scaled_stress_partials(a: &[f64], t: &[f64]) -> (f64, Vec<f64>, Vec<f64>) {
    let m = a.len();
    let tt: f64 = t.iter().map(|v| v * v).sum();
    let aa: f64 = a.iter().map(|v| v * v).sum();
    if tt == 0.0 {
        return (aa, a.iter().map(|v| 2.0 * v).collect(), vec![0.0; m]);
    }
    if aa == 0.0 {
        return (1.0, vec![0.0; m], vec![0.0; m]);
    }
    let scale = a.iter().zip(t).map(|(x, y)| x * y).sum::<f64>() / aa;
    let residuals: Vec<f64> = a.iter().zip(t).map(|(x, y)| scale * x - y).collect();
    let value = residuals.iter().map(|r| r * r).sum::<f64>() / tt;
    let d_layout = residuals.iter().map(|r| 2.0 * scale * r / tt).collect();
    let d_target = residuals
        .iter()
        .zip(t)
        .map(|(r, y)| (-2.0 * r - 2.0 * value * y) / tt)
        .collect();
    (value, d_layout, d_target)
}

fn same_pairs(a: &DistanceVector, b: &DistanceVector) -> bool {
    a.len() == b.len()
        && a.pairs
            .iter()
            .zip(&b.pairs)
            .all(|(p, q)| p.i == q.i && p.j == q.j)
}

/// Normalized stress between two distance sets over identical pairs.
pub fn stress(layout_d: &DistanceVector, target_d: &DistanceVector) -> Result<f64, MathError> {
    if !same_pairs(layout_d, target_d) {
        return Err(MathError::contract(
            "layout and target distances cover different pairs",
        ));
    }
    if layout_d
        .pairs
        .iter()
        .chain(&target_d.pairs)
        .any(|p| !p.distance.is_finite() || p.distance < 0.0)
    {
        return Err(MathError::contract(
            "distances must be finite and nonnegative",
        ));
    }
    Ok(scaled_stress(&layout_d.distances(), &target_d.distances()))
}

#[derive(Debug, Clone, PartialEq)]
pub struct StressGradients {
    pub stress: f64,
    /// One entry per item; items outside the subset get zero.
    pub layout: Vec<[f64; 2]>,
    pub weights: Vec<f64>,
}

/// Stress of `layout` against weighted feature distances over all pairs in
/// `subset`, with its gradients with respect to positions and weights.
pub fn stress_gradients(
    f: &FeatureMatrix,
    w: &WeightVector,
    layout: &Layout,
    subset: &[usize],
) -> Result<StressGradients, MathError> {
    if layout.len() != f.n_items() {
        return Err(MathError::DimensionMismatch {
            expected: f.n_items(),
            found: layout.len(),
        });
    }
    if w.len() != f.n_features() {
        return Err(MathError::DimensionMismatch {
            expected: f.n_features(),
            found: w.len(),
        });
    }
    let subset = canonical_subset(subset, f.n_items())?;
    let d = f.n_features();
    let ws = w.as_slice();

    let mut pairs = Vec::new();
    let mut a = Vec::new();
    let mut t = Vec::new();
    for (idx, &i) in subset.iter().enumerate() {
        for &j in &subset[idx + 1..] {
            pairs.push((i, j));
            a.push(layout.distance(i, j));
            t.push(weighted_sq(f.row(i), f.row(j), ws).sqrt());
        }
    }
    let (value, d_layout, d_target) = scaled_stress_partials(&a, &t);

    let mut grad_layout = vec![[0.0; 2]; f.n_items()];
    let mut grad_weights = vec![0.0; d];
    for (p, &(i, j)) in pairs.iter().enumerate() {
        if a[p] >= ZERO_DISTANCE {
            let pi = layout.position(i);
            let pj = layout.position(j);
            let coef = d_layout[p] / a[p];
            for axis in 0..2 {
                let g = coef * (pi[axis] - pj[axis]);
                grad_layout[i][axis] += g;
                grad_layout[j][axis] -= g;
            }
        }
        if t[p] >= ZERO_DISTANCE {
            let coef = d_target[p] / (2.0 * t[p]);
            let (xi, xj) = (f.row(i), f.row(j));
            for k in 0..d {
                let diff = xi[k] - xj[k];
                grad_weights[k] += coef * diff * diff;
            }
        }
    }
    Ok(StressGradients {
        stress: value,
        layout: grad_layout,
        weights: grad_weights,
    })
}
