//! Brute-force reference routines used by the test suites. Each one is
//! written against first principles, not against the solver code paths it
//! checks.

use std::collections::BTreeMap;

use nalgebra::Matrix2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::math::{FeatureMatrix, Layout};

/// Stress with the closed-form scale, recomputed from scratch.
pub fn reference_stress(layout_d: &[f64], target_d: &[f64]) -> f64 {
    let tt: f64 = target_d.iter().map(|t| t * t).sum();
    let aa: f64 = layout_d.iter().map(|a| a * a).sum();
    if tt == 0.0 {
        return aa;
    }
    let at: f64 = layout_d.iter().zip(target_d).map(|(a, t)| a * t).sum();
    let s = if aa > 0.0 { at / aa } else { 0.0 };
    layout_d
        .iter()
        .zip(target_d)
        .map(|(a, t)| (s * a - t).powi(2))
        .sum::<f64>()
        / tt
}

fn subset_pairs(subset: &[usize]) -> Vec<(usize, usize)> {
    let mut s = subset.to_vec();
    s.sort_unstable();
    s.dedup();
    let mut out = Vec::new();
    for a in 0..s.len() {
        for b in a + 1..s.len() {
            out.push((s[a], s[b]));
        }
    }
    out
}

fn raw_weighted(x: &[f64], y: &[f64], w: &[f64]) -> f64 {
    x.iter()
        .zip(y)
        .zip(w)
        .map(|((a, b), wk)| wk * (a - b) * (a - b))
        .sum::<f64>()
        .sqrt()
}

/// Stress of a layout against raw (unprojected) weights over `subset`.
pub fn reference_layout_stress(
    f: &FeatureMatrix,
    raw_w: &[f64],
    positions: &[[f64; 2]],
    subset: &[usize],
) -> f64 {
    let pairs = subset_pairs(subset);
    let a: Vec<f64> = pairs
        .iter()
        .map(|&(i, j)| {
            ((positions[i][0] - positions[j][0]).powi(2)
                + (positions[i][1] - positions[j][1]).powi(2))
            .sqrt()
        })
        .collect();
    let t: Vec<f64> = pairs
        .iter()
        .map(|&(i, j)| raw_weighted(f.row(i), f.row(j), raw_w))
        .collect();
    reference_stress(&a, &t)
}

/// Central finite differences of [`reference_layout_stress`] with respect to
/// every layout coordinate and every raw weight.
pub fn finite_difference_gradients(
    f: &FeatureMatrix,
    raw_w: &[f64],
    layout: &Layout,
    subset: &[usize],
    h: f64,
) -> (Vec<[f64; 2]>, Vec<f64>) {
    let base: Vec<[f64; 2]> = layout.positions().to_vec();
    let mut g_layout = vec![[0.0; 2]; base.len()];
    for i in 0..base.len() {
        for axis in 0..2 {
            let mut plus = base.clone();
            let mut minus = base.clone();
            plus[i][axis] += h;
            minus[i][axis] -= h;
            g_layout[i][axis] = (reference_layout_stress(f, raw_w, &plus, subset)
                - reference_layout_stress(f, raw_w, &minus, subset))
                / (2.0 * h);
        }
    }
    let mut g_w = vec![0.0; raw_w.len()];
    for k in 0..raw_w.len() {
        let mut plus = raw_w.to_vec();
        let mut minus = raw_w.to_vec();
        plus[k] += h;
        minus[k] -= h;
        g_w[k] = (reference_layout_stress(f, &plus, &base, subset)
            - reference_layout_stress(f, &minus, &base, subset))
            / (2.0 * h);
    }
    (g_layout, g_w)
}

/// `||a - b|| / max(||b||, 1e-12)`.
pub fn relative_error(a: &[f64], b: &[f64]) -> f64 {
    let num: f64 = a
        .iter()
        .zip(b)
        .map(|(x, y)| (x - y).powi(2))
        .sum::<f64>()
        .sqrt();
    let den: f64 = b.iter().map(|y| y * y).sum::<f64>().sqrt();
    num / den.max(1e-12)
}

/// Every composition of 1 into `dims` nonnegative parts on a grid of step
/// `resolution`.
pub fn simplex_grid(dims: usize, resolution: f64) -> Vec<Vec<f64>> {
    let steps = (1.0 / resolution).round() as usize;
    let mut out = Vec::new();
    let mut current = vec![0usize; dims];
    fn rec(
        k: usize,
        remaining: usize,
        steps: usize,
        current: &mut Vec<usize>,
        out: &mut Vec<Vec<f64>>,
    ) {
        let dims = current.len();
        if k == dims - 1 {
            current[k] = remaining;
            out.push(current.iter().map(|&c| c as f64 / steps as f64).collect());
            return;
        }
        for c in 0..=remaining {
            current[k] = c;
            rec(k + 1, remaining - c, steps, current, out);
        }
    }
    rec(0, steps, steps, &mut current, &mut out);
    out
}

/// Exhaustive search over the weight simplex for the weights minimizing the
/// moved-pair stress. Returns `(fractions, best_stress)`; zero fractions are
/// lifted to the weight floor before evaluation.
pub fn inverse_grid_oracle(
    f: &FeatureMatrix,
    moved: &BTreeMap<usize, [f64; 2]>,
    resolution: f64,
) -> (Vec<f64>, f64) {
    let items: Vec<(usize, [f64; 2])> = moved.iter().map(|(&i, &p)| (i, p)).collect();
    let mut expressed = Vec::new();
    let mut rows = Vec::new();
    for a in 0..items.len() {
        for b in a + 1..items.len() {
            let (i, pi) = items[a];
            let (j, pj) = items[b];
            expressed.push(((pi[0] - pj[0]).powi(2) + (pi[1] - pj[1]).powi(2)).sqrt());
            rows.push((i, j));
        }
    }
    let d = f.n_features();
    let mut best = (vec![], f64::INFINITY);
    for fractions in simplex_grid(d, resolution) {
        let w: Vec<f64> = fractions
            .iter()
            .map(|&q| (q * d as f64).max(crate::math::WEIGHT_FLOOR))
            .collect();
        let t: Vec<f64> = rows
            .iter()
            .map(|&(i, j)| raw_weighted(f.row(i), f.row(j), &w))
            .collect();
        let s = reference_stress(&expressed, &t);
        if s < best.1 {
            best = (fractions, s);
        }
    }
    best
}

/// Residual of the optimal rigid (rotation or reflection plus translation)
/// fit from the SVD of the anchor cross-covariance.
pub fn procrustes_svd_residual(source: &Layout, target: &Layout, anchors: &[usize]) -> f64 {
    let m = anchors.len() as f64;
    let mut cs = [0.0; 2];
    let mut ct = [0.0; 2];
    for &i in anchors {
        for a in 0..2 {
            cs[a] += source.position(i)[a] / m;
            ct[a] += target.position(i)[a] / m;
        }
    }
    let mut h = Matrix2::<f64>::zeros();
    for &i in anchors {
        let s = source.position(i);
        let t = target.position(i);
        for r in 0..2 {
            for c in 0..2 {
                h[(r, c)] += (t[r] - ct[r]) * (s[c] - cs[c]);
            }
        }
    }
    let svd = h.svd(true, true);
    let rot: Matrix2<f64> = svd.u.unwrap() * svd.v_t.unwrap();
    anchors
        .iter()
        .map(|&i| {
            let s = source.position(i);
            let t = target.position(i);
            let v = nalgebra::Vector2::new(s[0] - cs[0], s[1] - cs[1]);
            let p: nalgebra::Vector2<f64> = rot * v;
            (p[0] + ct[0] - t[0]).powi(2) + (p[1] + ct[1] - t[1]).powi(2)
        })
        .sum()
}

/// A random planar configuration embedded isometrically into `d` dimensions
/// (random orthonormal 2-frame), shifted and shrunk uniformly into `[0, 1]`.
/// Under uniform weights its distances are a fixed multiple of the planar
/// ones.
pub fn planted_planar(n: usize, d: usize, seed: u64) -> (FeatureMatrix, Vec<[f64; 2]>) {
    assert!(d >= 2);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let planar: Vec<[f64; 2]> = (0..n)
        .map(|_| [rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)])
        .collect();
    // Gram-Schmidt on two random directions.
    let mut u: Vec<f64> = (0..d).map(|_| rng.random_range(-1.0..1.0)).collect();
    let nu = u.iter().map(|x| x * x).sum::<f64>().sqrt();
    u.iter_mut().for_each(|x| *x /= nu);
    let mut v: Vec<f64> = (0..d).map(|_| rng.random_range(-1.0..1.0)).collect();
    let uv: f64 = u.iter().zip(&v).map(|(a, b)| a * b).sum();
    v.iter_mut().zip(&u).for_each(|(b, a)| *b -= uv * a);
    let nv = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    v.iter_mut().for_each(|x| *x /= nv);

    let embedded: Vec<Vec<f64>> = planar
        .iter()
        .map(|p| (0..d).map(|k| p[0] * u[k] + p[1] * v[k]).collect())
        .collect();
    let lo = embedded
        .iter()
        .flatten()
        .fold(f64::INFINITY, |m, &x| m.min(x));
    let hi = embedded
        .iter()
        .flatten()
        .fold(f64::NEG_INFINITY, |m, &x| m.max(x));
    let span = hi - lo;
    let values: Vec<f64> = embedded
        .iter()
        .flatten()
        .map(|&x| ((x - lo) / span).clamp(0.0, 1.0))
        .collect();
    let ids = (0..n).map(|i| format!("planted-{i}")).collect();
    (FeatureMatrix::new(n, d, values, ids).unwrap(), planar)
}

/// A random matrix with entries in `[0, 1]`.
pub fn random_features(n: usize, d: usize, rng: &mut impl Rng) -> FeatureMatrix {
    let values = (0..n * d).map(|_| rng.random_range(0.0..1.0)).collect();
    let ids = (0..n).map(|i| format!("r{i}")).collect();
    FeatureMatrix::new(n, d, values, ids).unwrap()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_sizes() {
        assert_eq!(simplex_grid(3, 0.5).len(), 6);
        assert_eq!(simplex_grid(2, 1.0).len(), 2);
        assert_eq!(simplex_grid(4, 0.1).len(), 286);
    }
}
