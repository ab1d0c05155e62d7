use nalgebra::{DMatrix, SymmetricEigen};

use super::distance::weighted_sq;
use super::procrustes::procrustes_align;
use super::stress::ZERO_DISTANCE;
use super::types::{CancelToken, FeatureMatrix, Layout, SolveReport, WeightVector};
use super::MathError;

#[derive(Debug, Clone)]
pub struct ForwardOptions {
    /// Starting configuration. When present the result is rigidly aligned
    /// back onto it.
    pub init: Option<Layout>,
    /// Items used for the final alignment; all items when `None`.
    pub anchors: Option<Vec<usize>>,
    pub max_iter: usize,
    /// Stop once the relative stress decrease drops below this.
    pub tolerance: f64,
    pub cancel: Option<CancelToken>,
}

impl Default for ForwardOptions {
    fn default() -> Self {
        ForwardOptions {
            init: None,
            anchors: None,
            max_iter: 300,
            tolerance: 1e-7,
            cancel: None,
        }
    }
}

/// Weighted MDS projection of `f` under `w`, started from `init` if given or
/// from a classical spectral embedding otherwise.
pub fn wmds_solve(
    f: &FeatureMatrix,
    w: &WeightVector,
    init: Option<&Layout>,
) -> Result<(Layout, SolveReport), MathError> {
    wmds_solve_with(
        f,
        w,
        &ForwardOptions {
            init: init.cloned(),
            ..ForwardOptions::default()
        },
    )
}

/// Full square matrix of weighted feature distances.
fn target_matrix(f: &FeatureMatrix, w: &WeightVector) -> Vec<f64> {
    let n = f.n_items();
    let ws = w.as_slice();
    let mut delta = vec![0.0; n * n];
    for i in 0..n {
        for j in i + 1..n {
            let v = weighted_sq(f.row(i), f.row(j), ws).sqrt();
            delta[i * n + j] = v;
            delta[j * n + i] = v;
        }
    }
    delta
}

fn check_inputs(f: &FeatureMatrix, w: &WeightVector) -> Result<(), MathError> {
    if w.len() != f.n_features() {
        return Err(MathError::DimensionMismatch {
            expected: f.n_features(),
            found: w.len(),
        });
    }
    if w.as_slice().iter().any(|v| !v.is_finite()) {
        return Err(MathError::contract("weights must be finite"));
    }
    Ok(())
}

/// Classical (Torgerson) embedding of the weighted distances: the top two
/// eigenvectors of the double-centered squared distance matrix. Each axis is
/// signed so that its largest-magnitude coordinate is positive.
pub fn classical_embedding(f: &FeatureMatrix, w: &WeightVector) -> Result<Layout, MathError> {
    check_inputs(f, w)?;
    Ok(classical_from_targets(&target_matrix(f, w), f.n_items()))
}

fn classical_from_targets(delta: &[f64], n: usize) -> Layout {
    let sq = DMatrix::from_fn(n, n, |i, j| delta[i * n + j] * delta[i * n + j]);
    let row_means: Vec<f64> = (0..n).map(|i| sq.row(i).sum() / n as f64).collect();
    let grand = row_means.iter().sum::<f64>() / n as f64;
    let b = DMatrix::from_fn(n, n, |i, j| {
        -0.5 * (sq[(i, j)] - row_means[i] - row_means[j] + grand)
    });
    let eig = SymmetricEigen::new(b);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));

    let mut positions = vec![[0.0; 2]; n];
    for (axis, &k) in order.iter().take(2).enumerate() {
        let lambda = eig.eigenvalues[k];
        if lambda <= 0.0 {
            continue;
        }
        let col = eig.eigenvectors.column(k);
        let pivot = (0..n).fold(0, |best, i| {
            if col[i].abs() > col[best].abs() {
                i
            } else {
                best
            }
        });
        let sign = if col[pivot] < 0.0 { -1.0 } else { 1.0 };
        let root = lambda.sqrt();
        for i in 0..n {
            positions[i][axis] = sign * col[i] * root;
        }
    }
    Layout::new(positions).unwrap_or_else(|_| Layout::zeros(n))
}

fn layout_distances(x: &[[f64; 2]], out: &mut [f64]) {
    let n = x.len();
    for i in 0..n {
        out[i * n + i] = 0.0;
        for j in i + 1..n {
            let v = (x[i][0] - x[j][0]).hypot(x[i][1] - x[j][1]);
            out[i * n + j] = v;
            out[j * n + i] = v;
        }
    }
}

/// Guttman transform `X+ = (1/n) B(X) X` for unit pair weights.
fn guttman(x: &[[f64; 2]], dist: &[f64], delta: &[f64]) -> Vec<[f64; 2]> {
    let n = x.len();
    let mut next = vec![[0.0; 2]; n];
    for i in 0..n {
        let mut acc = [0.0; 2];
        for j in 0..n {
            if i == j {
                continue;
            }
            let d = dist[i * n + j];
            if d < ZERO_DISTANCE {
                continue;
            }
            let ratio = delta[i * n + j] / d;
            acc[0] += ratio * (x[i][0] - x[j][0]);
            acc[1] += ratio * (x[i][1] - x[j][1]);
        }
        next[i] = [acc[0] / n as f64, acc[1] / n as f64];
    }
    next
}

pub fn wmds_solve_with(
    f: &FeatureMatrix,
    w: &WeightVector,
    opts: &ForwardOptions,
) -> Result<(Layout, SolveReport), MathError> {
    check_inputs(f, w)?;
    let n = f.n_items();
    if let Some(init) = &opts.init {
        if init.len() != n {
            return Err(MathError::DimensionMismatch {
                expected: n,
                found: init.len(),
            });
        }
    }
    let delta = target_matrix(f, w);
    let eta: f64 = delta.iter().map(|v| v * v).sum::<f64>() / 2.0;

    if eta == 0.0 {
        // Every item coincides in feature space; the optimum collapses them.
        let centre = opts
            .init
            .as_ref()
            .map(|l| l.centroid(&(0..n).collect::<Vec<_>>()))
            .unwrap_or([0.0; 2]);
        let layout = Layout::new(vec![centre; n])?;
        let report = SolveReport {
            final_objective: 0.0,
            iterations: 0,
            converged: true,
            objective_trace: vec![0.0],
            warnings: Vec::new(),
        };
        return Ok((layout, report));
    }

    let mut x: Vec<[f64; 2]> = match &opts.init {
        Some(init) => init.positions().to_vec(),
        None => classical_from_targets(&delta, n).positions().to_vec(),
    };
    let mut dist = vec![0.0; n * n];
    layout_distances(&x, &mut dist);
    if dist.iter().all(|&v| v < ZERO_DISTANCE) {
        x = classical_from_targets(&delta, n).positions().to_vec();
        layout_distances(&x, &mut dist);
    }

    let mut trace = Vec::new();
    let mut iterations = 0;
    let mut converged = false;
    let mut best_x = x.clone();
    loop {
        // Rescale the iterate to its optimal size; the Guttman step from a
        // rescaled point then never increases the scale-free stress.
        let (mut num, mut den) = (0.0, 0.0);
        for i in 0..n {
            for j in i + 1..n {
                num += dist[i * n + j] * delta[i * n + j];
                den += dist[i * n + j] * dist[i * n + j];
            }
        }
        let scale = if den > 0.0 { num / den } else { 0.0 };
        let mut raw = 0.0;
        for i in 0..n {
            for j in i + 1..n {
                let r = scale * dist[i * n + j] - delta[i * n + j];
                raw += r * r;
            }
        }
        let value = raw / eta;
        if let Some(&prev) = trace.last() {
            if value > prev {
                // Rounding noise at the optimum; keep the previous iterate.
                converged = true;
                break;
            }
        }
        for p in x.iter_mut() {
            p[0] *= scale;
            p[1] *= scale;
        }
        for v in dist.iter_mut() {
            *v *= scale;
        }
        best_x.clone_from(&x);
        let prev = trace.last().copied();
        trace.push(value);

        if value <= f64::EPSILON * f64::EPSILON {
            converged = true;
            break;
        }
        if let Some(prev) = prev {
            if prev - value <= opts.tolerance * prev {
                converged = true;
                break;
            }
        }
        if iterations >= opts.max_iter {
            break;
        }
        if opts.cancel.as_ref().is_some_and(|c| c.is_cancelled()) {
            break;
        }
        x = guttman(&x, &dist, &delta);
        layout_distances(&x, &mut dist);
        iterations += 1;
    }

    let mut layout = Layout::new(best_x)?;
    if let Some(init) = &opts.init {
        let all: Vec<usize>;
        let anchors = match &opts.anchors {
            Some(a) if a.len() >= 2 => a.as_slice(),
            _ => {
                all = (0..n).collect();
                &all
            }
        };
        layout = procrustes_align(&layout, init, anchors)?;
    }
    let report = SolveReport {
        final_objective: *trace.last().unwrap_or(&0.0),
        iterations,
        converged,
        objective_trace: trace,
        warnings: Vec::new(),
    };
    Ok((layout, report))
}
