use super::types::FeatureMatrix;
use super::MathError;

/// Per-column min-max scaling to `[0, 1]`. Constant columns map to 0.5.
///
/// Output values are rounded to single precision.
pub fn normalize_features(
    rows: &[Vec<f64>],
    item_ids: Vec<String>,
) -> Result<FeatureMatrix, MathError> {
    let n = rows.len();
    if n < 2 {
        return Err(MathError::contract(format!(
            "need at least 2 items to normalize, got {n}"
        )));
    }
    let d = rows[0].len();
    for (i, r) in rows.iter().enumerate() {
        if r.len() != d {
            return Err(MathError::contract(format!(
                "row {i} has {} columns, expected {d}",
                r.len()
            )));
        }
        if let Some(column) = r.iter().position(|v| !v.is_finite()) {
            return Err(MathError::NonFinite { row: i, column });
        }
    }
    let mut values = vec![0.0; n * d];
    for k in 0..d {
        let (lo, hi) = rows
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), r| {
                (lo.min(r[k]), hi.max(r[k]))
            });
        let span = hi - lo;
        for (i, r) in rows.iter().enumerate() {
            let v = if span > 0.0 { (r[k] - lo) / span } else { 0.5 };
            values[i * d + k] = (v.clamp(0.0, 1.0) as f32) as f64;
        }
    }
    FeatureMatrix::new(n, d, values, item_ids)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ids(n: usize) -> Vec<String> {
        (0..n).map(|i| i.to_string()).collect()
    }

    fn column(f: &FeatureMatrix, k: usize) -> Vec<f64> {
        f.rows().map(|r| r[k]).collect()
    }

    #[test]
    fn min_max_scaling() {
        let f = normalize_features(&[vec![0.0], vec![5.0], vec![10.0]], ids(3)).unwrap();
        assert_eq!(column(&f, 0), vec![0.0, 0.5, 1.0]);
    }

    #[test]
    fn constant_column_maps_to_half() {
        let f = normalize_features(&[vec![7.0], vec![7.0], vec![7.0]], ids(3)).unwrap();
        assert_eq!(column(&f, 0), vec![0.5, 0.5, 0.5]);
    }

    #[test]
    fn normalized_column_is_unchanged() {
        let raw = vec![vec![0.0], vec![0.25], vec![1.0], vec![0.75]];
        let f = normalize_features(&raw, ids(4)).unwrap();
        assert_eq!(column(&f, 0), vec![0.0, 0.25, 1.0, 0.75]);
        let again: Vec<Vec<f64>> = f.rows().map(|r| r.to_vec()).collect();
        assert_eq!(normalize_features(&again, ids(4)).unwrap(), f);
    }

    #[test]
    fn reports_non_finite_coordinates() {
        let raw = vec![vec![0.0, 1.0], vec![2.0, f64::NAN], vec![1.0, 1.0]];
        assert_eq!(
            normalize_features(&raw, ids(3)),
            Err(MathError::NonFinite { row: 1, column: 1 })
        );
    }
}
