use super::types::Layout;
use super::MathError;

/// `p -> R p + t` with `R` orthogonal (rotation or reflection).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RigidTransform {
    pub rotation: [[f64; 2]; 2],
    pub translation: [f64; 2],
}

impl RigidTransform {
    pub const IDENTITY: RigidTransform = RigidTransform {
        rotation: [[1.0, 0.0], [0.0, 1.0]],
        translation: [0.0, 0.0],
    };

    pub fn apply(&self, p: [f64; 2]) -> [f64; 2] {
        let r = &self.rotation;
        [
            r[0][0] * p[0] + r[0][1] * p[1] + self.translation[0],
            r[1][0] * p[0] + r[1][1] * p[1] + self.translation[1],
        ]
    }

    pub fn apply_layout(&self, layout: &Layout) -> Layout {
        let mut out = layout.clone();
        for p in out.positions_mut() {
            *p = self.apply(*p);
        }
        out
    }

    pub fn is_reflection(&self) -> bool {
        let r = &self.rotation;
        r[0][0] * r[1][1] - r[0][1] * r[1][0] < 0.0
    }
}

/// Best rigid transform of `source` onto `target` over `anchors`, and the
/// resulting sum of squared anchor displacements.
///
/// In the plane the optimal rotation angle has a closed form: with centered
/// anchors, `sum t.(R s)` is `A cos + B sin` for rotations and `C cos + D sin`
/// for reflections, so each family peaks at `atan2` of its coefficients.
pub fn procrustes_fit(
    source: &Layout,
    target: &Layout,
    anchors: &[usize],
) -> Result<(RigidTransform, f64), MathError> {
    if source.len() != target.len() {
        return Err(MathError::DimensionMismatch {
            expected: target.len(),
            found: source.len(),
        });
    }
    let mut anchors = anchors.to_vec();
    anchors.sort_unstable();
    anchors.dedup();
    if anchors.len() < 2 {
        return Err(MathError::InsufficientAnchors(anchors.len()));
    }
    if let Some(&bad) = anchors.iter().find(|&&i| i >= source.len()) {
        return Err(MathError::contract(format!(
            "anchor index {bad} out of range for {} items",
            source.len()
        )));
    }

    let cs = source.centroid(&anchors);
    let ct = target.centroid(&anchors);
    let (mut dot, mut cross, mut refl_c, mut refl_d) = (0.0, 0.0, 0.0, 0.0);
    for &i in &anchors {
        let s = source.position(i);
        let t = target.position(i);
        let (sx, sy) = (s[0] - cs[0], s[1] - cs[1]);
        let (tx, ty) = (t[0] - ct[0], t[1] - ct[1]);
        dot += sx * tx + sy * ty;
        cross += sx * ty - sy * tx;
        refl_c += tx * sx - ty * sy;
        refl_d += tx * sy + ty * sx;
    }

    let rotation = if dot.hypot(cross) >= refl_c.hypot(refl_d) {
        let theta = cross.atan2(dot);
        let (sin, cos) = theta.sin_cos();
        [[cos, -sin], [sin, cos]]
    } else {
        let theta = refl_d.atan2(refl_c);
        let (sin, cos) = theta.sin_cos();
        [[cos, sin], [sin, -cos]]
    };
    let rotated_cs = [
        rotation[0][0] * cs[0] + rotation[0][1] * cs[1],
        rotation[1][0] * cs[0] + rotation[1][1] * cs[1],
    ];
    let transform = RigidTransform {
        rotation,
        translation: [ct[0] - rotated_cs[0], ct[1] - rotated_cs[1]],
    };

    let residual = anchors
        .iter()
        .map(|&i| {
            let p = transform.apply(source.position(i));
            let t = target.position(i);
            (p[0] - t[0]).powi(2) + (p[1] - t[1]).powi(2)
        })
        .sum();
    Ok((transform, residual))
}

/// `source` moved rigidly onto `target`, matching the anchor items.
pub fn procrustes_align(
    source: &Layout,
    target: &Layout,
    anchors: &[usize],
) -> Result<Layout, MathError> {
    let (transform, _) = procrustes_fit(source, target, anchors)?;
    Ok(transform.apply_layout(source))
}
