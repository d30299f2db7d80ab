use crate::error::{Error, Result};
use crate::model::{Point2, RigidTransform};

/// Closed-form least-squares rigid transform (2D Procrustes without scale)
/// minimizing `Σ ‖R·p + t − q‖²` over the pairs `(p, q)`.
pub fn estimate_rigid(pairs: &[(Point2, Point2)]) -> Result<RigidTransform> {
    if pairs.len() < 2 {
        return Err(Error::DegenerateInput(format!("{} pairs, need at least 2", pairs.len())));
    }
    let n = pairs.len() as f64;
    let (mut sp, mut sq) = (Point2::ORIGIN, Point2::ORIGIN);
    for (p, q) in pairs {
        sp = sp.add(p);
        sq = sq.add(q);
    }
    let cp = Point2::new(sp.x / n, sp.y / n);
    let cq = Point2::new(sq.x / n, sq.y / n);

    let (mut dot, mut cross, mut spread) = (0.0, 0.0, 0.0);
    for (p, q) in pairs {
        let a = p.sub(&cp);
        let b = q.sub(&cq);
        dot += a.x * b.x + a.y * b.y;
        cross += a.x * b.y - a.y * b.x;
        spread += a.x * a.x + a.y * a.y;
    }
    if spread <= f64::EPSILON * (cp.x.abs() + cp.y.abs() + 1.0).powi(2) {
        return Err(Error::DegenerateInput("all source points coincide".into()));
    }
    let rotation = cross.atan2(dot);
    let t = cq.sub(&cp.rotated(rotation));
    Ok(RigidTransform::new(rotation, t.x, t.y))
}

/// Sum of squared residuals of a transform over pairs.
pub fn rigid_residual(t: &RigidTransform, pairs: &[(Point2, Point2)]) -> f64 {
    pairs.iter().map(|(p, q)| t.apply(p).distance_squared(q)).sum()
}
