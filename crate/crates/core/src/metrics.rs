//! Distance functions between features, points and point sets, plus the
//! canonical (centered, mean-angle rotated) frame they are evaluated in.

use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{wrap_angle, Correspondence, Feature, FeatureVariant, Point2, PointSet, RigidTransform};

/// Resultant lengths below this make the circular mean undefined.
pub const MIN_RESULTANT: f64 = 1e-9;

/// Default insertion/deletion cost.
pub const DEFAULT_EPSILON: f64 = 0.1;

/// Weights of the point distance. `position_scale` divides positional
/// distances; `None` lets the pipeline substitute the split radius.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricConfig {
    pub w_feature: f64,
    pub w_position: f64,
    pub position_scale: Option<f64>,
}

impl Default for MetricConfig {
    fn default() -> Self {
        Self { w_feature: 0.5, w_position: 0.5, position_scale: None }
    }
}

impl MetricConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.w_feature >= 0.0 && self.w_position >= 0.0) {
            return Err(Error::Invalid("metric weights must be non-negative".into()));
        }
        if self.w_feature + self.w_position <= 0.0 {
            return Err(Error::Invalid("metric weights must not both be zero".into()));
        }
        if let Some(s) = self.position_scale {
            if !(s > 0.0 && s.is_finite()) {
                return Err(Error::Invalid(format!("position scale {s} must be positive")));
            }
        }
        Ok(())
    }

    /// Fills in an automatic position scale.
    pub fn with_default_scale(mut self, scale: f64) -> Self {
        if self.position_scale.is_none() {
            self.position_scale = Some(scale);
        }
        self
    }

    pub fn scale(&self) -> f64 {
        self.position_scale.unwrap_or(1.0)
    }
}

/// Angular distance scaled to `[0, 1]` (antipodal angles are at distance 1).
pub fn cyclical_distance(a: f64, b: f64) -> f64 {
    let d = (a - b).abs() % TAU;
    d.min(TAU - d) / PI
}

/// Distance between two features of the same variant. Minutiae of different
/// kinds cannot be mapped and are infinitely far apart.
pub fn feature_distance(f1: &Feature, f2: &Feature) -> Result<f64> {
    match (f1, f2) {
        (Feature::Vector { values: a }, Feature::Vector { values: b }) if a.len() != b.len() => {
            Err(Error::VariantMismatch(format!("vector dimensions {} and {}", a.len(), b.len())))
        }
        (Feature::Minutia { .. }, Feature::Minutia { .. })
        | (Feature::Vector { .. }, Feature::Vector { .. }) => Ok(feature_cost(f1, f2)),
        _ => Err(Error::VariantMismatch(format!(
            "{} feature compared with {} feature",
            f1.variant(),
            f2.variant()
        ))),
    }
}

/// Unchecked [`feature_distance`] for sets already known to be compatible.
#[inline]
pub(crate) fn feature_cost(f1: &Feature, f2: &Feature) -> f64 {
    match (f1, f2) {
        (Feature::Minutia { angle: a, kind: ka }, Feature::Minutia { angle: b, kind: kb }) => {
            if ka != kb {
                f64::INFINITY
            } else {
                cyclical_distance(*a, *b)
            }
        }
        (Feature::Vector { values: a }, Feature::Vector { values: b }) => {
            a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt() / 2.0
        }
        _ => f64::INFINITY,
    }
}

/// Circular mean of a set of angles (direction of the summed unit vectors).
pub fn circular_mean(angles: impl IntoIterator<Item = f64>) -> Result<f64> {
    let (mut s, mut c, mut n) = (0.0, 0.0, 0usize);
    for a in angles {
        let (sa, ca) = a.sin_cos();
        s += sa;
        c += ca;
        n += 1;
    }
    if n == 0 {
        return Err(Error::UndefinedMean(0.0));
    }
    let resultant = s.hypot(c) / n as f64;
    if resultant < MIN_RESULTANT {
        return Err(Error::UndefinedMean(resultant));
    }
    Ok(wrap_angle(s.atan2(c)))
}

/// Circular mean of the minutia angles of a set.
pub fn mean_angle(s: &PointSet) -> Result<f64> {
    if s.variant() != Some(FeatureVariant::Minutia) {
        return Err(Error::VariantMismatch("mean angle needs minutia features".into()));
    }
    circular_mean(s.features().iter().filter_map(Feature::angle))
}

/// Replaces every minutia angle by its offset from the set's circular mean.
pub fn normalize_angles(s: &PointSet) -> Result<PointSet> {
    let mean = mean_angle(s)?;
    Ok(s.with_features(s.features().iter().map(|f| f.rotated(-mean)).collect()))
}

/// Expresses positions in the frame centered at `center` and rotated by
/// `-mean_angle`.
pub fn canonical_positions(s: &PointSet, center: Point2, mean_angle: f64) -> Vec<Point2> {
    s.points().iter().map(|p| p.sub(&center).rotated(-mean_angle)).collect()
}

/// A point set re-expressed in a canonical frame. `frame` maps canonical
/// coordinates back to the original image coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct CanonicalSet {
    pub positions: Vec<Point2>,
    pub features: Vec<Feature>,
    pub frame: RigidTransform,
}

impl CanonicalSet {
    /// Translates by `-center`, rotates positions and minutia angles by
    /// `-rotation`.
    pub fn new(set: &PointSet, center: Point2, rotation: f64) -> Self {
        Self {
            positions: canonical_positions(set, center, rotation),
            features: set.features().iter().map(|f| f.rotated(-rotation)).collect(),
            frame: RigidTransform::new(rotation, center.x, center.y),
        }
    }

    /// Frame of the set's own centroid and circular mean angle. Vector sets,
    /// and minutia sets whose mean is undefined, get rotation 0.
    pub fn mean_angle_frame(set: &PointSet, center: Point2) -> Self {
        let rotation = match set.variant() {
            Some(FeatureVariant::Minutia) => mean_angle(set).unwrap_or_else(|e| {
                log::warn!("{e}; using rotation 0 for the canonical frame");
                0.0
            }),
            _ => 0.0,
        };
        Self::new(set, center, rotation)
    }

    /// Identity frame: coordinates are used as given.
    pub fn identity(set: &PointSet) -> Self {
        Self {
            positions: set.points().to_vec(),
            features: set.features().to_vec(),
            frame: RigidTransform::IDENTITY,
        }
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    /// Applies a transform within the canonical frame (positions and angles).
    pub fn transformed(&self, t: &RigidTransform) -> CanonicalSet {
        CanonicalSet {
            positions: self.positions.iter().map(|p| t.apply(p)).collect(),
            features: self.features.iter().map(|f| f.rotated(t.rotation)).collect(),
            frame: self.frame.compose(&t.inverse()),
        }
    }
}

/// Weighted sum of feature distance and scaled position distance.
/// Infinite feature distances propagate.
pub fn point_distance(
    cfg: &MetricConfig,
    p_partial: &Point2,
    p_full: &Point2,
    f_partial: &Feature,
    f_full: &Feature,
) -> f64 {
    let fd = feature_cost(f_partial, f_full);
    if fd.is_infinite() {
        return f64::INFINITY;
    }
    let feature_term = if cfg.w_feature == 0.0 { 0.0 } else { cfg.w_feature * fd };
    feature_term + cfg.w_position * p_partial.distance(p_full) / cfg.scale()
}

/// Mean per-partial-point cost of a correspondence: matched pairs pay their
/// point distance, unmatched partial points pay `epsilon`.
pub fn set_distance(
    cfg: &MetricConfig,
    epsilon: f64,
    corr: &Correspondence,
    partial: &CanonicalSet,
    full: &CanonicalSet,
) -> Result<f64> {
    if partial.is_empty() {
        return Err(Error::EmptyPartial);
    }
    let matched = matched_sum(cfg, corr, partial, full);
    Ok((matched + epsilon * corr.unmatched_partial.len() as f64) / partial.len() as f64)
}

/// Sum of point distances over the matched pairs of a correspondence.
pub fn matched_sum(
    cfg: &MetricConfig,
    corr: &Correspondence,
    partial: &CanonicalSet,
    full: &CanonicalSet,
) -> f64 {
    corr.pairs
        .iter()
        .map(|&(i, j)| {
            point_distance(
                cfg,
                &partial.positions[i],
                &full.positions[j],
                &partial.features[i],
                &full.features[j],
            )
        })
        .sum()
}

/// Matched-pair distance per inlier; infinite when there are no inliers.
pub fn inlier_normalized_distance(sum_matched: f64, inliers: usize) -> f64 {
    if inliers == 0 {
        f64::INFINITY
    } else {
        sum_matched / inliers as f64
    }
}

/// Median of `values`, sorting them in place. NaN for an empty slice.
pub(crate) fn median(values: &mut [f64]) -> f64 {
    values.sort_by(f64::total_cmp);
    let n = values.len();
    if n == 0 {
        f64::NAN
    } else if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::MinutiaKind::{Bifurcation, Termination};
    use std::f64::consts::FRAC_PI_2;

    fn minutiae(pts: &[(f64, f64, f64)]) -> PointSet {
        PointSet::new(
            pts.iter().map(|&(x, y, _)| Point2::new(x, y)).collect(),
            pts.iter().map(|&(_, _, a)| Feature::minutia(a, Termination)).collect(),
        )
        .unwrap()
    }

    #[test]
    fn cyclical_distance_examples() {
        assert_eq!(cyclical_distance(0.0, 0.0), 0.0);
        let d = cyclical_distance(350f64.to_radians(), 10f64.to_radians());
        assert!((d - 20.0 / 180.0).abs() < 1e-12);
        assert!((cyclical_distance(FRAC_PI_2, 3.0 * FRAC_PI_2) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn feature_distance_examples() {
        let a = Feature::minutia(30f64.to_radians(), Termination);
        let b = Feature::minutia(30f64.to_radians(), Bifurcation);
        assert_eq!(feature_distance(&a, &b).unwrap(), f64::INFINITY);
        let e1 = Feature::vector(vec![1.0, 0.0]);
        let e2 = Feature::vector(vec![0.0, 1.0]);
        assert_eq!(feature_distance(&e1, &e1).unwrap(), 0.0);
        assert!((feature_distance(&e1, &e2).unwrap() - 2f64.sqrt() / 2.0).abs() < 1e-15);
        assert!(matches!(feature_distance(&a, &e1), Err(Error::VariantMismatch(_))));
        let e3 = Feature::vector(vec![1.0, 0.0, 0.0]);
        assert!(matches!(feature_distance(&e3, &e1), Err(Error::VariantMismatch(_))));
    }

    #[test]
    fn normalize_angles_examples() {
        let s = minutiae(&[(0.0, 0.0, 1.3), (1.0, 0.0, 1.3), (2.0, 5.0, 1.3)]);
        let n = normalize_angles(&s).unwrap();
        for f in n.features() {
            assert!(cyclical_distance(f.angle().unwrap(), 0.0) < 1e-12);
        }
        assert_eq!(n.points(), s.points());

        // Mean of {0, π/2} from summed unit vectors: atan2(1, 1) = π/4.
        let s = minutiae(&[(0.0, 0.0, 0.0), (1.0, 0.0, FRAC_PI_2)]);
        let n = normalize_angles(&s).unwrap();
        let a: Vec<f64> = n.features().iter().map(|f| f.angle().unwrap()).collect();
        assert!((a[0] - (TAU - PI / 4.0)).abs() < 1e-12);
        assert!((a[1] - PI / 4.0).abs() < 1e-12);
    }

    #[test]
    fn normalize_angles_degenerate_mean() {
        let s = minutiae(&[(0.0, 0.0, 0.0), (1.0, 0.0, PI)]);
        assert!(matches!(normalize_angles(&s), Err(Error::UndefinedMean(_))));
    }

    #[test]
    fn normalize_angles_is_rotation_invariant() {
        let s = minutiae(&[(0.0, 0.0, 0.2), (1.0, 0.0, 1.1), (2.0, 1.0, 5.9)]);
        let shifted = s.with_features(s.features().iter().map(|f| f.rotated(2.4)).collect());
        let a = normalize_angles(&s).unwrap();
        let b = normalize_angles(&shifted).unwrap();
        for (fa, fb) in a.features().iter().zip(b.features()) {
            assert!(cyclical_distance(fa.angle().unwrap(), fb.angle().unwrap()) < 1e-12);
        }
    }

    #[test]
    fn canonical_positions_examples() {
        let s = minutiae(&[(3.0, -2.0, 0.0), (0.0, 1.0, 0.0)]);
        let c = canonical_positions(&s, Point2::new(3.0, -2.0), 0.0);
        assert_eq!(c[0], Point2::ORIGIN);
        // Rotating (0,1) by -π/2 gives (1,0).
        let c = canonical_positions(&s, Point2::ORIGIN, FRAC_PI_2);
        assert!((c[1].x - 1.0).abs() < 1e-15 && c[1].y.abs() < 1e-15);
    }

    #[test]
    fn canonical_frame_round_trips() {
        let s = minutiae(&[(3.0, -2.0, 0.4), (0.5, 1.0, 2.0), (7.0, 4.0, 6.0)]);
        let c = CanonicalSet::mean_angle_frame(&s, s.centroid().unwrap());
        for (p, q) in c.positions.iter().zip(s.points()) {
            let back = c.frame.apply(p);
            assert!(back.distance(q) < 1e-12);
        }
    }

    #[test]
    fn point_distance_examples() {
        let cfg = MetricConfig { position_scale: Some(1.0), ..Default::default() };
        let f = Feature::minutia(1.0, Termination);
        let p = Point2::new(1.0, 2.0);
        assert_eq!(point_distance(&cfg, &p, &p, &f, &f), 0.0);

        let only_pos = MetricConfig { w_feature: 0.0, w_position: 0.7, position_scale: Some(1.0) };
        let d = point_distance(&only_pos, &Point2::ORIGIN, &Point2::new(3.0, 0.0), &f, &f);
        assert!((d - 3.0 * 0.7).abs() < 1e-15);

        let g = Feature::minutia(1.0, Bifurcation);
        assert_eq!(point_distance(&cfg, &p, &p, &f, &g), f64::INFINITY);
    }

    #[test]
    fn set_distance_examples() {
        let cfg = MetricConfig { position_scale: Some(1.0), ..Default::default() };
        let s = minutiae(&[(0.0, 0.0, 0.1), (1.0, 0.0, 0.2)]);
        let c = CanonicalSet::identity(&s);
        let perfect = Correspondence::from_pairs(vec![(0, 0), (1, 1)], 2, 2);
        assert_eq!(set_distance(&cfg, 0.1, &perfect, &c, &c).unwrap(), 0.0);

        // One pair at distance 0.4 (position 0.8 apart, w_position 0.5), one
        // unmatched partial point at ε = 0.1: (0.4 + 0.1) / 2.
        let full = minutiae(&[(0.8, 0.0, 0.1), (9.0, 9.0, 0.2)]);
        let fc = CanonicalSet::identity(&full);
        let corr = Correspondence::from_pairs(vec![(0, 0)], 2, 2);
        let d = set_distance(&cfg, 0.1, &corr, &c, &fc).unwrap();
        assert!((d - 0.25).abs() < 1e-12);

        let empty = CanonicalSet { positions: vec![], features: vec![], frame: RigidTransform::IDENTITY };
        let none = Correspondence::default();
        assert_eq!(set_distance(&cfg, 0.1, &none, &empty, &fc), Err(Error::EmptyPartial));
    }

    #[test]
    fn set_distance_is_permutation_invariant() {
        let cfg = MetricConfig { position_scale: Some(2.0), ..Default::default() };
        let p = minutiae(&[(0.0, 0.0, 0.1), (1.0, 0.5, 0.2), (2.0, 3.0, 4.0)]);
        let f = minutiae(&[(0.1, 0.0, 0.1), (1.0, 0.4, 0.3), (5.0, 5.0, 1.0)]);
        let corr = Correspondence::from_pairs(vec![(0, 0), (1, 1)], 3, 3);
        let d0 = set_distance(&cfg, 0.1, &corr, &CanonicalSet::identity(&p), &CanonicalSet::identity(&f)).unwrap();
        // Reverse the partial indices and the full indices.
        let p2 = p.subset(&[2, 1, 0]);
        let f2 = f.subset(&[2, 1, 0]);
        let corr2 = Correspondence::from_pairs(vec![(2, 2), (1, 1)], 3, 3);
        let d1 = set_distance(&cfg, 0.1, &corr2, &CanonicalSet::identity(&p2), &CanonicalSet::identity(&f2)).unwrap();
        assert!((d0 - d1).abs() < 1e-15);
    }

    #[test]
    fn inlier_normalized_distance_examples() {
        assert!((inlier_normalized_distance(1.2, 4) - 0.3).abs() < 1e-15);
        assert_eq!(inlier_normalized_distance(1.2, 0), f64::INFINITY);
        assert!((inlier_normalized_distance(2.4, 4) - 2.0 * inlier_normalized_distance(1.2, 4)).abs() < 1e-15);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn cyclical_distance_is_a_metric(a in -20.0..20.0f64, b in -20.0..20.0f64, c in -20.0..20.0f64) {
                let ab = cyclical_distance(a, b);
                prop_assert!((0.0..=1.0).contains(&ab));
                prop_assert!((ab - cyclical_distance(b, a)).abs() < 1e-12);
                prop_assert!(cyclical_distance(a, a) == 0.0);
                prop_assert!(ab <= cyclical_distance(a, c) + cyclical_distance(c, b) + 1e-12);
            }

            #[test]
            fn canonical_frame_is_rigid_motion_invariant(
                pts in proptest::collection::vec((-50.0..50.0f64, -50.0..50.0f64, 0.0..1.5f64), 3..20),
                rot in 0.0..TAU, dx in -100.0..100.0f64, dy in -100.0..100.0f64,
            ) {
                // Angles confined to a half-turn keep the circular mean well defined.
                let s = minutiae(&pts);
                let g = RigidTransform::new(rot, dx, dy);
                let moved = s.transformed(&g);
                let a = CanonicalSet::mean_angle_frame(&s, s.centroid().unwrap());
                let b = CanonicalSet::mean_angle_frame(&moved, moved.centroid().unwrap());
                for (p, q) in a.positions.iter().zip(&b.positions) {
                    prop_assert!(p.distance(q) < 1e-6);
                }
                for (f, h) in a.features.iter().zip(&b.features) {
                    prop_assert!(cyclical_distance(f.angle().unwrap(), h.angle().unwrap()) < 1e-6);
                }
                let cfg = MetricConfig { position_scale: Some(10.0), ..Default::default() };
                let n = s.len();
                let corr = Correspondence::from_pairs((0..n / 2).map(|i| (i, n - 1 - i)).collect(), n, n);
                let d0 = set_distance(&cfg, 0.1, &corr, &a, &a).unwrap();
                let d1 = set_distance(&cfg, 0.1, &corr, &b, &b).unwrap();
                prop_assert!((d0 - d1).abs() < 1e-6);
            }
        }
    }
}
