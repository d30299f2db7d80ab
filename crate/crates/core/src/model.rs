//! Value types shared across the library: points, features, point sets,
//! rigid transforms and correspondences.

use std::f64::consts::TAU;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance on the Euclidean norm of an ingested feature vector.
pub const UNIT_NORM_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub const ORIGIN: Point2 = Point2 { x: 0.0, y: 0.0 };

    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    pub fn distance(&self, other: &Point2) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    pub fn distance_squared(&self, other: &Point2) -> f64 {
        let dx = self.x - other.x;
        let dy = self.y - other.y;
        dx * dx + dy * dy
    }

    pub fn sub(&self, other: &Point2) -> Point2 {
        Point2::new(self.x - other.x, self.y - other.y)
    }

    pub fn add(&self, other: &Point2) -> Point2 {
        Point2::new(self.x + other.x, self.y + other.y)
    }

    pub fn norm(&self) -> f64 {
        self.x.hypot(self.y)
    }

    /// Rotates the point about the origin.
    pub fn rotated(&self, angle: f64) -> Point2 {
        let (s, c) = angle.sin_cos();
        Point2::new(c * self.x - s * self.y, s * self.x + c * self.y)
    }
}

/// Centroid of a non-empty slice of points.
pub fn centroid(points: &[Point2]) -> Option<Point2> {
    if points.is_empty() {
        return None;
    }
    let n = points.len() as f64;
    let (sx, sy) = points.iter().fold((0.0, 0.0), |(sx, sy), p| (sx + p.x, sy + p.y));
    Some(Point2::new(sx / n, sy / n))
}

/// Reduces an angle into `[0, 2π)`.
pub fn wrap_angle(angle: f64) -> f64 {
    let a = angle.rem_euclid(TAU);
    // rem_euclid can round up to exactly TAU for tiny negative inputs.
    if a >= TAU {
        0.0
    } else {
        a
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MinutiaKind {
    Termination,
    Bifurcation,
}

impl MinutiaKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            MinutiaKind::Termination => "termination",
            MinutiaKind::Bifurcation => "bifurcation",
        }
    }
}

impl fmt::Display for MinutiaKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Descriptor attached to a salient point.
#[derive(Debug, Clone, PartialEq)]
pub enum Feature {
    /// Ridge event with a direction in radians, `[0, 2π)`.
    Minutia { angle: f64, kind: MinutiaKind },
    /// Unit-normalized descriptor (or the zero vector).
    Vector { values: Vec<f64> },
}

/// Which of the two feature variants a point set carries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FeatureVariant {
    Minutia,
    Vector,
}

impl FeatureVariant {
    pub fn as_str(&self) -> &'static str {
        match self {
            FeatureVariant::Minutia => "minutia",
            FeatureVariant::Vector => "vector",
        }
    }
}

impl fmt::Display for FeatureVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl Feature {
    /// Builds a minutia feature, wrapping the angle into `[0, 2π)`.
    pub fn minutia(angle: f64, kind: MinutiaKind) -> Feature {
        Feature::Minutia { angle: wrap_angle(angle), kind }
    }

    /// Builds a vector feature, normalizing it to unit length. Zero vectors
    /// stay zero.
    pub fn vector(values: Vec<f64>) -> Feature {
        let norm = values.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm > 0.0 && norm.is_finite() {
            Feature::Vector { values: values.into_iter().map(|v| v / norm).collect() }
        } else {
            Feature::Vector { values }
        }
    }

    pub fn variant(&self) -> FeatureVariant {
        match self {
            Feature::Minutia { .. } => FeatureVariant::Minutia,
            Feature::Vector { .. } => FeatureVariant::Vector,
        }
    }

    pub fn angle(&self) -> Option<f64> {
        match self {
            Feature::Minutia { angle, .. } => Some(*angle),
            Feature::Vector { .. } => None,
        }
    }

    /// Dimension of a vector feature; minutiae report 0.
    pub fn dimension(&self) -> usize {
        match self {
            Feature::Minutia { .. } => 0,
            Feature::Vector { values } => values.len(),
        }
    }

    /// Returns the same feature with its angle shifted by `delta` (vector
    /// features are returned unchanged).
    pub fn rotated(&self, delta: f64) -> Feature {
        match self {
            Feature::Minutia { angle, kind } => Feature::minutia(angle + delta, *kind),
            Feature::Vector { .. } => self.clone(),
        }
    }

    fn validate(&self) -> std::result::Result<(), String> {
        match self {
            Feature::Minutia { angle, .. } => {
                if !angle.is_finite() || *angle < 0.0 || *angle >= TAU {
                    return Err(format!("minutia angle {angle} outside [0, 2π)"));
                }
            }
            Feature::Vector { values } => {
                if values.is_empty() {
                    return Err("vector feature has dimension 0".into());
                }
                if values.iter().any(|v| !v.is_finite()) {
                    return Err("vector feature has non-finite component".into());
                }
                let norm = values.iter().map(|v| v * v).sum::<f64>().sqrt();
                if norm != 0.0 && (norm - 1.0).abs() > UNIT_NORM_TOL {
                    return Err(format!("vector feature norm {norm} is neither 0 nor 1"));
                }
            }
        }
        Ok(())
    }
}

/// Salient points of one image together with their features.
#[derive(Debug, Clone, PartialEq)]
pub struct PointSet {
    points: Vec<Point2>,
    features: Vec<Feature>,
    pub label: Option<String>,
    pub order_index: Option<i64>,
}

impl PointSet {
    /// Validates and builds a point set. All features must share one variant
    /// (and one dimension for vectors); positions must be finite.
    pub fn new(points: Vec<Point2>, features: Vec<Feature>) -> Result<Self> {
        if points.len() != features.len() {
            return Err(Error::Invalid(format!(
                "{} points but {} features",
                points.len(),
                features.len()
            )));
        }
        for (i, p) in points.iter().enumerate() {
            if !p.is_finite() {
                return Err(Error::Invalid(format!("point {i} has non-finite coordinates")));
            }
        }
        if let Some(first) = features.first() {
            let variant = first.variant();
            let dim = first.dimension();
            for (i, f) in features.iter().enumerate() {
                f.validate().map_err(|m| Error::Invalid(format!("feature {i}: {m}")))?;
                if f.variant() != variant {
                    return Err(Error::VariantMismatch(format!(
                        "feature {i} is {} but the set is {}",
                        f.variant(),
                        variant
                    )));
                }
                if f.dimension() != dim {
                    return Err(Error::VariantMismatch(format!(
                        "feature {i} has dimension {} but the set uses {dim}",
                        f.dimension()
                    )));
                }
            }
        }
        Ok(Self { points, features, label: None, order_index: None })
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = Some(label.into());
        self
    }

    pub fn with_order_index(mut self, index: i64) -> Self {
        self.order_index = Some(index);
        self
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[Point2] {
        &self.points
    }

    pub fn features(&self) -> &[Feature] {
        &self.features
    }

    /// Variant of the set's features, `None` for an empty set.
    pub fn variant(&self) -> Option<FeatureVariant> {
        self.features.first().map(Feature::variant)
    }

    pub fn dimension(&self) -> usize {
        self.features.first().map_or(0, Feature::dimension)
    }

    pub fn centroid(&self) -> Option<Point2> {
        centroid(&self.points)
    }

    /// Largest distance from the centroid to any point.
    pub fn bounding_radius(&self) -> f64 {
        match self.centroid() {
            Some(c) => self.points.iter().map(|p| p.distance(&c)).fold(0.0, f64::max),
            None => 0.0,
        }
    }

    /// New set made of the points at `indices`, keeping label and order.
    pub fn subset(&self, indices: &[usize]) -> PointSet {
        PointSet {
            points: indices.iter().map(|&i| self.points[i]).collect(),
            features: indices.iter().map(|&i| self.features[i].clone()).collect(),
            label: self.label.clone(),
            order_index: self.order_index,
        }
    }

    /// Applies a rigid motion to positions and shifts minutia angles by the
    /// same rotation.
    pub fn transformed(&self, t: &RigidTransform) -> PointSet {
        PointSet {
            points: self.points.iter().map(|p| t.apply(p)).collect(),
            features: self.features.iter().map(|f| f.rotated(t.rotation)).collect(),
            label: self.label.clone(),
            order_index: self.order_index,
        }
    }

    /// Same set with features replaced; used internally where the variant is
    /// known to be preserved.
    pub(crate) fn with_features(&self, features: Vec<Feature>) -> PointSet {
        debug_assert_eq!(features.len(), self.points.len());
        PointSet {
            points: self.points.clone(),
            features,
            label: self.label.clone(),
            order_index: self.order_index,
        }
    }

    /// Checks that two sets can be compared point by point.
    pub fn check_compatible(&self, other: &PointSet) -> Result<()> {
        match (self.variant(), other.variant()) {
            (Some(a), Some(b)) if a != b => {
                Err(Error::VariantMismatch(format!("{a} set compared with {b} set")))
            }
            (Some(FeatureVariant::Vector), Some(FeatureVariant::Vector))
                if self.dimension() != other.dimension() =>
            {
                Err(Error::VariantMismatch(format!(
                    "vector dimension {} compared with {}",
                    self.dimension(),
                    other.dimension()
                )))
            }
            _ => Ok(()),
        }
    }
}

/// Rotation about the origin followed by a translation:
/// `p ↦ R(rotation)·p + (dx, dy)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RigidTransform {
    pub rotation: f64,
    pub dx: f64,
    pub dy: f64,
}

impl Default for RigidTransform {
    fn default() -> Self {
        Self::IDENTITY
    }
}

impl RigidTransform {
    pub const IDENTITY: RigidTransform = RigidTransform { rotation: 0.0, dx: 0.0, dy: 0.0 };

    pub const fn new(rotation: f64, dx: f64, dy: f64) -> Self {
        Self { rotation, dx, dy }
    }

    pub const fn rotation(angle: f64) -> Self {
        Self { rotation: angle, dx: 0.0, dy: 0.0 }
    }

    pub const fn translation(dx: f64, dy: f64) -> Self {
        Self { rotation: 0.0, dx, dy }
    }

    pub fn apply(&self, p: &Point2) -> Point2 {
        let (s, c) = self.rotation.sin_cos();
        Point2::new(c * p.x - s * p.y + self.dx, s * p.x + c * p.y + self.dy)
    }

    /// `self ∘ other`: applies `other` first.
    pub fn compose(&self, other: &RigidTransform) -> RigidTransform {
        let t = self.apply(&Point2::new(other.dx, other.dy));
        RigidTransform::new(self.rotation + other.rotation, t.x, t.y)
    }

    pub fn inverse(&self) -> RigidTransform {
        let t = Point2::new(-self.dx, -self.dy).rotated(-self.rotation);
        RigidTransform::new(-self.rotation, t.x, t.y)
    }

    /// Rotation wrapped into `(-π, π]`.
    pub fn normalized_rotation(&self) -> f64 {
        let r = wrap_angle(self.rotation);
        if r > std::f64::consts::PI {
            r - TAU
        } else {
            r
        }
    }
}

/// Free-function form of [`RigidTransform::apply`].
pub fn apply_transform(t: &RigidTransform, p: &Point2) -> Point2 {
    t.apply(p)
}

/// Free-function form of [`RigidTransform::compose`].
pub fn compose(a: &RigidTransform, b: &RigidTransform) -> RigidTransform {
    a.compose(b)
}

/// Injective partial mapping between partial indices and full indices.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Correspondence {
    pub pairs: Vec<(usize, usize)>,
    pub unmatched_partial: Vec<usize>,
    pub unmatched_full: Vec<usize>,
}

impl Correspondence {
    /// Builds a correspondence from matched pairs, filling the unmatched
    /// lists. Pairs are sorted by partial index.
    pub fn from_pairs(mut pairs: Vec<(usize, usize)>, n_partial: usize, n_full: usize) -> Self {
        pairs.sort_unstable();
        let mut used_p = vec![false; n_partial];
        let mut used_f = vec![false; n_full];
        for &(i, j) in &pairs {
            used_p[i] = true;
            used_f[j] = true;
        }
        let unmatched_partial = (0..n_partial).filter(|&i| !used_p[i]).collect();
        let unmatched_full = (0..n_full).filter(|&j| !used_f[j]).collect();
        Self { pairs, unmatched_partial, unmatched_full }
    }

    /// Checks bijectivity and coverage against set sizes.
    pub fn validate(&self, n_partial: usize, n_full: usize) -> Result<()> {
        let mut seen_p = vec![false; n_partial];
        let mut seen_f = vec![false; n_full];
        let mark = |seen: &mut Vec<bool>, idx: usize, side: &str| -> Result<()> {
            match seen.get_mut(idx) {
                None => Err(Error::Invalid(format!("{side} index {idx} out of range"))),
                Some(s) if *s => Err(Error::Invalid(format!("{side} index {idx} used twice"))),
                Some(s) => {
                    *s = true;
                    Ok(())
                }
            }
        };
        for &(i, j) in &self.pairs {
            mark(&mut seen_p, i, "partial")?;
            mark(&mut seen_f, j, "full")?;
        }
        for &i in &self.unmatched_partial {
            mark(&mut seen_p, i, "partial")?;
        }
        for &j in &self.unmatched_full {
            mark(&mut seen_f, j, "full")?;
        }
        if seen_p.iter().any(|s| !s) || seen_f.iter().any(|s| !s) {
            return Err(Error::Invalid("correspondence does not cover every index".into()));
        }
        Ok(())
    }

    /// Rewrites full-side indices through `map` (local → global) and replaces
    /// the unmatched-full list with the complement in a set of `n_full`.
    pub fn remap_full(&self, map: &[usize], n_full: usize) -> Correspondence {
        let pairs = self.pairs.iter().map(|&(i, j)| (i, map[j])).collect::<Vec<_>>();
        let n_partial = self.pairs.len() + self.unmatched_partial.len();
        Correspondence::from_pairs(pairs, n_partial, n_full)
    }
}
