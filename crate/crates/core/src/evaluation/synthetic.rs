//! Synthetic full sets with known ground truth.

use std::f64::consts::{PI, TAU};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Feature, FeatureVariant, MinutiaKind, Point2, PointSet, RigidTransform};

/// Mixes a base seed with a path of indices into an independent stream seed.
pub fn derive_seed(base: u64, parts: &[u64]) -> u64 {
    let mut z = base;
    for &p in parts {
        z = splitmix64(z ^ splitmix64(p.wrapping_add(0x9E37_79B9_7F4A_7C15)));
    }
    z
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn rng_for(base: u64, parts: &[u64]) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(base, parts))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SyntheticConfig {
    pub n_subjects: usize,
    pub n_ref_per_subject: usize,
    pub n_test_per_subject: usize,
    pub points_per_full: usize,
    /// Radius of the disk the points of a full set occupy (cm).
    pub field_radius: f64,
    pub patch_radii: Vec<f64>,
    /// Standard deviation of the per-sample position jitter.
    pub noise_sigma: f64,
    /// Standard deviation of the per-sample minutia angle jitter (degrees).
    pub angle_jitter_deg: f64,
    pub drop_rate: f64,
    /// Extra random points per sample, as a fraction of `points_per_full`.
    pub clutter_rate: f64,
    pub feature_variant: FeatureVariant,
    pub vector_dim: usize,
    /// Standard deviation of the per-component descriptor jitter.
    pub vector_noise: f64,
    /// Patches with fewer points are rejected.
    pub min_patch_points: usize,
    pub seed: u64,
}

impl Default for SyntheticConfig {
    fn default() -> Self {
        Self {
            n_subjects: 10,
            n_ref_per_subject: 4,
            n_test_per_subject: 4,
            points_per_full: 800,
            field_radius: 5.0,
            patch_radii: (0..9).map(|i| 0.5 + 0.25 * i as f64).collect(),
            noise_sigma: 0.05,
            angle_jitter_deg: 2.0,
            drop_rate: 0.1,
            clutter_rate: 0.0,
            feature_variant: FeatureVariant::Minutia,
            vector_dim: 8,
            vector_noise: 0.05,
            min_patch_points: 3,
            seed: 0,
        }
    }
}

impl SyntheticConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_subjects == 0 || self.n_ref_per_subject == 0 || self.n_test_per_subject == 0 {
            return Err(Error::Invalid("subject and sample counts must be at least 1".into()));
        }
        if self.points_per_full == 0 {
            return Err(Error::Invalid("points_per_full must be at least 1".into()));
        }
        for (name, rate) in [("drop_rate", self.drop_rate), ("clutter_rate", self.clutter_rate)] {
            if !(0.0..1.0).contains(&rate) {
                return Err(Error::Invalid(format!("{name} must lie in [0, 1), got {rate}")));
            }
        }
        let lengths = [self.field_radius, self.noise_sigma, self.angle_jitter_deg, self.vector_noise];
        if !(self.field_radius > 0.0) || lengths.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(Error::Invalid("field_radius must be positive and jitters non-negative".into()));
        }
        if self.patch_radii.iter().any(|r| !(r.is_finite() && *r > 0.0)) {
            return Err(Error::Invalid("patch radii must be positive".into()));
        }
        if self.feature_variant == FeatureVariant::Vector && self.vector_dim == 0 {
            return Err(Error::Invalid("vector_dim must be at least 1".into()));
        }
        Ok(())
    }

    pub fn subject_label(subject: usize) -> String {
        format!("subject-{subject:03}")
    }
}

/// Full sets of one subject: `n_ref_per_subject` references followed by
/// `n_test_per_subject` test samples, all labeled with the subject.
pub fn generate_subject(cfg: &SyntheticConfig, subject: usize) -> Result<Vec<PointSet>> {
    cfg.validate()?;
    let latent = latent_layout(cfg, subject);
    let n = cfg.n_ref_per_subject + cfg.n_test_per_subject;
    (0..n).map(|s| sample(cfg, subject, s, &latent)).collect()
}

/// References and test samples of every subject.
#[derive(Debug, Clone, PartialEq)]
pub struct Corpus {
    pub refs: Vec<PointSet>,
    pub tests: Vec<PointSet>,
}

pub fn generate_corpus(cfg: &SyntheticConfig) -> Result<Corpus> {
    let mut refs = Vec::new();
    let mut tests = Vec::new();
    for subject in 0..cfg.n_subjects {
        let mut samples = generate_subject(cfg, subject)?;
        let t = samples.split_off(cfg.n_ref_per_subject);
        refs.extend(samples);
        tests.extend(t);
    }
    Ok(Corpus { refs, tests })
}

struct Latent {
    points: Vec<Point2>,
    features: Vec<Feature>,
}

fn latent_layout(cfg: &SyntheticConfig, subject: usize) -> Latent {
    let mut rng = rng_for(cfg.seed, &[0, subject as u64]);
    let points = poisson_disk(&mut rng, cfg.points_per_full, cfg.field_radius);
    let features = match cfg.feature_variant {
        FeatureVariant::Minutia => {
            let flow = FlowField::random(&mut rng, cfg.field_radius);
            let spread = Normal::new(0.0, 10f64.to_radians()).expect("valid sigma");
            points
                .iter()
                .map(|p| {
                    let flip = if rng.random_bool(0.5) { PI } else { 0.0 };
                    let kind = if rng.random_bool(0.5) { MinutiaKind::Termination } else { MinutiaKind::Bifurcation };
                    Feature::minutia(flow.angle(p) + flip + spread.sample(&mut rng), kind)
                })
                .collect()
        }
        FeatureVariant::Vector => points.iter().map(|_| random_unit(&mut rng, cfg.vector_dim)).collect(),
    };
    Latent { points, features }
}

fn sample(cfg: &SyntheticConfig, subject: usize, index: usize, latent: &Latent) -> Result<PointSet> {
    let mut rng = rng_for(cfg.seed, &[1, subject as u64, index as u64]);
    let pos_noise = Normal::new(0.0, cfg.noise_sigma).map_err(|e| Error::Invalid(e.to_string()))?;
    let ang_noise = Normal::new(0.0, cfg.angle_jitter_deg.to_radians()).map_err(|e| Error::Invalid(e.to_string()))?;
    let vec_noise = Normal::new(0.0, cfg.vector_noise).map_err(|e| Error::Invalid(e.to_string()))?;

    let mut points = Vec::with_capacity(latent.points.len());
    let mut features = Vec::with_capacity(latent.points.len());
    for (p, f) in latent.points.iter().zip(&latent.features) {
        if cfg.drop_rate > 0.0 && rng.random_bool(cfg.drop_rate) {
            continue;
        }
        points.push(Point2::new(p.x + pos_noise.sample(&mut rng), p.y + pos_noise.sample(&mut rng)));
        features.push(match f {
            Feature::Minutia { angle, kind } => Feature::minutia(angle + ang_noise.sample(&mut rng), *kind),
            Feature::Vector { values } => {
                Feature::vector(values.iter().map(|v| v + vec_noise.sample(&mut rng)).collect())
            }
        });
    }
    let n_clutter = (cfg.clutter_rate * cfg.points_per_full as f64).round() as usize;
    for _ in 0..n_clutter {
        points.push(uniform_in_disk(&mut rng, cfg.field_radius));
        features.push(random_feature(&mut rng, cfg.feature_variant, cfg.vector_dim));
    }
    Ok(PointSet::new(points, features)?.with_label(SyntheticConfig::subject_label(subject)))
}

/// Dart throwing with a minimum spacing of half the mean spacing; the
/// spacing shrinks if the disk fills up before `n` points are placed.
fn poisson_disk(rng: &mut impl Rng, n: usize, radius: f64) -> Vec<Point2> {
    let mut min_dist = 0.5 * (PI * radius * radius / n.max(1) as f64).sqrt();
    let mut points: Vec<Point2> = Vec::with_capacity(n);
    let mut grid = SpatialGrid::new(min_dist);
    let mut failures = 0;
    while points.len() < n {
        let p = uniform_in_disk(rng, radius);
        if grid.any_within(&points, &p, min_dist) {
            failures += 1;
            if failures > 200 {
                min_dist *= 0.9;
                grid = SpatialGrid::new(min_dist);
                for (i, q) in points.iter().enumerate() {
                    grid.insert(i, q);
                }
                failures = 0;
            }
            continue;
        }
        failures = 0;
        grid.insert(points.len(), &p);
        points.push(p);
    }
    points
}

struct SpatialGrid {
    cell: f64,
    cells: std::collections::HashMap<(i64, i64), Vec<usize>>,
}

impl SpatialGrid {
    fn new(cell: f64) -> Self {
        Self { cell, cells: Default::default() }
    }

    fn key(&self, p: &Point2) -> (i64, i64) {
        ((p.x / self.cell).floor() as i64, (p.y / self.cell).floor() as i64)
    }

    fn insert(&mut self, i: usize, p: &Point2) {
        let k = self.key(p);
        self.cells.entry(k).or_default().push(i);
    }

    fn any_within(&self, points: &[Point2], p: &Point2, d: f64) -> bool {
        let (cx, cy) = self.key(p);
        (-1..=1).any(|dx| {
            (-1..=1).any(|dy| {
                self.cells
                    .get(&(cx + dx, cy + dy))
                    .is_some_and(|idx| idx.iter().any(|&i| points[i].distance(p) < d))
            })
        })
    }
}

/// Smooth orientation field: a sum of a few random plane waves.
struct FlowField {
    waves: Vec<(f64, f64, f64, f64)>,
    offset: f64,
}

impl FlowField {
    fn random(rng: &mut impl Rng, radius: f64) -> Self {
        let waves = (0..3)
            .map(|_| {
                let amplitude = rng.random_range(0.5..1.5);
                let freq = TAU / (radius * rng.random_range(0.8..2.0));
                (amplitude, freq, rng.random_range(0.0..TAU), rng.random_range(0.0..TAU))
            })
            .collect();
        Self { waves, offset: rng.random_range(0.0..TAU) }
    }

    fn angle(&self, p: &Point2) -> f64 {
        self.offset
            + self
                .waves
                .iter()
                .map(|&(a, f, dir, phase)| a * (f * (p.x * dir.cos() + p.y * dir.sin()) + phase).sin())
                .sum::<f64>()
    }
}

pub(crate) fn uniform_in_disk(rng: &mut impl Rng, radius: f64) -> Point2 {
    let r = radius * rng.random::<f64>().sqrt();
    let t = rng.random_range(0.0..TAU);
    Point2::new(r * t.cos(), r * t.sin())
}

pub(crate) fn random_unit(rng: &mut impl Rng, dim: usize) -> Feature {
    let normal = Normal::new(0.0, 1.0).expect("valid sigma");
    loop {
        let v: Vec<f64> = (0..dim).map(|_| normal.sample(rng)).collect();
        if v.iter().any(|x| *x != 0.0) {
            return Feature::vector(v);
        }
    }
}

fn random_feature(rng: &mut impl Rng, variant: FeatureVariant, dim: usize) -> Feature {
    match variant {
        FeatureVariant::Minutia => {
            let kind = if rng.random_bool(0.5) { MinutiaKind::Termination } else { MinutiaKind::Bifurcation };
            Feature::minutia(rng.random_range(0.0..TAU), kind)
        }
        FeatureVariant::Vector => random_unit(rng, dim),
    }
}

/// A patch cut from a full set, with the ground truth that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct Patch {
    pub set: PointSet,
    /// Maps patch coordinates back onto the full set.
    pub to_full: RigidTransform,
    /// Full-set index of every patch point.
    pub source_index: Vec<usize>,
    /// Full-set index of the point the patch was centered on.
    pub center_index: usize,
}

impl Patch {
    /// Where the patch centroid lies in the full set.
    pub fn true_center(&self) -> Point2 {
        self.to_full.apply(&self.set.centroid().expect("patches are non-empty"))
    }
}

/// Cuts the points within `radius` of a random member point, then rotates
/// the patch uniformly at random about its centroid and moves the centroid
/// to the origin. The point order is shuffled.
pub fn cut_patch(full: &PointSet, radius: f64, seed: u64, min_points: usize) -> Result<Patch> {
    if full.is_empty() {
        return Err(Error::EmptyPatch { found: 0, required: min_points });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let center_index = rng.random_range(0..full.len());
    let center = full.points()[center_index];
    let mut idx: Vec<usize> = (0..full.len()).filter(|&j| full.points()[j].distance(&center) <= radius).collect();
    if idx.len() < min_points {
        return Err(Error::EmptyPatch { found: idx.len(), required: min_points });
    }
    idx.shuffle(&mut rng);
    let rotation = rng.random_range(0.0..TAU);
    let sub = full.subset(&idx);
    let c = sub.centroid().expect("non-empty");
    let shift = c.rotated(rotation);
    let pose = RigidTransform::new(rotation, -shift.x, -shift.y);
    let mut set = sub.transformed(&pose);
    set.label = full.label.clone();
    set.order_index = full.order_index;
    Ok(Patch { set, to_full: pose.inverse(), source_index: idx, center_index })
}

/// Ordered scene corpus: overlapping views along a strip with descriptor
/// features, standing in for a photo sequence around a building.
///
/// Defaults model a repetitive facade: shared descriptor prototypes dominate,
/// and views carry heavy clutter and occlusion.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OrderedCorpusConfig {
    pub n_scenes: usize,
    /// Offset between consecutive views along the strip.
    pub step: f64,
    pub view_width: f64,
    pub view_height: f64,
    /// Mean landmark density (points per unit area).
    pub density: f64,
    /// Relative amplitude of the density variation along the strip.
    pub density_variation: f64,
    pub noise_sigma: f64,
    pub drop_range: (f64, f64),
    /// Per-view clutter, as a fraction of the observed landmarks.
    pub clutter_range: (f64, f64),
    pub vector_dim: usize,
    /// Number of shared descriptor prototypes.
    pub n_prototypes: usize,
    /// Weight of the landmark-specific descriptor component.
    pub unique_weight: f64,
    pub descriptor_noise: f64,
    /// Test patches keep the points within this radius of the view centroid.
    pub patch_radius: f64,
    pub seed: u64,
}

impl Default for OrderedCorpusConfig {
    fn default() -> Self {
        Self {
            n_scenes: 20,
            step: 7.0,
            view_width: 10.0,
            view_height: 6.0,
            density: 3.0,
            density_variation: 0.6,
            noise_sigma: 0.03,
            drop_range: (0.2, 0.6),
            clutter_range: (0.5, 3.0),
            vector_dim: 16,
            n_prototypes: 8,
            unique_weight: 0.3,
            descriptor_noise: 0.03,
            patch_radius: 3.0,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OrderedCorpus {
    /// One reference view per position, `order_index` = position.
    pub refs: Vec<PointSet>,
    /// One test patch per position, cut from an independent view.
    pub tests: Vec<PointSet>,
}

pub fn generate_ordered_corpus(cfg: &OrderedCorpusConfig) -> Result<OrderedCorpus> {
    if cfg.n_scenes == 0 || cfg.vector_dim == 0 || cfg.n_prototypes == 0 {
        return Err(Error::Invalid("n_scenes, vector_dim and n_prototypes must be at least 1".into()));
    }
    let mut rng = rng_for(cfg.seed, &[2]);
    let length = cfg.step * (cfg.n_scenes - 1) as f64 + cfg.view_width;
    let prototypes: Vec<Vec<f64>> = (0..cfg.n_prototypes).map(|_| unit_values(&mut rng, cfg.vector_dim)).collect();
    let descriptor = |rng: &mut ChaCha8Rng| -> Vec<f64> {
        let proto = &prototypes[rng.random_range(0..prototypes.len())];
        let unique = unit_values(rng, cfg.vector_dim);
        proto.iter().zip(&unique).map(|(p, u)| p + cfg.unique_weight * u).collect()
    };

    let max_density = cfg.density * (1.0 + cfg.density_variation);
    let n_max = (max_density * length * cfg.view_height).round() as usize;
    let period = 3.0 * cfg.step;
    let mut landmarks: Vec<(Point2, Vec<f64>)> = Vec::new();
    for _ in 0..n_max {
        let p = Point2::new(rng.random_range(0.0..length), rng.random_range(0.0..cfg.view_height));
        let local = cfg.density * (1.0 + cfg.density_variation * (TAU * p.x / period).sin());
        if rng.random::<f64>() * max_density <= local {
            let d = descriptor(&mut rng);
            landmarks.push((p, d));
        }
    }

    let view = |i: usize, stream: u64| -> Result<PointSet> {
        let mut rng = rng_for(cfg.seed, &[3, i as u64, stream]);
        let drop = rng.random_range(cfg.drop_range.0..=cfg.drop_range.1);
        let clutter = rng.random_range(cfg.clutter_range.0..=cfg.clutter_range.1);
        let noise = Normal::new(0.0, cfg.noise_sigma).map_err(|e| Error::Invalid(e.to_string()))?;
        let dnoise = Normal::new(0.0, cfg.descriptor_noise).map_err(|e| Error::Invalid(e.to_string()))?;
        let x0 = cfg.step * i as f64;
        let mut points = Vec::new();
        let mut features = Vec::new();
        for (p, d) in &landmarks {
            if p.x < x0 || p.x > x0 + cfg.view_width || rng.random_bool(drop) {
                continue;
            }
            points.push(Point2::new(p.x - x0 + noise.sample(&mut rng), p.y + noise.sample(&mut rng)));
            features.push(Feature::vector(d.iter().map(|v| v + dnoise.sample(&mut rng)).collect()));
        }
        let n_clutter = (clutter * points.len() as f64).round() as usize;
        for _ in 0..n_clutter {
            points.push(Point2::new(rng.random_range(0.0..cfg.view_width), rng.random_range(0.0..cfg.view_height)));
            features.push(Feature::vector(descriptor(&mut rng)));
        }
        Ok(PointSet::new(points, features)?.with_label(format!("view-{i:03}")).with_order_index(i as i64))
    };

    let mut refs = Vec::with_capacity(cfg.n_scenes);
    let mut tests = Vec::with_capacity(cfg.n_scenes);
    for i in 0..cfg.n_scenes {
        refs.push(view(i, 0)?);
        let full = view(i, 1)?;
        let c = full.centroid().ok_or(Error::EmptyPatch { found: 0, required: 1 })?;
        let idx: Vec<usize> = (0..full.len()).filter(|&j| full.points()[j].distance(&c) <= cfg.patch_radius).collect();
        let mut patch = full.subset(&idx).transformed(&RigidTransform::translation(-c.x, -c.y));
        patch.label = full.label.clone();
        patch.order_index = full.order_index;
        tests.push(patch);
    }
    Ok(OrderedCorpus { refs, tests })
}

fn unit_values(rng: &mut impl Rng, dim: usize) -> Vec<f64> {
    match random_unit(rng, dim) {
        Feature::Vector { values } => values,
        Feature::Minutia { .. } => unreachable!("random_unit builds vectors"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> SyntheticConfig {
        SyntheticConfig { points_per_full: 200, n_subjects: 2, n_ref_per_subject: 2, n_test_per_subject: 1, ..Default::default() }
    }

    #[test]
    fn noise_free_samples_are_identical() {
        let cfg = SyntheticConfig { noise_sigma: 0.0, angle_jitter_deg: 0.0, drop_rate: 0.0, ..small() };
        let s = generate_subject(&cfg, 0).unwrap();
        assert_eq!(s.len(), 3);
        assert!(s.windows(2).all(|w| w[0] == w[1]));
    }

    #[test]
    fn generation_is_deterministic() {
        assert_eq!(generate_subject(&small(), 1).unwrap(), generate_subject(&small(), 1).unwrap());
        let other = SyntheticConfig { seed: 1, ..small() };
        assert_ne!(generate_subject(&small(), 1).unwrap(), generate_subject(&other, 1).unwrap());
    }

    #[test]
    fn subjects_are_uncorrelated() {
        let cfg = SyntheticConfig { drop_rate: 0.0, ..small() };
        let a = &generate_subject(&cfg, 0).unwrap()[0];
        let b = &generate_subject(&cfg, 1).unwrap()[0];
        let n = a.len() as f64;
        let xs: Vec<(f64, f64)> = a.points().iter().zip(b.points()).map(|(p, q)| (p.x, q.x)).collect();
        let (ma, mb) = (xs.iter().map(|v| v.0).sum::<f64>() / n, xs.iter().map(|v| v.1).sum::<f64>() / n);
        let cov: f64 = xs.iter().map(|(x, y)| (x - ma) * (y - mb)).sum::<f64>() / n;
        let sa = (xs.iter().map(|(x, _)| (x - ma).powi(2)).sum::<f64>() / n).sqrt();
        let sb = (xs.iter().map(|(_, y)| (y - mb).powi(2)).sum::<f64>() / n).sqrt();
        assert!((cov / (sa * sb)).abs() < 0.25);
    }

    #[test]
    fn points_respect_minimum_spacing_and_field() {
        let cfg = small();
        let s = &generate_subject(&SyntheticConfig { noise_sigma: 0.0, drop_rate: 0.0, ..cfg.clone() }, 0).unwrap()[0];
        assert_eq!(s.len(), 200);
        assert!(s.points().iter().all(|p| p.norm() <= cfg.field_radius));
        let min = s
            .points()
            .iter()
            .enumerate()
            .flat_map(|(i, p)| s.points()[i + 1..].iter().map(move |q| p.distance(q)))
            .fold(f64::INFINITY, f64::min);
        assert!(min > 0.0);
    }

    #[test]
    fn huge_radius_takes_everything() {
        let s = &generate_subject(&small(), 0).unwrap()[0];
        let p = cut_patch(s, 100.0, 3, 3).unwrap();
        assert_eq!(p.set.len(), s.len());
    }

    #[test]
    fn ground_truth_reproduces_the_source_points() {
        let s = &generate_subject(&small(), 0).unwrap()[0];
        let p = cut_patch(s, 2.0, 5, 3).unwrap();
        for (i, q) in p.set.points().iter().enumerate() {
            assert!(p.to_full.apply(q).distance(&s.points()[p.source_index[i]]) < 1e-9);
        }
        let back = p.set.transformed(&p.to_full);
        for (i, f) in back.features().iter().enumerate() {
            let orig = &s.features()[p.source_index[i]];
            let d = crate::metrics::cyclical_distance(f.angle().unwrap(), orig.angle().unwrap());
            assert!(d < 1e-9);
        }
        assert!(p.set.centroid().unwrap().norm() < 1e-9);
    }

    #[test]
    fn patch_size_grows_with_radius() {
        let s = &generate_subject(&SyntheticConfig { points_per_full: 400, ..small() }, 0).unwrap()[0];
        let mean = |r: f64| (0..100).map(|seed| cut_patch(s, r, seed, 0).unwrap().set.len()).sum::<usize>() as f64 / 100.0;
        let sizes: Vec<f64> = [0.5, 1.0, 1.5, 2.0, 2.5].iter().map(|&r| mean(r)).collect();
        assert!(sizes.windows(2).all(|w| w[1] > w[0]), "{sizes:?}");
    }

    #[test]
    fn small_patches_are_rejected() {
        let s = &generate_subject(&small(), 0).unwrap()[0];
        assert!(matches!(cut_patch(s, 1e-6, 0, 3), Err(Error::EmptyPatch { found: 1, required: 3 })));
    }

    #[test]
    fn ordered_corpus_shape() {
        let cfg = OrderedCorpusConfig { n_scenes: 5, ..Default::default() };
        let c = generate_ordered_corpus(&cfg).unwrap();
        assert_eq!(c.refs.len(), 5);
        assert_eq!(c.tests.len(), 5);
        for (i, (r, t)) in c.refs.iter().zip(&c.tests).enumerate() {
            assert_eq!(r.order_index, Some(i as i64));
            assert_eq!(t.order_index, Some(i as i64));
            assert!(t.len() >= 10);
            assert!(t.points().iter().all(|p| p.norm() <= cfg.patch_radius + 1e-9));
        }
    }

    #[test]
    fn config_validation() {
        assert!(SyntheticConfig { drop_rate: 1.0, ..small() }.validate().is_err());
        assert!(SyntheticConfig { n_subjects: 0, ..small() }.validate().is_err());
        small().validate().unwrap();
    }
}
