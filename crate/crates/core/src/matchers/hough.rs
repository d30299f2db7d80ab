use std::collections::HashMap;
use std::f64::consts::PI;

use super::{edit_objective, finish, point_cost_matrix, MatchResult, MatcherConfig};
use crate::assignment;
use crate::error::{Error, Result};
use crate::metrics::{circular_mean, feature_cost, median, CanonicalSet};
use crate::model::{wrap_angle, Feature, Point2, RigidTransform};

const DEFAULT_ANGLE_BIN: f64 = 10.0 * std::f64::consts::PI / 180.0;
const DEFAULT_TRANSLATION_FRACTION: f64 = 0.1;

/// Single-pose Hough alignment followed by nearest pairing with no outlier
/// rejection: every partial point is paired while full points remain.
pub fn match_hough_consistency(
    partial: &CanonicalSet,
    full: &CanonicalSet,
    cfg: &MatcherConfig,
) -> Result<MatchResult> {
    let angle_bin = cfg.hough_angle_bin.unwrap_or(DEFAULT_ANGLE_BIN);
    let shift_bin = cfg.hough_translation_bin.unwrap_or(DEFAULT_TRANSLATION_FRACTION * cfg.metric.scale());
    let angle_bins = (std::f64::consts::TAU / angle_bin).ceil().max(1.0) as i64;

    let mut acc: HashMap<(i64, i64, i64), Vec<(f64, Point2)>> = HashMap::new();
    for (p, f) in partial.positions.iter().zip(&partial.features) {
        for (q, g) in full.positions.iter().zip(&full.features) {
            let Some(delta) = pair_rotation(f, g) else { continue };
            let t = q.sub(&p.rotated(delta));
            let a = ((delta / angle_bin).floor() as i64).rem_euclid(angle_bins);
            let key = (a, (t.x / shift_bin).floor() as i64, (t.y / shift_bin).floor() as i64);
            acc.entry(key).or_default().push((delta, t));
        }
    }
    let (_, evidence) = acc
        .into_iter()
        .max_by(|a, b| a.1.len().cmp(&b.1.len()).then(b.0.cmp(&a.0)))
        .ok_or(Error::NoCandidates)?;

    // Medians keep stray pairs that share the peak bin from pulling the pose.
    let center = circular_mean(evidence.iter().map(|e| e.0)).unwrap_or(evidence[0].0);
    let mut offsets: Vec<f64> = evidence.iter().map(|e| PI - wrap_angle(PI - (e.0 - center))).collect();
    let mut xs: Vec<f64> = evidence.iter().map(|e| e.1.x).collect();
    let mut ys: Vec<f64> = evidence.iter().map(|e| e.1.y).collect();
    let pose = RigidTransform::new(wrap_angle(center + median(&mut offsets)), median(&mut xs), median(&mut ys));

    let moved = partial.transformed(&pose);
    let costs = point_cost_matrix(&cfg.metric, &moved, full);
    let pairs = assignment::greedy(&costs, f64::INFINITY);
    let total = edit_objective(&costs, &pairs, cfg.epsilon);
    finish(&moved, full, cfg, pairs, RigidTransform::IDENTITY, total)
}

/// Rotation implied by a pair; `None` when the features cannot correspond.
fn pair_rotation(f: &Feature, g: &Feature) -> Option<f64> {
    match (f, g) {
        (Feature::Minutia { angle: a, kind: ka }, Feature::Minutia { angle: b, kind: kb }) => {
            (ka == kb).then(|| wrap_angle(b - a))
        }
        _ => feature_cost(f, g).is_finite().then_some(0.0),
    }
}
