//! Two-step registration: vote for candidate placements, match the partial
//! set against each candidate region, keep the closest.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matchers::{match_sets, MatchResult, MatcherConfig};
use crate::metrics::{mean_angle, CanonicalSet};
use crate::model::{Correspondence, FeatureVariant, Point2, PointSet, RigidTransform};
use crate::voting::{select_candidates, split, Candidate, FrameRule, ResolvedVoting, SubSet, VotingConfig};

/// Outcome of matching one candidate region.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateOutcome {
    pub center: Point2,
    pub votes: usize,
    /// Set distance for this region; infinite when the region was empty or
    /// the matcher failed on it.
    #[serde(with = "crate::io::float_or_inf")]
    pub distance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegistrationResult {
    /// Index of the winning candidate.
    pub best_candidate: usize,
    #[serde(with = "crate::io::float_or_inf")]
    pub distance: f64,
    /// Pairs of (partial index, full-set index).
    pub correspondence: Correspondence,
    /// Maps partial coordinates onto full-set coordinates.
    pub transform: RigidTransform,
    pub inliers: usize,
    #[serde(with = "crate::io::float_or_inf")]
    pub sum_matched: f64,
    pub per_candidate: Vec<CandidateOutcome>,
}

/// Locates `partial` inside `full`.
pub fn pf_register(
    partial: &PointSet,
    full: &PointSet,
    voting: &VotingConfig,
    matcher: &MatcherConfig,
) -> Result<RegistrationResult> {
    if partial.is_empty() {
        return Err(Error::EmptyPartial);
    }
    partial.check_compatible(full)?;
    matcher.validate()?;
    let resolved = voting.resolve(partial)?;
    let candidates = select_candidates(partial, full, &resolved)?;
    let subsets = split(full, &candidates, &resolved);
    if subsets.is_empty() {
        return Err(Error::NoCandidates);
    }

    let cfg = resolved_matcher(matcher, &resolved);
    let p_center = partial.centroid().ok_or(Error::EmptyPartial)?;
    let p_rotation = reference_angle(partial);
    let p_canon = CanonicalSet::new(partial, p_center, p_rotation);

    let results: Vec<(usize, Result<MatchResult>)> = subsets
        .par_iter()
        .map(|sub| {
            let cand = &candidates.entries[sub.candidate];
            let rotation = subset_rotation(&resolved, cand, sub, p_rotation);
            let f_canon = CanonicalSet::new(&sub.set, cand.center, rotation);
            (sub.candidate, match_sets(&p_canon, &f_canon, &cfg))
        })
        .collect();

    let mut per_candidate: Vec<CandidateOutcome> = candidates
        .entries
        .iter()
        .map(|c| CandidateOutcome { center: c.center, votes: c.votes, distance: f64::INFINITY })
        .collect();
    let mut best: Option<(usize, MatchResult)> = None;
    let mut last_err = None;
    for ((a, res), sub) in results.into_iter().zip(&subsets) {
        let r = match res {
            Ok(r) => r,
            Err(e) => {
                log::warn!("matching candidate {a} failed: {e}; skipped");
                last_err = Some(e);
                continue;
            }
        };
        per_candidate[a].distance = r.distance;
        let better = match &best {
            None => true,
            Some((b, br)) => {
                r.distance < br.distance
                    || (r.distance == br.distance && candidates.entries[a].votes > candidates.entries[*b].votes)
            }
        };
        if better {
            let global = r.correspondence.remap_full(&sub.global_index, full.len());
            best = Some((a, MatchResult { correspondence: global, ..r }));
        }
    }
    let (best_candidate, r) = best.ok_or_else(|| last_err.unwrap_or(Error::NoCandidates))?;
    Ok(RegistrationResult {
        best_candidate,
        distance: r.distance,
        correspondence: r.correspondence,
        transform: r.transform,
        inliers: r.inliers,
        sum_matched: r.sum_matched,
        per_candidate,
    })
}

/// Baseline without voting: matches `partial` against the whole of `full`,
/// each in its own centroid and mean-angle frame.
pub fn direct_register(partial: &PointSet, full: &PointSet, matcher: &MatcherConfig) -> Result<MatchResult> {
    if partial.is_empty() {
        return Err(Error::EmptyPartial);
    }
    partial.check_compatible(full)?;
    let full_center = full.centroid().ok_or_else(|| Error::DegenerateInput("full set is empty".into()))?;
    let resolved = VotingConfig::default().resolve(partial)?;
    let cfg = resolved_matcher(matcher, &resolved);
    let p = CanonicalSet::mean_angle_frame(partial, partial.centroid().ok_or(Error::EmptyPartial)?);
    let f = CanonicalSet::mean_angle_frame(full, full_center);
    match_sets(&p, &f, &cfg)
}

/// Fills the automatic matcher settings from the voting thresholds.
pub fn resolved_matcher(matcher: &MatcherConfig, voting: &ResolvedVoting) -> MatcherConfig {
    let mut cfg = *matcher;
    cfg.metric = cfg.metric.with_default_scale(voting.t_radius);
    cfg.hough_angle_bin.get_or_insert(voting.t_feature * PI);
    cfg.hough_translation_bin.get_or_insert(voting.t_spatial);
    cfg
}

fn reference_angle(set: &PointSet) -> f64 {
    if set.variant() != Some(FeatureVariant::Minutia) {
        return 0.0;
    }
    mean_angle(set).unwrap_or_else(|e| {
        log::warn!("{e}; using rotation 0 for the partial frame");
        0.0
    })
}

fn subset_rotation(cfg: &ResolvedVoting, cand: &Candidate, sub: &SubSet, p_rotation: f64) -> f64 {
    match (cfg.frame_rule, cand.rotation) {
        (FrameRule::VoteRotation, Some(delta)) => p_rotation + delta,
        (FrameRule::VoteRotation, None) => p_rotation,
        (FrameRule::MeanAngle, _) => reference_angle(&sub.set),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matchers::Backend;
    use crate::model::{Feature, MinutiaKind};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn scene(n: usize, radius: f64, seed: u64) -> PointSet {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut pts: Vec<Point2> = Vec::new();
        while pts.len() < n {
            let p = Point2::new(rng.random_range(-radius..radius), rng.random_range(-radius..radius));
            if p.norm() <= radius && pts.iter().all(|q| q.distance(&p) > 0.4) {
                pts.push(p);
            }
        }
        let feats = pts
            .iter()
            .map(|_| {
                let kind = if rng.random_bool(0.5) { MinutiaKind::Termination } else { MinutiaKind::Bifurcation };
                Feature::minutia(rng.random_range(0.0..std::f64::consts::TAU), kind)
            })
            .collect();
        PointSet::new(pts, feats).unwrap()
    }

    fn planted(full: &PointSet, center: Point2, r: f64, g: &RigidTransform) -> (PointSet, Vec<usize>) {
        let idx: Vec<usize> = (0..full.len()).filter(|&j| full.points()[j].distance(&center) <= r).collect();
        (full.subset(&idx).transformed(g), idx)
    }

    fn voting() -> VotingConfig {
        VotingConfig { t_spatial: Some(0.5), ..VotingConfig::default() }
    }

    #[test]
    fn whole_set_registers_onto_itself() {
        let f = scene(60, 8.0, 1);
        let r = pf_register(&f, &f, &voting(), &MatcherConfig::default()).unwrap();
        assert!(r.distance < 1e-12);
        assert_eq!(r.inliers, 60);
        assert!(r.transform.normalized_rotation().abs() < 1e-9);
        assert!(r.transform.dx.abs() < 1e-9 && r.transform.dy.abs() < 1e-9);
    }

    #[test]
    fn planted_subset_is_recovered_for_every_backend() {
        let f = scene(200, 15.0, 2);
        let g = RigidTransform::new(2.5, -30.0, 12.0);
        let (p, idx) = planted(&f, Point2::new(4.0, -3.0), 5.0, &g);
        let truth = g.inverse();
        for backend in Backend::ALL {
            let r = pf_register(&p, &f, &voting(), &MatcherConfig::with_backend(backend)).unwrap();
            assert!((r.transform.normalized_rotation() - truth.normalized_rotation()).abs() < 1e-3, "{backend}");
            assert!((r.transform.dx - truth.dx).abs() < 1e-3 * 0.5, "{backend}");
            assert!((r.transform.dy - truth.dy).abs() < 1e-3 * 0.5, "{backend}");
            assert!(r.correspondence.pairs.iter().all(|&(i, j)| idx[i] == j), "{backend}");
            assert_eq!(r.correspondence.pairs.len(), idx.len(), "{backend}");
        }
    }

    #[test]
    fn selection_invariants_hold() {
        let f = scene(200, 15.0, 3);
        let (p, _) = planted(&f, Point2::new(-5.0, 2.0), 5.0, &RigidTransform::rotation(1.0));
        let r = pf_register(&p, &f, &voting(), &MatcherConfig::default()).unwrap();
        let min = r.per_candidate.iter().map(|c| c.distance).fold(f64::INFINITY, f64::min);
        assert_eq!(r.distance, min);
        let center = r.per_candidate[r.best_candidate].center;
        let t_r = voting().resolve(&p).unwrap().t_radius;
        for &(_, j) in &r.correspondence.pairs {
            assert!(f.points()[j].distance(&center) <= t_r);
        }
    }

    #[test]
    fn impostor_scores_worse() {
        let f = scene(200, 15.0, 4);
        let (p, _) = planted(&f, Point2::new(0.0, 0.0), 5.0, &RigidTransform::rotation(0.3));
        let other = scene(200, 15.0, 5);
        let genuine = pf_register(&p, &f, &voting(), &MatcherConfig::default()).unwrap();
        let impostor = pf_register(&p, &other, &voting(), &MatcherConfig::default()).unwrap();
        assert!(impostor.distance > genuine.distance + 0.03);
        assert!(impostor.inliers * 2 < genuine.inliers);
    }

    #[test]
    fn rotating_the_partial_leaves_distance_unchanged() {
        let f = scene(200, 15.0, 6);
        let (p, _) = planted(&f, Point2::new(3.0, 3.0), 5.0, &RigidTransform::IDENTITY);
        let mut noisy_pts = p.points().to_vec();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for q in &mut noisy_pts {
            *q = q.add(&Point2::new(rng.random_range(-0.05..0.05), rng.random_range(-0.05..0.05)));
        }
        let p = PointSet::new(noisy_pts, p.features().to_vec()).unwrap();
        let base = pf_register(&p, &f, &voting(), &MatcherConfig::default()).unwrap();
        for k in 1..8 {
            let rot = RigidTransform::rotation(k as f64 * 0.8);
            let r = pf_register(&p.transformed(&rot), &f, &voting(), &MatcherConfig::default()).unwrap();
            assert!((r.distance - base.distance).abs() < 1e-6);
        }
    }

    #[test]
    fn direct_register_on_identical_sets() {
        let f = scene(40, 8.0, 7);
        let r = direct_register(&f, &f, &MatcherConfig::default()).unwrap();
        assert_eq!(r.distance, 0.0);
    }

    #[test]
    fn pf_is_no_worse_than_direct_on_small_instances() {
        for seed in 0..10 {
            let f = scene(60, 8.0, 100 + seed);
            let (p, _) = planted(&f, Point2::new(1.0, -1.0), 3.5, &RigidTransform::rotation(seed as f64));
            let cfg = MatcherConfig::default();
            let pf = pf_register(&p, &f, &voting(), &cfg).unwrap();
            let direct = direct_register(&p, &f, &cfg).unwrap();
            assert!(pf.distance <= direct.distance + cfg.epsilon);
        }
    }

    #[test]
    fn errors() {
        let f = scene(20, 5.0, 8);
        let empty = PointSet::new(vec![], vec![]).unwrap();
        assert_eq!(pf_register(&empty, &f, &voting(), &MatcherConfig::default()), Err(Error::EmptyPartial));
        let v = PointSet::new(vec![Point2::ORIGIN], vec![Feature::vector(vec![1.0, 0.0])]).unwrap();
        assert!(matches!(pf_register(&v, &f, &voting(), &MatcherConfig::default()), Err(Error::VariantMismatch(_))));
    }
}
