//! Candidate-center voting.
//!
//! Every compatible pair (partial point `i`, full point `j`) proposes where
//! the partial centroid would land in the full set if `i` were mapped onto
//! `j`. Proposals are accumulated on a grid with cell size `T_s`, grown into
//! clusters, and the best `k` clusters become candidate centers. The full set
//! is then split into one disk of radius `T_r` per candidate.
//!
//! For minutiae the angle difference of the pair also fixes the rotation of
//! the proposal. Within a cluster only proposals that agree on that rotation
//! (to within `T_f · π` radians) count as votes; the agreed rotation is kept
//! on the candidate.

use std::collections::HashMap;
use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metrics::{circular_mean, cyclical_distance, feature_cost, median};
use crate::model::{wrap_angle, Feature, Point2, PointSet};

/// Automatic `T_s` as a fraction of the partial set's bounding radius.
pub const AUTO_SPATIAL_FRACTION: f64 = 0.1;
/// Automatic `T_r` as a multiple of the partial set's bounding radius.
pub const AUTO_RADIUS_FACTOR: f64 = 1.1;

/// How the canonical frame of each split subset is rotated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FrameRule {
    /// Partial mean angle plus the rotation agreed by the candidate's votes.
    #[default]
    VoteRotation,
    /// The subset's own circular mean angle.
    MeanAngle,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct VotingConfig {
    /// Cluster merge radius `T_s`; `None` derives it from the partial set.
    pub t_spatial: Option<f64>,
    /// Maximum feature distance of a vote, `T_f`.
    pub t_feature: f64,
    /// Split radius `T_r`; `None` derives it from the partial set.
    pub t_radius: Option<f64>,
    /// Number of candidates retained.
    pub k: usize,
    pub frame_rule: FrameRule,
}

impl Default for VotingConfig {
    fn default() -> Self {
        Self { t_spatial: None, t_feature: 0.1, t_radius: None, k: 4, frame_rule: FrameRule::VoteRotation }
    }
}

/// Voting thresholds with automatic values filled in.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResolvedVoting {
    pub t_spatial: f64,
    pub t_feature: f64,
    pub t_radius: f64,
    pub k: usize,
    pub frame_rule: FrameRule,
}

impl VotingConfig {
    /// Resolves automatic thresholds against the partial set: `T_s` is a
    /// tenth of its bounding radius, `T_r` is 1.1 times it. A single-point
    /// partial has radius 0, in which case `T_s` falls back to 1 and `T_r` to
    /// `T_s`.
    pub fn resolve(&self, partial: &PointSet) -> Result<ResolvedVoting> {
        let radius = partial.bounding_radius();
        let t_spatial = self.t_spatial.unwrap_or(if radius > 0.0 {
            AUTO_SPATIAL_FRACTION * radius
        } else {
            1.0
        });
        let t_radius = self.t_radius.unwrap_or((AUTO_RADIUS_FACTOR * radius).max(t_spatial));
        let resolved = ResolvedVoting {
            t_spatial,
            t_feature: self.t_feature,
            t_radius,
            k: self.k,
            frame_rule: self.frame_rule,
        };
        resolved.validate()?;
        Ok(resolved)
    }
}

impl ResolvedVoting {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("t_spatial", self.t_spatial), ("t_feature", self.t_feature), ("t_radius", self.t_radius)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Invalid(format!("{name} must be positive and finite, got {v}")));
            }
        }
        if self.k == 0 {
            return Err(Error::Invalid("k must be at least 1".into()));
        }
        Ok(())
    }

    /// Half-width in radians of the rotation agreement window.
    pub fn rotation_window(&self) -> f64 {
        self.t_feature * PI
    }
}

/// One cell of the candidate matrix: pair `(i, j)` proposes `center`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Vote {
    pub i: usize,
    pub j: usize,
    pub center: Point2,
    pub feature_distance: f64,
    /// Rotation implied by the pair (minutiae only).
    pub rotation: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Candidate {
    pub center: Point2,
    pub votes: usize,
    pub mean_feature_distance: f64,
    /// Rotation from partial to full agreed by the votes (minutiae only).
    pub rotation: Option<f64>,
}

/// Candidates ordered by decreasing vote count.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct CandidateList {
    pub entries: Vec<Candidate>,
}

impl CandidateList {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Where the partial centroid lands if `p_i` is mapped onto `q_j`. For
/// minutiae the offset is rotated by the angle difference of the pair.
pub fn candidate_center(
    p_i: &Point2,
    f_i: &Feature,
    q_j: &Point2,
    g_j: &Feature,
    partial_centroid: &Point2,
) -> Point2 {
    let delta = pair_rotation(f_i, g_j).unwrap_or(0.0);
    q_j.add(&partial_centroid.sub(p_i).rotated(delta))
}

fn pair_rotation(f: &Feature, g: &Feature) -> Option<f64> {
    match (f, g) {
        (Feature::Minutia { angle: a, .. }, Feature::Minutia { angle: b, .. }) => Some(wrap_angle(b - a)),
        _ => None,
    }
}

/// Feature check applied before a pair may vote. Raw minutia angles depend
/// on the unknown rotation, so only the kinds are compared here; angles are
/// checked for agreement inside each cluster instead.
fn vote_feature_distance(f: &Feature, g: &Feature) -> f64 {
    match (f, g) {
        (Feature::Minutia { kind: a, .. }, Feature::Minutia { kind: b, .. }) => {
            if a == b {
                0.0
            } else {
                f64::INFINITY
            }
        }
        _ => feature_cost(f, g),
    }
}

/// Fills the sparse `|P| × |F|` candidate matrix with one entry per pair
/// whose features are closer than `T_f`.
pub fn build_candidate_matrix(partial: &PointSet, full: &PointSet, cfg: &ResolvedVoting) -> Result<Vec<Vote>> {
    partial.check_compatible(full)?;
    let Some(centroid) = partial.centroid() else {
        return Ok(Vec::new());
    };
    let mut votes = Vec::new();
    for (i, (p, f)) in partial.points().iter().zip(partial.features()).enumerate() {
        let offset = centroid.sub(p);
        for (j, (q, g)) in full.points().iter().zip(full.features()).enumerate() {
            let fd = vote_feature_distance(f, g);
            if fd >= cfg.t_feature {
                continue;
            }
            let rotation = pair_rotation(f, g);
            let center = q.add(&offset.rotated(rotation.unwrap_or(0.0)));
            votes.push(Vote { i, j, center, feature_distance: fd, rotation });
        }
    }
    Ok(votes)
}

type Cell = (i64, i64);

fn cell_of(p: &Point2, size: f64) -> Cell {
    ((p.x / size).floor() as i64, (p.y / size).floor() as i64)
}

fn mean_center(votes: &[Vote], members: &[usize]) -> Point2 {
    let n = members.len() as f64;
    let (sx, sy) = members
        .iter()
        .fold((0.0, 0.0), |(sx, sy), &m| (sx + votes[m].center.x, sy + votes[m].center.y));
    Point2::new(sx / n, sy / n)
}

/// Coordinate-wise median, which ignores the few stray votes that land
/// inside a cluster.
fn median_center(votes: &[Vote], members: &[usize]) -> Point2 {
    let mut xs: Vec<f64> = members.iter().map(|&m| votes[m].center.x).collect();
    let mut ys: Vec<f64> = members.iter().map(|&m| votes[m].center.y).collect();
    Point2::new(median(&mut xs), median(&mut ys))
}

/// Members whose rotation lies within `window` of the best-supported
/// member rotation, together with the agreed rotation. Ties go to the member
/// that comes first in vote order.
fn rotation_consensus(votes: &[Vote], members: &[usize], window: f64) -> (Vec<usize>, f64) {
    let angles: Vec<f64> = members.iter().map(|&m| votes[m].rotation.unwrap_or(0.0)).collect();
    if window >= PI {
        let rot = circular_mean(angles.iter().copied()).unwrap_or(0.0);
        return (members.to_vec(), rot);
    }
    let n = members.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| angles[a].total_cmp(&angles[b]).then(members[a].cmp(&members[b])));
    let sorted: Vec<f64> = order.iter().map(|&o| angles[o]).collect();
    // Three unrolled copies make the circular window a plain interval.
    let tau = 2.0 * PI;
    let unrolled: Vec<f64> = sorted
        .iter()
        .map(|a| a - tau)
        .chain(sorted.iter().copied())
        .chain(sorted.iter().map(|a| a + tau))
        .collect();
    let (mut lo, mut hi) = (0usize, 0usize);
    let mut best: Option<(usize, usize)> = None; // (count, member index of center)
    let mut best_pos = 0;
    for (t, &center) in sorted.iter().enumerate() {
        while unrolled[lo] < center - window {
            lo += 1;
        }
        while hi < unrolled.len() && unrolled[hi] <= center + window {
            hi += 1;
        }
        let count = hi - lo;
        let anchor = members[order[t]];
        let better = match best {
            None => true,
            Some((c, a)) => count > c || (count == c && anchor < a),
        };
        if better {
            best = Some((count, anchor));
            best_pos = t;
        }
    }
    let center = sorted[best_pos];
    let agreeing: Vec<usize> = members
        .iter()
        .zip(&angles)
        .filter(|(_, &a)| cyclical_distance(a, center) * PI <= window)
        .map(|(&m, _)| m)
        .collect();
    // Offsets from the window center in (-π, π].
    let mut offsets: Vec<f64> = agreeing
        .iter()
        .map(|&m| PI - wrap_angle(PI - (votes[m].rotation.unwrap_or(0.0) - center)))
        .collect();
    (agreeing, wrap_angle(center + median(&mut offsets)))
}

/// Clusters the votes and returns the best `k` candidates.
///
/// Cells of size `T_s` are visited from the most to the least populated.
/// Each unvisited cell seeds a cluster with its unclaimed votes plus the
/// unclaimed votes of the 8 neighboring cells that lie within `T_s` of the
/// seed's mean center. Ties in vote count are broken by the smaller mean
/// feature distance, then by the lower `(y, x)` center.
pub fn vote_and_sort(votes: &[Vote], cfg: &ResolvedVoting) -> Result<CandidateList> {
    if votes.is_empty() {
        return Err(Error::NoCandidates);
    }
    let size = cfg.t_spatial;
    let mut cells: HashMap<Cell, Vec<usize>> = HashMap::new();
    for (idx, v) in votes.iter().enumerate() {
        cells.entry(cell_of(&v.center, size)).or_default().push(idx);
    }
    let mut order: Vec<(&Cell, &Vec<usize>)> = cells.iter().collect();
    order.sort_by(|a, b| b.1.len().cmp(&a.1.len()).then((a.0 .1, a.0 .0).cmp(&(b.0 .1, b.0 .0))));

    let mut claimed = vec![false; votes.len()];
    let mut candidates = Vec::new();
    for (cell, own) in order {
        let seed: Vec<usize> = own.iter().copied().filter(|&m| !claimed[m]).collect();
        if seed.is_empty() {
            continue;
        }
        let seed_center = mean_center(votes, &seed);
        let mut members = seed;
        for dy in -1..=1 {
            for dx in -1..=1 {
                if dx == 0 && dy == 0 {
                    continue;
                }
                if let Some(nb) = cells.get(&(cell.0 + dx, cell.1 + dy)) {
                    members.extend(
                        nb.iter()
                            .copied()
                            .filter(|&m| !claimed[m] && votes[m].center.distance(&seed_center) <= size),
                    );
                }
            }
        }
        for &m in &members {
            claimed[m] = true;
        }
        members.sort_unstable();

        let (agreeing, rotation) = if votes[members[0]].rotation.is_some() {
            let (a, r) = rotation_consensus(votes, &members, cfg.rotation_window());
            (a, Some(r))
        } else {
            (members, None)
        };
        if agreeing.is_empty() {
            continue;
        }
        let mean_fd = agreeing.iter().map(|&m| votes[m].feature_distance).sum::<f64>() / agreeing.len() as f64;
        candidates.push(Candidate {
            center: median_center(votes, &agreeing),
            votes: agreeing.len(),
            mean_feature_distance: mean_fd,
            rotation,
        });
    }

    candidates.sort_by(|a, b| {
        b.votes
            .cmp(&a.votes)
            .then(a.mean_feature_distance.total_cmp(&b.mean_feature_distance))
            .then(a.center.y.total_cmp(&b.center.y))
            .then(a.center.x.total_cmp(&b.center.x))
    });
    candidates.truncate(cfg.k);
    Ok(CandidateList { entries: candidates })
}

/// Points of the full set within `T_r` of one candidate center.
#[derive(Debug, Clone, PartialEq)]
pub struct SubSet {
    /// Index of the candidate in the [`CandidateList`].
    pub candidate: usize,
    pub set: PointSet,
    /// Index in the full set of each subset point.
    pub global_index: Vec<usize>,
}

/// Splits the full set into one (possibly overlapping) subset per candidate.
/// Empty subsets are dropped.
pub fn split(full: &PointSet, candidates: &CandidateList, cfg: &ResolvedVoting) -> Vec<SubSet> {
    candidates
        .entries
        .iter()
        .enumerate()
        .filter_map(|(a, c)| {
            let idx: Vec<usize> = full
                .points()
                .iter()
                .enumerate()
                .filter(|(_, p)| p.distance(&c.center) <= cfg.t_radius)
                .map(|(j, _)| j)
                .collect();
            if idx.is_empty() {
                log::warn!(
                    "candidate {a} at ({:.3}, {:.3}) has no points within T_r = {}; dropped",
                    c.center.x,
                    c.center.y,
                    cfg.t_radius
                );
                return None;
            }
            Some(SubSet { candidate: a, set: full.subset(&idx), global_index: idx })
        })
        .collect()
}

/// Runs matrix construction and voting in one call.
pub fn select_candidates(partial: &PointSet, full: &PointSet, cfg: &ResolvedVoting) -> Result<CandidateList> {
    let votes = build_candidate_matrix(partial, full, cfg)?;
    vote_and_sort(&votes, cfg)
}
