//! Identification protocols over a reference gallery.

use std::collections::BTreeMap;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::synthetic::{cut_patch, derive_seed};
use crate::error::{Error, Result};
use crate::matchers::MatcherConfig;
use crate::metrics::{inlier_normalized_distance, median};
use crate::model::PointSet;
use crate::pipeline::pf_register;
use crate::voting::VotingConfig;

/// Majority label among the `k` nearest references. Ties go to the smaller
/// summed distance, then to the lexicographically smaller label. Returns
/// `None` only when there are no references.
pub fn knn_identify<'a>(distances: &[f64], labels: &'a [String], k: usize) -> Option<&'a str> {
    let mut order: Vec<usize> = (0..distances.len().min(labels.len())).collect();
    order.sort_by(|&a, &b| distances[a].total_cmp(&distances[b]).then(a.cmp(&b)));
    order.truncate(k.max(1));
    let mut tally: BTreeMap<&str, (usize, f64)> = BTreeMap::new();
    for &i in &order {
        let e = tally.entry(labels[i].as_str()).or_insert((0, 0.0));
        e.0 += 1;
        e.1 += distances[i];
    }
    // BTreeMap iterates in label order, so `min_by` keeps the smaller label
    // on a full tie.
    tally
        .into_iter()
        .min_by(|a, b| b.1 .0.cmp(&a.1 .0).then(a.1 .1.total_cmp(&b.1 .1)))
        .map(|(label, _)| label)
}

/// Pairwise registration scores, `tests × refs`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreMatrices {
    #[serde(with = "crate::io::floats_or_inf")]
    pub distance: Vec<Vec<f64>>,
    pub inliers: Vec<Vec<usize>>,
    /// Matched-pair distance per inlier.
    #[serde(with = "crate::io::floats_or_inf")]
    pub normalized: Vec<Vec<f64>>,
}

/// Registers every test against every reference. A failed registration
/// (nothing found) scores an infinite distance and no inliers.
pub fn score_matrices(
    tests: &[PointSet],
    refs: &[PointSet],
    voting: &VotingConfig,
    matcher: &MatcherConfig,
) -> Result<ScoreMatrices> {
    let rows: Vec<Result<Vec<(f64, usize, f64)>>> =
        tests.par_iter().map(|t| refs.iter().map(|r| score(t, r, voting, matcher)).collect()).collect();
    let mut m = ScoreMatrices { distance: Vec::new(), inliers: Vec::new(), normalized: Vec::new() };
    for row in rows {
        let row = row?;
        m.distance.push(row.iter().map(|s| s.0).collect());
        m.inliers.push(row.iter().map(|s| s.1).collect());
        m.normalized.push(row.iter().map(|s| s.2).collect());
    }
    Ok(m)
}

fn score(test: &PointSet, r: &PointSet, voting: &VotingConfig, matcher: &MatcherConfig) -> Result<(f64, usize, f64)> {
    match pf_register(test, r, voting, matcher) {
        Ok(res) => Ok((res.distance, res.inliers, inlier_normalized_distance(res.sum_matched, res.inliers))),
        Err(Error::NoCandidates) => Ok((f64::INFINITY, 0, f64::INFINITY)),
        Err(e) => Err(e),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SweepConfig {
    pub radii: Vec<f64>,
    pub knn: usize,
    pub min_patch_points: usize,
    /// Repetitions of each timed comparison; the median is reported.
    pub timing_repeats: usize,
    /// Number of patches per radius whose comparison against the whole
    /// gallery is timed.
    pub timing_patches: usize,
    pub seed: u64,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            radii: (0..9).map(|i| 0.5 + 0.25 * i as f64).collect(),
            knn: 3,
            min_patch_points: 3,
            timing_repeats: 3,
            timing_patches: 2,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadiusReport {
    pub radius: f64,
    /// Correctly identified patches over all test samples.
    pub ratio: f64,
    pub correct: usize,
    pub total: usize,
    /// Test samples whose patch was too small to use (counted as wrong).
    pub rejected_patches: usize,
    pub mean_patch_size: f64,
    /// Median wall-clock milliseconds to compare one patch against the
    /// whole gallery.
    pub runtime_ms: f64,
    pub scores: ScoreMatrices,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub backend: String,
    pub ref_labels: Vec<String>,
    pub test_labels: Vec<String>,
    pub radii: Vec<RadiusReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub neighbor_hit_ratio: Option<f64>,
}

impl EvalReport {
    /// Tab-separated `radius ratio runtime_ms` rows with a header.
    pub fn to_tsv(&self) -> String {
        let mut out = String::from("radius\tratio\truntime_ms\tmean_patch_size\n");
        for r in &self.radii {
            out.push_str(&format!("{}\t{}\t{}\t{}\n", r.radius, r.ratio, r.runtime_ms, r.mean_patch_size));
        }
        out
    }
}

/// For every radius, cuts one patch from each test sample, registers it
/// against every reference and identifies it by k-NN.
pub fn recognition_sweep(
    refs: &[PointSet],
    tests: &[PointSet],
    sweep: &SweepConfig,
    voting: &VotingConfig,
    matcher: &MatcherConfig,
) -> Result<EvalReport> {
    let ref_labels = labels(refs)?;
    let test_labels = labels(tests)?;
    let mut radii = Vec::with_capacity(sweep.radii.len());
    for (ri, &radius) in sweep.radii.iter().enumerate() {
        let patches: Vec<Option<PointSet>> = tests
            .iter()
            .enumerate()
            .map(|(t, full)| {
                let seed = derive_seed(sweep.seed, &[ri as u64, t as u64]);
                match cut_patch(full, radius, seed, sweep.min_patch_points) {
                    Ok(p) => Ok(Some(p.set)),
                    Err(Error::EmptyPatch { .. }) => Ok(None),
                    Err(e) => Err(e),
                }
            })
            .collect::<Result<_>>()?;
        let usable: Vec<PointSet> = patches.iter().flatten().cloned().collect();
        let scored = score_matrices(&usable, refs, voting, matcher)?;

        let mut scores = ScoreMatrices { distance: Vec::new(), inliers: Vec::new(), normalized: Vec::new() };
        let mut correct = 0;
        let mut rows = 0;
        for (t, patch) in patches.iter().enumerate() {
            if patch.is_none() {
                scores.distance.push(vec![f64::INFINITY; refs.len()]);
                scores.inliers.push(vec![0; refs.len()]);
                scores.normalized.push(vec![f64::INFINITY; refs.len()]);
                continue;
            }
            let d = &scored.distance[rows];
            if knn_identify(d, &ref_labels, sweep.knn) == Some(test_labels[t].as_str()) {
                correct += 1;
            }
            scores.distance.push(d.clone());
            scores.inliers.push(scored.inliers[rows].clone());
            scores.normalized.push(scored.normalized[rows].clone());
            rows += 1;
        }

        let runtime_ms = time_patches(&usable, refs, sweep, voting, matcher);
        let total = tests.len();
        radii.push(RadiusReport {
            radius,
            ratio: if total == 0 { 0.0 } else { correct as f64 / total as f64 },
            correct,
            total,
            rejected_patches: total - usable.len(),
            mean_patch_size: if usable.is_empty() {
                0.0
            } else {
                usable.iter().map(PointSet::len).sum::<usize>() as f64 / usable.len() as f64
            },
            runtime_ms,
            scores,
        });
        log::info!("radius {radius}: {correct}/{total} identified");
    }
    Ok(EvalReport { backend: matcher.backend.to_string(), ref_labels, test_labels, radii, neighbor_hit_ratio: None })
}

fn labels(sets: &[PointSet]) -> Result<Vec<String>> {
    sets.iter()
        .enumerate()
        .map(|(i, s)| s.label.clone().ok_or_else(|| Error::Invalid(format!("point set {i} has no label"))))
        .collect()
}

fn time_patches(
    patches: &[PointSet],
    refs: &[PointSet],
    sweep: &SweepConfig,
    voting: &VotingConfig,
    matcher: &MatcherConfig,
) -> f64 {
    let timed = &patches[..sweep.timing_patches.min(patches.len())];
    if timed.is_empty() || sweep.timing_repeats == 0 {
        return 0.0;
    }
    let per_patch: Vec<f64> = timed
        .iter()
        .map(|p| {
            let mut runs: Vec<f64> = (0..sweep.timing_repeats)
                .map(|_| {
                    let start = Instant::now();
                    for r in refs {
                        let _ = pf_register(p, r, voting, matcher);
                    }
                    start.elapsed().as_secs_f64() * 1e3
                })
                .collect();
            median(&mut runs)
        })
        .collect();
    per_patch.iter().sum::<f64>() / per_patch.len() as f64
}


/// Fraction of tests whose minimum score is achieved by a reference at most
/// one position away in the ordering.
pub fn neighbor_hit_ratio_from(scores: &[Vec<f64>], tests: &[PointSet], refs: &[PointSet]) -> Result<f64> {
    let order = |s: &PointSet| s.order_index.ok_or(Error::MissingOrder);
    let ref_order: Vec<i64> = refs.iter().map(order).collect::<Result<_>>()?;
    let test_order: Vec<i64> = tests.iter().map(order).collect::<Result<_>>()?;
    if tests.is_empty() {
        return Ok(0.0);
    }
    let hits = scores
        .iter()
        .zip(&test_order)
        .filter(|(row, &t)| {
            row.iter()
                .enumerate()
                .min_by(|a, b| a.1.total_cmp(b.1).then(a.0.cmp(&b.0)))
                .is_some_and(|(j, d)| d.is_finite() && (ref_order[j] - t).abs() <= 1)
        })
        .count();
    Ok(hits as f64 / tests.len() as f64)
}

/// Registers every test against every reference and scores neighbor hits on
/// the inlier-normalized distance.
pub fn neighbor_hit_ratio(
    refs: &[PointSet],
    tests: &[PointSet],
    voting: &VotingConfig,
    matcher: &MatcherConfig,
) -> Result<f64> {
    for s in refs.iter().chain(tests) {
        s.order_index.ok_or(Error::MissingOrder)?;
    }
    let m = score_matrices(tests, refs, voting, matcher)?;
    neighbor_hit_ratio_from(&m.normalized, tests, refs)
}

/// How far the diagonal of a square score matrix sits below the rest:
/// `(mean off-diagonal − mean diagonal) / std off-diagonal`. Infinite
/// entries are clamped to the largest finite entry first.
pub fn diagonal_separation(m: &[Vec<f64>]) -> f64 {
    let max_finite = m.iter().flatten().copied().filter(|v| v.is_finite()).fold(0.0f64, f64::max);
    let clamp = |v: f64| if v.is_finite() { v } else { max_finite };
    let (mut diag, mut off) = (Vec::new(), Vec::new());
    for (i, row) in m.iter().enumerate() {
        for (j, &v) in row.iter().enumerate() {
            if i == j {
                diag.push(clamp(v));
            } else {
                off.push(clamp(v));
            }
        }
    }
    if diag.is_empty() || off.len() < 2 {
        return 0.0;
    }
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    let (md, mo) = (mean(&diag), mean(&off));
    let sd = (off.iter().map(|v| (v - mo).powi(2)).sum::<f64>() / (off.len() - 1) as f64).sqrt();
    if sd == 0.0 {
        return 0.0;
    }
    (mo - md) / sd
}
