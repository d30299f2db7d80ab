//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each
//! and exits non-zero if any fails.
//!
//! `cargo test -p pfreg --test acceptance -- 3 7` runs a subset.

use std::f64::consts::{PI, TAU};
use std::time::Instant;

use pfreg::evaluation::{
    cut_patch, diagonal_separation, generate_corpus, generate_ordered_corpus, generate_subject,
    neighbor_hit_ratio_from, recognition_sweep, score_matrices, speedup_benchmark, BenchConfig,
    OrderedCorpusConfig, SweepConfig, SyntheticConfig,
};
use pfreg::matchers::{match_icp_traced, match_sets, Backend, MatcherConfig};
use pfreg::metrics::{CanonicalSet, MetricConfig};
use pfreg::model::{Feature, MinutiaKind, Point2, PointSet, RigidTransform};
use pfreg::voting::VotingConfig;
use pfreg::pf_register;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Tolerance for exact-optimum comparisons.
const EXACT: f64 = 1e-9;

struct Outcome {
    pass: bool,
    detail: String,
}

fn main() {
    let args: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let criteria: [(u32, &str, fn() -> Outcome); 9] = [
        (1, "assignment oracle", c1_assignment_oracle),
        (2, "edit-cost oracle", c2_edit_cost_oracle),
        (3, "planted recovery", c3_planted_recovery),
        (4, "voting recall", c4_voting_recall),
        (5, "rotation invariance", c5_rotation_invariance),
        (6, "speedup", c6_speedup),
        (7, "recognition sweep", c7_recognition_sweep),
        (8, "normalized-metric separation", c8_normalized_separation),
        (9, "monotone ICP", c9_monotone_icp),
    ];
    let mut failed = 0;
    for (id, name, run) in criteria {
        if !args.is_empty() && !args.iter().any(|a| a == &id.to_string()) {
            continue;
        }
        let start = Instant::now();
        let o = run();
        let verdict = if o.pass { "PASS" } else { "FAIL" };
        println!("criterion {id} ({name}): {verdict} [{:.1}s] {}", start.elapsed().as_secs_f64(), o.detail);
        if !o.pass {
            failed += 1;
        }
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}

// ---------------------------------------------------------------------------
// Independent oracles.

fn cyclical(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(TAU);
    d.min(TAU - d) / PI
}

struct Pt {
    x: f64,
    y: f64,
    angle: f64,
    bifurcation: bool,
}

/// Point cost with equal weights and unit position scale.
fn oracle_cost(p: &Pt, q: &Pt) -> f64 {
    if p.bifurcation != q.bifurcation {
        return f64::INFINITY;
    }
    0.5 * cyclical(p.angle, q.angle) + 0.5 * ((p.x - q.x).powi(2) + (p.y - q.y).powi(2)).sqrt()
}

fn random_pts(rng: &mut ChaCha8Rng, n: usize, mixed_kinds: bool) -> Vec<Pt> {
    (0..n)
        .map(|_| Pt {
            x: rng.random_range(0.0..0.5),
            y: rng.random_range(0.0..0.5),
            angle: rng.random_range(0.0..TAU),
            bifurcation: mixed_kinds && rng.random_bool(0.5),
        })
        .collect()
}

fn to_canonical(pts: &[Pt]) -> CanonicalSet {
    let set = PointSet::new(
        pts.iter().map(|p| Point2::new(p.x, p.y)).collect(),
        pts.iter()
            .map(|p| {
                let kind = if p.bifurcation { MinutiaKind::Bifurcation } else { MinutiaKind::Termination };
                Feature::minutia(p.angle, kind)
            })
            .collect(),
    )
    .unwrap();
    CanonicalSet::identity(&set)
}

fn unit_metric() -> MetricConfig {
    MetricConfig { w_feature: 0.5, w_position: 0.5, position_scale: Some(1.0) }
}

/// Minimum over all permutations of a square matrix.
fn min_permutation(c: &[Vec<f64>]) -> f64 {
    fn rec(c: &[Vec<f64>], i: usize, used: &mut [bool], acc: f64, best: &mut f64) {
        if i == c.len() {
            *best = best.min(acc);
            return;
        }
        for j in 0..c.len() {
            if !used[j] {
                used[j] = true;
                rec(c, i + 1, used, acc + c[i][j], best);
                used[j] = false;
            }
        }
    }
    let mut best = f64::INFINITY;
    rec(c, 0, &mut vec![false; c.len()], 0.0, &mut best);
    best
}

/// Minimum over injective partial maps: substitutions cost `c`, every
/// unmapped point on either side costs `eps`.
fn min_edit(c: &[Vec<f64>], m: usize, eps: f64) -> f64 {
    fn rec(c: &[Vec<f64>], eps: f64, i: usize, used: &mut [bool], acc: f64, best: &mut f64) {
        if i == c.len() {
            *best = best.min(acc + eps * used.iter().filter(|u| !**u).count() as f64);
            return;
        }
        rec(c, eps, i + 1, used, acc + eps, best);
        for j in 0..used.len() {
            if !used[j] {
                used[j] = true;
                rec(c, eps, i + 1, used, acc + c[i][j], best);
                used[j] = false;
            }
        }
    }
    let mut best = f64::INFINITY;
    rec(c, eps, 0, &mut vec![false; m], 0.0, &mut best);
    best
}

// ---------------------------------------------------------------------------

fn c1_assignment_oracle() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let n = rng.random_range(1..=7);
        let m = rng.random_range(1..=7);
        let eps = rng.random_range(0.05..0.5);
        let p = random_pts(&mut rng, n, false);
        let f = random_pts(&mut rng, m, false);
        let s = n.max(m);
        let square: Vec<Vec<f64>> = (0..s)
            .map(|i| (0..s).map(|j| if i < n && j < m { oracle_cost(&p[i], &f[j]) } else { eps }).collect())
            .collect();
        let cfg = MatcherConfig { backend: Backend::Hungarian, epsilon: eps, metric: unit_metric(), ..Default::default() };
        let r = match_sets(&to_canonical(&p), &to_canonical(&f), &cfg).unwrap();
        worst = worst.max((r.total_cost - min_permutation(&square)).abs());
    }
    let secs = start.elapsed().as_secs_f64();
    Outcome { pass: worst <= EXACT && secs < 10.0, detail: format!("max |Δ| = {worst:.2e} over 1000 instances in {secs:.2}s") }
}

fn c2_edit_cost_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst: f64 = 0.0;
    for _ in 0..500 {
        let n = rng.random_range(1..=4);
        let m = rng.random_range(1..=4);
        let p = random_pts(&mut rng, n, true);
        let f = random_pts(&mut rng, m, true);
        let c: Vec<Vec<f64>> = p.iter().map(|a| f.iter().map(|b| oracle_cost(a, b)).collect()).collect();
        let cfg = MatcherConfig { backend: Backend::EditCost, epsilon: 0.1, metric: unit_metric(), ..Default::default() };
        let r = match_sets(&to_canonical(&p), &to_canonical(&f), &cfg).unwrap();
        worst = worst.max((r.total_cost - min_edit(&c, m, 0.1)).abs());
    }
    Outcome { pass: worst <= EXACT, detail: format!("max |Δ| = {worst:.2e} over 500 instances") }
}

// ---------------------------------------------------------------------------
// Planted trials shared by criteria 3 and 4.

struct Trial {
    rotation_err_deg: f64,
    translation_err: f64,
    t_spatial: f64,
    correct_fraction: f64,
    center_in_top4: bool,
    seconds: f64,
}

fn planted_trials() -> Vec<Trial> {
    let cfg = SyntheticConfig {
        n_ref_per_subject: 1,
        n_test_per_subject: 1,
        noise_sigma: 0.0,
        angle_jitter_deg: 0.0,
        drop_rate: 0.0,
        ..SyntheticConfig::default()
    };
    let radius = cfg.field_radius * (55.0f64 / 800.0).sqrt();
    let voting = VotingConfig { k: 4, ..VotingConfig::default() };
    let matcher = MatcherConfig::with_backend(Backend::EditCost);
    let mut trials = Vec::new();
    let mut seed = 0u64;
    for t in 0..100 {
        let full = generate_subject(&SyntheticConfig { seed: 1000 + t, ..cfg.clone() }, 0).unwrap().swap_remove(0);
        assert_eq!(full.len(), 800);
        let patch = loop {
            seed += 1;
            let p = cut_patch(&full, radius, seed, 3).unwrap();
            if (30..=80).contains(&p.set.len()) {
                break p;
            }
        };
        let start = Instant::now();
        let r = pf_register(&patch.set, &full, &voting, &matcher).unwrap();
        let seconds = start.elapsed().as_secs_f64();
        let t_spatial = voting.resolve(&patch.set).unwrap().t_spatial;
        let rot = (r.transform.normalized_rotation() - patch.to_full.normalized_rotation()).rem_euclid(TAU);
        let rotation_err_deg = rot.min(TAU - rot).to_degrees();
        let translation_err = Point2::new(r.transform.dx, r.transform.dy)
            .distance(&Point2::new(patch.to_full.dx, patch.to_full.dy));
        let correct = r.correspondence.pairs.iter().filter(|&&(i, j)| patch.source_index[i] == j).count();
        let truth = patch.true_center();
        let center_in_top4 = r.per_candidate.iter().take(4).any(|c| c.center.distance(&truth) <= t_spatial);
        trials.push(Trial {
            rotation_err_deg,
            translation_err,
            t_spatial,
            correct_fraction: correct as f64 / patch.set.len() as f64,
            center_in_top4,
            seconds,
        });
    }
    trials
}

fn trials() -> &'static [Trial] {
    static TRIALS: std::sync::OnceLock<Vec<Trial>> = std::sync::OnceLock::new();
    TRIALS.get_or_init(planted_trials)
}

fn c3_planted_recovery() -> Outcome {
    let t = trials();
    let ok = t
        .iter()
        .filter(|t| t.rotation_err_deg <= 1.0 && t.translation_err <= 0.5 * t.t_spatial && t.correct_fraction >= 0.99)
        .count();
    let slowest = t.iter().map(|t| t.seconds).fold(0.0, f64::max);
    Outcome {
        pass: ok >= 95 && slowest < 2.0,
        detail: format!("{ok}/100 trials recovered; slowest trial {slowest:.3}s"),
    }
}

fn c4_voting_recall() -> Outcome {
    let hits = trials().iter().filter(|t| t.center_in_top4).count();
    Outcome { pass: hits >= 95, detail: format!("true center in top-4 in {hits}/100 trials") }
}

// ---------------------------------------------------------------------------

fn c5_rotation_invariance() -> Outcome {
    let cfg = SyntheticConfig {
        n_ref_per_subject: 1,
        n_test_per_subject: 1,
        noise_sigma: 0.0,
        angle_jitter_deg: 0.0,
        drop_rate: 0.0,
        ..SyntheticConfig::default()
    };
    let corpus = generate_corpus(&cfg).unwrap();
    let voting = VotingConfig::default();
    let matcher = MatcherConfig::default();
    let winner = |p: &PointSet| -> (usize, f64) {
        corpus
            .refs
            .iter()
            .enumerate()
            .map(|(i, r)| (i, pf_register(p, r, &voting, &matcher).map_or(f64::INFINITY, |x| x.distance)))
            .min_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)))
            .unwrap()
    };
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let (mut changed, mut max_delta, mut runs) = (0, 0.0f64, 0);
    for (s, test) in corpus.tests.iter().enumerate() {
        let patch = cut_patch(test, 1.5, 500 + s as u64, 3).unwrap().set;
        let (w0, d0) = winner(&patch);
        for _ in 0..10 {
            let rot = RigidTransform::rotation(rng.random_range(0.0..TAU));
            let (w, d) = winner(&patch.transformed(&rot));
            runs += 1;
            if w != w0 {
                changed += 1;
            }
            max_delta = max_delta.max((d - d0).abs());
        }
    }
    Outcome {
        pass: changed == 0 && max_delta < 1e-6,
        detail: format!("winner changed in {changed}/{runs} rotated runs; max |ΔD| = {max_delta:.2e}"),
    }
}

fn c6_speedup() -> Outcome {
    let r = speedup_benchmark(&BenchConfig::default()).unwrap();
    let per_pair: Vec<f64> = r.scaling.iter().map(|s| s.ns_per_pair).collect();
    let spread = per_pair.iter().cloned().fold(0.0, f64::max) / per_pair.iter().cloned().fold(f64::INFINITY, f64::min);
    Outcome {
        pass: r.speedup >= 5.0 && spread <= 1.5,
        detail: format!(
            "pf {:.2} ms vs direct {:.2} ms (|P| = {}, |F| = {}): {:.1}x; voting ns/pair {:?}, spread {:.2}",
            r.pf_ms,
            r.direct_ms,
            r.partial_size,
            r.full_size,
            r.speedup,
            per_pair.iter().map(|v| (v * 100.0).round() / 100.0).collect::<Vec<_>>(),
            spread
        ),
    }
}

fn c7_recognition_sweep() -> Outcome {
    let start = Instant::now();
    let cfg = SyntheticConfig::default();
    let corpus = generate_corpus(&cfg).unwrap();
    let sweep = SweepConfig { radii: cfg.patch_radii.clone(), timing_repeats: 3, timing_patches: 1, ..Default::default() };
    let voting = VotingConfig::default();
    let run = |backend| {
        recognition_sweep(&corpus.refs, &corpus.tests, &sweep, &voting, &MatcherConfig::with_backend(backend)).unwrap()
    };
    let edit = run(Backend::EditCost);
    let greedy = run(Backend::Greedy);
    let secs = start.elapsed().as_secs_f64();

    let e: Vec<f64> = edit.radii.iter().map(|r| r.ratio).collect();
    let g: Vec<f64> = greedy.radii.iter().map(|r| r.ratio).collect();
    let n = edit.radii[0].total as f64;
    let monotone = e.windows(2).all(|w| {
        let se = (w[0] * (1.0 - w[0]) / n).sqrt().max((w[1] * (1.0 - w[1]) / n).sqrt());
        w[1] >= w[0] - se
    });
    let greedy_below = g.iter().zip(&e).all(|(g, e)| g <= e);
    let last = *e.last().unwrap();
    Outcome {
        pass: last >= 0.90 && monotone && greedy_below && secs < 600.0,
        detail: format!(
            "edit {e:?}; greedy {g:?}; largest radius {last:.3}, monotone {monotone}, greedy ≤ edit {greedy_below}, {secs:.0}s"
        ),
    }
}

fn c8_normalized_separation() -> Outcome {
    let corpus = generate_ordered_corpus(&OrderedCorpusConfig::default()).unwrap();
    let voting = VotingConfig::default();
    let m = score_matrices(&corpus.tests, &corpus.refs, &voting, &MatcherConfig::default()).unwrap();
    let raw = diagonal_separation(&m.distance);
    let norm = diagonal_separation(&m.normalized);
    let hits = neighbor_hit_ratio_from(&m.normalized, &corpus.tests, &corpus.refs).unwrap();
    let chance = 2.0 / corpus.refs.len() as f64;
    Outcome {
        pass: norm > raw && hits >= 5.0 * chance,
        detail: format!("separation normalized {norm:.3} vs raw {raw:.3}; neighbor hits {hits:.3} (chance {chance:.3})"),
    }
}

fn c9_monotone_icp() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let cfg = MatcherConfig { backend: Backend::Icp, metric: unit_metric(), ..Default::default() };
    let (mut violations, mut steps) = (0, 0);
    for t in 0..100 {
        let syn = SyntheticConfig { points_per_full: 300, n_ref_per_subject: 1, n_test_per_subject: 1, seed: t, ..Default::default() };
        let full = generate_subject(&syn, 0).unwrap().swap_remove(0);
        let patch = cut_patch(&full, rng.random_range(1.0..2.5), t, 3).unwrap();
        // Start near the truth: the ground-truth pose perturbed by a few degrees.
        let jitter = RigidTransform::new(rng.random_range(-0.1..0.1), rng.random_range(-0.2..0.2), rng.random_range(-0.2..0.2));
        let start = patch.set.transformed(&patch.to_full.compose(&jitter));
        let (_, trace) =
            match_icp_traced(&CanonicalSet::identity(&start), &CanonicalSet::identity(&full), &cfg).unwrap();
        steps += trace.residuals.len().saturating_sub(1);
        violations += trace.residuals.windows(2).filter(|w| w[1] > w[0]).count();
    }
    Outcome { pass: violations == 0, detail: format!("{violations} increases over {steps} iterations in 100 instances") }
}
