//! Wall-clock comparison of two-step registration against direct matching.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::metrics::median;
use super::synthetic::{cut_patch, derive_seed, generate_subject, SyntheticConfig};
use crate::error::Result;
use crate::matchers::{Backend, MatcherConfig};
use crate::pipeline::{direct_register, pf_register};
use crate::voting::{select_candidates, VotingConfig};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BenchConfig {
    pub full_size: usize,
    /// Target patch size; the cut radius is chosen to give about this many
    /// points.
    pub partial_size: usize,
    pub k: usize,
    pub backend: Backend,
    pub repeats: usize,
    /// Full-set sizes for the voting-time scaling series.
    pub scaling_sizes: Vec<usize>,
    pub seed: u64,
}

impl Default for BenchConfig {
    fn default() -> Self {
        Self {
            full_size: 800,
            partial_size: 50,
            k: 4,
            backend: Backend::Hungarian,
            repeats: 5,
            scaling_sizes: vec![200, 400, 800],
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingPoint {
    pub full_size: usize,
    pub partial_size: usize,
    pub voting_ms: f64,
    /// `voting_ms / (|P|·|F|)`, in nanoseconds per pair.
    pub ns_per_pair: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub full_size: usize,
    pub partial_size: usize,
    pub pf_ms: f64,
    pub direct_ms: f64,
    pub speedup: f64,
    pub scaling: Vec<ScalingPoint>,
}

impl BenchReport {
    pub fn to_tsv(&self) -> String {
        let mut out = format!(
            "method\tfull_size\tpartial_size\tms\npf\t{}\t{}\t{}\ndirect\t{}\t{}\t{}\n",
            self.full_size, self.partial_size, self.pf_ms, self.full_size, self.partial_size, self.direct_ms
        );
        out.push_str("\nfull_size\tpartial_size\tvoting_ms\tns_per_pair\n");
        for s in &self.scaling {
            out.push_str(&format!("{}\t{}\t{}\t{}\n", s.full_size, s.partial_size, s.voting_ms, s.ns_per_pair));
        }
        out
    }
}

fn time_median(repeats: usize, mut f: impl FnMut()) -> f64 {
    let mut runs: Vec<f64> = (0..repeats.max(1))
        .map(|_| {
            let start = Instant::now();
            f();
            start.elapsed().as_secs_f64() * 1e3
        })
        .collect();
    median(&mut runs)
}

fn full_set(cfg: &BenchConfig, size: usize) -> Result<crate::model::PointSet> {
    let syn = SyntheticConfig {
        points_per_full: size,
        n_ref_per_subject: 1,
        n_test_per_subject: 1,
        drop_rate: 0.0,
        seed: cfg.seed,
        ..SyntheticConfig::default()
    };
    Ok(generate_subject(&syn, 0)?.swap_remove(0))
}

pub fn speedup_benchmark(cfg: &BenchConfig) -> Result<BenchReport> {
    let syn = SyntheticConfig::default();
    let full = full_set(cfg, cfg.full_size)?;
    let radius = syn.field_radius * (cfg.partial_size as f64 / cfg.full_size as f64).sqrt();
    // Keep cutting until the patch is not clipped by the field boundary.
    let mut attempt = 0;
    let patch = loop {
        let p = cut_patch(&full, radius, derive_seed(cfg.seed, &[attempt]), 3)?;
        attempt += 1;
        if p.set.len() as f64 >= 0.8 * cfg.partial_size as f64 || attempt > 50 {
            break p;
        }
    };
    let voting = VotingConfig { k: cfg.k, ..VotingConfig::default() };
    let matcher = MatcherConfig::with_backend(cfg.backend);

    let pf_ms = time_median(cfg.repeats, || {
        let _ = pf_register(&patch.set, &full, &voting, &matcher);
    });
    let direct_ms = time_median(cfg.repeats, || {
        let _ = direct_register(&patch.set, &full, &matcher);
    });

    let resolved = voting.resolve(&patch.set)?;
    let mut scaling = Vec::new();
    for &size in &cfg.scaling_sizes {
        let f = full_set(cfg, size)?;
        let voting_ms = time_median(cfg.repeats.max(5), || {
            let _ = select_candidates(&patch.set, &f, &resolved);
        });
        let pairs = (patch.set.len() * f.len()) as f64;
        scaling.push(ScalingPoint { full_size: size, partial_size: patch.set.len(), voting_ms, ns_per_pair: voting_ms * 1e6 / pairs });
    }
    Ok(BenchReport {
        full_size: full.len(),
        partial_size: patch.set.len(),
        pf_ms,
        direct_ms,
        speedup: direct_ms / pf_ms,
        scaling,
    })
}
