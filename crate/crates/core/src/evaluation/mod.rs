//! Synthetic data and the identification, ordering and runtime protocols
//! used to evaluate registration.

mod bench;
mod recognition;
mod synthetic;

pub use bench::{speedup_benchmark, BenchConfig, BenchReport, ScalingPoint};
pub use recognition::{
    diagonal_separation, knn_identify, neighbor_hit_ratio, neighbor_hit_ratio_from, recognition_sweep,
    score_matrices, EvalReport, RadiusReport, ScoreMatrices, SweepConfig,
};
pub use synthetic::{
    cut_patch, derive_seed, generate_corpus, generate_ordered_corpus, generate_subject, Corpus, OrderedCorpus,
    OrderedCorpusConfig, Patch, SyntheticConfig,
};
