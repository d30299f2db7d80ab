use super::{edit_objective, finish, fit_pairs, point_cost_matrix, MatchResult, MatcherConfig};
use crate::assignment;
use crate::error::Result;
use crate::metrics::CanonicalSet;

/// Repeatedly takes the cheapest remaining pair; pairs costing `ε` or more
/// stay unmatched.
pub fn match_greedy(partial: &CanonicalSet, full: &CanonicalSet, cfg: &MatcherConfig) -> Result<MatchResult> {
    let costs = point_cost_matrix(&cfg.metric, partial, full);
    let pairs = assignment::greedy(&costs, cfg.epsilon);
    let total = edit_objective(&costs, &pairs, cfg.epsilon);
    let fit = fit_pairs(partial, full, &pairs);
    finish(partial, full, cfg, pairs, fit, total)
}
