use super::{finish, fit_pairs, point_cost_matrix, MatchResult, MatcherConfig};
use crate::assignment::{self, CostMatrix};
use crate::error::Result;
use crate::metrics::CanonicalSet;

/// Optimal assignment of the cost matrix padded to square with `epsilon`.
/// Returns the real pairs and the padded total.
pub fn padded_assignment(costs: &CostMatrix, epsilon: f64) -> (Vec<(usize, usize)>, f64) {
    let (n, m) = (costs.rows(), costs.cols());
    let s = n.max(m);
    let square = CostMatrix::from_fn(s, s, |i, j| if i < n && j < m { costs.get(i, j) } else { epsilon });
    let a = assignment::solve(&square);
    (a.pairs().filter(|&(i, j)| i < n && j < m).collect(), a.cost)
}

/// Optimal one-to-one assignment; assigned pairs costing `ε` or more are
/// reported as unmatched.
pub fn match_hungarian(partial: &CanonicalSet, full: &CanonicalSet, cfg: &MatcherConfig) -> Result<MatchResult> {
    let costs = point_cost_matrix(&cfg.metric, partial, full);
    let (pairs, total) = padded_assignment(&costs, cfg.epsilon);
    let pairs: Vec<_> = pairs.into_iter().filter(|&(i, j)| costs.get(i, j) < cfg.epsilon).collect();
    let fit = fit_pairs(partial, full, &pairs);
    finish(partial, full, cfg, pairs, fit, total)
}
