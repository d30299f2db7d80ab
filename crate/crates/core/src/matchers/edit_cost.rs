use super::{edit_objective, finish, fit_pairs, point_cost_matrix, MatchResult, MatcherConfig};
use crate::assignment::{self, CostMatrix};
use crate::error::Result;
use crate::metrics::CanonicalSet;

/// Square `(n + m) × (n + m)` edit-cost matrix: substitutions top-left,
/// deletions (ε on the diagonal) top-right, insertions bottom-left, zeros
/// bottom-right.
pub fn edit_cost_matrix(costs: &CostMatrix, epsilon: f64) -> CostMatrix {
    let (n, m) = (costs.rows(), costs.cols());
    CostMatrix::from_fn(n + m, n + m, |r, c| match (r < n, c < m) {
        (true, true) => costs.get(r, c),
        (true, false) => {
            if c - m == r {
                epsilon
            } else {
                f64::INFINITY
            }
        }
        (false, true) => {
            if r - n == c {
                epsilon
            } else {
                f64::INFINITY
            }
        }
        (false, false) => 0.0,
    })
}

/// Minimum-cost edit mapping. Solved on the `n × m` matrix of savings
/// `min(c − 2ε, 0)`, which has the same optimum as the square construction;
/// rows and columns with no saving are left out of the solve.
pub fn optimal_edit(costs: &CostMatrix, epsilon: f64) -> (Vec<(usize, usize)>, f64) {
    let rows: Vec<usize> = (0..costs.rows()).filter(|&i| costs.row(i).iter().any(|&c| c < 2.0 * epsilon)).collect();
    let cols: Vec<usize> =
        (0..costs.cols()).filter(|&j| (0..costs.rows()).any(|i| costs.get(i, j) < 2.0 * epsilon)).collect();
    let savings =
        CostMatrix::from_fn(rows.len(), cols.len(), |a, b| (costs.get(rows[a], cols[b]) - 2.0 * epsilon).min(0.0));
    let mut pairs: Vec<(usize, usize)> = assignment::solve(&savings)
        .pairs()
        .filter(|&(a, b)| savings.get(a, b) < 0.0)
        .map(|(a, b)| (rows[a], cols[b]))
        .collect();
    pairs.sort_unstable();
    let total = edit_objective(costs, &pairs, epsilon);
    (pairs, total)
}

/// Bipartite edit-cost matching. Every substituted pair counts as an inlier.
pub fn match_edit_cost(partial: &CanonicalSet, full: &CanonicalSet, cfg: &MatcherConfig) -> Result<MatchResult> {
    let costs = point_cost_matrix(&cfg.metric, partial, full);
    let (pairs, total) = optimal_edit(&costs, cfg.epsilon);
    let fit = fit_pairs(partial, full, &pairs);
    finish(partial, full, cfg, pairs, fit, total)
}
