use super::{edit_objective, estimate_rigid, finish, point_cost_matrix, MatchResult, MatcherConfig};
use crate::assignment;
use crate::error::{Error, Result};
use crate::metrics::CanonicalSet;
use crate::model::{Point2, RigidTransform};

/// Per-iteration record of an ICP run.
#[derive(Debug, Clone, PartialEq)]
pub struct IcpTrace {
    /// Trimmed mean squared residual, starting with the initial pose.
    pub residuals: Vec<f64>,
    /// Number of fit-and-repair iterations performed.
    pub iterations: usize,
    pub transform: RigidTransform,
}

/// Trimmed ICP on positions only, starting from the identity in the
/// canonical frame.
pub fn match_icp(partial: &CanonicalSet, full: &CanonicalSet, cfg: &MatcherConfig) -> Result<MatchResult> {
    match_icp_traced(partial, full, cfg).map(|(r, _)| r)
}

pub fn match_icp_traced(
    partial: &CanonicalSet,
    full: &CanonicalSet,
    cfg: &MatcherConfig,
) -> Result<(MatchResult, IcpTrace)> {
    let n = partial.len();
    if n < 2 {
        return Err(Error::DegenerateInput(format!("ICP needs at least 2 partial points, got {n}")));
    }
    let kept = (n - (cfg.icp_trim_fraction * n as f64).floor() as usize).max(2);

    let mut transform = RigidTransform::IDENTITY;
    let mut pairing = trimmed_pairing(partial, full, &transform, kept);
    let mut residuals = vec![pairing.residual];
    let mut iterations = 0;
    while iterations < cfg.icp_max_iters {
        let pts: Vec<(Point2, Point2)> =
            pairing.pairs.iter().map(|&(i, j)| (transform.apply(&partial.positions[i]), full.positions[j])).collect();
        let step = estimate_rigid(&pts)?;
        let next = step.compose(&transform);
        let next_pairing = trimmed_pairing(partial, full, &next, kept);
        iterations += 1;
        if next_pairing.residual > pairing.residual {
            // Only reachable through rounding: the fit cannot increase the
            // residual of the pairs it was fitted on.
            break;
        }
        let improvement = pairing.residual - next_pairing.residual;
        transform = next;
        pairing = next_pairing;
        residuals.push(pairing.residual);
        if improvement < cfg.icp_tol {
            break;
        }
    }

    let moved = partial.transformed(&transform);
    let costs = point_cost_matrix(&cfg.metric, &moved, full);
    let nearest: Vec<usize> =
        nearest_pairs(&moved.positions, &full.positions).into_iter().map(|(_, j)| j).collect();
    // Many partial points may share a nearest neighbor; keep the closest.
    let candidates = assignment::CostMatrix::from_fn(n, full.len(), |i, j| {
        if nearest[i] == j {
            moved.positions[i].distance_squared(&full.positions[j])
        } else {
            f64::INFINITY
        }
    });
    let pairs: Vec<(usize, usize)> = assignment::greedy(&candidates, f64::INFINITY)
        .into_iter()
        .filter(|&(i, j)| costs.get(i, j) < cfg.epsilon)
        .collect();
    let total = edit_objective(&costs, &pairs, cfg.epsilon);
    let result = finish(&moved, full, cfg, pairs, RigidTransform::IDENTITY, total)?;
    Ok((result, IcpTrace { residuals, iterations, transform }))
}

struct Pairing {
    pairs: Vec<(usize, usize)>,
    residual: f64,
}

fn nearest_pairs(from: &[Point2], to: &[Point2]) -> Vec<(usize, usize)> {
    from.iter()
        .enumerate()
        .map(|(i, p)| {
            let j = to
                .iter()
                .enumerate()
                .min_by(|a, b| p.distance_squared(a.1).total_cmp(&p.distance_squared(b.1)))
                .map(|(j, _)| j)
                .expect("full set is non-empty");
            (i, j)
        })
        .collect()
}

/// Nearest-neighbor pairs under `t`, keeping the `kept` closest; ties keep
/// the lower partial index.
fn trimmed_pairing(partial: &CanonicalSet, full: &CanonicalSet, t: &RigidTransform, kept: usize) -> Pairing {
    let moved: Vec<Point2> = partial.positions.iter().map(|p| t.apply(p)).collect();
    let mut scored: Vec<(f64, usize, usize)> = nearest_pairs(&moved, &full.positions)
        .into_iter()
        .map(|(i, j)| (moved[i].distance_squared(&full.positions[j]), i, j))
        .collect();
    scored.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    scored.truncate(kept);
    let residual = scored.iter().map(|s| s.0).sum::<f64>() / kept as f64;
    Pairing { pairs: scored.into_iter().map(|(_, i, j)| (i, j)).collect(), residual }
}
