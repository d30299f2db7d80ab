//! Point matching backends. Each backend takes the partial set and one split
//! subset, both already in canonical frames, and returns a correspondence,
//! the aligning transform, the set distance and the inlier count.

mod edit_cost;
mod greedy;
mod hough;
mod hungarian;
mod icp;
mod rigid;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use edit_cost::{edit_cost_matrix, match_edit_cost};
pub use greedy::match_greedy;
pub use hough::match_hough_consistency;
pub use hungarian::match_hungarian;
pub use icp::{match_icp, match_icp_traced, IcpTrace};
pub use rigid::{estimate_rigid, rigid_residual};

use crate::assignment::CostMatrix;
use crate::error::{Error, Result};
use crate::metrics::{matched_sum, point_distance, set_distance, CanonicalSet, MetricConfig, DEFAULT_EPSILON};
use crate::model::{Correspondence, Point2, RigidTransform};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Backend {
    Greedy,
    Hungarian,
    Icp,
    #[default]
    EditCost,
    HoughConsistency,
}

impl Backend {
    pub const ALL: [Backend; 5] =
        [Backend::Greedy, Backend::Hungarian, Backend::Icp, Backend::EditCost, Backend::HoughConsistency];

    pub fn as_str(&self) -> &'static str {
        match self {
            Backend::Greedy => "greedy",
            Backend::Hungarian => "hungarian",
            Backend::Icp => "icp",
            Backend::EditCost => "edit_cost",
            Backend::HoughConsistency => "hough_consistency",
        }
    }
}

impl fmt::Display for Backend {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Backend {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let norm = s.trim().to_ascii_lowercase().replace('-', "_");
        Backend::ALL
            .into_iter()
            .find(|b| b.as_str() == norm)
            .ok_or_else(|| Error::Invalid(format!("unknown backend {s:?}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MatcherConfig {
    pub backend: Backend,
    /// Insertion/deletion cost.
    pub epsilon: f64,
    pub icp_max_iters: usize,
    /// ICP stops once the mean residual improves by less than this.
    pub icp_tol: f64,
    /// Fraction of the worst ICP pairs ignored when fitting.
    pub icp_trim_fraction: f64,
    /// Rotation bin width (radians) of the Hough backend; `None` uses the
    /// voting feature threshold scaled to radians, or 10° standalone.
    pub hough_angle_bin: Option<f64>,
    /// Translation bin width of the Hough backend; `None` uses `T_s`, or a
    /// tenth of the position scale standalone.
    pub hough_translation_bin: Option<f64>,
    pub metric: MetricConfig,
}

impl Default for MatcherConfig {
    fn default() -> Self {
        Self {
            backend: Backend::EditCost,
            epsilon: DEFAULT_EPSILON,
            icp_max_iters: 50,
            icp_tol: 1e-6,
            icp_trim_fraction: 0.1,
            hough_angle_bin: None,
            hough_translation_bin: None,
            metric: MetricConfig::default(),
        }
    }
}

impl MatcherConfig {
    pub fn with_backend(backend: Backend) -> Self {
        Self { backend, ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return Err(Error::Invalid(format!("epsilon must be positive, got {}", self.epsilon)));
        }
        if !(0.0..1.0).contains(&self.icp_trim_fraction) {
            return Err(Error::Invalid("icp_trim_fraction must lie in [0, 1)".into()));
        }
        if !(self.icp_tol >= 0.0) {
            return Err(Error::Invalid("icp_tol must be non-negative".into()));
        }
        for bin in [self.hough_angle_bin, self.hough_translation_bin].into_iter().flatten() {
            if !(bin > 0.0 && bin.is_finite()) {
                return Err(Error::Invalid(format!("hough bin width {bin} must be positive")));
            }
        }
        self.metric.validate()
    }
}

/// Output of one matcher run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatchResult {
    /// Partial index → subset index.
    pub correspondence: Correspondence,
    /// Maps partial coordinates into the full set's original frame.
    pub transform: RigidTransform,
    /// Mean per-partial-point cost (matched pairs plus ε per unmatched).
    #[serde(with = "crate::io::float_or_inf")]
    pub distance: f64,
    pub inliers: usize,
    /// Sum of the point distances of the matched pairs.
    #[serde(with = "crate::io::float_or_inf")]
    pub sum_matched: f64,
    /// Objective the backend minimized: the padded assignment cost for the
    /// Hungarian backend, the edit cost (ε per unmatched point on either
    /// side) for all others.
    #[serde(with = "crate::io::float_or_inf")]
    pub total_cost: f64,
}

/// Runs the backend selected in `cfg`.
pub fn match_sets(partial: &CanonicalSet, full: &CanonicalSet, cfg: &MatcherConfig) -> Result<MatchResult> {
    cfg.validate()?;
    if partial.is_empty() {
        return Err(Error::EmptyPartial);
    }
    if full.is_empty() {
        return Err(Error::DegenerateInput("subset is empty".into()));
    }
    match cfg.backend {
        Backend::Greedy => match_greedy(partial, full, cfg),
        Backend::Hungarian => match_hungarian(partial, full, cfg),
        Backend::Icp => match_icp(partial, full, cfg),
        Backend::EditCost => match_edit_cost(partial, full, cfg),
        Backend::HoughConsistency => match_hough_consistency(partial, full, cfg),
    }
}

/// `|P| × |F_a|` matrix of point distances.
pub fn point_cost_matrix(metric: &MetricConfig, partial: &CanonicalSet, full: &CanonicalSet) -> CostMatrix {
    CostMatrix::from_fn(partial.len(), full.len(), |i, j| {
        point_distance(metric, &partial.positions[i], &full.positions[j], &partial.features[i], &full.features[j])
    })
}

/// Edit cost of a correspondence: matched costs plus ε for every unmatched
/// point on either side.
pub(crate) fn edit_objective(costs: &CostMatrix, pairs: &[(usize, usize)], epsilon: f64) -> f64 {
    let matched: f64 = pairs.iter().map(|&(i, j)| costs.get(i, j)).sum();
    let unmatched = (costs.rows() - pairs.len()) + (costs.cols() - pairs.len());
    matched + epsilon * unmatched as f64
}

/// Least-squares transform from matched pairs in canonical coordinates,
/// falling back to a pure translation for one pair and identity for none.
pub(crate) fn fit_pairs(partial: &CanonicalSet, full: &CanonicalSet, pairs: &[(usize, usize)]) -> RigidTransform {
    let pts: Vec<(Point2, Point2)> =
        pairs.iter().map(|&(i, j)| (partial.positions[i], full.positions[j])).collect();
    match (estimate_rigid(&pts), pts.first()) {
        (Ok(t), _) => t,
        (Err(_), Some((p, q))) => {
            let d = q.sub(p);
            RigidTransform::translation(d.x, d.y)
        }
        (Err(_), None) => RigidTransform::IDENTITY,
    }
}

/// Builds the result for a correspondence found between `partial` (in the
/// frame the matcher aligned it to) and `full`. `canonical` maps partial
/// canonical coordinates onto subset canonical coordinates.
pub(crate) fn finish(
    partial: &CanonicalSet,
    full: &CanonicalSet,
    cfg: &MatcherConfig,
    pairs: Vec<(usize, usize)>,
    canonical: RigidTransform,
    total_cost: f64,
) -> Result<MatchResult> {
    let correspondence = Correspondence::from_pairs(pairs, partial.len(), full.len());
    let distance = set_distance(&cfg.metric, cfg.epsilon, &correspondence, partial, full)?;
    let sum_matched = matched_sum(&cfg.metric, &correspondence, partial, full);
    let transform = full.frame.compose(&canonical).compose(&partial.frame.inverse());
    Ok(MatchResult {
        inliers: correspondence.pairs.len(),
        correspondence,
        transform,
        distance,
        sum_matched,
        total_cost,
    })
}
