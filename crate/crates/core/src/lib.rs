//! Partial-to-full point set registration.
//!
//! A small partial point set is located inside a much larger full set in two
//! steps. Candidate placements of the partial set are first found by voting
//! over compatible point pairs; each candidate region is then matched point
//! to point and the region with the smallest set distance wins.

pub mod assignment;
pub mod error;
pub mod evaluation;
pub mod io;
pub mod matchers;
pub mod metrics;
pub mod model;
pub mod pipeline;
pub mod voting;

pub use error::{Error, Result};
pub use matchers::{match_sets, Backend, MatchResult, MatcherConfig};
pub use metrics::{CanonicalSet, MetricConfig};
pub use model::{Correspondence, Feature, FeatureVariant, MinutiaKind, Point2, PointSet, RigidTransform};
pub use voting::{Candidate, CandidateList, FrameRule, VotingConfig};
pub use pipeline::{direct_register, pf_register, RegistrationResult};
