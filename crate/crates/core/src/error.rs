use thiserror::Error;

/// Errors raised by the registration library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("feature variants are incompatible: {0}")]
    VariantMismatch(String),
    #[error("circular mean angle is undefined (resultant length {0:.3e})")]
    UndefinedMean(f64),
    #[error("partial point set is empty")]
    EmptyPartial,
    #[error("no candidate centers were found")]
    NoCandidates,
    #[error("degenerate input: {0}")]
    DegenerateInput(String),
    #[error("patch holds {found} points, at least {required} required")]
    EmptyPatch { found: usize, required: usize },
    #[error("point set has no order index")]
    MissingOrder,
    #[error("invalid input: {0}")]
    Invalid(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
