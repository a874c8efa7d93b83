use thiserror::Error;

/// Errors raised by scenario validation and the simulation engines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("horizon must be at least 1")]
    EmptyHorizon,

    #[error("length mismatch: {what} has {actual} entries but horizon is {expected}")]
    LengthMismatch {
        what: &'static str,
        expected: usize,
        actual: usize,
    },

    #[error("growth factor non-positive at t={t}: 1 + g_nom = {factor}")]
    GrowthFactorNonPositive { t: usize, factor: f64 },

    #[error("non-finite value in {what} at t={t}")]
    NonFinite { what: &'static str, t: usize },

    #[error("multiplier must be finite and nonnegative, got {0}")]
    InvalidMultiplier(f64),

    #[error("duplicate perturbation at t={0}")]
    DuplicatePerturbation(usize),

    #[error("perturbation at t={t} outside periods 1..={horizon}")]
    PerturbationOutOfRange { t: usize, horizon: usize },

    #[error("observation period {t} outside periods 1..={horizon}")]
    ObservationOutOfRange { t: usize, horizon: usize },

    #[error("inconsistent level state: {0}")]
    InconsistentLevels(String),

    #[error("growth factor 1 + {name} = {factor} must be positive")]
    InvalidGrowthFactor { name: &'static str, factor: f64 },

    #[error("multiplier feedback drives growth factor non-positive at t={t}: 1 + g = {factor}")]
    FeedbackCollapse { t: usize, factor: f64 },

    #[error("eta list is empty")]
    EmptySweep,

    #[error("eta = {eta}: {source}")]
    AtEta {
        eta: f64,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    /// True for arithmetic/domain failures (as opposed to malformed input).
    pub fn is_arithmetic(&self) -> bool {
        match self {
            Error::InvalidGrowthFactor { .. } | Error::FeedbackCollapse { .. } => true,
            Error::AtEta { source, .. } => source.is_arithmetic(),
            _ => false,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
