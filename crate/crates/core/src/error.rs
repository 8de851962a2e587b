use thiserror::Error;

/// Errors raised by the solvers, scenarios and simulations.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid lottery: {0}")]
    InvalidLottery(String),
    #[error("degenerate utility function: every weight is zero")]
    DegenerateUtility,
    #[error("utility function needs at least one term")]
    EmptyUtility,
    #[error("feature `{0}` already exists and is not an indicator")]
    NameCollision(String),
    #[error("invalid feature vector: {0}")]
    InvalidFeatures(String),
    #[error("commitment penalty must be nonnegative and finite, got {0}")]
    InvalidPenalty(f64),
    #[error("invalid ledger: {0}")]
    InvalidLedger(String),
    #[error("utility function is not normalized")]
    NotNormalized,
    #[error("invalid game: {0}")]
    InvalidGame(String),
    #[error("game too large for enumeration: {0}")]
    TooLarge(String),
    #[error("infeasible game: {0}")]
    InfeasibleGame(String),
    #[error("invalid state: {0}")]
    InvalidState(String),
    #[error("invalid belief: {0}")]
    InvalidBelief(String),
    #[error("value out of range: {0}")]
    Range(String),
    #[error("invalid {scenario} scenario: violated ordering `{ordering}`")]
    InvalidScenario { scenario: String, ordering: String },
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("unknown scenario `{0}`")]
    UnknownScenario(String),
    #[error("population extinct at round {0}")]
    Extinct(usize),
    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    pub(crate) fn scenario(scenario: &str, ordering: impl Into<String>) -> Self {
        Error::InvalidScenario {
            scenario: scenario.to_string(),
            ordering: ordering.into(),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
