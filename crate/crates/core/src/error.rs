use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("grid mismatch: {left} vs {right}")]
    GridMismatch { left: String, right: String },

    #[error("propagation distance must be non-negative, got {0} m")]
    NegativeDistance(f64),

    #[error("invalid OAM mode: {0}")]
    InvalidMode(String),

    #[error("mode l={charge} with waist {waist:.4e} m does not fit the grid aperture; use a waist below {max_waist:.4e} m")]
    ApertureGuard { charge: i32, waist: f64, max_waist: f64 },

    #[error("mode basis is not orthonormal: {0}")]
    NonOrthonormalBasis(String),

    #[error("training set is empty")]
    EmptyTrainingSet,

    #[error("invalid training set: {0}")]
    InvalidTrainingSet(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("training diverged at iteration {iteration}: loss is not finite")]
    Diverged { iteration: usize },

    #[error("target is not unitary (max |U^dag U - I| = {defect:.3e})")]
    NonUnitaryTarget { defect: f64 },

    #[error("path label mismatch: {0}")]
    PathLabel(String),

    #[error("invalid quantum state: {0}")]
    InvalidState(String),

    #[error("gate rejected: unitarity defect {defect:.3e} exceeds {limit}")]
    GateRejected { defect: f64, limit: f64 },

    #[error("invalid dataset: {0}")]
    InvalidDataset(String),

    #[error("all counts are zero")]
    ZeroCounts,

    #[error("line {line}: {message}")]
    Schema { line: usize, message: String },

    #[error("log-likelihood decreased at iteration {iteration}: {previous} -> {current}")]
    LikelihoodDecrease { iteration: usize, previous: f64, current: f64 },

    #[error("{dropped} of {trials} Monte Carlo trials failed")]
    TooManyFailedTrials { dropped: usize, trials: usize },

    #[error("malformed binary file: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Image(#[from] image::ImageError),
}

pub type Result<T> = std::result::Result<T, Error>;
