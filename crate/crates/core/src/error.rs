use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("degree mismatch: expected {expected}, got {got}")]
    DegreeMismatch { expected: usize, got: usize },

    #[error("degree overflow: {p} + {q} exceeds ambient dimension {n}")]
    DegreeOverflow { p: usize, q: usize, n: usize },

    #[error("cannot contract a degree-0 element")]
    ContractScalar,

    #[error("invalid multi-index {indices:?} for n = {n}, p = {p}")]
    InvalidIndex { indices: Vec<usize>, n: usize, p: usize },

    #[error("frame is rank deficient (smallest pivot {pivot:.3e})")]
    RankDeficient { pivot: f64 },

    #[error("zero element where a nonzero one is required")]
    ZeroElement,

    #[error("vector is not unit length (norm {norm})")]
    NotUnit { norm: f64 },

    #[error("unknown calibration `{0}`")]
    UnknownCalibration(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("comass confirmation failed for {name}: estimate {value}, claimed {claimed}")]
    ComassConfirmation { name: String, value: f64, claimed: f64 },

    #[error("empty sample set")]
    EmptySamples,

    #[error("epsilon underflow: no positive basis found down to eps = {eps:e}")]
    EpsilonUnderflow { eps: f64 },

    #[error("mass bracket [{lower}, {upper}] does not contain 1")]
    MassNormalization { lower: f64, upper: f64 },

    #[error("vanishing gradient at the probe point")]
    VanishingGradient,

    #[error("hessian cross-check discrepancy {gap:.3e} exceeds {limit:.3e}")]
    CrossCheck { gap: f64, limit: f64 },

    #[error("invalid scalar field: {0}")]
    InvalidField(String),

    #[error("invalid current: {0}")]
    InvalidCurrent(String),

    #[error("invalid mesh: {0}")]
    InvalidMesh(String),

    #[error("point {0} is not an interior vertex")]
    NotInterior(usize),

    #[error("mesh is disconnected")]
    Disconnected,

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("rank-deficient test family (rank {rank} of {len})")]
    RankDeficientFamily { rank: usize, len: usize },

    #[error("invalid duality model: {0}")]
    InvalidModel(String),

    #[error("linear program failed: {0}")]
    Lp(String),

    #[error("parse error at {location}: {message}")]
    Parse { location: String, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn check_dim(expected: usize, got: usize) -> Result<()> {
    if expected != got {
        return Err(Error::DimensionMismatch { expected, got });
    }
    Ok(())
}
