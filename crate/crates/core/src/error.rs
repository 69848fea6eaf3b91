use thiserror::Error;

/// Errors produced anywhere in the identification pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid Chebyshev resolution {0}: must be even and at least 2")]
    InvalidResolution(usize),

    #[error("basis must have at least one axis")]
    EmptyBasis,

    #[error("shape mismatch: expected {expected}, found {found}")]
    ShapeMismatch { expected: usize, found: usize },

    #[error("basis mismatch: {left:?} vs {right:?}")]
    BasisMismatch { left: Vec<usize>, right: Vec<usize> },

    #[error("axis {axis} out of range for a {dims}-dimensional basis")]
    AxisOutOfRange { axis: usize, dims: usize },

    #[error("point {0:?} lies outside the domain [-1, 1]^D")]
    OutsideDomain(Vec<f64>),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("non-finite values in {0}")]
    NonFinite(&'static str),

    #[error("trajectory has {0} snapshots; at least 2 are required")]
    TooFewSnapshots(usize),

    #[error("degenerate data: snapshot matrix is identically zero")]
    DegenerateData,

    #[error(
        "eigendecomposition failed ({reason}); ||K||_F = {frobenius:.6e}, \
         sigma_max = {sigma_max:.6e}, sigma_min = {sigma_min:.6e}"
    )]
    Eigen {
        reason: String,
        frobenius: f64,
        sigma_max: f64,
        sigma_min: f64,
    },

    #[error("singular value decomposition failed: {0}")]
    Svd(String),

    #[error("unknown PDE `{name}`; builtin names are: {}", available.join(", "))]
    UnknownPde { name: String, available: Vec<String> },

    #[error("experiment failed for true PDE `{truth}`, candidate `{candidate}`, seed {seed:?}: {source}")]
    Experiment {
        truth: String,
        candidate: String,
        seed: Option<u64>,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    /// Coarse classification used by front ends to pick exit codes.
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::InvalidResolution(_)
            | Error::EmptyBasis
            | Error::AxisOutOfRange { .. }
            | Error::OutsideDomain(_)
            | Error::InvalidParameter(_)
            | Error::UnknownPde { .. } => ErrorKind::Config,
            Error::ShapeMismatch { .. }
            | Error::BasisMismatch { .. }
            | Error::TooFewSnapshots(_)
            | Error::DegenerateData
            | Error::Io(_)
            | Error::Json(_) => ErrorKind::InputData,
            Error::NonFinite(_) | Error::Eigen { .. } | Error::Svd(_) => ErrorKind::Numerical,
            Error::Experiment { source, .. } => source.kind(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Config,
    InputData,
    Numerical,
}
