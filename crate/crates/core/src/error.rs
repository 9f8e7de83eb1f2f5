use thiserror::Error;

/// Crate-wide error type. Variants mirror the failure modes of the numerical
/// kernels and of config handling; all carry enough context to be actionable.
#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is not symmetric: defect {defect:.3e} exceeds {tol:.3e}")]
    SymmetryViolation { defect: f64, tol: f64 },

    #[error("vectors are rank deficient: smallest/largest singular value {ratio:.3e}")]
    RankDeficient { ratio: f64 },

    #[error("frame spans are too far apart to align: largest principal angle {angle:.4} rad (limit {limit:.4})")]
    AlignmentGapTooLarge { angle: f64, limit: f64 },

    #[error("matrix is not invertible: scaled determinant {scaled_det:.3e}")]
    NotInvertible { scaled_det: f64 },

    #[error("path endpoint at parameter {param} is singular")]
    EndpointSingular { param: f64 },

    #[error("sampling too coarse to resolve eigenvalue crossings near parameter {param}")]
    SamplingTooCoarse { param: f64 },

    #[error("window size {window_n} is odd; the cyclic conjugator needs an even window")]
    OddWindowUnsupported { window_n: usize },

    #[error("closed path has no invertible sample")]
    NoRegularPoint,

    #[error("subspace is not transversal to the family image at sample {sample_index}")]
    NotTransversal { sample_index: usize },

    #[error("matrix is not hyperbolic: an eigenvalue has |Re| = {min_re:.3e} < {tol:.3e}{at}")]
    NotHyperbolic { min_re: f64, tol: f64, at: String },

    #[error("ODE integration failed: {0}")]
    IntegrationFailure(String),

    #[error("loop transport not resolved within the refinement limit ({limit} bisections per interval)")]
    LoopNotResolved { limit: usize },

    #[error("bundle is not aligned; holonomy is undefined")]
    NotAligned,

    #[error("argument outside the half-line domain: {0}")]
    DomainError(String),

    #[error("invalid scenario configuration: {0}")]
    InvalidConfig(String),

    #[error("config error: {0}")]
    ConfigError(String),

    #[error("validation error: {0}")]
    ValidationError(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
