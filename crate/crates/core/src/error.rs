//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid rational literal `{input}`: {reason}")]
    InvalidRational { input: String, reason: String },

    #[error("invalid parameter: {0}")]
    InvalidParams(String),

    #[error("degenerate moment sequence: the order-{order} Hankel determinant vanishes")]
    DegenerateMoments { order: usize },

    #[error(
        "derivative vectors are rank deficient at column {index} \
         (relative residual {residual:.3e})"
    )]
    RankDeficient { index: usize, residual: f64 },

    #[error("curve does not provide derivative order {order}")]
    DerivativeUnavailable { order: usize },

    #[error("window [{lo:.6}, {hi:.6}] leaves the curve domain [{domain_lo}, {domain_hi}]")]
    DomainError {
        lo: f64,
        hi: f64,
        domain_lo: f64,
        domain_hi: f64,
    },

    #[error("unknown builtin curve `{0}`")]
    UnknownCurve(String),

    #[error("parameters violate the unit-speed constraint by {violation:.3e}")]
    NotUnitSpeed { violation: f64 },

    #[error("curve is not regular of order {order}: solved kappa_{index}^2 = {value:.6e} <= 0")]
    DegenerateCurve {
        order: usize,
        index: usize,
        value: f64,
    },

    #[error("curvature out of range: {0} (kappa_1 must be positive, the rest non-negative)")]
    InvalidCurvature(f64),

    #[error("initial frame is not orthonormal (max deviation {0:.3e})")]
    InvalidFrame(f64),

    #[error("curvature function {index} is non-positive at t = {t}")]
    NonPositiveCurvature { index: usize, t: f64 },

    #[error(
        "Jacobi eigen iteration did not converge after {sweeps} sweeps \
         (off-diagonal residual {remaining:.3e})"
    )]
    NoConvergence { sweeps: usize, remaining: f64 },

    #[error(
        "matrix breaks the alternating-parity zero pattern at ({row}, {col}): \
         |{value:.3e}| > {bound:.3e}"
    )]
    PatternViolation {
        row: usize,
        col: usize,
        value: f64,
        bound: f64,
    },

    #[error("epsilon ladder must be non-empty, positive, and strictly decreasing")]
    InsufficientLadder,

    #[error(
        "samples span [{have_lo:.6}, {have_hi:.6}] with {count} points in the window; \
         cannot resolve [{want_lo:.6}, {want_hi:.6}]"
    )]
    TooFewSamples {
        have_lo: f64,
        have_hi: f64,
        want_lo: f64,
        want_hi: f64,
        count: usize,
    },

    #[error(
        "eigenvalues {index} and {next} are numerically tied \
         ({a:.6e} vs {b:.6e}); frame directions in their span are undetermined"
    )]
    DegenerateSpectrum {
        index: usize,
        next: usize,
        a: f64,
        b: f64,
    },

    #[error("CSV parse error at line {line}: {message}")]
    CsvParse { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
