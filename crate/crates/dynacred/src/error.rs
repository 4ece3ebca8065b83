//! Error type shared by every module of the crate.

use std::fmt;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

/// Everything that can go wrong across the linear algebra, simulation,
/// credibility and estimation layers.
///
/// Variants carry enough context (index, offending value) to debug a failing
/// model specification without a stack trace.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A pivot of the LDLᵀ factorization fell below tolerance: the matrix is
    /// not positive definite, usually because a covariance model is degenerate.
    NotPositiveDefinite { pivot_index: usize, pivot: f64 },
    /// An AR(1) correlation outside (−1, 1), or outside the range a specific
    /// simulator supports.
    InvalidRho(f64),
    /// The Sherman–Morrison denominator `1 + c·1ᵀM⁻¹1` is numerically zero.
    SingularUpdate { denominator: f64 },
    /// A parameter violated its domain; the message names it.
    InvalidParams(String),
    /// A closed form was asked for a covariance variant it does not cover.
    InvalidVariant(String),
    /// Exponential-smoothing weight outside (0, 1].
    InvalidAlpha(f64),
    /// ARMA autoregressive root on or inside the unit circle.
    NonStationary { phi: f64 },
    /// A two-component model with an unrecognised unit variance function.
    UnsupportedVarianceFn(String),
    /// A moment estimator had nothing to divide by (too few periods, or a
    /// zero exposure sum).
    DegenerateDenominator(String),
    /// A premium method needed the simulated truth but the panel has none.
    MissingTruth { policy_id: String },
    /// The particle filter collapsed (effective sample size below 10).
    ParticleDegeneracy { ess: f64, period: u32 },
    /// The weighted design matrix is rank deficient.
    RankDeficient { column: usize },
    /// Negative prior variance handed to the static conjugate premium.
    InvalidSigma(f64),
    /// `tables` was asked for a table id it does not know.
    UnknownTable(String),
    /// Input lengths disagree; the message says which.
    DimensionMismatch(String),
    /// Malformed panel CSV or config content.
    Parse(String),
    /// Underlying I/O failure (file read/write).
    Io(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::NotPositiveDefinite { pivot_index, pivot } => write!(
                f,
                "matrix is not positive definite: pivot {} at index {} below tolerance",
                pivot, pivot_index
            ),
            Error::InvalidRho(rho) => write!(f, "correlation {} outside the valid range", rho),
            Error::SingularUpdate { denominator } => write!(
                f,
                "rank-one update is singular: denominator {} below tolerance",
                denominator
            ),
            Error::InvalidParams(msg) => write!(f, "invalid parameter: {}", msg),
            Error::InvalidVariant(msg) => write!(f, "unsupported model variant: {}", msg),
            Error::InvalidAlpha(a) => {
                write!(f, "smoothing weight {} outside (0, 1]", a)
            }
            Error::NonStationary { phi } => {
                write!(f, "AR coefficient {} is not stationary (|phi| >= 1)", phi)
            }
            Error::UnsupportedVarianceFn(name) => {
                write!(f, "unsupported unit variance function '{}'", name)
            }
            Error::DegenerateDenominator(msg) => {
                write!(f, "moment estimator denominator is degenerate: {}", msg)
            }
            Error::MissingTruth { policy_id } => {
                write!(f, "policy '{}' has no simulated truth (true_r)", policy_id)
            }
            Error::ParticleDegeneracy { ess, period } => write!(
                f,
                "particle filter degenerated at period {} (effective sample size {:.2})",
                period, ess
            ),
            Error::RankDeficient { column } => {
                write!(f, "design matrix is rank deficient at column {}", column)
            }
            Error::InvalidSigma(s) => write!(f, "prior variance {} must be non-negative", s),
            Error::UnknownTable(id) => write!(f, "unknown table id '{}'", id),
            Error::DimensionMismatch(msg) => write!(f, "dimension mismatch: {}", msg),
            Error::Parse(msg) => write!(f, "parse error: {}", msg),
            Error::Io(msg) => write!(f, "i/o error: {}", msg),
        }
    }
}

impl std::error::Error for Error {}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
