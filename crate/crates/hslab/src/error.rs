//! Error taxonomy shared across the crate.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum HsError {
    /// Invalid parameter (dimension, exponent range, grid size, ...).
    #[error("parameter error: {0}")]
    Parameter(String),

    /// The linear-weight case b = a + 1 (s = 2 in the reduced problem) is excluded.
    #[error("excluded case: {0}")]
    ExcludedCase(String),

    /// Point lies outside the boundary-flattening chart.
    #[error("chart error: {0}")]
    Chart(String),

    /// Evaluation at a singular point (inversion center, pole node).
    #[error("singular point: {0}")]
    SingularPoint(String),

    /// Scalar argument outside the admissible range of a closed form.
    #[error("out of range: {0}")]
    OutOfRange(String),

    /// Quadrature of a non-integrable weight configuration.
    #[error("integrability error: {0}")]
    Integrability(String),

    /// The ray energy t -> Phi(t u) has no interior maximum.
    #[error("no ray maximum: {0}")]
    NoMaximum(String),

    /// The Nehari scaling equation has more than one positive root.
    /// Surfaced, never silently resolved.
    #[error("non-unique Nehari scaling: {0}")]
    NonUniqueNehari(String),

    /// Blow-up scale underflow or other rescaling failure.
    #[error("scale error: {0}")]
    Scale(String),

    /// Outer-shell contribution too large; the truncation radius is too small.
    #[error("truncation radius too small: {0}")]
    RmaxTooSmall(String),

    /// Parameters outside the regime of the requested computation.
    #[error("regime error: {0}")]
    Regime(String),

    /// An oracle field failed residual certification or two oracle routes disagree.
    #[error("oracle failure: {0}")]
    OracleFailure(String),

    /// A property guaranteed by the theory was violated numerically.
    #[error("invariant violation: {0}")]
    InvariantViolation(String),

    /// Solver diagnostics error (negative-energy runaway and similar).
    #[error("solver diagnostics: {0}")]
    Diagnostics(String),

    /// Configuration file problem (unknown keys are rejected).
    #[error("config error: {0}")]
    Config(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, HsError>;

impl HsError {
    /// Process exit code for the CLI: 2 for invariant/oracle violations,
    /// 3 for parameter/config/regime errors, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            HsError::InvariantViolation(_) | HsError::OracleFailure(_) => 2,
            HsError::Parameter(_)
            | HsError::ExcludedCase(_)
            | HsError::Chart(_)
            | HsError::OutOfRange(_)
            | HsError::Integrability(_)
            | HsError::Regime(_)
            | HsError::Config(_) => 3,
            _ => 1,
        }
    }
}
