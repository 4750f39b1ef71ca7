//! Error type shared across the crate.

use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

/// Failure modes of the beam model, samplers, and propagators.
#[derive(Debug, Clone, Error)]
pub enum Error {
    /// A physical or configuration parameter violates its invariant.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// An iterative solve failed to reach tolerance.
    #[error("{what} did not converge within {iterations} iterations")]
    NonConvergence { what: &'static str, iterations: u32 },

    /// The bistable analysis requires an unstable first mode (alpha < 0).
    #[error("unsupported regime: {0}")]
    UnsupportedRegime(String),

    /// No potential barrier exists (alpha >= 0), so well/barrier scales are undefined.
    #[error("no barrier: alpha = {alpha:e} is not negative")]
    NoBarrier { alpha: f64 },

    /// The requested energy level set (or sampling region) is empty.
    #[error("empty region at energy {energy:e}: {context}")]
    EmptyRegion { energy: f64, context: &'static str },

    /// Rejection sampling would be hopeless in this region.
    #[error("pathological sampling region: acceptance estimate {acceptance:e} below 1e-3")]
    PathologicalRegion { acceptance: f64 },

    /// Energy drift exceeded the configured alarm threshold during propagation.
    #[error("integration accuracy lost: relative energy drift {drift:e} exceeds {tol:e}")]
    IntegrationAccuracy { drift: f64, tol: f64 },

    /// An ensemble produced no usable records.
    #[error("no statistics: {0}")]
    NoStatistics(String),

    /// The pulse-decay fit found nothing to fit.
    #[error("pulse fit failed: {0}")]
    FitFailure(String),
}
