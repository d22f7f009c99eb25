//! Error types shared by all modules.

/// Errors produced by the toolkit.
///
/// Numeric errors carry the module tag so the CLI can report which stage of a
/// pipeline failed; quadrature failures keep the residual estimate.
#[derive(Debug, Clone, thiserror::Error)]
pub enum Error {
    /// Argument outside the mathematical domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A quadrature or iteration failed to converge.
    #[error("numeric error in `{module}`: {message}")]
    Numeric {
        module: &'static str,
        message: String,
    },

    /// The requested operation has no implementation for this ψ family.
    #[error("unsupported family for {operation}: {detail}")]
    UnsupportedFamily {
        operation: &'static str,
        detail: String,
    },

    /// Evaluation exactly at a branch point of the holomorphic extension.
    #[error("branch point of psi hit at s = {s}; evaluate at a nearby point instead")]
    BranchPoint { s: f64 },

    /// Laplace-transform evaluation too close to the pole ξ² = −μ².
    #[error("laplace transform pole: |mu^2 + xi^2| = {distance:.3e} below threshold")]
    NearPole { distance: f64 },

    /// Root bracketing failed; indicates a phase value outside [0, π/2).
    #[error("bracket failure for mode n = {n}: no sign change in [{lo}, {hi}]")]
    BracketFailure { n: u32, lo: f64, hi: f64 },

    /// Two quantities that must agree by theory disagree; signals a bug
    /// upstream (e.g. in the Bernstein calculus), not in the caller.
    #[error("internal inconsistency: {0}")]
    InternalInconsistency(String),

    /// Configuration file or flag parsing failure.
    #[error("config error: {0}")]
    Config(String),
}

impl Error {
    pub fn numeric(module: &'static str, message: impl Into<String>) -> Self {
        Error::Numeric {
            module,
            message: message.into(),
        }
    }

    pub fn domain(message: impl Into<String>) -> Self {
        Error::Domain(message.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
