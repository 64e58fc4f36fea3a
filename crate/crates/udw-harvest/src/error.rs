//! Error types shared across the crate.

/// Crate-wide error type.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// An argument lies outside the mathematical domain of the operation.
    #[error("domain error in {context}: {message}")]
    Domain {
        context: &'static str,
        message: String,
    },

    /// An argument is inside the domain but outside the range this
    /// implementation can evaluate in f64 (overflow/underflow of an
    /// intermediate).
    #[error("range error in {context}: {message}")]
    Range {
        context: &'static str,
        message: String,
    },

    /// An integrand produced a non-finite value; the abscissa is reported so
    /// the failure can be located.
    #[error("integrand returned a non-finite value at abscissa {abscissa:e}")]
    NonFiniteIntegrand { abscissa: f64 },

    /// An iterative procedure failed to reach its tolerance.
    #[error("convergence failure in {context}: {message}")]
    Convergence {
        context: &'static str,
        message: String,
    },

    /// A configuration key is missing, unknown, or violates a constraint.
    #[error("config error for key `{key}`: {constraint}")]
    Config { key: String, constraint: String },

    /// Wrapped I/O error (file reading/writing in the CLI layer).
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
