use num_complex::Complex64;
use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("Newton iteration for Gauss-Legendre root {index} of order {order} did not converge")]
    RuleNotConverged { order: usize, index: usize },

    #[error("quadrature tolerance {tol:e} not reached: best value {value}, last difference {achieved:e}")]
    ToleranceNotReached {
        value: Complex64,
        achieved: f64,
        tol: f64,
    },

    #[error("matrix element ({m}, {n}): {source}")]
    Element {
        m: usize,
        n: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("QR iteration failed to deflate eigenvalue at index {index}")]
    NoConvergence { index: usize },

    #[error("real-count difference lost at g = {g}: count {count}, expected {expected_low} or {expected_high}")]
    BracketLost {
        g: f64,
        count: usize,
        expected_low: usize,
        expected_high: usize,
    },

    #[error("{context}: {source}")]
    Context {
        context: String,
        #[source]
        source: Box<Error>,
    },

    #[error("config line {line}: {message}")]
    ConfigSyntax { line: usize, message: String },

    #[error("unknown config key `{0}`")]
    UnknownKey(String),

    #[error("config key `{key}`: expected {expected}, got {got}")]
    TypeMismatch {
        key: String,
        expected: &'static str,
        got: String,
    },

    #[error("missing required config key `{0}`")]
    MissingKey(String),

    #[error("malformed matrix dump: {0}")]
    Dump(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub fn context(self, context: impl Into<String>) -> Self {
        Error::Context {
            context: context.into(),
            source: Box::new(self),
        }
    }

    /// Innermost error, with `Context` and `Element` wrappers removed.
    pub fn root(&self) -> &Error {
        match self {
            Error::Context { source, .. } | Error::Element { source, .. } => source.root(),
            other => other,
        }
    }

    /// True for configuration problems (CLI exit code 1).
    pub fn is_config(&self) -> bool {
        matches!(
            self.root(),
            Error::InvalidInput(_)
                | Error::ConfigSyntax { .. }
                | Error::UnknownKey(_)
                | Error::TypeMismatch { .. }
                | Error::MissingKey(_)
        )
    }

    pub fn kind(&self) -> &'static str {
        match self.root() {
            Error::InvalidInput(_) => "invalid_input",
            Error::RuleNotConverged { .. } => "rule_not_converged",
            Error::ToleranceNotReached { .. } => "tolerance_not_reached",
            Error::NoConvergence { .. } => "no_convergence",
            Error::BracketLost { .. } => "bracket_lost",
            Error::ConfigSyntax { .. } => "config_syntax",
            Error::UnknownKey(_) => "unknown_key",
            Error::TypeMismatch { .. } => "type_mismatch",
            Error::MissingKey(_) => "missing_key",
            Error::Dump(_) => "matrix_dump",
            Error::Io(_) => "io",
            Error::Json(_) => "json",
            Error::Csv(_) => "csv",
            Error::Element { .. } | Error::Context { .. } => unreachable!(),
        }
    }
}
