use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A caller-supplied argument is outside the operation's domain.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("point {point} is outside the kernel domain {domain}")]
    Domain { point: String, domain: &'static str },

    /// The embedding series does not pass the Cauchy tail test at this power.
    #[error("embedding series diverges at alpha = {alpha} (partial sums fail the Cauchy tail test)")]
    DivergentEmbedding { alpha: f64 },

    #[error("coefficient {index} is nonzero but mu^-gamma is not representable")]
    NotInPowerSpace { index: usize },

    /// Gram matrix could not be factored, even after the jitter ladder.
    #[error("singular Gram matrix (condition estimate {condition:e})")]
    SingularGram { condition: f64 },

    #[error("empirical operator restricted to the sample span is singular (rank {rank} < n = {n})")]
    SingularOperator { rank: usize, n: usize },

    #[error("ill-conditioned system (condition estimate {condition:e})")]
    IllConditioned { condition: f64 },

    #[error("quadrature did not converge: relative change {change:e} at order {order}")]
    QuadratureNotConverged { change: f64, order: usize },

    #[error("degenerate regression: {0}")]
    Degenerate(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Config(e.to_string())
    }
}

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
