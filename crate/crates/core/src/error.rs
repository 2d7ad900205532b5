use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("non-finite sample{}", match .index { Some(i) => format!(" at index {i}"), None => String::new() })]
    InvalidSample { index: Option<usize> },

    /// Raised when weights stop being finite or the windowed MSE blows past the
    /// divergence threshold. `iteration` is filled in by the run drivers.
    #[error("adaptation diverged{}", match .iteration { Some(i) => format!(" at iteration {i}"), None => String::new() })]
    Divergence { iteration: Option<usize> },

    #[error("degenerate spectrum: {0}")]
    DegenerateSpectrum(String),

    #[error("singular or ill-conditioned matrix (condition estimate {condition:e})")]
    SingularMatrix { condition: f64 },

    #[error("no plateau found in learning curve")]
    NoPlateau,

    #[error("invalid plant: {0}")]
    InvalidPlant(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(String),

    #[error("csv error: {0}")]
    Csv(String),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    /// Attaches an iteration index to a divergence error; other variants pass through.
    pub fn at_iteration(self, iteration: usize) -> Self {
        match self {
            Error::Divergence { iteration: None } => Error::Divergence {
                iteration: Some(iteration),
            },
            other => other,
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(err: std::io::Error) -> Self {
        Error::Io(err.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(err: csv::Error) -> Self {
        Error::Csv(err.to_string())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
