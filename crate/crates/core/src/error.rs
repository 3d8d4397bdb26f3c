use thiserror::Error;

/// Every failure the library can report.
///
/// The variants map one-to-one onto the exit codes used by the command
/// line front end (see [`Error::exit_code`]).
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    Input(String),
    #[error("operation undefined: {0}")]
    Domain(String),
    #[error("precision exhausted: {0}")]
    PrecisionExhausted(String),
    #[error("sequence is not an admissible quasi-greedy expansion: {0}")]
    NotAdmissible(String),
    #[error("word {0} is not primitive")]
    NotPrimitive(String),
    #[error("expansion agrees with {pattern} through all {depth} certified digits")]
    NoDeviationWithinPrefix { pattern: String, depth: usize },
    #[error("hypothesis fails: {0}")]
    NotApplicable(String),
    #[error("prefix too short: need {needed} digits, have {available}")]
    PrefixTooShort { needed: usize, available: usize },
    #[error("resource cap exceeded: {0}")]
    Resource(String),
    #[error("collapse map failed to advance on {word}: first occurrence {before} -> {after:?}")]
    NonContraction {
        word: String,
        before: usize,
        after: Option<usize>,
    },
    #[error("internal consistency violated: {0}")]
    Internal(String),
}

impl Error {
    /// Process exit code for the command line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::PrecisionExhausted(_) => 3,
            Error::Resource(_) => 5,
            Error::Internal(_) => 1,
            _ => 2,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
