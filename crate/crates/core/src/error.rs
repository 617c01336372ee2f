use thiserror::Error;

/// Errors produced by the recommendation pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: {message}")]
    Record { line: usize, message: String },

    #[error("line {line}: missing required field `{field}`")]
    MissingField { line: usize, field: String },

    #[error("{skipped} malformed record(s) exceeded the error budget of {budget}")]
    ErrorBudget { skipped: usize, budget: usize },

    #[error("corpus is empty after cleaning")]
    EmptyCorpus,

    #[error("duplicate pull request id `{0}`")]
    DuplicatePr(String),

    #[error("invalid bot pattern `{pattern}`: {source}")]
    BotPattern {
        pattern: String,
        #[source]
        source: regex::Error,
    },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("hypergraph has no edges")]
    NoEdges,

    #[error("target pull request `{0}` has no changed files")]
    EmptyTarget(String),

    #[error("target pull request id `{0}` already exists in the graph")]
    TargetExists(String),

    #[error("linear system is singular")]
    Singular,

    #[error("iterative solver did not converge in {iterations} iterations (last change {residual:e})")]
    NotConverged { iterations: usize, residual: f64 },

    #[error("metric undefined on an empty record set")]
    EmptyRecords,

    #[error("corpus spans {span} month(s); at least {required} are required")]
    CorpusTooShort { span: u32, required: u32 },

    #[error("paired samples differ in length ({0} vs {1})")]
    PairedLength(usize, usize),

    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: std::io::Error,
    },

    #[error("{context}: {source}")]
    Json {
        context: String,
        #[source]
        source: serde_json::Error,
    },

    #[error("{path}: {source}")]
    File {
        path: String,
        #[source]
        source: Box<Error>,
    },

    #[error("round {round}: {source}")]
    Round {
        round: usize,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub fn io(context: impl Into<String>, source: std::io::Error) -> Self {
        Error::Io {
            context: context.into(),
            source,
        }
    }

    pub fn json(context: impl Into<String>, source: serde_json::Error) -> Self {
        Error::Json {
            context: context.into(),
            source,
        }
    }

    /// Attaches the file the error came from.
    pub fn in_file(self, path: impl Into<String>) -> Self {
        Error::File {
            path: path.into(),
            source: Box::new(self),
        }
    }

    /// True when the error is caused by the input data or the user's
    /// arguments rather than a defect in the pipeline.
    pub fn is_user_error(&self) -> bool {
        match self {
            Error::Singular | Error::NotConverged { .. } => false,
            Error::Round { source, .. } | Error::File { source, .. } => source.is_user_error(),
            _ => true,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
