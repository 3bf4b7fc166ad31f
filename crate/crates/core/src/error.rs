use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("degenerate series: {0}")]
    Degenerate(String),

    /// Column `column` of the design lies in the span of the columns before it.
    #[error("singular design: column {column}{} is linearly dependent on earlier columns", label.as_ref().map(|l| format!(" ({l})")).unwrap_or_default())]
    SingularDesign {
        column: usize,
        label: Option<String>,
    },

    #[error("collinearity: {0}")]
    Collinear(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: u64, message: String },

    #[error("format error: {0}")]
    Format(String),

    #[error("ingestion error: {0}")]
    Ingest(String),

    #[error("{stage}: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Process exit code for the CLI: 2 config, 3 data, 4 numerical.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::Unsupported(_) => 2,
            Error::Domain(_)
            | Error::InsufficientData(_)
            | Error::Parse { .. }
            | Error::Format(_)
            | Error::Ingest(_)
            | Error::Io(_) => 3,
            Error::Degenerate(_)
            | Error::SingularDesign { .. }
            | Error::Collinear(_)
            | Error::Numerical(_) => 4,
            Error::Stage { source, .. } => source.exit_code(),
        }
    }

    pub fn in_stage(self, stage: &'static str) -> Error {
        Error::Stage {
            stage,
            source: Box::new(self),
        }
    }

    /// Attach a column label to a `SingularDesign` error.
    pub fn with_column_labels<S: AsRef<str>>(self, labels: &[S]) -> Error {
        match self {
            Error::SingularDesign {
                column,
                label: None,
            } => Error::SingularDesign {
                column,
                label: labels.get(column).map(|s| s.as_ref().to_string()),
            },
            other => other,
        }
    }

    /// The innermost error, skipping stage wrappers.
    pub fn root(&self) -> &Error {
        match self {
            Error::Stage { source, .. } => source.root(),
            other => other,
        }
    }
}
