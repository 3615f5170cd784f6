use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Model(#[from] risopt::Error),

    #[error("{context}: {source}")]
    Io {
        context: String,
        source: std::io::Error,
    },
}

impl CliError {
    /// Process exit status: 2 for bad input, 3 for numerical failures,
    /// 4 for a stalled line search, 1 for I/O problems.
    pub fn exit_code(&self) -> i32 {
        use risopt::Error as E;
        match self {
            CliError::Config(_) => 2,
            CliError::Io { .. } => 1,
            CliError::Model(e) => match e {
                E::Geometry(_) | E::Config(_) | E::Dimension(_) | E::Reciprocity { .. } => 2,
                E::Infeasible(_) | E::Json(_) => 2,
                E::Stall { .. } => 4,
                E::Quadrature { .. } | E::Singular { .. } | E::Degenerate(_) => 3,
                E::Io(_) => 1,
            },
        }
    }

    pub(crate) fn from_config(e: risopt::Error) -> Self {
        CliError::Config(e.to_string())
    }

    pub(crate) fn io(context: impl Into<String>) -> impl FnOnce(std::io::Error) -> Self {
        let context = context.into();
        move |source| CliError::Io { context, source }
    }
}
