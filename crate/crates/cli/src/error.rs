use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config key `{key}`: {message}")]
    Config { key: String, message: String },

    #[error("{module}: {source}")]
    Core {
        module: &'static str,
        #[source]
        source: geosigma::Error,
    },

    /// The optimizer stopped without meeting its tolerance.
    #[error("oracle did not converge: {0}")]
    OracleStalled(String),

    #[error("I/O error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("CSV output: {0}")]
    Csv(#[from] csv::Error),

    #[error("JSON output: {0}")]
    Json(#[from] serde_json::Error),
}

/// Tags core errors with the module that raised them.
pub trait InModule<T> {
    fn in_module(self, module: &'static str) -> Result<T, CliError>;
}

impl<T> InModule<T> for geosigma::Result<T> {
    fn in_module(self, module: &'static str) -> Result<T, CliError> {
        self.map_err(|source| CliError::Core { module, source })
    }
}

impl CliError {
    /// 2 for invalid input, 3 for numerical non-convergence, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config { .. } => 2,
            CliError::Core {
                source: geosigma::Error::NonConvergence { .. },
                ..
            }
            | CliError::OracleStalled(_) => 3,
            CliError::Core { .. } => 2,
            CliError::Io { .. } | CliError::Csv(_) | CliError::Json(_) => 1,
        }
    }
}
