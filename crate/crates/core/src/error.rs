use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A configuration value is out of range or inconsistent.
    #[error("invalid configuration field `{field}`: {reason}")]
    Config { field: String, reason: String },

    /// Fewer candidates than required survived ZF scoring in one iteration.
    #[error(
        "iteration {iteration} (seed {seed}): only {feasible} feasible candidates, {required} elites required"
    )]
    InsufficientFeasible {
        seed: u64,
        iteration: usize,
        feasible: usize,
        required: usize,
    },

    /// Every scored reflection vector produced a singular Gram matrix.
    #[error("{method}: no feasible reflection vector found")]
    AllInfeasible { method: String },

    #[error("exhaustive search needs {required} evaluations, cap is {allowed}")]
    EnumerationCap { required: u128, allowed: u128 },

    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {message}")]
    Parse { path: String, message: String },

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn config(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Config {
            field: field.into(),
            reason: reason.into(),
        }
    }
}
