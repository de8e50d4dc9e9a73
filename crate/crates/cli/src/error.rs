use std::path::PathBuf;

use revkam_core::Error as CoreError;

/// Failures surfaced by the driver. Load-time validation gets its own
/// variants; everything raised later by the numerical core is `Module`.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("schema error: {0}")]
    Schema(String),

    #[error("parity error in {component}: term alpha={alpha:?} carries mode k={k:?} of the wrong symmetry")]
    Parity {
        component: String,
        alpha: Vec<usize>,
        k: Vec<i64>,
    },

    #[error("order error in {component}: term alpha={alpha:?} has degree {degree} < {required}")]
    Order {
        component: String,
        alpha: Vec<usize>,
        degree: usize,
        required: usize,
    },

    #[error("reality error: coefficients at k={k:?} are not conjugate-symmetric (defect {defect:e})")]
    Reality { k: Vec<i64>, defect: f64 },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Module(CoreError),
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        match e {
            CoreError::Parity { component, alpha, k } => CliError::Parity { component, alpha, k },
            CoreError::Order {
                component,
                alpha,
                degree,
                required,
            } => CliError::Order {
                component,
                alpha,
                degree,
                required,
            },
            CoreError::Reality { k, defect } => CliError::Reality { k, defect },
            other => CliError::Module(other),
        }
    }
}

impl CliError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code: 2 for rejected input, 1 for failures inside a run.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Module(_) => 1,
            _ => 2,
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
