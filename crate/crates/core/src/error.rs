use std::path::PathBuf;

/// Errors produced by the allocation engine and the experiment harness.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid argument `{name}`: {reason}")]
    Domain { name: &'static str, reason: String },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("similarity curve rejected at knot {knot}: {reason}")]
    Curve { knot: usize, reason: String },

    /// The semantic selection leaves no power for the bit-level subcarriers.
    #[error("semantic selection is infeasible: pinned semantic power {pinned:.6e} W exceeds budget {budget:.6e} W")]
    InfeasibleSelection { pinned: f64, budget: f64 },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}:{line}: {reason}")]
    Parse {
        path: PathBuf,
        line: usize,
        reason: String,
    },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn domain(name: &'static str, reason: impl Into<String>) -> Self {
        Error::Domain {
            name,
            reason: reason.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
