use std::path::PathBuf;

use thiserror::Error;

/// Errors raised by the simulator, its solvers and the experiment harness.
#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("config error at `{key}`: {reason}")]
    Config { key: String, reason: String },

    #[error("bisection failed to bracket a root after {iters} iterations (lower={lower:e}, upper={upper:e}, residual(upper)={residual:e})")]
    Bisection {
        lower: f64,
        upper: f64,
        residual: f64,
        iters: usize,
    },

    #[error("solver `{solver}` failed: {reason}")]
    Solver { solver: &'static str, reason: String },

    #[error("block coordinate descent increased the objective in round {round}: {before:e} -> {after:e}")]
    BcdIncrease { round: usize, before: f64, after: f64 },

    #[error("slot {slot} failed: {source}\nstate dump:\n{dump}")]
    Slot {
        slot: usize,
        dump: String,
        #[source]
        source: Box<Error>,
    },

    #[error("infeasible: {0}")]
    Infeasible(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("csv error on {path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },

    #[error("toml parse error: {0}")]
    Toml(#[from] toml::de::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn config(key: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Config {
            key: key.into(),
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
