use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("required tool `{0}` was not found")]
    ToolchainMissing(String),
    #[error("building the oracle failed: {0}")]
    OracleBuildFailed(String),
    #[error("lifting failed: {0}")]
    LiftFailed(String),
    #[error("expected {expected} changed line(s) after mutating a constant, found {found}")]
    AmbiguousDiff { expected: usize, found: usize },
    #[error("entry call has no literal input or no literal expected output")]
    NoEntryConstants,
    #[error("injection point on line {line} no longer matches the lifted text")]
    PointStale { line: usize },
    #[error("unsupported type in harness signature: {0}")]
    UnsupportedType(String),
    #[error("unbalanced delimiter at byte {offset}")]
    UnbalancedDelimiters { offset: usize },
    #[error("compiler failed without emitting diagnostics")]
    NoDiagnostics,
    #[error("repair actions overlap at line {line}")]
    OverlappingActions { line: usize },
    #[error("cannot read a counterexample from the verifier log: {0}")]
    UnparseableTrace(String),
    #[error("model backend unavailable: {0}")]
    BackendUnavailable(String),
    #[error("no scripted candidate at {0}")]
    FixtureExhausted(PathBuf),
    #[error("invalid source program: {0}")]
    InvalidSource(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(context: impl Into<String>, source: std::io::Error) -> Self {
        Error::Io {
            context: context.into(),
            source,
        }
    }
}
