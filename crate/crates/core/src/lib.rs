//! Transpile C, C++ and Go functions into safe Rust and check each candidate
//! against an oracle lifted from the source's WebAssembly build.
//!
//! The loop lives in [`pipeline::transpile`]. Candidates come from a
//! [`generator::Backend`], compiler errors are repaired by [`diagnostics`],
//! the oracle is built by [`oracle`], harnesses by [`harness`] and the
//! property-based and model-checking stages run in [`verifier`].

pub mod diagnostics;
pub mod error;
pub mod generator;
pub mod harness;
pub mod oracle;
pub mod pipeline;
pub mod process;
pub mod scan;
pub mod toolchain;
pub mod verifier;

pub use error::{Error, Result};
pub use generator::{Backend, Prompt, RemoteConfig};
pub use harness::{Harness, InputStrategy, WrappedOracle};
pub use oracle::{InjectionKind, InjectionPoint, OracleModule};
pub use pipeline::{
    clean_and_split, transpile, AttemptRecord, FinalStatus, FunctionUnit, Language, PipelineConfig, PipelineReport,
    SourceProgram, Timings,
};
pub use toolchain::{Checker, CheckerKind, Toolchain};
pub use verifier::{CounterExample, Stage, VerificationOutcome, VerificationStatus};
pub use {vert_bmc, vert_lift};
