//! A bounded model checker for WebAssembly harness modules.
//!
//! The module under check imports nondeterministic inputs and assertions
//! from the `vert` namespace:
//!
//! ```text
//! (import "vert" "any_i32" (func (param i32) (result i32)))   ;; tag -> value
//! (import "vert" "any_i64" (func (param i32) (result i64)))
//! (import "vert" "assume"  (func (param i32)))
//! (import "vert" "check"   (func (param i32 i32)))            ;; ok, code
//! ```
//!
//! Every path through the exported entry function is explored symbolically.
//! A path fails when it reaches a trap, a failed `check`, or a call to a
//! function whose name marks it as a panic handler. Loops and recursion
//! whose trip count depends on inputs are unrolled up to the unwind bound.

mod exec;
mod memory;
pub mod solver;
pub mod term;
mod wasm;

use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid module: {0}")]
    Invalid(String),
    #[error("unsupported module feature: {0}")]
    Unsupported(String),
}

impl From<wasmparser::BinaryReaderError> for Error {
    fn from(e: wasmparser::BinaryReaderError) -> Self {
        Error::Invalid(e.to_string())
    }
}

/// Name fragments identifying the Rust panic machinery in a name section.
pub const DEFAULT_PANIC_MARKERS: &[&str] = &[
    "panicking",
    "rust_begin_unwind",
    "rust_panic",
    "rust_start_panic",
    "rust_abort",
];

#[derive(Debug, Clone)]
pub struct Options {
    pub entry: String,
    /// Iterations of an input-dependent loop explored before giving up.
    pub unwind: u32,
    /// Report exceeding the bound as `Unwind`; otherwise those paths are cut.
    pub unwind_checks: bool,
    pub timeout: Option<Duration>,
    pub max_call_depth: usize,
    pub max_concretizations: u32,
    pub panic_markers: Vec<String>,
}

impl Default for Options {
    fn default() -> Self {
        Options {
            entry: "vert_bmc_entry".into(),
            unwind: 10,
            unwind_checks: true,
            timeout: None,
            max_call_depth: 512,
            max_concretizations: 4096,
            panic_markers: DEFAULT_PANIC_MARKERS.iter().map(|s| s.to_string()).collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Status {
    /// Every path completed without a failure.
    Success,
    /// Some path fails; `inputs` reproduces it.
    Failure,
    /// The unwind bound was too small to cover every path.
    Unwind,
    Error,
    Timeout,
}

impl Status {
    /// Process exit code used by the command-line front end.
    pub fn exit_code(self) -> i32 {
        match self {
            Status::Success => 0,
            Status::Failure => 10,
            Status::Unwind => 11,
            Status::Error | Status::Timeout => 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InputValue {
    pub tag: i64,
    pub width: u8,
    /// Sign-extended from `width` bits.
    pub value: i64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Report {
    pub status: Status,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
    #[serde(default)]
    pub inputs: Vec<InputValue>,
    #[serde(default)]
    pub paths: u64,
    #[serde(default)]
    pub pruned: u64,
    #[serde(default)]
    pub instructions: u64,
    #[serde(default)]
    pub solver_calls: u64,
    #[serde(default)]
    pub elapsed_ms: u64,
}

/// Check a module. Malformed input is reported as `Status::Error`.
pub fn check(wasm: &[u8], opts: &Options) -> Report {
    let started = Instant::now();
    let module = match wasm::Module::parse(wasm) {
        Ok(m) => m,
        Err(e) => {
            return Report {
                status: Status::Error,
                reason: Some(e.to_string()),
                inputs: Vec::new(),
                paths: 0,
                pruned: 0,
                instructions: 0,
                solver_calls: 0,
                elapsed_ms: started.elapsed().as_millis() as u64,
            }
        }
    };
    let out = exec::explore(&module, opts);
    let (status, reason) = match out.stop {
        exec::Stop::Done => (Status::Success, None),
        exec::Stop::Pruned => (Status::Success, None),
        exec::Stop::Failure(r) => (Status::Failure, Some(r)),
        exec::Stop::Unwind(r) => (Status::Unwind, Some(format!("unwinding bound exceeded by {r}"))),
        exec::Stop::Error(r) => (Status::Error, Some(r)),
        exec::Stop::Timeout => (Status::Timeout, None),
    };
    Report {
        status,
        reason,
        inputs: out.inputs,
        paths: out.stats.paths,
        pruned: out.stats.pruned,
        instructions: out.stats.instructions,
        solver_calls: out.stats.solver_calls,
        elapsed_ms: started.elapsed().as_millis() as u64,
    }
}
