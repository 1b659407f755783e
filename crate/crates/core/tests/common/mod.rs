//! Helpers shared by the integration tests.

#![allow(dead_code)]

use std::path::PathBuf;
use std::process::Command;

use vert_core::process::find_program;

/// A native rustc is enough for PBT runs.
pub fn rustc_ready() -> bool {
    find_program("rustc").is_some()
}

/// clang able to emit wasm32, for oracle builds.
pub fn clang_wasm_ready() -> bool {
    find_program("clang").is_some()
        && Command::new("clang")
            .arg("--print-targets")
            .output()
            .is_ok_and(|o| String::from_utf8_lossy(&o.stdout).contains("wasm32"))
}

pub fn skip(name: &str, ready: bool) -> bool {
    if !ready {
        eprintln!("{name}: skipped, toolchain missing");
    }
    !ready
}

pub fn workdir() -> tempfile::TempDir {
    tempfile::tempdir().unwrap()
}

pub fn manifest_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
}
