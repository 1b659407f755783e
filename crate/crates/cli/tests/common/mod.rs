//! Helpers shared by the end-to-end tests.

#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::Duration;

use vert_core::process::find_program;
use vert_core::toolchain::ToolCommand;
use vert_core::{Backend, PipelineConfig};

pub fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures")
}

/// clang with a wasm32 backend, and rustc with the wasm32 standard library.
pub fn toolchain_ready() -> bool {
    static READY: std::sync::OnceLock<bool> = std::sync::OnceLock::new();
    *READY.get_or_init(|| {
        if find_program("clang").is_none() || find_program("rustc").is_none() {
            return false;
        }
        let libdir = Command::new("rustc")
            .args(["--print", "target-libdir", "--target", "wasm32-unknown-unknown"])
            .output()
            .ok()
            .filter(|o| o.status.success())
            .map(|o| PathBuf::from(String::from_utf8_lossy(&o.stdout).trim()));
        let has_std = libdir
            .and_then(|d| std::fs::read_dir(d).ok())
            .is_some_and(|mut it| it.any(|e| e.is_ok_and(|e| e.file_name().to_string_lossy().starts_with("libstd"))));
        let clang_wasm = Command::new("clang")
            .args(["--print-targets"])
            .output()
            .is_ok_and(|o| String::from_utf8_lossy(&o.stdout).contains("wasm32"));
        has_std && clang_wasm
    })
}

/// Returns true, after a note on stderr, when the test has to be skipped.
pub fn skip(name: &str) -> bool {
    if toolchain_ready() {
        return false;
    }
    eprintln!("{name}: skipped, clang or the wasm32 Rust target is missing");
    true
}

/// Pipeline settings for tests: scripted candidates from `candidates`, the
/// checker built with this crate, and a workspace under `work`.
pub fn config(candidates: &Path, work: &Path, stage_limit: Duration) -> PipelineConfig {
    let mut cfg = PipelineConfig {
        stage_time_limit: stage_limit,
        workspace_dir: Some(work.to_path_buf()),
        backend: Backend::Scripted {
            dir: candidates.to_path_buf(),
        },
        ..PipelineConfig::default()
    };
    let args: Vec<String> = cfg.toolchain.checker.command.args.clone();
    cfg.toolchain.checker.command = ToolCommand {
        program: PathBuf::from(env!("CARGO_BIN_EXE_vert-bmc")),
        args,
    };
    cfg
}

/// Copy the named program directories of `from` into a fresh directory.
pub fn pick(from: &Path, names: &[&str]) -> tempfile::TempDir {
    let dir = tempfile::tempdir().unwrap();
    for name in names {
        let to = dir.path().join(name);
        std::fs::create_dir_all(&to).unwrap();
        for e in std::fs::read_dir(from.join(name)).unwrap() {
            let e = e.unwrap();
            std::fs::copy(e.path(), to.join(e.file_name())).unwrap();
        }
    }
    dir
}
