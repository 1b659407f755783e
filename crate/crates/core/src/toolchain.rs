//! External tool locations and flag spellings.
//!
//! Argument lists are templates: `{input}`, `{output}`, `{wasm}`,
//! `{harness}`, `{unwind}`, `{unwind_checks}` and `{timeout_ms}` are
//! substituted per invocation. An argument that expands to the empty string
//! is dropped.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pipeline::Language;
use crate::process::find_program;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ToolCommand {
    pub program: PathBuf,
    pub args: Vec<String>,
}

impl ToolCommand {
    pub fn new(program: &str, args: &[&str]) -> Self {
        ToolCommand {
            program: program.into(),
            args: args.iter().map(|s| s.to_string()).collect(),
        }
    }

    /// Build a command with placeholders replaced.
    pub fn command(&self, vars: &[(&str, &str)]) -> Result<std::process::Command> {
        let program = self.resolve()?;
        let mut cmd = std::process::Command::new(program);
        cmd.args(expand(&self.args, vars));
        Ok(cmd)
    }

    pub fn resolve(&self) -> Result<PathBuf> {
        resolve(&self.program)
    }
}

/// Expand placeholders in an argument template.
pub fn expand(args: &[String], vars: &[(&str, &str)]) -> Vec<String> {
    args.iter()
        .map(|a| {
            vars.iter()
                .fold(a.clone(), |acc, (k, v)| acc.replace(&format!("{{{k}}}"), v))
        })
        .filter(|a| !a.is_empty())
        .collect()
}

/// Find a program on `PATH` or beside the running executable.
pub fn resolve(program: &Path) -> Result<PathBuf> {
    if let Some(p) = find_program(program) {
        return Ok(p);
    }
    if program.components().count() == 1 {
        if let Some(dir) = std::env::current_exe().ok().and_then(|e| e.parent().map(Path::to_path_buf)) {
            for d in [Some(dir.as_path()), dir.parent()].into_iter().flatten() {
                let p = d.join(program);
                if find_program(&p).is_some() {
                    return Ok(p);
                }
            }
        }
    }
    Err(Error::ToolchainMissing(program.display().to_string()))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Lifter {
    /// Lift in process.
    Builtin,
    /// External lifter reading `{input}` (wasm) and writing `{output}` (Rust).
    Command(ToolCommand),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckerKind {
    /// Symbolic checker over the harness compiled to wasm32; JSON report on stdout.
    Wasm,
    /// Kani driver over the harness source; concrete playback on stdout.
    Kani,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Checker {
    pub kind: CheckerKind,
    pub command: ToolCommand,
    /// Substituted for `{unwind_checks}` in full verification.
    pub unwind_checks_on: String,
    /// Substituted for `{unwind_checks}` in bounded verification.
    pub unwind_checks_off: String,
}

impl Default for Checker {
    fn default() -> Self {
        Checker {
            kind: CheckerKind::Wasm,
            command: ToolCommand::new(
                "vert-bmc",
                &["{wasm}", "--unwind", "{unwind}", "{unwind_checks}", "--timeout-ms", "{timeout_ms}"],
            ),
            unwind_checks_on: "--unwind-checks".into(),
            unwind_checks_off: "--no-unwind-checks".into(),
        }
    }
}

impl Checker {
    pub fn kani() -> Self {
        Checker {
            kind: CheckerKind::Kani,
            command: ToolCommand::new(
                "kani",
                &[
                    "{harness}",
                    "--harness",
                    "__vert_equivalence",
                    "--default-unwind",
                    "{unwind}",
                    "{unwind_checks}",
                    "-Z",
                    "concrete-playback",
                    "--concrete-playback=print",
                ],
            ),
            unwind_checks_on: String::new(),
            unwind_checks_off: "--no-unwinding-checks".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct Toolchain {
    pub c: ToolCommand,
    pub cpp: ToolCommand,
    pub go: ToolCommand,
    pub rustc: PathBuf,
    pub edition: String,
    pub wasm_target: String,
    /// Optimization level for the natively built PBT harness.
    pub pbt_opt_level: String,
    pub lifter: Lifter,
    pub checker: Checker,
}

impl Default for Toolchain {
    fn default() -> Self {
        let c_flags = [
            "--target=wasm32",
            "-O1",
            "-fno-inline",
            "-nostdlib",
            "-Wl,--no-entry",
            "-Wl,--export-all",
        ];
        let mut c_args: Vec<&str> = c_flags.to_vec();
        c_args.extend(["-x", "c", "{input}", "-o", "{output}"]);
        let mut cpp_args: Vec<&str> = c_flags.to_vec();
        cpp_args.extend(["-fno-exceptions", "-x", "c++", "{input}", "-o", "{output}"]);
        Toolchain {
            c: ToolCommand::new("clang", &c_args),
            cpp: ToolCommand::new("clang", &cpp_args),
            go: ToolCommand::new(
                "tinygo",
                &["build", "-target=wasm-unknown", "-opt=1", "-no-debug", "-o", "{output}", "{input}"],
            ),
            rustc: "rustc".into(),
            edition: "2021".into(),
            wasm_target: "wasm32-unknown-unknown".into(),
            pbt_opt_level: "2".into(),
            lifter: Lifter::Builtin,
            checker: Checker::default(),
        }
    }
}

impl Toolchain {
    pub fn source_compiler(&self, language: Language) -> &ToolCommand {
        match language {
            Language::C => &self.c,
            Language::Cpp => &self.cpp,
            Language::Go => &self.go,
        }
    }

    /// Confirm that every tool needed for `language` is present.
    pub fn check(&self, language: Language) -> Result<()> {
        self.source_compiler(language).resolve()?;
        resolve(&self.rustc)?;
        if let Lifter::Command(c) = &self.lifter {
            c.resolve()?;
        }
        Ok(())
    }

    pub fn rustc(&self) -> Result<std::process::Command> {
        Ok(std::process::Command::new(resolve(&self.rustc)?))
    }

    /// Version strings of the tools that shape the oracle, for fingerprints.
    pub fn versions(&self, language: Language) -> String {
        let version = |p: &Path| {
            std::process::Command::new(p)
                .arg("--version")
                .output()
                .map(|o| String::from_utf8_lossy(&o.stdout).lines().next().unwrap_or("").to_string())
                .unwrap_or_default()
        };
        let compiler = self.source_compiler(language);
        let lifter = match &self.lifter {
            Lifter::Builtin => format!("builtin {}", env!("CARGO_PKG_VERSION")),
            Lifter::Command(c) => c.program.display().to_string(),
        };
        format!("{}|{:?}|{}", version(&compiler.program), compiler.args, lifter)
    }
}
