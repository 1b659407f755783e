//! Lifts a WebAssembly module into stand-alone safe Rust source.
//!
//! The output embeds WebAssembly semantics directly: every function becomes a
//! method on `WasmModule` that manipulates a fixed set of `TaggedVal` stack
//! slots, one instruction per line, with traps surfacing as `None`. Linear
//! memory is a `Vec<u8>` owned by the module instance.
//!
//! The text is deterministic for a given input module, so two lifts of
//! modules that differ in a single constant differ in a single line.

mod emit;
mod module;

pub use module::{Export, ExportKind};

use thiserror::Error;

/// Source of the runtime prelude embedded at the top of every lifted module.
pub const RUNTIME_PRELUDE: &str = include_str!("runtime.rs");

#[derive(Debug, Error)]
pub enum LiftError {
    #[error("invalid WebAssembly module: {0}")]
    Invalid(String),
    #[error("unsupported WebAssembly feature: {0}")]
    Unsupported(String),
}

impl From<wasmparser::BinaryReaderError> for LiftError {
    fn from(e: wasmparser::BinaryReaderError) -> Self {
        LiftError::Invalid(e.to_string())
    }
}

/// Result of lifting one module.
#[derive(Debug, Clone)]
pub struct Lifted {
    pub text: String,
    pub exports: Vec<Export>,
}

impl Lifted {
    /// Name of the lifted method implementing the exported function `name`.
    pub fn function_symbol(&self, name: &str) -> Option<String> {
        self.exports
            .iter()
            .find(|e| e.kind == ExportKind::Func && e.name == name)
            .map(|e| format!("func_{}", e.index))
    }
}

/// Lift a binary WebAssembly module.
pub fn lift(wasm: &[u8]) -> Result<Lifted, LiftError> {
    let mut validator = wasmparser::Validator::new();
    validator.validate_all(wasm)?;
    let module = module::ModuleInfo::parse(wasm)?;
    let text = emit::emit_module(&module)?;
    Ok(Lifted {
        text,
        exports: module.exports.clone(),
    })
}

/// Parse the `// export "name" = func_N` header of a lifted text.
pub fn parse_export_header(text: &str) -> Vec<(String, String)> {
    text.lines()
        .take_while(|l| l.starts_with("//") || l.trim().is_empty())
        .filter_map(|l| {
            let rest = l.strip_prefix("// export \"")?;
            let (name, sym) = rest.split_once("\" = ")?;
            Some((name.to_string(), sym.trim().to_string()))
        })
        .collect()
}

/// Command-line entry point shared by the `vert-lift` binary.
///
/// `vert-lift <module.wasm> [-o <out.rs>]`; writes to stdout without `-o`.
pub fn cli_main(args: &[String]) -> i32 {
    let mut input = None;
    let mut output = None;
    let mut it = args.iter();
    while let Some(a) = it.next() {
        match a.as_str() {
            "-o" | "--output" => output = it.next().cloned(),
            "-h" | "--help" => {
                println!("usage: vert-lift <module.wasm> [-o <out.rs>]");
                return 0;
            }
            other if input.is_none() => input = Some(other.to_string()),
            other => {
                eprintln!("vert-lift: unexpected argument `{other}`");
                return 2;
            }
        }
    }
    let Some(input) = input else {
        eprintln!("usage: vert-lift <module.wasm> [-o <out.rs>]");
        return 2;
    };
    let bytes = match std::fs::read(&input) {
        Ok(b) => b,
        Err(e) => {
            eprintln!("vert-lift: cannot read {input}: {e}");
            return 2;
        }
    };
    let lifted = match lift(&bytes) {
        Ok(l) => l,
        Err(e) => {
            eprintln!("vert-lift: {e}");
            return 1;
        }
    };
    match output {
        Some(path) => {
            if let Err(e) = std::fs::write(&path, &lifted.text) {
                eprintln!("vert-lift: cannot write {path}: {e}");
                return 2;
            }
        }
        None => print!("{}", lifted.text),
    }
    0
}

#[cfg(test)]
#[allow(dead_code)]
mod runtime;
