//! Front end for single-program and batch runs.

pub mod batch;
pub mod checker;
pub mod config;

use std::path::{Path, PathBuf};

use thiserror::Error;
use tracing::info;
use vert_core::pipeline::clean_and_split;
use vert_core::{transpile, FinalStatus, Language, PipelineConfig, PipelineReport, SourceProgram};

pub use batch::{run_batch, BatchReport, LanguageCounts, MeanDurations, ProgramSummary};
pub use config::{FileConfig, Overrides};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error(transparent)]
    Pipeline(#[from] vert_core::Error),
    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: std::io::Error,
    },
    #[error("config: {0}")]
    Config(String),
}

impl CliError {
    pub fn io(context: impl Into<String>, source: std::io::Error) -> Self {
        CliError::Io {
            context: context.into(),
            source,
        }
    }

    /// Process exit status for this error.
    pub fn exit_code(&self) -> i32 {
        2
    }
}

pub type Result<T, E = CliError> = std::result::Result<T, E>;

/// File names of a program directory: `source.<ext>` and `entry.<ext>`.
pub const SOURCE_STEM: &str = "source";
pub const ENTRY_STEM: &str = "entry";

/// Load a program from explicit source and entry-call files. The language
/// comes from the source extension unless given.
pub fn load_program(
    source: &Path,
    entry: &Path,
    id: Option<&str>,
    target: Option<&str>,
    language: Option<Language>,
) -> Result<SourceProgram> {
    let read = |p: &Path, what: &str| {
        if !p.is_file() {
            return Err(CliError::Usage(format!("{what} file {} does not exist", p.display())));
        }
        std::fs::read_to_string(p).map_err(|e| CliError::io(format!("reading {}", p.display()), e))
    };
    let text = read(source, "source")?;
    let entry_call = read(entry, "entry-call")?;
    let language = match language {
        Some(l) => l,
        None => source
            .extension()
            .and_then(|e| e.to_str())
            .and_then(Language::from_extension)
            .ok_or_else(|| CliError::Usage(format!("cannot tell the language of {}", source.display())))?,
    };
    let target = match target {
        Some(t) => t.to_string(),
        None => infer_target(&text, &entry_call, language)?,
    };
    let id = match id {
        Some(i) => i.to_string(),
        None => source
            .canonicalize()
            .ok()
            .and_then(|p| p.parent().and_then(|d| d.file_name()).map(|n| n.to_string_lossy().into_owned()))
            .unwrap_or_else(|| "program".into()),
    };
    Ok(SourceProgram {
        id,
        language,
        text,
        entry_call,
        target_fn_name: target,
    })
}

/// Load `dir/source.<ext>` and `dir/entry.<ext>`, named after the directory.
pub fn load_program_dir(dir: &Path) -> Result<SourceProgram> {
    let find = |stem: &str| -> Option<PathBuf> {
        ["c", "cpp", "cc", "go"]
            .iter()
            .map(|e| dir.join(format!("{stem}.{e}")))
            .find(|p| p.is_file())
    };
    let source = find(SOURCE_STEM).ok_or_else(|| CliError::Usage(format!("no source file in {}", dir.display())))?;
    let entry = find(ENTRY_STEM).ok_or_else(|| CliError::Usage(format!("no entry-call file in {}", dir.display())))?;
    let id = dir.file_name().map(|n| n.to_string_lossy().into_owned());
    load_program(&source, &entry, id.as_deref(), None, None)
}

/// The source function the entry call invokes.
pub fn infer_target(text: &str, entry_call: &str, language: Language) -> Result<String> {
    let units = clean_and_split(text, language)?;
    let entry_units = clean_and_split(entry_call, language)?;
    let body = entry_units
        .first()
        .map(|u| u.text.as_str())
        .ok_or_else(|| CliError::Usage("entry call defines no function".into()))?;
    let mut best: Option<(usize, String)> = None;
    for u in &units {
        if let Some(at) = find_call(body, &u.name) {
            if best.as_ref().map_or(true, |(b, _)| at < *b) {
                best = Some((at, u.name.clone()));
            }
        }
    }
    best.map(|(_, n)| n)
        .ok_or_else(|| CliError::Usage("entry call invokes no function of the source".into()))
}

fn find_call(body: &str, name: &str) -> Option<usize> {
    let b = body.as_bytes();
    let word = |c: u8| c.is_ascii_alphanumeric() || c == b'_';
    // Skip the header: the call must be inside the body.
    let open = body.find('{')?;
    body[open..].match_indices(name).map(|(i, _)| open + i).find(|&i| {
        let before_ok = i == 0 || !word(b[i - 1]);
        let rest = body[i + name.len()..].trim_start();
        before_ok && !b.get(i + name.len()).copied().is_some_and(word) && rest.starts_with('(')
    })
}

/// Minimum final status counted as success.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Threshold {
    Pbt,
    Bounded,
    Full,
}

impl Threshold {
    pub fn status(self) -> FinalStatus {
        match self {
            Threshold::Pbt => FinalStatus::PassedPBT,
            Threshold::Bounded => FinalStatus::VerifiedBounded,
            Threshold::Full => FinalStatus::VerifiedFull,
        }
    }
}

/// Write `<id>.report.json` and `<id>.report.txt` into `out`.
pub fn write_report(report: &PipelineReport, out: &Path) -> Result<()> {
    std::fs::create_dir_all(out).map_err(|e| CliError::io(format!("creating {}", out.display()), e))?;
    let json = serde_json::to_string_pretty(report).map_err(|e| CliError::Config(e.to_string()))?;
    let path = |ext: &str| out.join(format!("{}.report.{ext}", report.program_id));
    std::fs::write(path("json"), json).map_err(|e| CliError::io("writing report", e))?;
    std::fs::write(path("txt"), report.render_text()).map_err(|e| CliError::io("writing report", e))?;
    Ok(())
}

/// Run one program and write its reports. Returns the exit status: 0 when
/// the final status reaches `threshold`, 1 otherwise.
pub fn run_single(program: &SourceProgram, config: &PipelineConfig, threshold: Threshold, out: &Path) -> Result<(i32, PipelineReport)> {
    let report = transpile(program, config)?;
    write_report(&report, out)?;
    info!(program = %program.id, status = %report.final_status, "done");
    let code = if report.final_status >= threshold.status() { 0 } else { 1 };
    Ok((code, report))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn target_is_the_first_source_function_called() {
        let text = "int helper(int x) { return x; }\nint reverse(int x) { return helper(x); }\n";
        let entry = "int callReverse() {\n  int r = reverse(123);\n  return r == 321 ? 0 : 1;\n}\n";
        assert_eq!(infer_target(text, entry, Language::C).unwrap(), "reverse");
    }

    #[test]
    fn missing_entry_file_is_a_usage_error() {
        let dir = tempfile::tempdir().unwrap();
        let src = dir.path().join("source.c");
        std::fs::write(&src, "int f(int x) { return x; }").unwrap();
        let err = load_program(&src, &dir.path().join("entry.c"), None, None, None).unwrap_err();
        assert!(matches!(err, CliError::Usage(_)));
    }
}
