//! TOML configuration file and command-line overrides.

use std::path::{Path, PathBuf};
use std::time::Duration;

use serde::{Deserialize, Serialize};
use vert_core::{Backend, PipelineConfig, RemoteConfig, Toolchain};

use crate::{CliError, Result};

/// Keys accepted in the configuration file. Every key is optional.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub max_attempts: Option<usize>,
    /// Seconds.
    pub stage_timeout: Option<f64>,
    pub unwind: Option<u32>,
    pub unwind_growth: Option<u32>,
    pub seed: Option<u64>,
    pub pbt_cases: Option<u64>,
    pub require_bounded: Option<bool>,
    pub max_repair_rounds: Option<usize>,
    /// `scripted` or `remote`.
    pub backend: Option<String>,
    /// Directory of scripted candidates.
    pub candidates: Option<PathBuf>,
    pub workspace: Option<PathBuf>,
    pub remote: Option<RemoteConfig>,
    pub toolchain: Option<Toolchain>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<FileConfig> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(format!("reading {}", path.display()), e))?;
        toml::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
    }
}

/// Values given on the command line; they win over the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub max_attempts: Option<usize>,
    pub stage_timeout: Option<f64>,
    pub unwind: Option<u32>,
    pub seed: Option<u64>,
    pub backend: Option<String>,
    pub candidates: Option<PathBuf>,
    pub workspace: Option<PathBuf>,
}

/// Merge defaults, the file and the overrides. `default_candidates` is used
/// for the scripted backend when neither source names a directory.
pub fn build_config(file: &FileConfig, over: &Overrides, default_candidates: &Path) -> Result<PipelineConfig> {
    let mut cfg = PipelineConfig::default();
    if let Some(t) = &file.toolchain {
        cfg.toolchain = t.clone();
    }
    let pick = |a: Option<usize>, b: Option<usize>| a.or(b);
    if let Some(v) = pick(over.max_attempts, file.max_attempts) {
        cfg.max_attempts = v;
    }
    if let Some(v) = over.stage_timeout.or(file.stage_timeout) {
        cfg.stage_time_limit = Duration::try_from_secs_f64(v).map_err(|_| CliError::Config(format!("bad stage timeout {v}")))?;
    }
    if let Some(v) = over.unwind.or(file.unwind) {
        cfg.default_unwind_bound = v;
    }
    if let Some(v) = file.unwind_growth {
        cfg.unwind_growth = v;
    }
    if let Some(v) = over.seed.or(file.seed) {
        cfg.seed = v;
    }
    if let Some(v) = file.pbt_cases {
        cfg.pbt_cases = v;
    }
    if let Some(v) = file.require_bounded {
        cfg.require_bounded = v;
    }
    if let Some(v) = file.max_repair_rounds {
        cfg.max_repair_rounds = v;
    }
    cfg.workspace_dir = over.workspace.clone().or_else(|| file.workspace.clone());
    let backend = over.backend.clone().or_else(|| file.backend.clone()).unwrap_or_else(|| "scripted".into());
    cfg.backend = match backend.as_str() {
        "scripted" => Backend::Scripted {
            dir: over
                .candidates
                .clone()
                .or_else(|| file.candidates.clone())
                .unwrap_or_else(|| default_candidates.to_path_buf()),
        },
        "remote" => Backend::Remote(file.remote.clone().unwrap_or_default()),
        other => return Err(CliError::Config(format!("unknown backend `{other}`"))),
    };
    cfg.validate()?;
    Ok(cfg)
}
