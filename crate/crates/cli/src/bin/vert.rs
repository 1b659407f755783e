use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use tracing_subscriber::EnvFilter;
use vert_cli::config::{build_config, FileConfig, Overrides};
use vert_cli::{load_program, run_batch, run_single, CliError, Threshold};
use vert_core::Language;

#[derive(Parser)]
#[command(name = "vert", version, about = "Transpile C, C++ and Go functions to verified safe Rust")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// TOML configuration file; flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Candidate generator.
    #[arg(long, value_parser = ["scripted", "remote"])]
    backend: Option<String>,
    /// Directory of scripted candidates, `<dir>/<program>/attempt-<n>.rs`.
    #[arg(long)]
    candidates: Option<PathBuf>,
    #[arg(long)]
    max_attempts: Option<usize>,
    /// Per-stage limit in seconds.
    #[arg(long)]
    stage_timeout: Option<f64>,
    /// Initial unwind bound.
    #[arg(long)]
    unwind: Option<u32>,
    #[arg(long)]
    seed: Option<u64>,
    /// Directory for reports.
    #[arg(long, default_value = "vert-out")]
    out: PathBuf,
    /// Keep per-attempt build directories here instead of a temporary one.
    #[arg(long)]
    workspace: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Transpile one program.
    Run {
        #[command(flatten)]
        common: Common,
        /// Source file.
        #[arg(long)]
        source: PathBuf,
        /// File holding the entry call.
        #[arg(long)]
        entry: PathBuf,
        /// Target function; inferred from the entry call when omitted.
        #[arg(long)]
        target: Option<String>,
        /// Program identifier; defaults to the source's directory name.
        #[arg(long)]
        id: Option<String>,
        #[arg(long)]
        language: Option<String>,
        /// Lowest final status that counts as success.
        #[arg(long, value_enum, default_value = "pbt")]
        require: Threshold,
    },
    /// Transpile every program under a fixtures directory.
    Batch {
        #[command(flatten)]
        common: Common,
        /// One subdirectory per program with `source.<ext>` and `entry.<ext>`.
        #[arg(long)]
        fixtures: PathBuf,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        /// Only run programs in this language.
        #[arg(long)]
        language: Option<String>,
    },
}

fn overrides(c: &Common) -> Overrides {
    Overrides {
        max_attempts: c.max_attempts,
        stage_timeout: c.stage_timeout,
        unwind: c.unwind,
        seed: c.seed,
        backend: c.backend.clone(),
        candidates: c.candidates.clone(),
        workspace: c.workspace.clone(),
    }
}

fn file_config(c: &Common) -> Result<FileConfig, CliError> {
    c.config.as_deref().map(FileConfig::load).transpose().map(Option::unwrap_or_default)
}

fn language(s: Option<&str>) -> Result<Option<Language>, CliError> {
    s.map(|l| l.parse::<Language>()).transpose().map_err(CliError::from)
}

fn run(cli: Cli) -> Result<i32, CliError> {
    match cli.command {
        Command::Run {
            common,
            source,
            entry,
            target,
            id,
            language: lang,
            require,
        } => {
            let program = load_program(&source, &entry, id.as_deref(), target.as_deref(), language(lang.as_deref())?)?;
            let default_candidates = source
                .canonicalize()
                .ok()
                .and_then(|p| p.parent().and_then(Path::parent).map(Path::to_path_buf))
                .unwrap_or_else(|| PathBuf::from("."));
            let cfg = build_config(&file_config(&common)?, &overrides(&common), &default_candidates)?;
            let (code, report) = run_single(&program, &cfg, require, &common.out)?;
            print!("{}", report.render_text());
            Ok(code)
        }
        Command::Batch {
            common,
            fixtures,
            jobs,
            language: lang,
        } => {
            if !fixtures.is_dir() {
                return Err(CliError::Usage(format!("{} is not a directory", fixtures.display())));
            }
            let cfg = build_config(&file_config(&common)?, &overrides(&common), &fixtures)?;
            let report = run_batch(&fixtures, &cfg, jobs, language(lang.as_deref())?, Some(&common.out))?;
            print!("{}", report.render_table());
            Ok(0)
        }
    }
}

fn main() {
    tracing_subscriber::fmt()
        .with_env_filter(EnvFilter::try_from_env("VERT_LOG").unwrap_or_else(|_| EnvFilter::new("warn")))
        .with_writer(std::io::stderr)
        .init();
    let cli = Cli::parse();
    let code = match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("vert: {e}");
            e.exit_code()
        }
    };
    std::process::exit(code);
}
