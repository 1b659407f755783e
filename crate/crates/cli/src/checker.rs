//! The `vert-bmc` command: check one harness module and print a JSON report.
//!
//! The solver cannot be interrupted from inside, so a watchdog thread
//! prints a `TIMEOUT` report and exits the process when the limit passes.

use std::time::Duration;

use vert_core::vert_bmc::{self, Options, Report, Status};

pub const USAGE: &str =
    "usage: vert-bmc <module.wasm> [--unwind K] [--unwind-checks | --no-unwind-checks] [--timeout-ms N] [--entry NAME]";

/// Parsed command line.
#[derive(Debug, Clone)]
pub struct Args {
    pub wasm: std::path::PathBuf,
    pub options: Options,
}

pub fn parse_args(args: &[String]) -> Result<Args, String> {
    let mut options = Options::default();
    let mut wasm = None;
    let mut it = args.iter();
    while let Some(a) = it.next() {
        let mut value = |name: &str| it.next().cloned().ok_or_else(|| format!("{name} needs a value"));
        match a.as_str() {
            "--unwind" => options.unwind = value("--unwind")?.parse().map_err(|e| format!("--unwind: {e}"))?,
            "--unwind-checks" => options.unwind_checks = true,
            "--no-unwind-checks" => options.unwind_checks = false,
            "--timeout-ms" => {
                let ms: u64 = value("--timeout-ms")?.parse().map_err(|e| format!("--timeout-ms: {e}"))?;
                options.timeout = Some(Duration::from_millis(ms));
            }
            "--entry" => options.entry = value("--entry")?,
            "-h" | "--help" => return Err(USAGE.into()),
            other if other.starts_with('-') => return Err(format!("unknown flag `{other}`")),
            other if wasm.is_none() => wasm = Some(other.into()),
            other => return Err(format!("unexpected argument `{other}`")),
        }
    }
    Ok(Args {
        wasm: wasm.ok_or_else(|| USAGE.to_string())?,
        options,
    })
}

fn timeout_report(elapsed_ms: u64) -> Report {
    Report {
        status: Status::Timeout,
        reason: Some("time limit reached".into()),
        inputs: Vec::new(),
        paths: 0,
        pruned: 0,
        instructions: 0,
        solver_calls: 0,
        elapsed_ms,
    }
}

fn print(report: &Report) {
    println!("{}", serde_json::to_string(report).unwrap_or_else(|_| "{\"status\":\"ERROR\"}".into()));
}

/// Run the checker; returns the process exit status.
pub fn main(args: &[String]) -> i32 {
    let args = match parse_args(args) {
        Ok(a) => a,
        Err(msg) => {
            eprintln!("vert-bmc: {msg}");
            return 2;
        }
    };
    let wasm = match std::fs::read(&args.wasm) {
        Ok(w) => w,
        Err(e) => {
            eprintln!("vert-bmc: reading {}: {e}", args.wasm.display());
            return 2;
        }
    };
    if let Some(limit) = args.options.timeout {
        std::thread::spawn(move || {
            std::thread::sleep(limit);
            print(&timeout_report(limit.as_millis() as u64));
            std::process::exit(Status::Timeout.exit_code());
        });
    }
    let report = vert_bmc::check(&wasm, &args.options);
    print(&report);
    report.status.exit_code()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn args(s: &str) -> Vec<String> {
        s.split_whitespace().map(str::to_string).collect()
    }

    #[test]
    fn flags_parse() {
        let a = parse_args(&args("h.wasm --unwind 7 --no-unwind-checks --timeout-ms 500")).unwrap();
        assert_eq!(a.options.unwind, 7);
        assert!(!a.options.unwind_checks);
        assert_eq!(a.options.timeout, Some(Duration::from_millis(500)));
        assert!(parse_args(&args("--unwind 3")).is_err());
        assert!(parse_args(&args("h.wasm --frobnicate")).is_err());
    }
}
