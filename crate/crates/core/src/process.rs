//! Subprocess execution with a hard wall-clock limit.
//!
//! Every child runs in its own process group so a timeout kills the whole
//! tree, including anything a test binary or compiler driver spawned.

use std::ffi::OsStr;
use std::io::Read;
use std::os::unix::process::{CommandExt, ExitStatusExt};
use std::path::{Path, PathBuf};
use std::process::{Command, ExitStatus, Stdio};
use std::thread;
use std::time::{Duration, Instant};

use crate::error::{Error, Result};

const POLL: Duration = Duration::from_millis(5);

#[derive(Debug, Clone)]
pub struct ProcessOutput {
    /// `None` when the process was killed by the runner.
    pub status: Option<ExitStatus>,
    pub stdout: Vec<u8>,
    pub stderr: Vec<u8>,
    pub timed_out: bool,
    pub duration: Duration,
}

impl ProcessOutput {
    pub fn success(&self) -> bool {
        self.status.is_some_and(|s| s.success())
    }

    pub fn code(&self) -> Option<i32> {
        self.status.and_then(|s| s.code())
    }

    /// Signal that terminated the process, if any.
    pub fn signal(&self) -> Option<i32> {
        self.status.and_then(|s| s.signal())
    }

    pub fn stdout_text(&self) -> String {
        String::from_utf8_lossy(&self.stdout).into_owned()
    }

    pub fn stderr_text(&self) -> String {
        String::from_utf8_lossy(&self.stderr).into_owned()
    }
}

/// Run `cmd` to completion or until `limit` elapses, then kill its group.
pub fn run(mut cmd: Command, limit: Duration) -> Result<ProcessOutput> {
    let program = cmd.get_program().to_string_lossy().into_owned();
    cmd.stdin(Stdio::null())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .process_group(0);
    let started = Instant::now();
    let mut child = cmd.spawn().map_err(|e| match e.kind() {
        std::io::ErrorKind::NotFound => Error::ToolchainMissing(program.clone()),
        _ => Error::io(format!("spawning {program}"), e),
    })?;
    let pid = child.id() as libc::pid_t;
    let out = drain(child.stdout.take());
    let err = drain(child.stderr.take());
    let deadline = started + limit;
    let mut timed_out = false;
    let status = loop {
        match child.try_wait() {
            Ok(Some(status)) => break Some(status),
            Ok(None) if Instant::now() >= deadline => {
                timed_out = true;
                // SAFETY: `pid` names the group created for this child; the
                // group outlives the call because the child is not yet reaped.
                unsafe { libc::killpg(pid, libc::SIGKILL) };
                let _ = child.wait();
                break None;
            }
            Ok(None) => thread::sleep(POLL),
            Err(e) => return Err(Error::io(format!("waiting for {program}"), e)),
        }
    };
    if !timed_out {
        // Reap stragglers that inherited the pipes.
        // SAFETY: as above; a stale group id yields ESRCH, which is ignored.
        unsafe { libc::killpg(pid, libc::SIGKILL) };
    }
    let duration = started.elapsed();
    Ok(ProcessOutput {
        status,
        stdout: out.join().unwrap_or_default(),
        stderr: err.join().unwrap_or_default(),
        timed_out,
        duration,
    })
}

fn drain<R: Read + Send + 'static>(pipe: Option<R>) -> thread::JoinHandle<Vec<u8>> {
    thread::spawn(move || {
        let mut buf = Vec::new();
        if let Some(mut p) = pipe {
            let _ = p.read_to_end(&mut buf);
        }
        buf
    })
}

/// Resolve a program name against `PATH`, or check an explicit path.
pub fn find_program(name: impl AsRef<OsStr>) -> Option<PathBuf> {
    let name = Path::new(name.as_ref());
    if name.components().count() > 1 {
        return is_executable(name).then(|| name.to_path_buf());
    }
    let path = std::env::var_os("PATH")?;
    std::env::split_paths(&path)
        .map(|dir| dir.join(name))
        .find(|p| is_executable(p))
}

fn is_executable(p: &Path) -> bool {
    use std::os::unix::fs::PermissionsExt;
    p.metadata()
        .map(|m| m.is_file() && m.permissions().mode() & 0o111 != 0)
        .unwrap_or(false)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sh(script: &str) -> Command {
        let mut c = Command::new("sh");
        c.arg("-c").arg(script);
        c
    }

    #[test]
    fn captures_output_and_status() {
        let out = run(sh("echo out; echo err >&2; exit 3"), Duration::from_secs(10)).unwrap();
        assert_eq!(out.stdout_text(), "out\n");
        assert_eq!(out.stderr_text(), "err\n");
        assert_eq!(out.code(), Some(3));
        assert!(!out.timed_out);
    }

    #[test]
    fn kills_the_whole_group_at_the_limit() {
        let limit = Duration::from_millis(300);
        let out = run(sh("sleep 30 & sleep 30; wait"), limit).unwrap();
        assert!(out.timed_out);
        assert!(out.status.is_none());
        assert!(out.duration >= limit);
        assert!(out.duration < limit + Duration::from_secs(2), "{:?}", out.duration);
    }

    #[test]
    fn missing_programs_are_reported() {
        let err = run(Command::new("/nonexistent/tool"), Duration::from_secs(1)).unwrap_err();
        assert!(matches!(err, Error::ToolchainMissing(_)));
        assert!(find_program("/nonexistent/tool").is_none());
        assert!(find_program("sh").is_some());
    }
}
