//! Verification cascade: property-based testing, then bounded and full
//! model checking of the same harness.

use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use tracing::{debug, info};

use crate::error::{Error, Result};
use crate::harness::{self, carrier, Carrier, Harness, InputStrategy, Strategy, HARNESS_FILE, HARNESS_FN};
use crate::process;
use crate::toolchain::{CheckerKind, Toolchain};

/// Cases per property-based run.
pub const DEFAULT_PBT_CASES: u64 = 100_000;
/// Headroom between the in-process PBT deadline and the hard kill.
pub const PBT_DEADLINE_MARGIN: Duration = Duration::from_secs(1);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Stage {
    Pbt,
    Bounded,
    Full,
}

/// Concrete inputs on which candidate and reference disagree.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CounterExample {
    /// One rendered value per parameter.
    pub values: Vec<String>,
    /// Tag assignments that reproduce the inputs.
    pub tape: Vec<(i64, i128)>,
}

impl CounterExample {
    pub fn from_values(values: Vec<String>) -> Self {
        CounterExample { values, tape: Vec::new() }
    }

    /// Prompt form: a single value bare, several as a tuple.
    pub fn render(&self) -> String {
        match self.values.as_slice() {
            [one] => one.clone(),
            many => format!("({})", many.join(", ")),
        }
    }

    /// Tape in the `tag:value,...` form accepted by `VERT_PBT_REPLAY`.
    pub fn replay_tape(&self) -> String {
        self.tape.iter().map(|(t, v)| format!("{t}:{v}")).collect::<Vec<_>>().join(",")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "detail", rename_all = "snake_case")]
pub enum VerificationStatus {
    Pass,
    Counterexample(CounterExample),
    Timeout,
    ToolError(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerificationOutcome {
    pub stage: Stage,
    pub status: VerificationStatus,
    pub duration: Duration,
    /// Unwind bound of the last checker run.
    pub unwind_bound: Option<u32>,
    pub raw_log: String,
}

impl VerificationOutcome {
    pub fn passed(&self) -> bool {
        self.status == VerificationStatus::Pass
    }

    pub fn counterexample(&self) -> Option<&CounterExample> {
        match &self.status {
            VerificationStatus::Counterexample(c) => Some(c),
            _ => None,
        }
    }
}

/// Settings shared by every stage.
#[derive(Debug, Clone)]
pub struct VerifyConfig {
    pub tools: Toolchain,
    /// Wall-clock limit per stage.
    pub stage_limit: Duration,
    pub seed: u64,
    pub pbt_cases: u64,
    /// Initial unwind bound.
    pub unwind: u32,
    /// Factor applied to the bound after an unwinding failure.
    pub growth: u32,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig {
            tools: Toolchain::default(),
            stage_limit: Duration::from_secs(120),
            seed: 0,
            pbt_cases: DEFAULT_PBT_CASES,
            unwind: 10,
            growth: 2,
        }
    }
}

fn outcome(stage: Stage, status: VerificationStatus, started: Instant, unwind_bound: Option<u32>, raw_log: String) -> VerificationOutcome {
    VerificationOutcome {
        stage,
        status,
        duration: started.elapsed(),
        unwind_bound,
        raw_log,
    }
}

fn remaining(started: Instant, limit: Duration) -> Duration {
    limit.saturating_sub(started.elapsed())
}

/// Native property-based run of the harness in `dir`.
pub fn run_pbt(harness: &Harness, dir: &Path, cfg: &VerifyConfig) -> Result<VerificationOutcome> {
    run_pbt_with(harness, dir, cfg, &[])
}

/// As [`run_pbt`], with extra environment for the test binary.
pub fn run_pbt_with(harness: &Harness, dir: &Path, cfg: &VerifyConfig, env: &[(&str, String)]) -> Result<VerificationOutcome> {
    let started = Instant::now();
    harness.write_to(dir)?;
    let bin = dir.join("pbt-harness");
    let mut cmd = cfg.tools.rustc()?;
    cmd.current_dir(dir)
        .args(["--edition", &cfg.tools.edition, "--test", "-C"])
        .arg(format!("opt-level={}", cfg.tools.pbt_opt_level))
        .args(["-C", "overflow-checks=on", "-C", "debuginfo=0", HARNESS_FILE, "-o"])
        .arg(&bin);
    let built = process::run(cmd, cfg.stage_limit)?;
    if built.timed_out {
        return Ok(outcome(Stage::Pbt, VerificationStatus::Timeout, started, None, built.stderr_text()));
    }
    if !built.success() {
        let log = built.stderr_text();
        return Ok(outcome(Stage::Pbt, VerificationStatus::ToolError("harness does not compile".into()), started, None, log));
    }
    let left = remaining(started, cfg.stage_limit);
    let mut cmd = std::process::Command::new(&bin);
    cmd.current_dir(dir)
        .args([HARNESS_FN, "--exact", "--nocapture", "--test-threads=1"])
        .env("VERT_PBT_SEED", cfg.seed.to_string())
        .env("VERT_PBT_CASES", cfg.pbt_cases.to_string())
        .env("VERT_PBT_DEADLINE_MS", left.saturating_sub(PBT_DEADLINE_MARGIN).as_millis().to_string())
        .env_remove("VERT_PBT_DUMP")
        .env_remove("VERT_PBT_REPLAY");
    for (k, v) in env {
        cmd.env(k, v);
    }
    let ran = process::run(cmd, left)?;
    let log = sanitize_log(&format!("{}{}", ran.stdout_text(), ran.stderr_text()));
    let status = if ran.success() {
        VerificationStatus::Pass
    } else {
        match parse_pbt_log(&log, harness.strategy.slots.len()) {
            Some(ce) => VerificationStatus::Counterexample(ce),
            None if ran.timed_out => VerificationStatus::Timeout,
            None => VerificationStatus::ToolError(format!("harness exited with {:?}", ran.status)),
        }
    };
    info!(stage = "pbt", status = status_name(&status), ms = started.elapsed().as_millis() as u64, "stage done");
    Ok(outcome(Stage::Pbt, status, started, None, log))
}

fn status_name(s: &VerificationStatus) -> &'static str {
    match s {
        VerificationStatus::Pass => "pass",
        VerificationStatus::Counterexample(_) => "counterexample",
        VerificationStatus::Timeout => "timeout",
        VerificationStatus::ToolError(_) => "tool_error",
    }
}

/// Drop lines that vary between identical runs.
pub fn sanitize_log(log: &str) -> String {
    log.lines()
        .filter(|l| !l.contains("finished in") && !l.starts_with("thread '") && !l.starts_with("note: run with"))
        .map(|l| {
            if l.trim_start().starts_with('{') {
                if let Ok(mut v) = serde_json::from_str::<serde_json::Value>(l) {
                    if let Some(o) = v.as_object_mut() {
                        o.remove("elapsed_ms");
                    }
                    return v.to_string();
                }
            }
            l.to_string()
        })
        .collect::<Vec<_>>()
        .join("\n")
}

/// Last complete counterexample block printed by the PBT runtime.
fn parse_pbt_log(log: &str, slots: usize) -> Option<CounterExample> {
    let lines: Vec<&str> = log.lines().collect();
    let mut best = None;
    for (i, l) in lines.iter().enumerate() {
        // libtest may print its `test name ... ` prefix on the same line.
        if !l.contains("vert-pbt: counterexample") {
            continue;
        }
        let mut values = Vec::new();
        let mut tape = None;
        for l in &lines[i + 1..] {
            if let Some(rest) = l.strip_prefix("vert-pbt: input[") {
                let (_, v) = rest.split_once("] = ")?;
                values.push(v.to_string());
            } else if let Some(t) = l.strip_prefix("vert-pbt: tape = ") {
                tape = Some(parse_tape(t)?);
                break;
            } else {
                break;
            }
        }
        if let Some(tape) = tape {
            if values.len() == slots {
                best = Some(CounterExample { values, tape });
            }
        }
    }
    best
}

fn parse_tape(t: &str) -> Option<Vec<(i64, i128)>> {
    t.split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|kv| {
            let (k, v) = kv.split_once(':')?;
            Some((k.trim().parse().ok()?, v.trim().parse().ok()?))
        })
        .collect()
}

/// Model-checking artefact for the configured checker.
fn checker_input(harness_dir: &Path, cfg: &VerifyConfig, started: Instant) -> std::result::Result<PathBuf, VerificationOutcome> {
    if cfg.tools.checker.kind == CheckerKind::Kani {
        return Ok(harness_dir.join(HARNESS_FILE));
    }
    let wasm = harness_dir.join("harness.wasm");
    if wasm.exists() {
        return Ok(wasm);
    }
    let fail = |status, log| Err(outcome(Stage::Bounded, status, started, None, log));
    let mut cmd = match cfg.tools.rustc() {
        Ok(c) => c,
        Err(e) => return fail(VerificationStatus::ToolError(e.to_string()), String::new()),
    };
    cmd.current_dir(harness_dir)
        .args(["--edition", &cfg.tools.edition, "--crate-type", "cdylib", "--target", &cfg.tools.wasm_target])
        .args(["--cfg", "vert_bmc", "-C", "opt-level=2", "-C", "overflow-checks=on", "-C", "panic=abort", HARNESS_FILE, "-o"])
        .arg(&wasm);
    match process::run(cmd, cfg.stage_limit) {
        Ok(o) if o.success() => Ok(wasm),
        Ok(o) if o.timed_out => fail(VerificationStatus::Timeout, o.stderr_text()),
        Ok(o) => fail(VerificationStatus::ToolError("wasm harness does not compile".into()), o.stderr_text()),
        Err(e) => fail(VerificationStatus::ToolError(e.to_string()), String::new()),
    }
}

enum CheckResult {
    Status(VerificationStatus),
    /// The bound was too small; only reported with unwinding checks on.
    Unwind,
}

fn run_checker(
    input: &Path,
    harness: &Harness,
    unwind: u32,
    checks: bool,
    limit: Duration,
    cfg: &VerifyConfig,
) -> (CheckResult, String) {
    let checker = &cfg.tools.checker;
    let unwind_s = unwind.to_string();
    let flag = if checks { &checker.unwind_checks_on } else { &checker.unwind_checks_off };
    // The runner enforces the limit; the checker's own timer is a fallback.
    let timeout_ms = (limit + Duration::from_secs(5)).as_millis().to_string();
    let input_s = input.to_string_lossy();
    let vars = [
        ("wasm", input_s.as_ref()),
        ("harness", input_s.as_ref()),
        ("unwind", unwind_s.as_str()),
        ("unwind_checks", flag.as_str()),
        ("timeout_ms", timeout_ms.as_str()),
    ];
    let cmd = match checker.command.command(&vars) {
        Ok(mut c) => {
            if let Some(d) = input.parent() {
                c.current_dir(d);
            }
            c
        }
        Err(e) => return (CheckResult::Status(VerificationStatus::ToolError(e.to_string())), String::new()),
    };
    let out = match process::run(cmd, limit) {
        Ok(o) => o,
        Err(e) => return (CheckResult::Status(VerificationStatus::ToolError(e.to_string())), String::new()),
    };
    let log = sanitize_log(&format!("{}{}", out.stdout_text(), out.stderr_text()));
    if out.timed_out {
        return (CheckResult::Status(VerificationStatus::Timeout), log);
    }
    let result = match checker.kind {
        CheckerKind::Wasm => interpret_bmc(&log, &harness.strategy),
        CheckerKind::Kani => interpret_kani(&log, &harness.strategy),
    };
    (result, log)
}

fn interpret_bmc(log: &str, strategy: &InputStrategy) -> CheckResult {
    let Some(report) = log
        .lines()
        .rev()
        .find_map(|l| serde_json::from_str::<vert_bmc::Report>(l.trim()).ok())
    else {
        return CheckResult::Status(VerificationStatus::ToolError("checker printed no report".into()));
    };
    CheckResult::Status(match report.status {
        vert_bmc::Status::Success => VerificationStatus::Pass,
        vert_bmc::Status::Unwind => return CheckResult::Unwind,
        vert_bmc::Status::Timeout => VerificationStatus::Timeout,
        vert_bmc::Status::Error => VerificationStatus::ToolError(report.reason.unwrap_or_default()),
        vert_bmc::Status::Failure => match extract_counterexample(log, strategy) {
            Ok(ce) => VerificationStatus::Counterexample(ce),
            Err(e) => VerificationStatus::ToolError(e.to_string()),
        },
    })
}

fn interpret_kani(log: &str, strategy: &InputStrategy) -> CheckResult {
    if log.contains("VERIFICATION:- SUCCESSFUL") {
        return CheckResult::Status(VerificationStatus::Pass);
    }
    if log.contains("VERIFICATION:- FAILED") {
        if log.contains("unwinding assertion") {
            return CheckResult::Unwind;
        }
        return CheckResult::Status(match extract_counterexample(log, strategy) {
            Ok(ce) => VerificationStatus::Counterexample(ce),
            Err(e) => VerificationStatus::ToolError(e.to_string()),
        });
    }
    CheckResult::Status(VerificationStatus::ToolError("checker printed no verdict".into()))
}

/// Bounded check: loops beyond `cfg.unwind` iterations are assumed away.
pub fn run_bounded(harness: &Harness, dir: &Path, cfg: &VerifyConfig) -> Result<VerificationOutcome> {
    let started = Instant::now();
    harness.write_to(dir)?;
    let input = match checker_input(dir, cfg, started) {
        Ok(p) => p,
        Err(o) => return Ok(o),
    };
    let (result, log) = run_checker(&input, harness, cfg.unwind, false, remaining(started, cfg.stage_limit), cfg);
    let status = match result {
        CheckResult::Status(s) => s,
        CheckResult::Unwind => VerificationStatus::ToolError("unwinding failure with checks disabled".into()),
    };
    info!(stage = "bounded", status = status_name(&status), unwind = cfg.unwind, "stage done");
    Ok(outcome(Stage::Bounded, status, started, Some(cfg.unwind), log))
}

/// Full check: unwinding assertions on, growing the bound by `cfg.growth`
/// until the checker proves or refutes equivalence or time runs out.
pub fn run_full(harness: &Harness, dir: &Path, cfg: &VerifyConfig) -> Result<VerificationOutcome> {
    let started = Instant::now();
    harness.write_to(dir)?;
    let input = match checker_input(dir, cfg, started) {
        Ok(p) => p,
        Err(mut o) => {
            o.stage = Stage::Full;
            return Ok(o);
        }
    };
    let mut unwind = cfg.unwind.max(1);
    let mut logs = Vec::new();
    loop {
        let left = remaining(started, cfg.stage_limit);
        if left.is_zero() {
            return Ok(outcome(Stage::Full, VerificationStatus::Timeout, started, Some(unwind), logs.join("\n")));
        }
        let (result, log) = run_checker(&input, harness, unwind, true, left, cfg);
        logs.push(log);
        match result {
            CheckResult::Unwind => {
                debug!(unwind, "bound too small, escalating");
                let next = unwind.saturating_mul(cfg.growth.max(2));
                if next == unwind {
                    return Ok(outcome(Stage::Full, VerificationStatus::Timeout, started, Some(unwind), logs.join("\n")));
                }
                unwind = next;
            }
            CheckResult::Status(status) => {
                info!(stage = "full", status = status_name(&status), unwind, "stage done");
                return Ok(outcome(Stage::Full, status, started, Some(unwind), logs.join("\n")));
            }
        }
    }
}

/// Run PBT, bounded and full in order, stopping after the first stage that
/// does not pass.
pub fn run_cascade(harness: &Harness, dir: &Path, cfg: &VerifyConfig) -> Result<Vec<VerificationOutcome>> {
    let mut outcomes = Vec::new();
    for stage in [Stage::Pbt, Stage::Bounded, Stage::Full] {
        let o = match stage {
            Stage::Pbt => run_pbt(harness, dir, cfg)?,
            Stage::Bounded => run_bounded(harness, dir, cfg)?,
            Stage::Full => run_full(harness, dir, cfg)?,
        };
        let passed = o.passed();
        outcomes.push(o);
        if !passed {
            break;
        }
    }
    Ok(outcomes)
}

/// Recover the counterexample from a checker or PBT log.
pub fn extract_counterexample(raw_log: &str, strategy: &InputStrategy) -> Result<CounterExample> {
    if raw_log.contains("vert-pbt: ") {
        return parse_pbt_log(raw_log, strategy.slots.len())
            .ok_or_else(|| Error::UnparseableTrace("no complete counterexample in test output".into()));
    }
    if let Some(report) = raw_log
        .lines()
        .rev()
        .find_map(|l| serde_json::from_str::<vert_bmc::Report>(l.trim()).ok())
    {
        if report.status != vert_bmc::Status::Failure {
            return Err(Error::UnparseableTrace(format!("checker status is {:?}", report.status)));
        }
        let tape: Vec<(i64, i128)> = report.inputs.iter().map(|i| (i.tag, i.value as i128)).collect();
        let lookup = |t: i64| tape.iter().find(|(k, _)| *k == t).map(|&(_, v)| v);
        let values = harness::render_inputs(strategy, &lookup);
        let tape = tape.iter().map(|&(t, v)| (t, normalize(strategy, t, v))).collect();
        return Ok(CounterExample { values, tape });
    }
    if raw_log.contains("VERIFICATION:- FAILED") {
        return kani_playback(raw_log, strategy);
    }
    Err(Error::UnparseableTrace("log has no recognised counterexample".into()))
}

/// Reinterpret a raw 64-bit draw for unsigned 64-bit slots.
fn normalize(strategy: &InputStrategy, tag: i64, v: i128) -> i128 {
    match int_at(strategy, tag) {
        Some((min, max)) if carrier(min, max) == Carrier::U64 => v as i64 as u64 as i128,
        _ => v,
    }
}

/// Range of the integer draw at `tag`, if it is one.
fn int_at(strategy: &InputStrategy, tag: i64) -> Option<(i128, i128)> {
    let slot = usize::try_from(tag.div_euclid(crate::harness::strategy::TAG_STRIDE)).ok()?;
    let s = &strategy.slots.get(slot)?.strategy;
    fn walk(s: &Strategy, off: usize) -> Option<(i128, i128)> {
        match s {
            Strategy::Int { min, max, .. } => (off == 0).then_some((*min, *max)),
            Strategy::Str { capacity } => match off {
                0 => Some((0, *capacity as i128)),
                _ => Some((0, crate::harness::strategy::ASCII_MAX)),
            },
            Strategy::Vec { elem, capacity } => match off {
                0 => Some((0, *capacity as i128)),
                _ => walk(elem, (off - 1) % elem.size()),
            },
            Strategy::Struct { fields, .. } => walk_fields(&fields.all(), off),
            Strategy::Enum { variants, .. } => match off {
                0 => Some((0, variants.len() as i128 - 1)),
                _ => walk_fields(&variants.iter().flat_map(|(_, f)| f.all()).collect::<Vec<_>>(), off - 1),
            },
        }
    }
    fn walk_fields(fields: &[&Strategy], mut off: usize) -> Option<(i128, i128)> {
        for f in fields {
            if off < f.size() {
                return walk(f, off);
            }
            off -= f.size();
        }
        None
    }
    walk(s, tag.rem_euclid(crate::harness::strategy::TAG_STRIDE) as usize)
}

/// Decode Kani's concrete playback for scalar parameters: one byte vector
/// per nondeterministic value, in draw order.
fn kani_playback(log: &str, strategy: &InputStrategy) -> Result<CounterExample> {
    let cleaned: String = log
        .lines()
        .filter(|l| !l.trim_start().starts_with("//"))
        .collect::<Vec<_>>()
        .join("\n");
    let anchor = cleaned.find("concrete_vals").unwrap_or(0);
    let start = cleaned[anchor..]
        .find("vec![")
        .map(|p| anchor + p)
        .ok_or_else(|| Error::UnparseableTrace("no concrete playback in checker output".into()))?;
    let mut vectors = Vec::new();
    let mut rest = &cleaned[start + "vec![".len()..];
    while let Some(open) = rest.find("vec![") {
        if rest[..open].contains(']') {
            break;
        }
        let after = &rest[open + 5..];
        let close = after.find(']').ok_or_else(|| Error::UnparseableTrace("unterminated playback vector".into()))?;
        let bytes: Vec<u8> = after[..close].split(',').filter_map(|b| b.trim().parse().ok()).collect();
        vectors.push(bytes);
        rest = &after[close + 1..];
    }
    let mut tape = Vec::new();
    for (i, slot) in strategy.slots.iter().enumerate() {
        let Strategy::Int { min, max, .. } = slot.strategy else {
            return Err(Error::UnparseableTrace("playback decoding supports scalar parameters only".into()));
        };
        let bytes = vectors.get(i).ok_or_else(|| Error::UnparseableTrace("too few playback values".into()))?;
        let mut buf = [0u8; 8];
        let n = bytes.len().min(8);
        buf[..n].copy_from_slice(&bytes[..n]);
        let raw = u64::from_le_bytes(buf);
        let v = match carrier(min, max) {
            Carrier::I32 => raw as u32 as i32 as i128,
            Carrier::I64 => raw as i64 as i128,
            Carrier::U64 => raw as i128,
        };
        tape.push((InputStrategy::tag_base(i), v));
    }
    let lookup = |t: i64| tape.iter().find(|(k, _)| *k == t).map(|&(_, v)| v);
    Ok(CounterExample {
        values: harness::render_inputs(strategy, &lookup),
        tape,
    })
}
