//! The transpile loop: generate a candidate, repair it, build the harness
//! and run the verification cascade, feeding counterexamples back into the
//! next prompt until an attempt verifies or the budget runs out.

use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use tracing::{info, info_span, warn};

use crate::diagnostics::{repair_loop, CompileOutcome, DEFAULT_MAX_ROUNDS};
use crate::error::{Error, Result};
use crate::generator::{generate_candidate, render_prompt, Backend};
use crate::harness::{derive_input_strategy, generate_equivalence_harness, generate_wrapper, parse_signature, Reference};
use crate::oracle::{build_oracle, InjectionPoint};
use crate::process;
use crate::scan::{self, Syntax};
use crate::toolchain::Toolchain;
use crate::verifier::{run_cascade, CounterExample, Stage, VerificationOutcome, VerificationStatus, VerifyConfig, DEFAULT_PBT_CASES};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Language {
    C,
    Cpp,
    Go,
}

impl Language {
    /// Name used in prompts.
    pub fn label(self) -> &'static str {
        match self {
            Language::C => "C",
            Language::Cpp => "C++",
            Language::Go => "Go",
        }
    }

    pub fn extension(self) -> &'static str {
        match self {
            Language::C => "c",
            Language::Cpp => "cpp",
            Language::Go => "go",
        }
    }

    pub fn from_extension(ext: &str) -> Option<Language> {
        match ext {
            "c" | "h" => Some(Language::C),
            "cpp" | "cc" | "cxx" | "hpp" => Some(Language::Cpp),
            "go" => Some(Language::Go),
            _ => None,
        }
    }

    fn syntax(self) -> Syntax {
        Syntax::CLike {
            go_raw_strings: self == Language::Go,
        }
    }
}

impl std::str::FromStr for Language {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "c" => Ok(Language::C),
            "cpp" | "c++" | "cxx" => Ok(Language::Cpp),
            "go" => Ok(Language::Go),
            other => Err(Error::InvalidConfig(format!("unknown language `{other}`"))),
        }
    }
}

impl std::fmt::Display for Language {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.label())
    }
}

/// A top-level function definition.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FunctionUnit {
    pub name: String,
    /// Byte range in the original text, from the first header token to the
    /// closing brace.
    pub range: std::ops::Range<usize>,
    pub text: String,
}

/// Split `text` into its top-level function definitions by brace-depth
/// scanning. Everything else is left to the remainder.
pub fn clean_and_split(text: &str, language: Language) -> Result<Vec<FunctionUnit>> {
    let masked = scan::mask(text, language.syntax());
    scan::check_balance(&masked).map_err(|m| Error::UnbalancedDelimiters { offset: m.offset })?;
    let b = masked.as_bytes();
    let mut units = Vec::new();
    let mut stmt_start = 0;
    let mut depth = 0usize;
    let mut i = 0;
    while i < b.len() {
        let c = b[i];
        if depth == 0 && c == b'#' && line_start(b, i) {
            // Preprocessor lines belong to the remainder.
            let end = b[i..].iter().position(|&x| x == b'\n').map_or(b.len(), |p| i + p);
            i = end;
            stmt_start = end;
            continue;
        }
        match c {
            b'(' | b'[' => depth += 1,
            b')' | b']' => depth = depth.saturating_sub(1),
            b';' if depth == 0 => stmt_start = i + 1,
            b'{' if depth == 0 => {
                let close = matching_brace(b, i);
                let start = stmt_start + b[stmt_start..i].iter().position(|c| !c.is_ascii_whitespace()).unwrap_or(0);
                if let Some(name) = function_name(&masked[start..i], language) {
                    units.push(FunctionUnit {
                        name,
                        range: start..close + 1,
                        text: text[start..close + 1].to_string(),
                    });
                }
                i = close + 1;
                stmt_start = i;
                continue;
            }
            b'{' => {
                i = matching_brace(b, i) + 1;
                continue;
            }
            _ => {}
        }
        i += 1;
    }
    Ok(units)
}

/// Alias kept for callers that think of the operation as a split only.
pub fn split_units(text: &str, language: Language) -> Result<Vec<FunctionUnit>> {
    clean_and_split(text, language)
}

/// Text outside every unit, in order.
pub fn remainder(text: &str, units: &[FunctionUnit]) -> String {
    let mut out = String::new();
    let mut at = 0;
    for u in units {
        out.push_str(&text[at..u.range.start]);
        at = u.range.end;
    }
    out.push_str(&text[at..]);
    out
}

fn line_start(b: &[u8], i: usize) -> bool {
    b[..i].iter().rev().take_while(|&&c| c != b'\n').all(|c| c.is_ascii_whitespace())
}

fn matching_brace(b: &[u8], open: usize) -> usize {
    let mut depth = 0;
    for (k, &c) in b.iter().enumerate().skip(open) {
        match c {
            b'{' => depth += 1,
            b'}' => {
                depth -= 1;
                if depth == 0 {
                    return k;
                }
            }
            _ => {}
        }
    }
    b.len() - 1
}

const NON_FUNCTION_HEADS: &[&str] = &["struct", "enum", "union", "class", "namespace", "typedef", "type", "var", "const", "extern", "import", "package"];

/// Name of the function a header declares, if it declares one.
fn function_name(header: &str, language: Language) -> Option<String> {
    let trimmed = header.trim();
    let first = trimmed.split(|c: char| !(c.is_alphanumeric() || c == '_')).next().unwrap_or("");
    let is_go_func = language == Language::Go && first == "func";
    if !is_go_func && (NON_FUNCTION_HEADS.contains(&first) || language == Language::Go) {
        return None;
    }
    let hb = trimmed.as_bytes();
    if !trimmed.contains('(') || top_level_byte(hb, b'=') {
        return None;
    }
    let mut k = 0;
    if is_go_func {
        k = 4;
        while hb.get(k).is_some_and(u8::is_ascii_whitespace) {
            k += 1;
        }
        if hb.get(k) == Some(&b'(') {
            // Method receiver.
            k = close_of(hb, k, b'(', b')')? + 1;
        }
    }
    let open = k + trimmed[k..].find('(')?;
    let mut end = open;
    while end > 0 && hb[end - 1].is_ascii_whitespace() {
        end -= 1;
    }
    if end > 0 && hb[end - 1] == b']' {
        // Go type parameters.
        let mut depth = 0;
        while end > 0 {
            end -= 1;
            match hb[end] {
                b']' => depth += 1,
                b'[' => {
                    depth -= 1;
                    if depth == 0 {
                        break;
                    }
                }
                _ => {}
            }
        }
    }
    let mut start = end;
    while start > 0 && (hb[start - 1].is_ascii_alphanumeric() || hb[start - 1] == b'_') {
        start -= 1;
    }
    let name = &trimmed[start..end];
    let keyword = ["if", "while", "for", "switch", "return", "sizeof"].contains(&name);
    (!name.is_empty() && !keyword && !name.as_bytes()[0].is_ascii_digit()).then(|| name.to_string())
}

fn close_of(b: &[u8], open: usize, o: u8, c: u8) -> Option<usize> {
    let mut depth = 0;
    for (k, &x) in b.iter().enumerate().skip(open) {
        if x == o {
            depth += 1;
        } else if x == c {
            depth -= 1;
            if depth == 0 {
                return Some(k);
            }
        }
    }
    None
}

fn top_level_byte(b: &[u8], needle: u8) -> bool {
    let mut depth = 0i32;
    b.iter().enumerate().any(|(k, &c)| {
        match c {
            b'(' | b'[' | b'<' => depth += 1,
            b')' | b']' | b'>' => depth -= 1,
            _ => {}
        }
        c == needle && depth == 0 && b.get(k + 1) != Some(&b'=') && (k == 0 || !b"=!<>".contains(&b[k - 1]))
    })
}

/// A program to transpile.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SourceProgram {
    /// Identifier used for workspace directories and scripted candidates.
    pub id: String,
    pub language: Language,
    pub text: String,
    /// A function that calls the target with literal inputs and compares the
    /// result against a literal expected output.
    pub entry_call: String,
    pub target_fn_name: String,
}

impl SourceProgram {
    pub fn validate(&self) -> Result<()> {
        let target = &self.target_fn_name;
        if target.is_empty() {
            return Err(Error::InvalidSource("empty target function name".into()));
        }
        for (what, text) in [("source", &self.text), ("entry call", &self.entry_call)] {
            if !scan::has_word(&scan::mask(text, self.language.syntax()), target) {
                return Err(Error::InvalidSource(format!("`{target}` does not occur in the {what}")));
            }
        }
        Ok(())
    }
}

mod secs {
    use serde::{Deserialize, Deserializer, Serializer};
    use std::time::Duration;

    pub fn serialize<S: Serializer>(d: &Duration, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_f64(d.as_secs_f64())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Duration, D::Error> {
        let v = f64::deserialize(d)?;
        Duration::try_from_secs_f64(v).map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PipelineConfig {
    pub max_attempts: usize,
    /// Wall-clock limit for each verification stage, in seconds.
    #[serde(with = "secs")]
    pub stage_time_limit: Duration,
    pub default_unwind_bound: u32,
    /// Factor by which full verification grows the unwind bound.
    pub unwind_growth: u32,
    pub seed: u64,
    pub pbt_cases: u64,
    /// Root for per-program workspaces; a temporary directory when unset.
    pub workspace_dir: Option<PathBuf>,
    pub backend: Backend,
    /// Keep prompting after a candidate passes only the PBT stage.
    pub require_bounded: bool,
    pub max_repair_rounds: usize,
    pub toolchain: Toolchain,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            max_attempts: 20,
            stage_time_limit: Duration::from_secs(120),
            default_unwind_bound: 10,
            unwind_growth: 2,
            seed: 0,
            pbt_cases: DEFAULT_PBT_CASES,
            workspace_dir: None,
            backend: Backend::Scripted {
                dir: PathBuf::from("candidates"),
            },
            require_bounded: false,
            max_repair_rounds: DEFAULT_MAX_ROUNDS,
            toolchain: Toolchain::default(),
        }
    }
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_attempts == 0 {
            return Err(Error::InvalidConfig("max_attempts must be at least 1".into()));
        }
        if self.stage_time_limit.is_zero() {
            return Err(Error::InvalidConfig("stage_time_limit must be positive".into()));
        }
        if self.default_unwind_bound == 0 {
            return Err(Error::InvalidConfig("default_unwind_bound must be at least 1".into()));
        }
        if self.pbt_cases == 0 {
            return Err(Error::InvalidConfig("pbt_cases must be at least 1".into()));
        }
        Ok(())
    }

    /// Stage settings derived from this configuration.
    pub fn verify_config(&self) -> VerifyConfig {
        VerifyConfig {
            tools: self.toolchain.clone(),
            stage_limit: self.stage_time_limit,
            seed: self.seed,
            pbt_cases: self.pbt_cases,
            unwind: self.default_unwind_bound,
            growth: self.unwind_growth,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AttemptRecord {
    /// 1-based.
    pub attempt_index: usize,
    pub prompt: String,
    /// Candidate after repair.
    pub candidate: String,
    pub repair_rounds: usize,
    pub compiled: bool,
    /// Ordered PBT, Bounded, Full; a stage appears only if all earlier ones
    /// passed.
    pub outcomes: Vec<VerificationOutcome>,
    pub counterexample: Option<CounterExample>,
    /// Why the attempt stopped before verification, if it did.
    pub note: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum FinalStatus {
    Failed,
    PassedPBT,
    VerifiedBounded,
    VerifiedFull,
}

impl std::fmt::Display for FinalStatus {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            FinalStatus::Failed => "failed",
            FinalStatus::PassedPBT => "passed PBT",
            FinalStatus::VerifiedBounded => "verified (bounded)",
            FinalStatus::VerifiedFull => "verified (full)",
        })
    }
}

/// Wall-clock totals per component.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Timings {
    pub generator: Duration,
    pub compile: Duration,
    pub repair: Duration,
    pub oracle: Duration,
    pub pbt: Duration,
    pub bounded: Duration,
    pub full: Duration,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PipelineReport {
    pub program_id: String,
    pub language: Language,
    pub records: Vec<AttemptRecord>,
    pub final_status: FinalStatus,
    pub final_candidate: Option<String>,
    pub injection_points: Vec<InjectionPoint>,
    pub oracle_fingerprint: String,
    /// Set when the loop ended early, e.g. because the backend ran dry.
    pub stopped: Option<String>,
    pub timings: Timings,
}

impl PipelineReport {
    /// Copy with every wall-clock field zeroed, for comparing runs.
    pub fn without_timings(&self) -> PipelineReport {
        let mut r = self.clone();
        r.timings = Timings::default();
        for rec in &mut r.records {
            for o in &mut rec.outcomes {
                o.duration = Duration::ZERO;
            }
        }
        r
    }

    /// Deepest stage each attempt passed.
    pub fn deepest_stage(rec: &AttemptRecord) -> FinalStatus {
        let passed = |s: Stage| rec.outcomes.iter().any(|o| o.stage == s && o.passed());
        if passed(Stage::Full) {
            FinalStatus::VerifiedFull
        } else if passed(Stage::Bounded) {
            FinalStatus::VerifiedBounded
        } else if passed(Stage::Pbt) {
            FinalStatus::PassedPBT
        } else {
            FinalStatus::Failed
        }
    }

    /// Human-readable summary.
    pub fn render_text(&self) -> String {
        use std::fmt::Write as _;
        let mut out = String::new();
        let _ = writeln!(out, "program {} ({}): {}", self.program_id, self.language, self.final_status);
        for r in &self.records {
            let stages: Vec<String> = r
                .outcomes
                .iter()
                .map(|o| {
                    let s = match &o.status {
                        VerificationStatus::Pass => "pass".to_string(),
                        VerificationStatus::Counterexample(c) => format!("counterexample {}", c.render()),
                        VerificationStatus::Timeout => "timeout".to_string(),
                        VerificationStatus::ToolError(e) => format!("tool error: {e}"),
                    };
                    format!("{:?} {s}", o.stage)
                })
                .collect();
            let _ = writeln!(
                out,
                "  attempt {:>2}: compiled={} repairs={} {}{}",
                r.attempt_index,
                r.compiled,
                r.repair_rounds,
                stages.join(", "),
                r.note.as_deref().map(|n| format!(" ({n})")).unwrap_or_default()
            );
        }
        if let Some(s) = &self.stopped {
            let _ = writeln!(out, "  stopped: {s}");
        }
        let t = &self.timings;
        let _ = writeln!(
            out,
            "  time: generator {:.2}s, compile {:.2}s, repair {:.2}s, oracle {:.2}s, pbt {:.2}s, bounded {:.2}s, full {:.2}s",
            t.generator.as_secs_f64(),
            t.compile.as_secs_f64(),
            t.repair.as_secs_f64(),
            t.oracle.as_secs_f64(),
            t.pbt.as_secs_f64(),
            t.bounded.as_secs_f64(),
            t.full.as_secs_f64()
        );
        out
    }
}

/// Type-check `text` as a library crate, returning rustc's JSON diagnostics.
pub fn check_candidate(text: &str, tools: &Toolchain, dir: &Path, limit: Duration) -> CompileOutcome {
    let failed = |msg: String| CompileOutcome {
        success: false,
        diagnostics: msg.into_bytes(),
    };
    if let Err(e) = std::fs::create_dir_all(dir) {
        return failed(e.to_string());
    }
    let src = dir.join("candidate.rs");
    if let Err(e) = std::fs::write(&src, text) {
        return failed(e.to_string());
    }
    let mut cmd = match tools.rustc() {
        Ok(c) => c,
        Err(e) => return failed(e.to_string()),
    };
    cmd.current_dir(dir)
        .args(["--edition", &tools.edition, "--crate-type", "lib", "--emit=metadata", "--error-format=json"])
        .args(["--crate-name", "candidate", "-o", "candidate.rmeta", "candidate.rs"]);
    match process::run(cmd, limit) {
        Ok(o) => CompileOutcome {
            success: o.success(),
            diagnostics: o.stderr,
        },
        Err(e) => failed(e.to_string()),
    }
}

fn fresh_dir(path: &Path) -> Result<()> {
    if path.exists() {
        std::fs::remove_dir_all(path).map_err(|e| Error::io(format!("clearing {}", path.display()), e))?;
    }
    std::fs::create_dir_all(path).map_err(|e| Error::io(format!("creating {}", path.display()), e))
}

/// Run the whole loop for one program.
pub fn transpile(source: &SourceProgram, config: &PipelineConfig) -> Result<PipelineReport> {
    config.validate()?;
    source.validate()?;
    let _span = info_span!("transpile", program = %source.id).entered();
    config.toolchain.check(source.language)?;
    let units = clean_and_split(&source.text, source.language)?;
    if !units.iter().any(|u| u.name == source.target_fn_name) {
        return Err(Error::InvalidSource(format!("no function `{}` in the source", source.target_fn_name)));
    }

    let temp;
    let root = match &config.workspace_dir {
        Some(d) => d.join(&source.id),
        None => {
            temp = tempfile::Builder::new()
                .prefix("vert-")
                .tempdir()
                .map_err(|e| Error::io("creating workspace", e))?;
            temp.path().join(&source.id)
        }
    };
    fresh_dir(&root)?;

    let mut timings = Timings::default();
    let started = Instant::now();
    let oracle = build_oracle(
        &source.text,
        &source.entry_call,
        &source.target_fn_name,
        source.language,
        &config.toolchain,
        &root.join("oracle"),
        config.stage_time_limit,
    )?;
    let wrapped = generate_wrapper(&oracle.module, &oracle.points)?;
    timings.oracle = started.elapsed();

    let vcfg = config.verify_config();
    let mut records = Vec::new();
    let mut counterexamples: Vec<CounterExample> = Vec::new();
    let mut best: Option<(FinalStatus, String)> = None;
    let mut stopped = None;
    for attempt in 1..=config.max_attempts {
        let prompt = render_prompt(&source.text, source.language, &counterexamples);
        let t = Instant::now();
        let response = generate_candidate(&prompt, &config.backend, &source.id, attempt);
        timings.generator += t.elapsed();
        let response = match response {
            Ok(r) => r,
            Err(e) => {
                warn!(attempt, error = %e, "no candidate");
                stopped = Some(e.to_string());
                break;
            }
        };
        let mut record = AttemptRecord {
            attempt_index: attempt,
            prompt: prompt.rendered,
            candidate: response.extracted.clone(),
            repair_rounds: 0,
            compiled: false,
            outcomes: Vec::new(),
            counterexample: None,
            note: None,
        };
        if !response.safe {
            record.note = Some("candidate uses unsafe code".into());
            records.push(record);
            continue;
        }
        let dir = root.join(format!("attempt-{attempt}"));
        fresh_dir(&dir)?;

        let check_dir = dir.join("check");
        let mut first = true;
        let mut compile = |text: &str| {
            let t = Instant::now();
            let out = check_candidate(text, &config.toolchain, &check_dir, config.stage_time_limit);
            if first {
                timings.compile += t.elapsed();
                first = false;
            } else {
                timings.repair += t.elapsed();
            }
            out
        };
        let repaired = repair_loop(&response.extracted, &mut compile, config.max_repair_rounds);
        record.candidate = repaired.text.clone();
        record.repair_rounds = repaired.rounds;
        record.compiled = repaired.compiled;
        if !repaired.compiled {
            record.note = Some(format!("does not compile after {} repair rounds", repaired.rounds));
            records.push(record);
            continue;
        }

        let harness = parse_signature(&repaired.text, &source.target_fn_name).and_then(|sig| {
            let strategy = derive_input_strategy(&sig, &oracle.sample_lengths)?;
            generate_equivalence_harness(&repaired.text, &sig, &strategy, Reference::Oracle(&wrapped))
        });
        let harness = match harness {
            Ok(h) => h,
            Err(e) => {
                record.note = Some(e.to_string());
                records.push(record);
                continue;
            }
        };
        let outcomes = run_cascade(&harness, &dir.join("harness"), &vcfg)?;
        for o in &outcomes {
            match o.stage {
                Stage::Pbt => timings.pbt += o.duration,
                Stage::Bounded => timings.bounded += o.duration,
                Stage::Full => timings.full += o.duration,
            }
        }
        record.outcomes = outcomes;
        record.counterexample = record.outcomes.iter().find_map(|o| o.counterexample().cloned());
        let reached = PipelineReport::deepest_stage(&record);
        let last = record.outcomes.last().map(|o| (o.stage, o.status.clone()));
        info!(attempt, reached = %reached, "attempt done");
        records.push(record);

        if let Some(ce) = records.last().and_then(|r| r.counterexample.clone()) {
            if !counterexamples.contains(&ce) {
                counterexamples.push(ce);
            }
            continue;
        }
        if reached > FinalStatus::Failed {
            best = Some((reached, repaired.text.clone()));
        }
        let stop = match (reached, last) {
            (FinalStatus::VerifiedFull | FinalStatus::VerifiedBounded, _) => true,
            (FinalStatus::PassedPBT, _) => !config.require_bounded,
            _ => false,
        };
        if stop {
            break;
        }
    }

    let (final_status, final_candidate) = match best {
        Some((s, c)) => (s, Some(c)),
        None => (FinalStatus::Failed, None),
    };
    Ok(PipelineReport {
        program_id: source.id.clone(),
        language: source.language,
        records,
        final_status,
        final_candidate,
        injection_points: oracle.points,
        oracle_fingerprint: oracle.module.build_fingerprint,
        stopped,
        timings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const REVERSE: &str = "#include <stdio.h>\n\n// Reverse the digits.\nint reverse(int x) {\n  int r = 0;\n  while (x != 0) { r = r * 10 + x % 10; x /= 10; }\n  return r;\n}\n\nint callReverse() {\n  int result = reverse(123);\n  if (result == 321) { return 0; } else { return 1; }\n}\n";

    #[test]
    fn splits_reverse_and_its_entry_call() {
        let units = clean_and_split(REVERSE, Language::C).unwrap();
        let names: Vec<&str> = units.iter().map(|u| u.name.as_str()).collect();
        assert_eq!(names, ["reverse", "callReverse"]);
        assert!(units[0].text.starts_with("int reverse(int x) {"));
        assert!(units[1].text.ends_with('}'));
    }

    #[test]
    fn single_function_is_one_identical_unit() {
        let text = "int id(int x) { return x; }";
        let units = clean_and_split(text, Language::C).unwrap();
        assert_eq!(units.len(), 1);
        assert_eq!(units[0].text, text);
    }

    #[test]
    fn non_functions_stay_in_the_remainder() {
        let text = "struct P { int x; };\nint table[] = { 1, 2 };\nenum E { A, B };\nint f(struct P p) { return p.x; }\n";
        let units = clean_and_split(text, Language::C).unwrap();
        assert_eq!(units.len(), 1);
        assert_eq!(units[0].name, "f");
        assert!(remainder(text, &units).contains("int table[] = { 1, 2 };"));
    }

    #[test]
    fn go_functions_methods_and_generics() {
        let text = "package main\n\nimport \"fmt\"\n\ntype T struct { a int }\n\nfunc (t *T) Get() int { return t.a }\n\nfunc Max[K int | int64](a, b K) K {\n\tif a > b { return a }\n\treturn b\n}\n\nvar s = `}`\n";
        let units = clean_and_split(text, Language::Go).unwrap();
        let names: Vec<&str> = units.iter().map(|u| u.name.as_str()).collect();
        assert_eq!(names, ["Get", "Max"]);
    }

    #[test]
    fn cpp_qualifiers_and_namespaces() {
        let text = "namespace n { int g() { return 1; } }\nint A::f(int x) const { return x; }\nauto h() -> int { return 2; }\n";
        let units = clean_and_split(text, Language::Cpp).unwrap();
        let names: Vec<&str> = units.iter().map(|u| u.name.as_str()).collect();
        assert_eq!(names, ["f", "h"]);
    }

    #[test]
    fn unbalanced_input_is_rejected() {
        assert!(matches!(
            clean_and_split("int f() { return (1; }", Language::C),
            Err(Error::UnbalancedDelimiters { .. })
        ));
    }

    #[test]
    fn config_validation() {
        assert!(PipelineConfig::default().validate().is_ok());
        let bad = PipelineConfig {
            max_attempts: 0,
            ..PipelineConfig::default()
        };
        assert!(matches!(bad.validate(), Err(Error::InvalidConfig(_))));
    }

    #[test]
    fn source_validation_requires_the_target_in_both_texts() {
        let mut p = SourceProgram {
            id: "r".into(),
            language: Language::C,
            text: REVERSE.into(),
            entry_call: "int main() { return reverse(1) == 1; }".into(),
            target_fn_name: "reverse".into(),
        };
        assert!(p.validate().is_ok());
        p.entry_call = "int main() { return 0; }".into();
        assert!(matches!(p.validate(), Err(Error::InvalidSource(_))));
    }

    #[test]
    fn languages_parse_and_label() {
        assert_eq!("c++".parse::<Language>().unwrap(), Language::Cpp);
        assert_eq!(Language::Cpp.label(), "C++");
        assert_eq!(serde_json::to_string(&Language::Go).unwrap(), "\"go\"");
    }
}
