//! Acceptance checks, one test per criterion. Each prints a single
//! `acceptance N ...: PASS|FAIL|SKIP` line on stderr, bypassing capture.

mod common;

use std::collections::BTreeSet;
use std::io::Write as _;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use vert_cli::{load_program_dir, run_batch};
use vert_core::diagnostics::repair_loop;
use vert_core::harness::{derive_input_strategy, generate_equivalence_harness, generate_wrapper, parse_signature, Reference};
use vert_core::oracle::build_oracle;
use vert_core::pipeline::check_candidate;
use vert_core::verifier::{run_bounded, run_full, run_pbt_with};
use vert_core::{transpile, FinalStatus, InjectionKind, PipelineConfig, Stage, Toolchain, VerificationStatus};

const STAGE_LIMIT: Duration = Duration::from_secs(120);
const REPAIR_BUDGET: Duration = Duration::from_secs(10);
const REVERSE_BUDGET: Duration = Duration::from_secs(240);
const TIMEOUT_SLACK: Duration = Duration::from_secs(2);

fn say(line: String) {
    let _ = std::io::stderr().write_all(format!("{line}\n").as_bytes());
}

/// Run one criterion, print its verdict line and fail the test if needed.
fn criterion(n: u32, name: &str, needs_tools: bool, body: impl FnOnce() -> Result<String, String>) {
    if needs_tools && !common::toolchain_ready() {
        say(format!("acceptance {n} {name}: SKIP (clang or the wasm32 Rust target is missing)"));
        return;
    }
    let started = Instant::now();
    let result = match catch_unwind(AssertUnwindSafe(body)) {
        Ok(r) => r,
        Err(p) => Err(p
            .downcast_ref::<String>()
            .cloned()
            .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
            .unwrap_or_else(|| "panicked".into())),
    };
    let secs = started.elapsed().as_secs_f64();
    match result {
        Ok(detail) => say(format!("acceptance {n} {name}: PASS in {secs:.1}s ({detail})")),
        Err(why) => {
            say(format!("acceptance {n} {name}: FAIL in {secs:.1}s ({why})"));
            panic!("criterion {n} failed: {why}");
        }
    }
}

fn ensure(ok: bool, why: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(why())
    }
}

#[test]
fn criterion_1_repair_fidelity() {
    criterion(1, "repair fidelity", true, || {
        let dir = common::fixtures().join("repair");
        let work = tempfile::tempdir().unwrap();
        let tools = Toolchain::default();
        let started = Instant::now();
        let mut rounds = Vec::new();
        for (file, must_contain) in [
            ("delimiter.rs", "total += pair[0] * 2;\n    }\n    total"),
            ("borrow.rs", "map.get(&want)"),
            ("mutability.rs", "fn reverse(mut x: i32)"),
        ] {
            let text = std::fs::read_to_string(dir.join(file)).unwrap();
            let check_dir = work.path().join(file);
            let mut compile = |t: &str| check_candidate(t, &tools, &check_dir, STAGE_LIMIT);
            let out = repair_loop(&text, &mut compile, 5);
            ensure(out.compiled, || format!("{file} still fails: {:?}", out.error_counts))?;
            ensure(out.rounds <= 2, || format!("{file} took {} rounds", out.rounds))?;
            ensure(out.text.contains(must_contain), || format!("{file} repaired unexpectedly:\n{}", out.text))?;
            rounds.push(format!("{file}={}", out.rounds));
        }
        let took = started.elapsed();
        ensure(took < REPAIR_BUDGET, || format!("took {took:?}"))?;
        Ok(format!("rounds {}, {:.1}s < 10s", rounds.join(" "), took.as_secs_f64()))
    });
}

#[test]
fn criterion_2_bug_catching_end_to_end() {
    criterion(2, "bug catching end to end", true, || {
        let programs = common::fixtures().join("programs");
        let work = tempfile::tempdir().unwrap();
        let cfg = common::config(&programs, work.path(), STAGE_LIMIT);
        let program = load_program_dir(&programs.join("reverse")).unwrap();
        let started = Instant::now();
        let report = transpile(&program, &cfg).map_err(|e| e.to_string())?;
        let took = started.elapsed();
        ensure(report.records.len() == 2, || report.render_text())?;
        let bad = &report.records[0];
        ensure(bad.outcomes.len() == 1 && bad.outcomes[0].stage == Stage::Pbt, || report.render_text())?;
        let ce = bad.counterexample.clone().ok_or_else(|| "no counterexample extracted".to_string())?;
        ensure(matches!(&bad.outcomes[0].status, VerificationStatus::Counterexample(c) if *c == ce), || {
            "counterexample not recorded on the PBT outcome".into()
        })?;
        let good = &report.records[1];
        ensure(good.prompt.contains(&ce.render()), || "counterexample missing from the next prompt".into())?;
        let pbt = good.outcomes.first().filter(|o| o.stage == Stage::Pbt && o.passed());
        let bounded = good.outcomes.get(1).filter(|o| o.stage == Stage::Bounded && o.passed());
        ensure(pbt.is_some(), || report.render_text())?;
        ensure(bounded.is_some_and(|o| o.unwind_bound == Some(10)), || report.render_text())?;
        ensure(report.final_status >= FinalStatus::VerifiedBounded, || report.render_text())?;
        ensure(took < REVERSE_BUDGET, || format!("took {took:?}"))?;
        Ok(format!(
            "counterexample {}, corrected candidate {}, {:.1}s < 240s",
            ce.render(),
            report.final_status,
            took.as_secs_f64()
        ))
    });
}

#[test]
fn criterion_3_injection_point_exactness() {
    criterion(3, "injection point exactness", true, || {
        let program = load_program_dir(&common::fixtures().join("programs/reverse")).unwrap();
        let tools = Toolchain::default();
        let mut runs = Vec::new();
        for _ in 0..2 {
            let work = tempfile::tempdir().unwrap();
            let oracle = build_oracle(
                &program.text,
                &program.entry_call,
                &program.target_fn_name,
                program.language,
                &tools,
                work.path(),
                STAGE_LIMIT,
            )
            .map_err(|e| e.to_string())?;
            let wrapped = generate_wrapper(&oracle.module, &oracle.points).map_err(|e| e.to_string())?;
            runs.push((oracle, wrapped));
        }
        let (oracle, wrapped) = &runs[0];
        ensure(oracle.points.len() == 2, || format!("{:?}", oracle.points))?;
        let kinds: BTreeSet<_> = oracle.points.iter().map(|p| format!("{:?}", p.kind)).collect();
        ensure(
            oracle.points.iter().filter(|p| p.kind == InjectionKind::Input).count() == 1
                && oracle.points.iter().filter(|p| p.kind == InjectionKind::OutputBaseline).count() == 1,
            || format!("kinds {kinds:?}"),
        )?;
        let before: Vec<&str> = oracle.module.lifted_text.lines().collect();
        let after: Vec<&str> = wrapped.text.lines().collect();
        let differing: Vec<usize> = (0..before.len()).filter(|&i| after.get(i) != Some(&before[i])).map(|i| i + 1).collect();
        let mut expected: Vec<usize> = oracle.points.iter().map(|p| p.line).collect();
        expected.sort_unstable();
        ensure(differing == expected, || format!("lines {differing:?} differ, points at {expected:?}"))?;
        let appended = &after[before.len()..];
        ensure(
            appended.iter().all(|l| l.trim().is_empty() || l.starts_with("//") || l.starts_with("pub static ")),
            || format!("unexpected appended lines {appended:?}"),
        )?;
        let (again, again_wrapped) = &runs[1];
        ensure(again.points == oracle.points, || "points differ across reruns".into())?;
        ensure(again.module.lifted_text == oracle.module.lifted_text, || "lifted text differs across reruns".into())?;
        ensure(again_wrapped.text == wrapped.text, || "wrapper differs across reruns".into())?;
        Ok(format!("points on lines {expected:?}, identical on rerun"))
    });
}

/// Stages in cascade order, every one but the last passed.
fn is_pass_prefix(outcomes: &[vert_core::VerificationOutcome]) -> bool {
    let order = [Stage::Pbt, Stage::Bounded, Stage::Full];
    outcomes.len() <= order.len()
        && outcomes.iter().zip(order).all(|(o, s)| o.stage == s)
        && outcomes.iter().rev().skip(1).all(|o| o.passed())
}

#[test]
fn criterion_4_cascade_discipline() {
    criterion(4, "cascade discipline", true, || {
        let suite = common::fixtures().join("suite");
        let work = tempfile::tempdir().unwrap();
        let out = tempfile::tempdir().unwrap();
        let cfg = common::config(&suite, work.path(), Duration::from_secs(15));
        let batch = run_batch(&suite, &cfg, 3, None, Some(out.path())).map_err(|e| e.to_string())?;
        ensure(batch.programs.len() == 6, || format!("{} programs", batch.programs.len()))?;
        for p in &batch.programs {
            let json = std::fs::read_to_string(out.path().join(format!("{}.report.json", p.id))).map_err(|e| e.to_string())?;
            let report: vert_core::PipelineReport = serde_json::from_str(&json).map_err(|e| e.to_string())?;
            for r in &report.records {
                ensure(is_pass_prefix(&r.outcomes), || format!("{}: {:?}", p.id, r.outcomes))?;
            }
        }
        let c = batch.totals;
        ensure(c.is_monotone(), || format!("{c:?}"))?;
        let reached: Vec<_> = batch.programs.iter().map(|p| format!("{}={}", p.id, p.reached)).collect();
        ensure(
            (c.total, c.compiled, c.pbt_pass, c.bounded_pass, c.full_pass) == (6, 5, 4, 2, 2),
            || format!("{c:?} {reached:?}"),
        )?;
        Ok(format!(
            "total {} compiled {} pbt {} bounded {} full {}",
            c.total, c.compiled, c.pbt_pass, c.bounded_pass, c.full_pass
        ))
    });
}

#[test]
fn criterion_5_timeout_enforcement() {
    criterion(5, "timeout enforcement", true, || {
        let programs = common::fixtures().join("programs");
        let work = tempfile::tempdir().unwrap();
        let mut cfg = common::config(&programs, work.path(), STAGE_LIMIT);
        cfg.max_attempts = 1;
        let program = load_program_dir(&programs.join("spin")).unwrap();
        let report = transpile(&program, &cfg).map_err(|e| e.to_string())?;
        let pbt = report.records[0].outcomes.first().ok_or_else(|| report.render_text())?;
        ensure(pbt.stage == Stage::Pbt && pbt.status == VerificationStatus::Timeout, || report.render_text())?;
        ensure(pbt.duration <= STAGE_LIMIT + TIMEOUT_SLACK, || format!("stage ran {:?}", pbt.duration))?;
        ensure(report.final_status == FinalStatus::Failed, || report.render_text())?;
        Ok(format!("stage ended after {:.1}s <= 122s", pbt.duration.as_secs_f64()))
    });
}

const HALF_SOURCE: &str = "int half(int x) {\n  return x / 2;\n}\n";
const HALF_ENTRY: &str = "int callHalf() {\n  int result = half(84);\n  if (result == 42) {\n    return 0;\n  }\n  return 1;\n}\n";

/// Candidate `n` is wrong from `1000 * n` upwards, so shrinking lands on
/// a different counterexample every time.
fn failing_half(n: usize) -> String {
    format!(
        "fn half(x: i32) -> i32 {{\n    if x >= {} {{\n        return x / 2 + 1;\n    }}\n    x / 2\n}}\n",
        1000 * n
    )
}

#[test]
fn criterion_6_attempt_budget_and_feedback() {
    criterion(6, "attempt budget and prompt feedback", true, || {
        let root = tempfile::tempdir().unwrap();
        let dir = root.path().join("half");
        std::fs::create_dir_all(&dir).unwrap();
        std::fs::write(dir.join("source.c"), HALF_SOURCE).unwrap();
        std::fs::write(dir.join("entry.c"), HALF_ENTRY).unwrap();
        // One spare candidate beyond the budget; it must never be requested.
        for n in 1..=21 {
            std::fs::write(dir.join(format!("attempt-{n}.rs")), failing_half(n)).unwrap();
        }
        let work = tempfile::tempdir().unwrap();
        let mut cfg = common::config(root.path(), work.path(), STAGE_LIMIT);
        cfg.max_attempts = 20;
        let program = load_program_dir(&dir).unwrap();
        let report = transpile(&program, &cfg).map_err(|e| e.to_string())?;
        ensure(report.records.len() == 20, || format!("{} attempts", report.records.len()))?;
        ensure(report.final_status == FinalStatus::Failed, || report.render_text())?;
        let mut with_feedback = 0;
        for pair in report.records.windows(2) {
            if let Some(ce) = &pair[0].counterexample {
                for v in &ce.values {
                    ensure(pair[1].prompt.contains(v.as_str()), || {
                        format!("attempt {} prompt lacks {v}", pair[1].attempt_index)
                    })?;
                }
                ensure(pair[1].prompt.contains(&ce.render()), || format!("attempt {}", pair[1].attempt_index))?;
                with_feedback += 1;
            }
        }
        ensure(with_feedback == 19, || format!("{with_feedback} prompts carried feedback"))?;
        let expected: Vec<String> = (1..=20).map(|n| (1000 * n).to_string()).collect();
        let found: Vec<String> = report
            .records
            .iter()
            .filter_map(|r| r.counterexample.as_ref().map(|c| c.render()))
            .collect();
        ensure(found == expected, || format!("counterexamples {found:?}"))?;
        Ok("20 attempts, 19 prompts carried the previous counterexample".into())
    });
}

#[test]
fn criterion_7_bounded_blindness() {
    criterion(7, "bounded blindness", true, || {
        let dir = common::fixtures().join("programs/halving");
        let program = load_program_dir(&dir).unwrap();
        let candidate = std::fs::read_to_string(dir.join("attempt-1.rs")).unwrap();
        let work = tempfile::tempdir().unwrap();
        let cfg = common::config(&dir, work.path(), STAGE_LIMIT);
        let oracle = build_oracle(
            &program.text,
            &program.entry_call,
            &program.target_fn_name,
            program.language,
            &cfg.toolchain,
            &work.path().join("oracle"),
            STAGE_LIMIT,
        )
        .map_err(|e| e.to_string())?;
        let wrapped = generate_wrapper(&oracle.module, &oracle.points).map_err(|e| e.to_string())?;
        let sig = parse_signature(&candidate, "halving_sum").map_err(|e| e.to_string())?;
        let strategy = derive_input_strategy(&sig, &oracle.sample_lengths).map_err(|e| e.to_string())?;
        let harness =
            generate_equivalence_harness(&candidate, &sig, &strategy, Reference::Oracle(&wrapped)).map_err(|e| e.to_string())?;
        let vcfg = cfg.verify_config();
        let bounded = run_bounded(&harness, &work.path().join("bounded"), &vcfg).map_err(|e| e.to_string())?;
        ensure(bounded.passed() && bounded.unwind_bound == Some(vcfg.unwind), || format!("{:?}", bounded.status))?;
        let full = run_full(&harness, &work.path().join("full"), &vcfg).map_err(|e| e.to_string())?;
        let ce = full.counterexample().ok_or_else(|| format!("full stage gave {:?}", full.status))?;
        let x: i64 = ce.values[0].parse().map_err(|_| format!("bad value {}", ce.values[0]))?;
        ensure(x >= 1 << 12, || format!("counterexample {x} lies within the candidate's 12 iterations"))?;
        Ok(format!(
            "bounded pass at k={}, full counterexample {x} at k={}",
            vcfg.unwind,
            full.unwind_bound.unwrap_or_default()
        ))
    });
}

const DUMP_FN: &str = "fn tally(n: u32, s: String) -> u64 {\n    n as u64 + s.len() as u64\n}\n";

/// Undo Rust's `{:?}` escaping of a string.
fn unescape_debug(quoted: &str) -> Result<String, String> {
    let inner = quoted
        .strip_prefix('"')
        .and_then(|s| s.strip_suffix('"'))
        .ok_or_else(|| format!("not a quoted string: {quoted}"))?;
    let mut out = String::new();
    let mut chars = inner.chars();
    while let Some(c) = chars.next() {
        if c != '\\' {
            out.push(c);
            continue;
        }
        match chars.next() {
            Some('n') => out.push('\n'),
            Some('r') => out.push('\r'),
            Some('t') => out.push('\t'),
            Some('0') => out.push('\0'),
            Some(c @ ('\\' | '"' | '\'')) => out.push(c),
            Some('u') => {
                let hex: String = chars.by_ref().skip(1).take_while(|&c| c != '}').collect();
                let v = u32::from_str_radix(&hex, 16).map_err(|e| e.to_string())?;
                out.push(char::from_u32(v).ok_or("bad escape")?);
            }
            other => return Err(format!("unknown escape {other:?}")),
        }
    }
    Ok(out)
}

#[test]
fn criterion_8_assumption_soundness() {
    criterion(8, "assumption soundness", true, || {
        let sig = parse_signature(DUMP_FN, "tally").map_err(|e| e.to_string())?;
        let strategy = derive_input_strategy(&sig, &[None, None]).map_err(|e| e.to_string())?;
        let harness = generate_equivalence_harness(DUMP_FN, &sig, &strategy, Reference::Rust { source: DUMP_FN, name: "tally" })
            .map_err(|e| e.to_string())?;
        let work = tempfile::tempdir().unwrap();
        let dump = work.path().join("inputs.jsonl");
        let mut cfg = PipelineConfig::default().verify_config();
        cfg.pbt_cases = 100_000;
        let outcome = run_pbt_with(&harness, &work.path().join("pbt"), &cfg, &[("VERT_PBT_DUMP", dump.display().to_string())])
            .map_err(|e| e.to_string())?;
        ensure(outcome.passed(), || format!("{:?}", outcome.status))?;
        let (mut cases, mut bytes, mut max_n) = (0u64, 0u64, 0u64);
        for line in std::fs::read_to_string(&dump).map_err(|e| e.to_string())?.lines() {
            let v: serde_json::Value = serde_json::from_str(line).map_err(|e| e.to_string())?;
            let inputs = v["inputs"].as_array().ok_or("no inputs")?;
            let n: i128 = inputs[0].as_str().ok_or("n not a string")?.parse().map_err(|_| format!("bad u32 {}", inputs[0]))?;
            ensure((0..=u32::MAX as i128).contains(&n), || format!("u32 input {n} out of range"))?;
            let s = unescape_debug(inputs[1].as_str().ok_or("s not a string")?)?;
            ensure(s.is_ascii(), || format!("non-ASCII string {s:?}"))?;
            cases += 1;
            bytes += s.len() as u64;
            max_n = max_n.max(n as u64);
        }
        ensure(cases == 100_000, || format!("{cases} cases dumped"))?;
        Ok(format!("{cases} cases in range, max u32 {max_n}, {bytes} string bytes all ASCII"))
    });
}

