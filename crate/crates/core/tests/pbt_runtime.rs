mod common;

use std::path::Path;

use vert_core::harness::{derive_input_strategy, generate_equivalence_harness, parse_signature, render_inputs, Reference};
use vert_core::verifier::{run_pbt, run_pbt_with, VerificationOutcome, VerifyConfig};
use vert_core::VerificationStatus;

const IDENTITY: &str = "fn step(x: i32) -> i32 {\n    x\n}\n";
const OFF_ABOVE_1000: &str = "fn step(x: i32) -> i32 {\n    if x > 1000 { x + 1 } else { x }\n}\n";

const COMPOSITE_REF: &str = r#"
#[derive(Clone, Debug, PartialEq)]
pub struct Point { pub x: i16, pub y: u8 }

#[derive(Clone, Debug, PartialEq)]
pub enum Shape { Dot, Circle(u8), Rect { w: u16, h: u16 } }

fn score(p: Point, shapes: Vec<Shape>, tag: String, flag: bool, c: char) -> i64 {
    let mut total = p.x as i64 + p.y as i64 + tag.len() as i64 + flag as i64 + c as i64;
    for s in &shapes {
        total += match s {
            Shape::Dot => 1,
            Shape::Circle(r) => *r as i64,
            Shape::Rect { w, h } => *w as i64 * *h as i64,
        };
    }
    total
}
"#;

fn candidate_for(reference: &str, tweak: &str) -> String {
    reference.replacen("    total\n}", &format!("    {tweak}\n    total\n}}"), 1)
}

fn pbt(candidate: &str, reference: &str, name: &str, dir: &Path, cfg: &VerifyConfig, env: &[(&str, String)]) -> (VerificationOutcome, vert_core::harness::InputStrategy) {
    let sig = parse_signature(reference, name).unwrap();
    let strategy = derive_input_strategy(&sig, &vec![None; sig.params.len()]).unwrap();
    let harness = generate_equivalence_harness(candidate, &sig, &strategy, Reference::Rust { source: reference, name }).unwrap();
    (run_pbt_with(&harness, dir, cfg, env).unwrap(), strategy)
}

fn quick() -> VerifyConfig {
    VerifyConfig {
        pbt_cases: 20_000,
        ..VerifyConfig::default()
    }
}

#[test]
fn shrinking_reaches_the_smallest_failing_input() {
    if common::skip("shrinking_reaches_the_smallest_failing_input", common::rustc_ready()) {
        return;
    }
    let work = common::workdir();
    let (out, _) = pbt(OFF_ABOVE_1000, IDENTITY, "step", work.path(), &quick(), &[]);
    let ce = out.counterexample().expect("divergence above 1000 must be found");
    assert_eq!(ce.values, vec!["1001".to_string()]);
}

#[test]
fn a_replayed_tape_reproduces_the_counterexample() {
    if common::skip("a_replayed_tape_reproduces_the_counterexample", common::rustc_ready()) {
        return;
    }
    let work = common::workdir();
    let (first, _) = pbt(OFF_ABOVE_1000, IDENTITY, "step", &work.path().join("a"), &quick(), &[]);
    let ce = first.counterexample().unwrap().clone();
    let (again, _) = pbt(OFF_ABOVE_1000, IDENTITY, "step", &work.path().join("b"), &quick(), &[("VERT_PBT_REPLAY", ce.replay_tape())]);
    assert_eq!(again.counterexample(), Some(&ce), "{:?}\n{}", again.status, again.raw_log);
    let (fixed, _) = pbt(IDENTITY, IDENTITY, "step", &work.path().join("c"), &quick(), &[("VERT_PBT_REPLAY", ce.replay_tape())]);
    assert!(fixed.passed(), "{:?}", fixed.status);
}

#[test]
fn the_same_seed_gives_the_same_run() {
    if common::skip("the_same_seed_gives_the_same_run", common::rustc_ready()) {
        return;
    }
    let work = common::workdir();
    let cfg = VerifyConfig { seed: 7, ..quick() };
    let (a, _) = pbt(OFF_ABOVE_1000, IDENTITY, "step", &work.path().join("a"), &cfg, &[]);
    let (b, _) = pbt(OFF_ABOVE_1000, IDENTITY, "step", &work.path().join("b"), &cfg, &[]);
    let first_case = |o: &VerificationOutcome| o.raw_log.lines().find(|l| l.contains("counterexample (case")).map(str::to_string);
    assert!(first_case(&a).is_some());
    assert_eq!(first_case(&a), first_case(&b));
    assert_eq!(a.counterexample(), b.counterexample());
}

#[test]
fn composite_counterexamples_shrink_and_render() {
    if common::skip("composite_counterexamples_shrink_and_render", common::rustc_ready()) {
        return;
    }
    let work = common::workdir();
    let candidate = candidate_for(COMPOSITE_REF, "if shapes.len() >= 2 { total += 1; }");
    let (out, strategy) = pbt(&candidate, COMPOSITE_REF, "score", work.path(), &quick(), &[]);
    let ce = out.counterexample().expect("two shapes must trigger the divergence");
    let lookup = |t: i64| ce.tape.iter().find(|(k, _)| *k == t).map(|&(_, v)| v);
    assert_eq!(render_inputs(&strategy, &lookup), ce.values);
    assert_eq!(ce.values[0], "Point { x: 0, y: 0 }");
    assert_eq!(ce.values[1], "[Shape::Dot, Shape::Dot]");
    assert_eq!(ce.values[2], "\"\"");
    assert_eq!(ce.values[3], "false");
}

/// Every dumped case rendered from its tape must match what the compiled
/// harness printed for it.
#[test]
fn tape_rendering_matches_the_harness_display() {
    if common::skip("tape_rendering_matches_the_harness_display", common::rustc_ready()) {
        return;
    }
    let work = common::workdir();
    let dump = work.path().join("cases.jsonl");
    let cfg = VerifyConfig { pbt_cases: 5_000, ..quick() };
    let (out, strategy) = pbt(COMPOSITE_REF, COMPOSITE_REF, "score", &work.path().join("h"), &cfg, &[("VERT_PBT_DUMP", dump.display().to_string())]);
    assert!(out.passed(), "{:?}", out.status);
    let mut seen = 0;
    for line in std::fs::read_to_string(&dump).unwrap().lines() {
        let v: serde_json::Value = serde_json::from_str(line).unwrap();
        let shown: Vec<String> = v["inputs"].as_array().unwrap().iter().map(|s| s.as_str().unwrap().to_string()).collect();
        let tape: Vec<(i64, i128)> = v["tape"]
            .as_array()
            .unwrap()
            .iter()
            .map(|p| (p[0].as_i64().unwrap(), p[1].as_i64().unwrap() as i128))
            .collect();
        let lookup = |t: i64| tape.iter().find(|(k, _)| *k == t).map(|&(_, v)| v);
        assert_eq!(render_inputs(&strategy, &lookup), shown, "case {}", v["case"]);
        seen += 1;
    }
    assert_eq!(seen, 5_000);
}

const RANGES_FN: &str = "fn mix(a: i8, b: u16, c: i64, d: u64, e: bool, f: char) -> u8 {\n    let _ = (a, b, c, d, e, f);\n    0\n}\n";

/// Independent table of the inclusive ranges each parameter may take.
fn expected_range(slot: usize) -> (i128, i128) {
    match slot {
        0 => (i8::MIN as i128, i8::MAX as i128),
        1 => (0, u16::MAX as i128),
        2 => (i64::MIN as i128, i64::MAX as i128),
        3 => (0, u64::MAX as i128),
        4 => (0, 1),
        _ => (0, 127),
    }
}

fn parse_shown(slot: usize, s: &str) -> i128 {
    match slot {
        4 => (s == "true") as i128,
        5 => {
            let inner = s.trim_matches('\'');
            match inner {
                "\\0" => 0,
                "\\t" => 9,
                "\\n" => 10,
                "\\r" => 13,
                "\\'" => 39,
                "\\\\" => 92,
                _ if inner.starts_with("\\u{") => i128::from_str_radix(&inner[3..inner.len() - 1], 16).unwrap(),
                _ => {
                    let mut cs = inner.chars();
                    let c = cs.next().unwrap();
                    assert!(cs.next().is_none(), "odd char rendering {s}");
                    c as i128
                }
            }
        }
        _ => s.parse().unwrap(),
    }
}

#[test]
fn drawn_scalars_stay_in_range_and_reach_the_edges() {
    if common::skip("drawn_scalars_stay_in_range_and_reach_the_edges", common::rustc_ready()) {
        return;
    }
    let work = common::workdir();
    let dump = work.path().join("cases.jsonl");
    let cfg = VerifyConfig { pbt_cases: 20_000, ..quick() };
    let (out, _) = pbt(RANGES_FN, RANGES_FN, "mix", &work.path().join("h"), &cfg, &[("VERT_PBT_DUMP", dump.display().to_string())]);
    assert!(out.passed(), "{:?}", out.status);
    let mut lo = [i128::MAX; 6];
    let mut hi = [i128::MIN; 6];
    for line in std::fs::read_to_string(&dump).unwrap().lines() {
        let v: serde_json::Value = serde_json::from_str(line).unwrap();
        for (slot, s) in v["inputs"].as_array().unwrap().iter().enumerate() {
            let x = parse_shown(slot, s.as_str().unwrap());
            let (min, max) = expected_range(slot);
            assert!((min..=max).contains(&x), "slot {slot} drew {x}");
            lo[slot] = lo[slot].min(x);
            hi[slot] = hi[slot].max(x);
        }
    }
    for slot in 0..6 {
        assert_eq!((lo[slot], hi[slot]), expected_range(slot), "slot {slot} never reached an edge");
    }
}

#[test]
fn a_panicking_candidate_is_a_counterexample() {
    if common::skip("a_panicking_candidate_is_a_counterexample", common::rustc_ready()) {
        return;
    }
    let work = common::workdir();
    let candidate = "fn step(x: i32) -> i32 {\n    if x == -5 { panic!(\"boom\") }\n    x\n}\n";
    let sig = parse_signature(IDENTITY, "step").unwrap();
    let strategy = derive_input_strategy(&sig, &[None]).unwrap();
    let harness = generate_equivalence_harness(candidate, &sig, &strategy, Reference::Rust { source: IDENTITY, name: "step" }).unwrap();
    let out = run_pbt(&harness, work.path(), &quick()).unwrap();
    match &out.status {
        VerificationStatus::Counterexample(ce) => assert_eq!(ce.values, vec!["-5".to_string()]),
        other => panic!("expected a counterexample, got {other:?}"),
    }
}
