mod common;

use std::process::Command;
use std::time::Duration;

use vert_cli::{run_batch, LanguageCounts};
use vert_core::{FinalStatus, Language};

fn counts(total: usize, compiled: usize, pbt: usize, bounded: usize, full: usize) -> LanguageCounts {
    LanguageCounts {
        total,
        compiled,
        pbt_pass: pbt,
        bounded_pass: bounded,
        full_pass: full,
    }
}

#[test]
fn three_program_batch_counts_and_job_independence() {
    if common::skip("three_program_batch_counts_and_job_independence") {
        return;
    }
    let suite = common::fixtures().join("suite");
    let programs = common::pick(&suite, &["full_pass", "bounded_timeout", "non_compiling"]);
    let mut reports = Vec::new();
    for jobs in [1, 4] {
        let work = tempfile::tempdir().unwrap();
        let out = tempfile::tempdir().unwrap();
        let cfg = common::config(programs.path(), work.path(), Duration::from_secs(10));
        let report = run_batch(programs.path(), &cfg, jobs, None, Some(out.path())).unwrap();
        assert!(out.path().join("batch.json").is_file());
        assert!(out.path().join("batch.txt").is_file());
        assert!(out.path().join("full_pass.report.json").is_file());
        reports.push(report);
    }
    let expected = counts(3, 2, 2, 1, 1);
    for r in &reports {
        assert_eq!(r.counts[&Language::C], expected, "{}", r.render_table());
        assert_eq!(r.totals, expected);
        assert!(r.totals.is_monotone());
    }
    let reached = |i: usize| reports[i].programs.iter().map(|p| (p.id.clone(), p.reached)).collect::<Vec<_>>();
    assert_eq!(reached(0), reached(1));
    assert_eq!(
        reached(0),
        vec![
            ("bounded_timeout".to_string(), FinalStatus::PassedPBT),
            ("full_pass".to_string(), FinalStatus::VerifiedFull),
            ("non_compiling".to_string(), FinalStatus::Failed),
        ]
    );
}

#[test]
fn language_filter_skips_other_programs() {
    if common::skip("language_filter_skips_other_programs") {
        return;
    }
    let suite = common::fixtures().join("suite");
    let programs = common::pick(&suite, &["non_compiling"]);
    let work = tempfile::tempdir().unwrap();
    let cfg = common::config(programs.path(), work.path(), Duration::from_secs(10));
    let go = run_batch(programs.path(), &cfg, 2, Some(Language::Go), None).unwrap();
    assert_eq!(go.totals, LanguageCounts::default());
    let c = run_batch(programs.path(), &cfg, 2, Some(Language::C), None).unwrap();
    assert_eq!(c.totals, counts(1, 0, 0, 0, 0));
}

#[test]
fn empty_fixture_directory_reports_zeros() {
    let dir = tempfile::tempdir().unwrap();
    let out = tempfile::tempdir().unwrap();
    let status = Command::new(env!("CARGO_BIN_EXE_vert"))
        .arg("batch")
        .arg("--fixtures")
        .arg(dir.path())
        .arg("--out")
        .arg(out.path())
        .output()
        .unwrap();
    assert_eq!(status.status.code(), Some(0));
    let json: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(out.path().join("batch.json")).unwrap()).unwrap();
    assert_eq!(json["totals"]["total"], 0);
    assert_eq!(json["totals"]["full_pass"], 0);
    assert!(String::from_utf8_lossy(&status.stdout).contains("All"));
}
