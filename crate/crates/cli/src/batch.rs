//! Batch runs over a directory with one subdirectory per program.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use tracing::warn;
use vert_core::{transpile, FinalStatus, Language, PipelineConfig, PipelineReport, Timings};

use crate::{load_program_dir, write_report, CliError, Result};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LanguageCounts {
    pub total: usize,
    pub compiled: usize,
    pub pbt_pass: usize,
    pub bounded_pass: usize,
    pub full_pass: usize,
}

impl LanguageCounts {
    /// full ≤ bounded ≤ pbt ≤ compiled ≤ total.
    pub fn is_monotone(&self) -> bool {
        self.full_pass <= self.bounded_pass
            && self.bounded_pass <= self.pbt_pass
            && self.pbt_pass <= self.compiled
            && self.compiled <= self.total
    }

    fn add(&mut self, o: &LanguageCounts) {
        self.total += o.total;
        self.compiled += o.compiled;
        self.pbt_pass += o.pbt_pass;
        self.bounded_pass += o.bounded_pass;
        self.full_pass += o.full_pass;
    }
}

/// Mean wall-clock seconds per component.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct MeanDurations {
    pub generator: f64,
    pub compile: f64,
    pub repair: f64,
    pub oracle: f64,
    pub pbt: f64,
    pub bounded: f64,
    pub full: f64,
}

impl MeanDurations {
    fn of(timings: &[Timings]) -> MeanDurations {
        if timings.is_empty() {
            return MeanDurations::default();
        }
        let n = timings.len() as f64;
        let mean = |f: fn(&Timings) -> std::time::Duration| timings.iter().map(|t| f(t).as_secs_f64()).sum::<f64>() / n;
        MeanDurations {
            generator: mean(|t| t.generator),
            compile: mean(|t| t.compile),
            repair: mean(|t| t.repair),
            oracle: mean(|t| t.oracle),
            pbt: mean(|t| t.pbt),
            bounded: mean(|t| t.bounded),
            full: mean(|t| t.full),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProgramSummary {
    pub id: String,
    pub language: Option<Language>,
    /// Deepest stage any attempt passed.
    pub reached: FinalStatus,
    pub compiled: bool,
    pub attempts: usize,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BatchReport {
    pub counts: BTreeMap<Language, LanguageCounts>,
    pub totals: LanguageCounts,
    pub mean_durations: BTreeMap<Language, MeanDurations>,
    pub programs: Vec<ProgramSummary>,
}

impl BatchReport {
    /// Aggregate finished programs. A fold in id order, so the result does
    /// not depend on completion order.
    pub fn aggregate(results: &[(String, Option<Language>, std::result::Result<PipelineReport, String>)]) -> BatchReport {
        let mut sorted: Vec<_> = results.iter().collect();
        sorted.sort_by(|a, b| a.0.cmp(&b.0));
        let mut counts: BTreeMap<Language, LanguageCounts> = BTreeMap::new();
        let mut timings: BTreeMap<Language, Vec<Timings>> = BTreeMap::new();
        let mut programs = Vec::new();
        for (id, language, result) in sorted {
            let (reached, compiled, attempts, error) = match result {
                Ok(r) => {
                    let reached = r.records.iter().map(PipelineReport::deepest_stage).max().unwrap_or(FinalStatus::Failed);
                    timings.entry(r.language).or_default().push(r.timings);
                    (reached, r.records.iter().any(|a| a.compiled), r.records.len(), None)
                }
                Err(e) => (FinalStatus::Failed, false, 0, Some(e.clone())),
            };
            if let Some(lang) = language {
                let c = counts.entry(*lang).or_default();
                c.total += 1;
                c.compiled += compiled as usize;
                c.pbt_pass += (reached >= FinalStatus::PassedPBT) as usize;
                c.bounded_pass += (reached >= FinalStatus::VerifiedBounded) as usize;
                c.full_pass += (reached == FinalStatus::VerifiedFull) as usize;
            }
            programs.push(ProgramSummary {
                id: id.clone(),
                language: *language,
                reached,
                compiled,
                attempts,
                error,
            });
        }
        let mut totals = LanguageCounts::default();
        for c in counts.values() {
            totals.add(c);
        }
        let mean_durations = timings.iter().map(|(l, t)| (*l, MeanDurations::of(t))).collect();
        BatchReport {
            counts,
            totals,
            mean_durations,
            programs,
        }
    }

    /// Aligned text tables: pass counts per language, then mean runtimes.
    pub fn render_table(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "{:<10} {:>7} {:>9} {:>7} {:>13} {:>10}",
            "Language", "Total", "Compiled", "PBT", "Bounded-ver.", "Full-ver."
        );
        let mut row = |name: &str, c: &LanguageCounts| {
            let _ = writeln!(
                out,
                "{:<10} {:>7} {:>9} {:>7} {:>13} {:>10}",
                name, c.total, c.compiled, c.pbt_pass, c.bounded_pass, c.full_pass
            );
        };
        for (l, c) in &self.counts {
            row(l.label(), c);
        }
        row("All", &self.totals);
        out.push('\n');
        let _ = writeln!(
            out,
            "{:<10} {:>10} {:>9} {:>8} {:>8} {:>8} {:>8} {:>8}",
            "Mean (s)", "Generator", "Compile", "Repair", "Oracle", "PBT", "Bounded", "Full"
        );
        for (l, m) in &self.mean_durations {
            let _ = writeln!(
                out,
                "{:<10} {:>10.2} {:>9.2} {:>8.2} {:>8.2} {:>8.2} {:>8.2} {:>8.2}",
                l.label(),
                m.generator,
                m.compile,
                m.repair,
                m.oracle,
                m.pbt,
                m.bounded,
                m.full
            );
        }
        out
    }
}

/// Program directories under `root`, sorted by name.
pub fn discover(root: &Path) -> Result<Vec<PathBuf>> {
    let entries = std::fs::read_dir(root).map_err(|e| CliError::io(format!("reading {}", root.display()), e))?;
    let mut dirs: Vec<PathBuf> = entries.filter_map(|e| e.ok()).map(|e| e.path()).filter(|p| p.is_dir()).collect();
    dirs.sort();
    Ok(dirs)
}

/// Run every program under `root` with up to `jobs` in parallel. Per-program
/// failures are recorded, never fatal. Reports go to `out` when given.
pub fn run_batch(
    root: &Path,
    config: &PipelineConfig,
    jobs: usize,
    language: Option<Language>,
    out: Option<&Path>,
) -> Result<BatchReport> {
    let dirs = discover(root)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| CliError::Config(e.to_string()))?;
    let results: Vec<_> = pool.install(|| {
        dirs.par_iter()
            .filter_map(|dir| {
                let id = dir.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
                let program = match load_program_dir(dir) {
                    Ok(p) => p,
                    Err(e) => return Some((id, None, Err(e.to_string()))),
                };
                if language.is_some_and(|l| l != program.language) {
                    return None;
                }
                let result = transpile(&program, config).map_err(|e| e.to_string());
                match (&result, out) {
                    (Ok(r), Some(out)) => {
                        if let Err(e) = write_report(r, out) {
                            warn!(program = %id, error = %e, "cannot write report");
                        }
                    }
                    (Err(e), _) => warn!(program = %id, error = %e, "program failed"),
                    _ => {}
                }
                Some((id, Some(program.language), result))
            })
            .collect()
    });
    let report = BatchReport::aggregate(&results);
    if let Some(out) = out {
        std::fs::create_dir_all(out).map_err(|e| CliError::io(format!("creating {}", out.display()), e))?;
        let json = serde_json::to_string_pretty(&report).map_err(|e| CliError::Config(e.to_string()))?;
        std::fs::write(out.join("batch.json"), json).map_err(|e| CliError::io("writing batch report", e))?;
        std::fs::write(out.join("batch.txt"), report.render_table()).map_err(|e| CliError::io("writing batch report", e))?;
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_directory_gives_an_all_zero_report() {
        let dir = tempfile::tempdir().unwrap();
        let r = run_batch(dir.path(), &PipelineConfig::default(), 2, None, None).unwrap();
        assert_eq!(r.totals, LanguageCounts::default());
        assert!(r.programs.is_empty());
        assert!(r.render_table().contains("All"));
    }

    #[test]
    fn unreadable_programs_are_recorded_not_fatal() {
        let results = vec![("broken".to_string(), None, Err("no source file".to_string()))];
        let r = BatchReport::aggregate(&results);
        assert_eq!(r.programs[0].error.as_deref(), Some("no source file"));
        assert!(r.totals.is_monotone());
    }
}
