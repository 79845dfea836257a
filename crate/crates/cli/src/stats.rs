use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use freeseg_core::ingest::{read_scored_manifest, ScoredRecord};
use serde::{Deserialize, Serialize};

use crate::report::{RunReport, Stage};

pub const STATS_NAME: &str = "stats.json";
pub const REPORT_NAME: &str = "stats_report.json";

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counts {
    pub collected: u64,
    pub selected: u64,
}

impl Counts {
    fn add(&mut self, kept: bool) {
        self.collected += 1;
        self.selected += u64::from(kept);
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct StatsSummary {
    pub manifests: Vec<PathBuf>,
    pub total: Counts,
    pub by_class: BTreeMap<u64, Counts>,
    pub by_source: BTreeMap<String, Counts>,
    /// `kept` plus one entry per reject reason.
    pub by_verdict: BTreeMap<String, u64>,
    pub malformed_lines: u64,
}

impl StatsSummary {
    pub fn add(&mut self, r: &ScoredRecord) {
        self.total.add(r.kept);
        self.by_class.entry(r.candidate.class_id).or_default().add(r.kept);
        self.by_source.entry(r.candidate.source_tag.as_str().to_owned()).or_default().add(r.kept);
        let verdict = match (&r.reject_reason, r.kept) {
            (_, true) => "kept",
            (Some(reason), false) => reason.as_str(),
            (None, false) => "rejected",
        };
        *self.by_verdict.entry(verdict.to_owned()).or_default() += 1;
    }

    pub fn table(&self) -> String {
        let mut s = String::new();
        let row = |s: &mut String, group: &str, key: &str, c: &Counts| {
            let _ = writeln!(s, "{group:<8} {key:<24} {:>10} {:>10}", c.collected, c.selected);
        };
        let _ = writeln!(s, "{:<8} {:<24} {:>10} {:>10}", "group", "key", "collected", "selected");
        row(&mut s, "total", "", &self.total);
        for (k, c) in &self.by_class {
            row(&mut s, "class", &k.to_string(), c);
        }
        for (k, c) in &self.by_source {
            row(&mut s, "source", k, c);
        }
        for (k, n) in &self.by_verdict {
            let _ = writeln!(s, "{:<8} {k:<24} {n:>10}", "verdict");
        }
        if self.malformed_lines > 0 {
            let _ = writeln!(s, "{:<8} {:<24} {:>10}", "skipped", "malformed_lines", self.malformed_lines);
        }
        s
    }
}

pub fn summarize(manifests: &[PathBuf]) -> Result<StatsSummary> {
    let mut summary = StatsSummary { manifests: manifests.to_vec(), ..Default::default() };
    for m in manifests {
        let read = read_scored_manifest(m)?;
        for d in &read.diagnostics {
            eprintln!("{}: {d}", m.display());
        }
        summary.malformed_lines += read.diagnostics.len() as u64;
        for r in &read.records {
            summary.add(r);
        }
    }
    Ok(summary)
}

/// Aggregates scored manifests. With `out`, writes the summary and report as
/// JSON there. Returns the report and the text table.
pub fn cmd_stats(manifests: &[PathBuf], out: Option<&Path>) -> Result<(RunReport, String)> {
    let summary = summarize(manifests)?;
    let mut report = RunReport::start(Stage::Stats);
    for _ in 0..summary.malformed_lines {
        report.reject(None, "malformed_record");
    }
    for (class, c) in &summary.by_class {
        for _ in 0..c.selected {
            report.accept(Some(*class));
        }
    }
    for (verdict, n) in &summary.by_verdict {
        if verdict != "kept" {
            report.records_in += n;
            *report.rejects_by_reason.entry(verdict.clone()).or_default() += n;
        }
    }
    for (class, c) in &summary.by_class {
        report.per_class_counts.entry(*class).or_default().records_in = c.collected;
    }
    report.finish();
    if let Some(out) = out {
        std::fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
        let mut text = serde_json::to_string_pretty(&summary)?;
        text.push('\n');
        std::fs::write(out.join(STATS_NAME), text)?;
        report.write(&out.join(REPORT_NAME))?;
    }
    Ok((report, summary.table()))
}
