use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;
use std::time::Instant;

use anyhow::{ensure, Context, Result};
use freeseg_core::ingest::sig6;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    Refine,
    Rank,
    Synth,
    Viz,
    Stats,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassCounts {
    pub records_in: u64,
    pub records_out: u64,
}

/// Machine-readable summary of one command run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub stage: Stage,
    pub records_in: u64,
    pub records_out: u64,
    pub rejects_by_reason: BTreeMap<String, u64>,
    #[serde(serialize_with = "sig6")]
    pub wall_time: f64,
    pub per_class_counts: BTreeMap<u64, ClassCounts>,
    #[serde(skip)]
    started: Option<Instant>,
}

impl RunReport {
    pub fn start(stage: Stage) -> Self {
        Self {
            stage,
            records_in: 0,
            records_out: 0,
            rejects_by_reason: BTreeMap::new(),
            wall_time: 0.0,
            per_class_counts: BTreeMap::new(),
            started: Some(Instant::now()),
        }
    }

    pub fn accept(&mut self, class_id: Option<u64>) {
        self.records_in += 1;
        self.records_out += 1;
        if let Some(c) = class_id {
            let e = self.per_class_counts.entry(c).or_default();
            e.records_in += 1;
            e.records_out += 1;
        }
    }

    pub fn reject(&mut self, class_id: Option<u64>, reason: &str) {
        self.records_in += 1;
        *self.rejects_by_reason.entry(reason.to_owned()).or_default() += 1;
        if let Some(c) = class_id {
            self.per_class_counts.entry(c).or_default().records_in += 1;
        }
    }

    pub fn rejected(&self) -> u64 {
        self.rejects_by_reason.values().sum()
    }

    /// `records_in == records_out + sum(rejects)`.
    pub fn balanced(&self) -> bool {
        self.records_in == self.records_out + self.rejected()
    }

    pub fn finish(&mut self) {
        if let Some(t) = self.started.take() {
            self.wall_time = t.elapsed().as_secs_f64();
        }
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        ensure!(self.balanced(), "report counts do not balance: {self:?}");
        let mut text = serde_json::to_string_pretty(self)?;
        text.push('\n');
        std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
    }

    /// Per-class table: collected vs selected.
    pub fn class_table(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "{:>12} {:>12} {:>12}", "class", "collected", "selected");
        for (c, n) in &self.per_class_counts {
            let _ = writeln!(s, "{:>12} {:>12} {:>12}", c, n.records_in, n.records_out);
        }
        let _ = writeln!(s, "{:>12} {:>12} {:>12}", "total", self.records_in, self.records_out);
        s
    }
}

/// Prints a line to stderr every 1,000 records.
pub struct Progress {
    label: &'static str,
    done: u64,
}

impl Progress {
    pub const EVERY: u64 = 1000;

    pub fn new(label: &'static str) -> Self {
        Self { label, done: 0 }
    }

    pub fn advance(&mut self, n: u64) {
        let before = self.done / Self::EVERY;
        self.done += n;
        if self.done / Self::EVERY > before {
            eprintln!("{}: {} records", self.label, self.done);
        }
    }
}
