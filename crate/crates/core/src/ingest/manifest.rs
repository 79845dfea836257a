//! JSON-lines manifests for candidates, refined records and scored records.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use super::numbers::{opt_sig6, sig6};
use super::IngestError;
use crate::geometry::BoundingBox;
use crate::rank::{ConfidencePair, RankError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SourceTag {
    Imagenet,
    Google,
    Other,
}

impl SourceTag {
    pub fn as_str(&self) -> &'static str {
        match self {
            SourceTag::Imagenet => "imagenet",
            SourceTag::Google => "google",
            SourceTag::Other => "other",
        }
    }
}

/// One object-centric image and everything upstream produced for it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateRecord {
    pub record_id: String,
    pub class_id: u64,
    pub image_path: String,
    pub raw_map_path: String,
    /// Localisation box `[x, y, w, h]`, not yet clamped to the image.
    #[serde(rename = "box")]
    pub bbox: [i64; 4],
    #[serde(serialize_with = "sig6")]
    pub conf_before: f64,
    #[serde(serialize_with = "sig6")]
    pub conf_after: f64,
    pub source_tag: SourceTag,
}

impl CandidateRecord {
    pub fn validate(&self) -> Result<(), String> {
        if self.record_id.is_empty() {
            return Err("record_id is empty".into());
        }
        let [_, _, w, h] = self.bbox;
        if w < 0 || h < 0 {
            return Err(format!("box has negative extent {w}x{h}"));
        }
        self.confidence().map_err(|e| e.to_string())?;
        Ok(())
    }

    pub fn confidence(&self) -> Result<ConfidencePair, RankError> {
        ConfidencePair::new(self.conf_before, self.conf_after)
    }

    /// The localisation box clamped to a `width` x `height` image.
    pub fn clamped_box(&self, width: u32, height: u32) -> BoundingBox {
        let [x, y, w, h] = self.bbox;
        BoundingBox::clamped(x, y, w, h, width, height)
    }
}

/// Output of the refine stage: a candidate plus its mask file, or the
/// reason no mask was produced.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RefinedRecord {
    #[serde(flatten)]
    pub candidate: CandidateRecord,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mask_path: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub refine_reject: Option<String>,
}

impl RefinedRecord {
    pub fn validate(&self) -> Result<(), String> {
        self.candidate.validate()?;
        if self.mask_path.is_none() && self.refine_reject.is_none() {
            return Err("record has neither mask_path nor refine_reject".into());
        }
        Ok(())
    }
}

/// Output of the rank stage.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoredRecord {
    #[serde(flatten)]
    pub candidate: CandidateRecord,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mask_path: Option<String>,
    #[serde(serialize_with = "sig6")]
    pub iou: f64,
    #[serde(serialize_with = "sig6")]
    pub iob: f64,
    #[serde(serialize_with = "sig6")]
    pub iom: f64,
    #[serde(serialize_with = "sig6")]
    pub freeseg_score: f64,
    #[serde(serialize_with = "opt_sig6")]
    pub drop_rate: Option<f64>,
    pub kept: bool,
    pub reject_reason: Option<String>,
}

impl ScoredRecord {
    pub fn validate(&self) -> Result<(), String> {
        self.candidate.validate()?;
        if self.kept && self.mask_path.is_none() {
            return Err("kept record has no mask_path".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LineDiagnostic {
    pub line: usize,
    pub message: String,
}

impl std::fmt::Display for LineDiagnostic {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "line {}: {}", self.line, self.message)
    }
}

/// Records that parsed and validated, plus a diagnostic for every line that did not.
#[derive(Debug, Clone)]
pub struct ManifestRead<T> {
    pub records: Vec<T>,
    pub diagnostics: Vec<LineDiagnostic>,
}

pub fn read_jsonl<T: DeserializeOwned>(
    path: &Path,
    validate: impl Fn(&T) -> Result<(), String>,
) -> Result<ManifestRead<T>, IngestError> {
    let file = File::open(path).map_err(|e| IngestError::io(path, e))?;
    let mut records = Vec::new();
    let mut diagnostics = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| IngestError::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let parsed = serde_json::from_str::<T>(&line)
            .map_err(|e| strip_position(&e.to_string()))
            .and_then(|r| validate(&r).map(|_| r));
        match parsed {
            Ok(r) => records.push(r),
            Err(message) => diagnostics.push(LineDiagnostic { line: i + 1, message }),
        }
    }
    Ok(ManifestRead { records, diagnostics })
}

// serde_json appends " at line 1 column N"; within a JSON-lines file only the
// file line number is meaningful.
fn strip_position(msg: &str) -> String {
    match msg.rfind(" at line ") {
        Some(i) => msg[..i].to_owned(),
        None => msg.to_owned(),
    }
}

pub fn write_jsonl<'a, T: Serialize + 'a>(path: &Path, records: impl IntoIterator<Item = &'a T>) -> Result<(), IngestError> {
    let file = File::create(path).map_err(|e| IngestError::io(path, e))?;
    let mut w = BufWriter::new(file);
    for r in records {
        serde_json::to_writer(&mut w, r).map_err(|e| IngestError::Json { path: path.to_owned(), message: e.to_string() })?;
        w.write_all(b"\n").map_err(|e| IngestError::io(path, e))?;
    }
    w.flush().map_err(|e| IngestError::io(path, e))
}

pub fn read_candidate_manifest(path: &Path) -> Result<ManifestRead<CandidateRecord>, IngestError> {
    read_jsonl(path, CandidateRecord::validate)
}

pub fn write_candidate_manifest(path: &Path, records: &[CandidateRecord]) -> Result<(), IngestError> {
    write_jsonl(path, records)
}

pub fn read_refined_manifest(path: &Path) -> Result<ManifestRead<RefinedRecord>, IngestError> {
    read_jsonl(path, RefinedRecord::validate)
}

pub fn read_scored_manifest(path: &Path) -> Result<ManifestRead<ScoredRecord>, IngestError> {
    read_jsonl(path, ScoredRecord::validate)
}
