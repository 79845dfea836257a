use std::path::Path;

use anyhow::Result;
use freeseg_core::ingest::{decode_mask, read_refined_manifest, write_jsonl, PipelineConfig, RefinedRecord, ScoredRecord};
use freeseg_core::rank::{drop_rate, score_segment, RankInput, Thresholds};
use rayon::prelude::*;

use crate::report::{Progress, RunReport, Stage};

pub const MANIFEST_NAME: &str = "scored.jsonl";
pub const REPORT_NAME: &str = "rank_report.json";

/// Scores every refined record and writes the scored manifest and report.
/// Records already rejected by refine pass through with their reason.
pub fn cmd_rank(manifest: &Path, cfg: &PipelineConfig, out: &Path) -> Result<RunReport> {
    let mut report = RunReport::start(Stage::Rank);
    let read = read_refined_manifest(manifest)?;
    for d in &read.diagnostics {
        eprintln!("{}: {d}", manifest.display());
        report.reject(None, "malformed_record");
    }
    std::fs::create_dir_all(out)?;

    let mut progress = Progress::new("rank");
    let mut scored = Vec::with_capacity(read.records.len());
    for chunk in read.records.chunks(Progress::EVERY as usize) {
        let batch: Vec<(ScoredRecord, Option<String>)> = chunk.par_iter().map(|r| rank_one(r, &cfg.rank)).collect();
        for (rec, diagnostic) in batch {
            if let Some(d) = diagnostic {
                eprintln!("{d}");
            }
            let class = Some(rec.candidate.class_id);
            match &rec.reject_reason {
                Some(reason) => report.reject(class, reason),
                None => report.accept(class),
            }
            scored.push(rec);
        }
        progress.advance(chunk.len() as u64);
    }

    write_jsonl(&out.join(MANIFEST_NAME), &scored)?;
    report.finish();
    report.write(&out.join(REPORT_NAME))?;
    print!("{}", report.class_table());
    Ok(report)
}

fn unscored(r: &RefinedRecord, reason: &str) -> ScoredRecord {
    ScoredRecord {
        candidate: r.candidate.clone(),
        mask_path: None,
        iou: 0.0,
        iob: 0.0,
        iom: 0.0,
        freeseg_score: 0.0,
        drop_rate: r.candidate.confidence().ok().and_then(|c| drop_rate(&c).ok()),
        kept: false,
        reject_reason: Some(reason.to_owned()),
    }
}

fn rank_one(r: &RefinedRecord, thresholds: &Thresholds) -> (ScoredRecord, Option<String>) {
    let (Some(mask_path), None) = (&r.mask_path, &r.refine_reject) else {
        let reason = r.refine_reject.as_deref().unwrap_or("empty_mask");
        return (unscored(r, reason), None);
    };
    let mask = match decode_mask(Path::new(mask_path)) {
        Ok(m) => m,
        Err(e) => return (unscored(r, "unreadable_mask"), Some(format!("{}: {e}", r.candidate.record_id))),
    };
    let confidence = match r.candidate.confidence() {
        Ok(c) => c,
        Err(e) => return (unscored(r, "invalid_confidence"), Some(format!("{}: {e}", r.candidate.record_id))),
    };
    let bbox = r.candidate.clamped_box(mask.width(), mask.height());
    let input = RankInput { record_id: r.candidate.record_id.clone(), class_id: r.candidate.class_id, mask, bbox, confidence };
    let s = score_segment(input, thresholds);
    let rec = ScoredRecord {
        candidate: r.candidate.clone(),
        mask_path: Some(mask_path.clone()),
        iou: s.iou,
        iob: s.iob,
        iom: s.iom,
        freeseg_score: s.freeseg_score,
        drop_rate: s.drop_rate,
        kept: s.kept,
        reject_reason: s.reject_reason.map(|r| r.as_str().to_owned()),
    };
    (rec, None)
}
