use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use freeseg_core::ingest::{
    decode_graymap, encode_mask_png, image_dimensions, read_candidate_manifest, write_jsonl, CandidateRecord,
    PipelineConfig, RefinedRecord,
};
use freeseg_core::refine::{refine_segment, RefineConfig, RefineError};
use rayon::prelude::*;

use crate::report::{Progress, RunReport, Stage};
use crate::sanitize;

pub const MANIFEST_NAME: &str = "refined.jsonl";
pub const REPORT_NAME: &str = "refine_report.json";

struct Outcome {
    record: RefinedRecord,
    diagnostic: Option<String>,
}

/// Refines every candidate of `manifest`, writing one mask PNG per record that
/// yields a mask, the refined manifest and a report under `out`.
pub fn cmd_refine(manifest: &Path, cfg: &PipelineConfig, out: &Path) -> Result<RunReport> {
    let mut report = RunReport::start(Stage::Refine);
    let read = read_candidate_manifest(manifest)?;
    for d in &read.diagnostics {
        eprintln!("{}: {d}", manifest.display());
        report.reject(None, "malformed_record");
    }
    let masks_dir = out.join("masks");
    std::fs::create_dir_all(&masks_dir).with_context(|| format!("creating {}", masks_dir.display()))?;

    let mut progress = Progress::new("refine");
    let mut refined = Vec::with_capacity(read.records.len());
    for (chunk_index, chunk) in read.records.chunks(Progress::EVERY as usize).enumerate() {
        let base = chunk_index * Progress::EVERY as usize;
        let outcomes: Vec<Outcome> = chunk
            .par_iter()
            .enumerate()
            .map(|(i, rec)| refine_one(base + i, rec, &cfg.refine, &masks_dir))
            .collect::<Result<_>>()?;
        for o in outcomes {
            if let Some(d) = &o.diagnostic {
                eprintln!("{d}");
            }
            let class = Some(o.record.candidate.class_id);
            match &o.record.refine_reject {
                Some(reason) => report.reject(class, reason),
                None => report.accept(class),
            }
            refined.push(o.record);
        }
        progress.advance(chunk.len() as u64);
    }

    write_jsonl(&out.join(MANIFEST_NAME), &refined)?;
    report.finish();
    report.write(&out.join(REPORT_NAME))?;
    Ok(report)
}

pub fn mask_file_name(index: usize, record_id: &str) -> String {
    format!("{index:06}_{}.png", sanitize(record_id))
}

fn refine_one(index: usize, rec: &CandidateRecord, cfg: &RefineConfig, masks_dir: &Path) -> Result<Outcome> {
    let reject = |reason: &str, diagnostic: Option<String>| Outcome {
        record: RefinedRecord { candidate: rec.clone(), mask_path: None, refine_reject: Some(reason.to_owned()) },
        diagnostic,
    };
    let map = match decode_graymap(Path::new(&rec.raw_map_path)) {
        Ok(m) => m,
        Err(e) => return Ok(reject("unreadable_input", Some(format!("{}: {e}", rec.record_id)))),
    };
    match image_dimensions(Path::new(&rec.image_path)) {
        Ok(dims) if dims == (map.width(), map.height()) => {}
        Ok((w, h)) => {
            let msg = format!("{}: image is {w}x{h} but map is {}x{}", rec.record_id, map.width(), map.height());
            return Ok(reject("dimension_mismatch", Some(msg)));
        }
        Err(e) => return Ok(reject("unreadable_input", Some(format!("{}: {e}", rec.record_id)))),
    }
    let mask = match refine_segment(&map, cfg) {
        Ok(m) => m,
        Err(RefineError::ConstantMap) => return Ok(reject("constant_map", None)),
        Err(e) => return Err(e.into()),
    };
    if mask.is_empty() {
        return Ok(reject("empty_mask", None));
    }
    let path: PathBuf = masks_dir.join(mask_file_name(index, &rec.record_id));
    encode_mask_png(&mask, &path)?;
    Ok(Outcome {
        record: RefinedRecord {
            candidate: rec.clone(),
            mask_path: Some(path.to_string_lossy().into_owned()),
            refine_reject: None,
        },
        diagnostic: None,
    })
}
