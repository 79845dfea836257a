use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use freeseg_core::ingest::{decode_image, decode_mask, encode_png, read_coco, read_scored_manifest, round_sig, ScoredRecord};
use freeseg_core::bbox_of;
use image::RgbImage;
use serde_json::Value;

use crate::overlay::{caption, outline_box, tint_mask, NATIVE_TINTS, PASTED_TINTS};
use crate::report::{RunReport, Stage};
use crate::sanitize;

pub const CAPTIONS_NAME: &str = "captions.tsv";
pub const REPORT_NAME: &str = "viz_report.json";

#[derive(Debug, Clone)]
pub struct VizOptions {
    /// Directory COCO `file_name`s are relative to.
    pub images_dir: PathBuf,
    pub limit: Option<usize>,
    pub boxes: bool,
}

/// Writes overlays for a COCO file or, for `.jsonl` input, a scored manifest.
pub fn cmd_viz(input: &Path, opts: &VizOptions, out: &Path) -> Result<RunReport> {
    std::fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    let is_manifest = matches!(input.extension().and_then(|e| e.to_str()), Some("jsonl" | "ndjson"));
    let mut report = RunReport::start(Stage::Viz);
    if is_manifest {
        viz_manifest(input, opts, out, &mut report)?;
    } else {
        viz_coco(input, opts, out, &mut report)?;
    }
    report.finish();
    report.write(&out.join(REPORT_NAME))?;
    Ok(report)
}

fn viz_coco(input: &Path, opts: &VizOptions, out: &Path, report: &mut RunReport) -> Result<()> {
    let read = read_coco(input)?;
    for d in &read.diagnostics {
        eprintln!("{}: {d}", input.display());
    }
    let ds = read.dataset;
    let mut by_image: BTreeMap<u64, Vec<usize>> = BTreeMap::new();
    for (i, a) in ds.annotations.iter().enumerate() {
        by_image.entry(a.image_id).or_default().push(i);
    }
    let limit = opts.limit.unwrap_or(usize::MAX);
    for (index, img) in ds.images.iter().take(limit).enumerate() {
        let path = opts.images_dir.join(&img.file_name);
        let mut canvas = match decode_image(&path) {
            Ok(c) => c,
            Err(e) => {
                eprintln!("image {}: {e}", img.id);
                report.reject(None, "missing_image");
                continue;
            }
        };
        let (mut native, mut pasted) = (0usize, 0usize);
        for &ai in by_image.get(&img.id).map(Vec::as_slice).unwrap_or(&[]) {
            let a = &ds.annotations[ai];
            let Some(mask) = a.rle().and_then(|r| r.to_mask().ok()) else { continue };
            if mask.dims() != canvas.dimensions() {
                eprintln!("annotation {} (image {}): mask size differs from image", a.id, img.id);
                continue;
            }
            let is_pasted = a.extra.get("source") == Some(&Value::from("pasted"));
            let tint = if is_pasted {
                pasted += 1;
                PASTED_TINTS[(pasted - 1) % PASTED_TINTS.len()]
            } else {
                native += 1;
                NATIVE_TINTS[(native - 1) % NATIVE_TINTS.len()]
            };
            tint_mask(&mut canvas, &mask, tint);
            if opts.boxes {
                if let Ok(b) = bbox_of(&mask) {
                    outline_box(&mut canvas, &b, tint);
                }
            }
        }
        encode_png(&canvas, &out.join(format!("{index:06}.png")))?;
        report.accept(None);
    }
    Ok(())
}

pub fn score_caption(r: &ScoredRecord) -> String {
    let drop = r.drop_rate.map_or_else(|| "none".to_owned(), |d| round_sig(d, 6).to_string());
    let verdict = match (&r.reject_reason, r.kept) {
        (_, true) => "kept".to_owned(),
        (Some(reason), false) => reason.clone(),
        (None, false) => "rejected".to_owned(),
    };
    format!("score {} drop {} {}", round_sig(r.freeseg_score, 6), drop, verdict)
}

fn viz_manifest(input: &Path, opts: &VizOptions, out: &Path, report: &mut RunReport) -> Result<()> {
    let read = read_scored_manifest(input)?;
    for d in &read.diagnostics {
        eprintln!("{}: {d}", input.display());
    }
    let mut captions = String::from("file\trecord_id\tcaption\n");
    let limit = opts.limit.unwrap_or(usize::MAX);
    for (index, r) in read.records.iter().take(limit).enumerate() {
        let c = &r.candidate;
        let mut canvas: RgbImage = match decode_image(Path::new(&c.image_path)) {
            Ok(i) => i,
            Err(e) => {
                eprintln!("{}: {e}", c.record_id);
                report.reject(Some(c.class_id), "missing_image");
                continue;
            }
        };
        if let Some(mp) = &r.mask_path {
            match decode_mask(Path::new(mp)) {
                Ok(m) if m.dims() == canvas.dimensions() => tint_mask(&mut canvas, &m, PASTED_TINTS[0]),
                Ok(_) => eprintln!("{}: mask size differs from image", c.record_id),
                Err(e) => eprintln!("{}: {e}", c.record_id),
            }
        }
        let bbox = c.clamped_box(canvas.width(), canvas.height());
        outline_box(&mut canvas, &bbox, NATIVE_TINTS[0]);
        let text = score_caption(r);
        caption(&mut canvas, &text);
        let name = format!("{index:06}_{}.png", sanitize(&c.record_id));
        encode_png(&canvas, &out.join(&name))?;
        let _ = writeln!(captions, "{name}\t{}\t{text}", c.record_id);
        report.accept(Some(c.class_id));
    }
    std::fs::write(out.join(CAPTIONS_NAME), captions)?;
    Ok(())
}
