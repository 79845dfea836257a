#![allow(dead_code)]

use std::path::{Path, PathBuf};

use freeseg_core::ingest::{encode_mask_png, write_jsonl, CandidateRecord, RefinedRecord, ScoredRecord, SourceTag};
use freeseg_core::rle::rle_encode;
use freeseg_core::BinaryMask;
use image::{GrayImage, Luma, Rgb, RgbImage};

pub fn path_str(p: &Path) -> String {
    p.to_string_lossy().into_owned()
}

pub fn candidate(id: &str, class_id: u64, dir: &Path, bbox: [i64; 4], conf: (f64, f64), tag: SourceTag) -> CandidateRecord {
    let stem = id.replace('/', "_");
    CandidateRecord {
        record_id: id.into(),
        class_id,
        image_path: path_str(&dir.join(format!("{stem}.png"))),
        raw_map_path: path_str(&dir.join(format!("{stem}_map.png"))),
        bbox,
        conf_before: conf.0,
        conf_after: conf.1,
        source_tag: tag,
    }
}

/// Writes the candidate's image and raw map files.
pub fn write_inputs(c: &CandidateRecord, map: &GrayImage) {
    let (w, h) = map.dimensions();
    RgbImage::from_fn(w, h, |x, y| Rgb([(x * 7) as u8, (y * 5) as u8, 128])).save(&c.image_path).unwrap();
    map.save(&c.raw_map_path).unwrap();
}

pub fn disk_map(w: u32, h: u32, cx: f64, cy: f64, r: f64) -> GrayImage {
    GrayImage::from_fn(w, h, |x, y| {
        let wobble = ((x * 13 + y * 29) % 21) as i32 - 10;
        let base = if (x as f64 - cx).hypot(y as f64 - cy) < r { 220 } else { 30 };
        Luma([(base + wobble) as u8])
    })
}

/// The three-record pool: scores 0.625/0.9, 0.625/0.4 and 0.5/0.9.
pub fn fixture_pool(dir: &Path) -> PathBuf {
    let m8 = BinaryMask::from_fn(10, 10, |x, y| (x < 3 && (1..3).contains(&y)) || (x < 2 && y == 3));
    let m4 = BinaryMask::from_fn(10, 10, |x, y| (1..3).contains(&x) && y < 2);
    let specs = [
        ("a", &m8, [0, 0, 4, 3], (1.0, 0.1)),
        ("b", &m8, [0, 0, 4, 3], (1.0, 0.6)),
        ("c", &m4, [2, 0, 2, 2], (1.0, 0.1)),
    ];
    let mut records = Vec::new();
    for (id, mask, bbox, conf) in specs {
        let c = candidate(id, 5, dir, bbox, conf, SourceTag::Imagenet);
        RgbImage::from_pixel(10, 10, Rgb([40, 40, 40])).save(&c.image_path).unwrap();
        let mask_path = dir.join(format!("{id}_mask.png"));
        encode_mask_png(mask, &mask_path).unwrap();
        records.push(RefinedRecord { candidate: c, mask_path: Some(path_str(&mask_path)), refine_reject: None });
    }
    let manifest = dir.join("refined.jsonl");
    write_jsonl(&manifest, &records).unwrap();
    manifest
}

pub fn scored(id: &str, class_id: u64, tag: SourceTag, kept: bool, reason: Option<&str>) -> ScoredRecord {
    ScoredRecord {
        candidate: candidate(id, class_id, Path::new("/nonexistent"), [0, 0, 1, 1], (0.9, 0.1), tag),
        mask_path: kept.then(|| format!("/nonexistent/{id}_mask.png")),
        iou: 0.5,
        iob: 0.5,
        iom: 0.5,
        freeseg_score: 0.5,
        drop_rate: Some(0.888889),
        kept,
        reject_reason: reason.map(str::to_owned),
    }
}

/// A background set: `n` flat images of `w`x`h` each with one native square.
pub fn write_backgrounds(dir: &Path, n: u64, w: u32, h: u32) -> PathBuf {
    let mut images = Vec::new();
    let mut annotations = Vec::new();
    for i in 0..n {
        let name = format!("bg{i}.png");
        RgbImage::from_fn(w, h, |x, y| Rgb([(x % 256) as u8, (y % 256) as u8, (i * 40) as u8])).save(dir.join(&name)).unwrap();
        images.push(serde_json::json!({"id": i + 1, "file_name": name, "width": w, "height": h}));
        let mask = BinaryMask::from_fn(w, h, |x, y| x >= w / 4 && x < w / 2 && y >= h / 4 && y < h / 2);
        let rle = rle_encode(&mask);
        annotations.push(serde_json::json!({
            "id": i + 1, "image_id": i + 1, "category_id": 1,
            "segmentation": {"size": [h, w], "counts": rle.counts},
            "area": mask.area(), "bbox": [w / 4, h / 4, w / 2 - w / 4, h / 2 - h / 4], "iscrowd": 0
        }));
    }
    let doc = serde_json::json!({
        "images": images, "annotations": annotations,
        "categories": [{"id": 1, "name": "table"}, {"id": 7, "name": "puffin"}]
    });
    let path = dir.join("backgrounds.json");
    std::fs::write(&path, serde_json::to_string(&doc).unwrap()).unwrap();
    path
}

/// A scored manifest of `n` kept segments with images and masks on disk.
pub fn write_kept_segments(dir: &Path, n: usize, size: u32) -> PathBuf {
    let mut records = Vec::new();
    for i in 0..n {
        let id = format!("seg{i}");
        let mut r = scored(&id, 7, SourceTag::Imagenet, true, None);
        let img = dir.join(format!("{id}.png"));
        RgbImage::from_pixel(size, size, Rgb([255, (i * 50) as u8, 0])).save(&img).unwrap();
        let c = f64::from(size) / 2.0;
        let mask = BinaryMask::from_fn(size, size, |x, y| (f64::from(x) - c).hypot(f64::from(y) - c) < c * 0.8);
        let mask_path = dir.join(format!("{id}_mask.png"));
        encode_mask_png(&mask, &mask_path).unwrap();
        r.candidate.image_path = path_str(&img);
        r.mask_path = Some(path_str(&mask_path));
        records.push(r);
    }
    let path = dir.join("scored.jsonl");
    write_jsonl(&path, &records).unwrap();
    path
}

/// Every regular file under `dir` with its bytes, sorted by relative path,
/// skipping run reports (they carry wall-clock time).
pub fn snapshot(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut out = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in std::fs::read_dir(&d).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else if !p.to_string_lossy().ends_with("_report.json") {
                let rel = p.strip_prefix(dir).unwrap().to_string_lossy().into_owned();
                out.push((rel, std::fs::read(&p).unwrap()));
            }
        }
    }
    out.sort();
    out
}
