mod common;

use std::path::Path;
use std::process::Command;

use clap::Parser;
use common::*;
use freeseg_cli::{run, Cli, RunReport};
use freeseg_core::ingest::{
    read_coco, read_refined_manifest, read_scored_manifest, write_candidate_manifest, write_jsonl, CocoDataset,
    SourceTag,
};
use freeseg_core::rle::rle_encode;
use freeseg_core::BinaryMask;
use image::{GrayImage, Luma, Rgb, RgbImage};

fn cli(args: &[&str]) -> anyhow::Result<RunReport> {
    let mut full = vec!["freeseg"];
    full.extend_from_slice(args);
    run(Cli::try_parse_from(full).unwrap())
}

fn s(p: &Path) -> String {
    path_str(p)
}

fn pngs(dir: &Path) -> usize {
    snapshot(dir).iter().filter(|(name, _)| name.ends_with(".png")).count()
}

#[test]
fn refine_empty_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = dir.path().join("empty.jsonl");
    std::fs::write(&manifest, "").unwrap();
    let out = dir.path().join("out");
    let report = cli(&["refine", "--manifest", &s(&manifest), "--out", &s(&out)]).unwrap();
    assert_eq!((report.records_in, report.records_out, report.rejected()), (0, 0, 0));
    assert_eq!(std::fs::read_to_string(out.join("refined.jsonl")).unwrap(), "");
    assert_eq!(pngs(&out), 0);
}

#[test]
fn refine_constant_map_is_a_reject_not_a_failure() {
    let dir = tempfile::tempdir().unwrap();
    let c = candidate("flat", 3, dir.path(), [0, 0, 8, 8], (0.9, 0.1), SourceTag::Other);
    write_inputs(&c, &GrayImage::from_pixel(16, 16, Luma([90])));
    let manifest = dir.path().join("m.jsonl");
    write_candidate_manifest(&manifest, &[c]).unwrap();
    let out = dir.path().join("out");
    let report = cli(&["refine", "--manifest", &s(&manifest), "--out", &s(&out)]).unwrap();
    assert_eq!(report.records_out, 0);
    assert_eq!(report.rejects_by_reason.get("constant_map"), Some(&1));
    assert_eq!(pngs(&out), 0);
    let refined = read_refined_manifest(&out.join("refined.jsonl")).unwrap();
    assert_eq!(refined.records[0].refine_reject.as_deref(), Some("constant_map"));
}

#[test]
fn refine_writes_masks_and_is_repeatable() {
    let dir = tempfile::tempdir().unwrap();
    let mut records = Vec::new();
    for (i, r) in [14.0, 20.0, 25.0].into_iter().enumerate() {
        let c = candidate(&format!("n0144/{i}"), i as u64, dir.path(), [10, 10, 40, 40], (0.9, 0.2), SourceTag::Imagenet);
        write_inputs(&c, &disk_map(64, 60, 32.0, 30.0, r));
        records.push(c);
    }
    let mut mismatched = candidate("odd", 9, dir.path(), [0, 0, 4, 4], (0.9, 0.2), SourceTag::Google);
    write_inputs(&mismatched, &disk_map(20, 20, 10.0, 10.0, 5.0));
    RgbImage::new(21, 20).save(&mismatched.image_path).unwrap();
    records.push(mismatched.clone());
    mismatched.record_id = "missing".into();
    mismatched.raw_map_path = s(&dir.path().join("nope.png"));
    records.push(mismatched);
    let manifest = dir.path().join("m.jsonl");
    write_candidate_manifest(&manifest, &records).unwrap();
    std::fs::write(&manifest, std::fs::read_to_string(&manifest).unwrap() + "{\"record_id\": 1}\n").unwrap();

    let out = dir.path().join("out");
    let report = cli(&["refine", "--manifest", &s(&manifest), "--out", &s(&out)]).unwrap();
    assert_eq!(report.records_in, 6);
    assert_eq!(report.records_out, 3);
    assert_eq!(report.rejects_by_reason.get("dimension_mismatch"), Some(&1));
    assert_eq!(report.rejects_by_reason.get("unreadable_input"), Some(&1));
    assert_eq!(report.rejects_by_reason.get("malformed_record"), Some(&1));
    assert!(out.join("masks/000000_n0144_0.png").exists());
    assert_eq!(pngs(&out), 3);

    let first = snapshot(&out);
    cli(&["refine", "--manifest", &s(&manifest), "--out", &s(&out), "--workers", "3"]).unwrap();
    assert_eq!(snapshot(&out), first);
    let report_json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("refine_report.json")).unwrap()).unwrap();
    assert_eq!(report_json["records_in"], 6);
}

#[test]
fn rank_fixture_pool_thresholds() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = fixture_pool(dir.path());
    let out = dir.path().join("out");
    let run_with = |score: &str, drop: &str| {
        cli(&["rank", "--manifest", &s(&manifest), "--out", &s(&out), "--score-threshold", score, "--drop-threshold", drop])
            .unwrap()
    };

    let report = run_with("0.5", "0.5");
    assert_eq!(report.records_out, 1);
    let scored = read_scored_manifest(&out.join("scored.jsonl")).unwrap().records;
    let kept: Vec<&str> = scored.iter().filter(|r| r.kept).map(|r| r.candidate.record_id.as_str()).collect();
    assert_eq!(kept, ["a"]);
    let reasons: Vec<_> = scored.iter().map(|r| r.reject_reason.as_deref()).collect();
    assert_eq!(reasons, [None, Some("low_drop_rate"), Some("low_score")]);
    assert_eq!(scored[0].freeseg_score, 0.625);
    assert_eq!(scored[2].freeseg_score, 0.5);

    assert_eq!(run_with("1.0", "1.0").records_out, 0);
    // Oracle: every record has score > 0 and drop rate > 0.
    let oracle = scored.iter().filter(|r| r.freeseg_score > 0.0 && r.drop_rate.unwrap() > 0.0).count() as u64;
    assert_eq!(run_with("0", "0").records_out, oracle);
    assert_eq!(oracle, 3);
}

#[test]
fn rank_passes_refine_rejects_through() {
    let dir = tempfile::tempdir().unwrap();
    let c = candidate("flat", 3, dir.path(), [0, 0, 8, 8], (0.9, 0.1), SourceTag::Other);
    let r = freeseg_core::ingest::RefinedRecord { candidate: c, mask_path: None, refine_reject: Some("constant_map".into()) };
    let manifest = dir.path().join("refined.jsonl");
    write_jsonl(&manifest, [&r]).unwrap();
    let out = dir.path().join("out");
    let report = cli(&["rank", "--manifest", &s(&manifest), "--out", &s(&out)]).unwrap();
    assert_eq!(report.rejects_by_reason.get("constant_map"), Some(&1));
    let scored = read_scored_manifest(&out.join("scored.jsonl")).unwrap().records;
    assert!(!scored[0].kept);
    assert!((scored[0].drop_rate.unwrap() - 0.888889).abs() < 1e-6);
}

#[test]
fn synth_writes_images_and_coco_in_index_order() {
    let dir = tempfile::tempdir().unwrap();
    let bgs = write_backgrounds(dir.path(), 2, 64, 48);
    let segs = write_kept_segments(dir.path(), 3, 30);
    let out = dir.path().join("out");
    let args = |workers: &'static str| {
        vec![
            "synth".to_string(),
            "--manifest".into(),
            s(&segs),
            "--backgrounds".into(),
            s(&bgs),
            "--count".into(),
            "3".into(),
            "--seed".into(),
            "17".into(),
            "--workers".into(),
            workers.into(),
            "--out".into(),
            s(&out),
        ]
    };
    let run_args = |a: Vec<String>| cli(&a.iter().map(String::as_str).collect::<Vec<_>>()).unwrap();
    let report = run_args(args("1"));
    assert_eq!((report.records_in, report.records_out), (3, 3));
    assert_eq!(pngs(&out.join("images")), 3);

    let read = read_coco(&out.join("annotations.json")).unwrap();
    assert!(read.diagnostics.is_empty());
    let ds: CocoDataset = read.dataset;
    let names: Vec<&str> = ds.images.iter().map(|i| i.file_name.as_str()).collect();
    assert_eq!(names, ["images/000000.png", "images/000001.png", "images/000002.png"]);
    for a in &ds.annotations {
        let rle = a.rle().unwrap().to_rle().unwrap();
        assert_eq!(a.area, Some(rle.area() as f64));
        assert_eq!(a.extra["iscrowd"], 0);
    }
    assert!(ds.annotations.iter().any(|a| a.extra["source"] == "pasted"));

    let first = snapshot(&out);
    run_args(args("4"));
    assert_eq!(snapshot(&out), first);
}

#[test]
fn synth_without_kept_segments_fails() {
    let dir = tempfile::tempdir().unwrap();
    let bgs = write_backgrounds(dir.path(), 1, 32, 32);
    let manifest = dir.path().join("scored.jsonl");
    write_jsonl(&manifest, [&scored("x", 1, SourceTag::Google, false, Some("low_score"))]).unwrap();
    let err = cli(&["synth", "--manifest", &s(&manifest), "--backgrounds", &s(&bgs), "--out", &s(&dir.path().join("o"))])
        .unwrap_err();
    assert!(err.to_string().contains("kept segments"), "{err}");
}

#[test]
fn viz_limit_zero_writes_no_overlays() {
    let dir = tempfile::tempdir().unwrap();
    let bgs = write_backgrounds(dir.path(), 2, 32, 32);
    let out = dir.path().join("viz");
    let report = cli(&["viz", &s(&bgs), "--limit", "0", "--out", &s(&out)]).unwrap();
    assert_eq!(report.records_in, 0);
    assert_eq!(pngs(&out), 0);
}

#[test]
fn viz_caption_echoes_score() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = fixture_pool(dir.path());
    let out = dir.path().join("ranked");
    cli(&["rank", "--manifest", &s(&manifest), "--out", &s(&out)]).unwrap();
    let viz = dir.path().join("viz");
    let report = cli(&["viz", &s(&out.join("scored.jsonl")), "--out", &s(&viz)]).unwrap();
    assert_eq!(report.records_out, 3);
    let captions = std::fs::read_to_string(viz.join("captions.tsv")).unwrap();
    let first = captions.lines().nth(1).unwrap();
    assert!(first.contains("0.625") && first.contains("kept"), "{first}");
    assert_eq!(pngs(&viz), 3);
}

#[test]
fn viz_two_annotations_give_two_tints() {
    let dir = tempfile::tempdir().unwrap();
    RgbImage::from_pixel(40, 30, Rgb([128, 128, 128])).save(dir.path().join("flat.png")).unwrap();
    let a = BinaryMask::from_fn(40, 30, |x, y| x < 10 && y < 10);
    let b = BinaryMask::from_fn(40, 30, |x, y| x > 20 && y > 15);
    let ann = |id: u64, m: &BinaryMask, source: &str| {
        serde_json::json!({"id": id, "image_id": 1, "category_id": 1, "source": source,
            "segmentation": {"size": [30, 40], "counts": rle_encode(m).counts}})
    };
    let doc = serde_json::json!({
        "images": [{"id": 1, "file_name": "flat.png", "width": 40, "height": 30}],
        "annotations": [ann(1, &a, "native"), ann(2, &b, "pasted")],
        "categories": [{"id": 1, "name": "x"}]
    });
    let coco = dir.path().join("scene.json");
    std::fs::write(&coco, doc.to_string()).unwrap();
    let out = dir.path().join("viz");
    cli(&["viz", &s(&coco), "--out", &s(&out)]).unwrap();
    let img = image::open(out.join("000000.png")).unwrap().into_rgb8();
    let mut colours: Vec<[u8; 3]> = img.pixels().map(|p| p.0).collect();
    colours.sort_unstable();
    colours.dedup();
    assert_eq!(colours.len(), 3, "background plus two tints: {colours:?}");
    assert_ne!(img.get_pixel(0, 0), img.get_pixel(39, 29));
}

#[test]
fn viz_reports_missing_images() {
    let dir = tempfile::tempdir().unwrap();
    let bgs = write_backgrounds(dir.path(), 2, 16, 16);
    std::fs::remove_file(dir.path().join("bg1.png")).unwrap();
    let report = cli(&["viz", &s(&bgs), "--out", &s(&dir.path().join("viz"))]).unwrap();
    assert_eq!((report.records_out, report.rejects_by_reason["missing_image"]), (1, 1));
}

#[test]
fn stats_rows_and_sums() {
    let dir = tempfile::tempdir().unwrap();
    let one = dir.path().join("one.jsonl");
    let records: Vec<_> = (0..5)
        .map(|i| scored(&format!("r{i}"), 1, SourceTag::Imagenet, i < 3, (i >= 3).then_some("low_score")))
        .collect();
    write_jsonl(&one, &records).unwrap();
    let (report, table) = freeseg_cli::stats::cmd_stats(std::slice::from_ref(&one), None).unwrap();
    assert_eq!((report.records_in, report.records_out), (5, 3));
    assert!(table.lines().any(|l| l.starts_with("total") && l.ends_with("5          3")), "{table}");

    let two = dir.path().join("two.jsonl");
    write_jsonl(&two, &records[..2]).unwrap();
    let summary = freeseg_cli::stats::summarize(&[one, two]).unwrap();
    assert_eq!((summary.total.collected, summary.total.selected), (7, 5));
}

#[test]
fn stats_source_split_matches_hand_count() {
    let dir = tempfile::tempdir().unwrap();
    // imagenet: r0 r1 r2 r3 (kept r0 r1); google: r4..r7 (kept r4 r5 r6); other: r8 r9 (kept none)
    let spec = [
        (SourceTag::Imagenet, true),
        (SourceTag::Imagenet, true),
        (SourceTag::Imagenet, false),
        (SourceTag::Imagenet, false),
        (SourceTag::Google, true),
        (SourceTag::Google, true),
        (SourceTag::Google, true),
        (SourceTag::Google, false),
        (SourceTag::Other, false),
        (SourceTag::Other, false),
    ];
    let records: Vec<_> = spec
        .iter()
        .enumerate()
        .map(|(i, &(tag, kept))| scored(&format!("r{i}"), i as u64 % 3, tag, kept, (!kept).then_some("low_drop_rate")))
        .collect();
    let path = dir.path().join("ten.jsonl");
    write_jsonl(&path, &records).unwrap();
    let out = dir.path().join("stats");
    let (report, _) = freeseg_cli::stats::cmd_stats(&[path], Some(&out)).unwrap();
    assert!(report.balanced());
    let json: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(out.join("stats.json")).unwrap()).unwrap();
    let src = &json["by_source"];
    assert_eq!((src["imagenet"]["collected"].as_u64(), src["imagenet"]["selected"].as_u64()), (Some(4), Some(2)));
    assert_eq!((src["google"]["collected"].as_u64(), src["google"]["selected"].as_u64()), (Some(4), Some(3)));
    assert_eq!((src["other"]["collected"].as_u64(), src["other"]["selected"].as_u64()), (Some(2), Some(0)));
    assert_eq!(json["by_verdict"]["low_drop_rate"], 5);
}

#[test]
fn binary_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let bin = env!("CARGO_BIN_EXE_freeseg");
    let missing = Command::new(bin)
        .args(["refine", "--manifest", "/no/such/manifest.jsonl", "--out"])
        .arg(dir.path().join("o"))
        .output()
        .unwrap();
    assert!(!missing.status.success());
    assert!(String::from_utf8_lossy(&missing.stderr).contains("/no/such/manifest.jsonl"));

    let manifest = fixture_pool(dir.path());
    let ok = Command::new(bin)
        .args(["rank", "--score-threshold", "1", "--drop-threshold", "1", "--manifest"])
        .arg(&manifest)
        .arg("--out")
        .arg(dir.path().join("o"))
        .output()
        .unwrap();
    assert!(ok.status.success(), "{}", String::from_utf8_lossy(&ok.stderr));

    let bad_config = dir.path().join("bad.toml");
    std::fs::write(&bad_config, "[rank]\nscore = 2.0\n").unwrap();
    let cfg = Command::new(bin).args(["rank", "--manifest"]).arg(&manifest).arg("--config").arg(&bad_config).output().unwrap();
    assert!(!cfg.status.success());
}

#[test]
fn env_seed_is_honoured() {
    let dir = tempfile::tempdir().unwrap();
    let bgs = write_backgrounds(dir.path(), 1, 40, 40);
    let segs = write_kept_segments(dir.path(), 2, 20);
    let bin = env!("CARGO_BIN_EXE_freeseg");
    let run_seed = |seed: &str, out: &str| {
        let st = Command::new(bin)
            .env("FREESEG_SEED", seed)
            .args(["synth", "--count", "2", "--manifest"])
            .arg(&segs)
            .arg("--backgrounds")
            .arg(&bgs)
            .arg("--out")
            .arg(dir.path().join(out))
            .status()
            .unwrap();
        assert!(st.success());
        std::fs::read_to_string(dir.path().join(out).join("synth_stats.json")).unwrap()
    };
    assert!(run_seed("99", "a").contains("\"seed\": 99"));
    assert!(run_seed("100", "b").contains("\"seed\": 100"));
}
