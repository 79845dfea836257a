use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use freeseg_core::ingest::{
    load_backgrounds, load_kept_segments, png_bytes, read_class_map, read_coco, read_scored_manifest, write_coco,
    CocoSceneWriter, PipelineConfig,
};
use freeseg_core::synth::{PastePolicy, SynthScene, SynthStats, Synthesizer};
use serde::Serialize;

use crate::report::{Progress, RunReport, Stage};
use crate::workers;

pub const ANNOTATIONS_NAME: &str = "annotations.json";
pub const STATS_NAME: &str = "synth_stats.json";
pub const REPORT_NAME: &str = "synth_report.json";

#[derive(Debug, Clone)]
pub struct SynthInputs {
    pub manifest: PathBuf,
    pub backgrounds: PathBuf,
    pub background_images: PathBuf,
    pub count: u64,
}

#[derive(Debug, Serialize)]
struct Sidecar<'a> {
    seed: u64,
    count: u64,
    backgrounds: usize,
    segments: usize,
    policy: &'a PastePolicy,
    stats: &'a SynthStats,
}

pub fn image_file_name(index: u64) -> String {
    format!("images/{index:06}.png")
}

/// Generates `count` scenes into `out/images`, with `annotations.json`, a
/// stats sidecar and a report.
pub fn cmd_synth(inputs: &SynthInputs, cfg: &PipelineConfig, out: &Path) -> Result<RunReport> {
    let mut report = RunReport::start(Stage::Synth);
    let coco = read_coco(&inputs.backgrounds)?;
    for d in &coco.diagnostics {
        eprintln!("{}: {d}", inputs.backgrounds.display());
    }
    let backgrounds = load_backgrounds(&coco.dataset, &inputs.background_images)?;
    for d in &backgrounds.diagnostics {
        eprintln!("{d}");
    }

    let scored = read_scored_manifest(&inputs.manifest)?;
    for d in &scored.diagnostics {
        eprintln!("{}: {d}", inputs.manifest.display());
    }
    let class_map = cfg.io.class_map.as_deref().map(read_class_map).transpose()?;
    let segments = load_kept_segments(&scored.records, class_map.as_ref())?;
    for d in &segments.diagnostics {
        eprintln!("{d}");
    }
    if segments.items.is_empty() {
        bail!("no usable kept segments in {}", inputs.manifest.display());
    }

    let synth = Synthesizer::new(&backgrounds.items, &segments.items, &cfg.synth)?;
    let images_dir = out.join("images");
    std::fs::create_dir_all(&images_dir).with_context(|| format!("creating {}", images_dir.display()))?;

    let names: BTreeMap<u64, String> = coco.dataset.categories.iter().map(|c| (c.id, c.name.clone())).collect();
    let mut writer = CocoSceneWriter::new(names);
    let mut stats = SynthStats::default();
    let mut progress = Progress::new("synth");
    synth.run(
        inputs.count,
        workers(cfg),
        |scene| (png_bytes(&scene.image), scene),
        |(png, scene): (Vec<u8>, SynthScene)| -> Result<()> {
            let name = image_file_name(scene.index);
            let path = out.join(&name);
            std::fs::write(&path, png).with_context(|| format!("writing {}", path.display()))?;
            writer.push(&scene, name);
            stats.record(&scene);
            for p in &scene.pastes {
                report.per_class_counts.entry(p.class_id).or_default().records_in += 1;
            }
            report.accept(None);
            progress.advance(1);
            Ok(())
        },
    )?;
    for (class, n) in &stats.pasted_per_class {
        report.per_class_counts.entry(*class).or_default().records_out = *n;
    }

    write_coco(&writer.finish(), &out.join(ANNOTATIONS_NAME))?;
    let sidecar = Sidecar {
        seed: cfg.synth.seed,
        count: inputs.count,
        backgrounds: backgrounds.items.len(),
        segments: segments.items.len(),
        policy: &cfg.synth,
        stats: &stats,
    };
    let mut text = serde_json::to_string_pretty(&sidecar)?;
    text.push('\n');
    std::fs::write(out.join(STATS_NAME), text)?;
    report.finish();
    report.write(&out.join(REPORT_NAME))?;
    Ok(report)
}
