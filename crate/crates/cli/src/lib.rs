//! The `freeseg` command-line driver.
//!
//! Stages exchange files: `refine` writes masks and `refined.jsonl`, `rank`
//! turns that into `scored.jsonl`, and `synth` pastes kept segments onto
//! COCO backgrounds. `viz` and `stats` inspect any of these outputs.

pub mod font;
pub mod overlay;
pub mod rank;
pub mod refine;
pub mod report;
pub mod stats;
pub mod synth;
pub mod viz;

use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use freeseg_core::ingest::PipelineConfig;

pub use report::{ClassCounts, Progress, RunReport, Stage};

#[derive(Debug, Parser)]
#[command(name = "freeseg", version, about = "Refine, rank and paste object segments")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct GlobalArgs {
    /// Pipeline config file (TOML)
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Root seed for synthesis
    #[arg(long, global = true, env = "FREESEG_SEED")]
    pub seed: Option<u64>,
    /// Worker threads (default: all cores)
    #[arg(long, global = true)]
    pub workers: Option<usize>,
    /// Output directory
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Raw co-segmentation maps to binary masks
    Refine {
        /// Candidate manifest (JSON lines)
        #[arg(long)]
        manifest: Option<PathBuf>,
    },
    /// Score refined masks against their boxes and filter
    Rank {
        /// Refined manifest written by `refine`
        #[arg(long)]
        manifest: Option<PathBuf>,
        #[arg(long)]
        score_threshold: Option<f64>,
        #[arg(long)]
        drop_threshold: Option<f64>,
    },
    /// Paste kept segments onto backgrounds
    Synth {
        /// Scored manifest written by `rank`
        #[arg(long)]
        manifest: Option<PathBuf>,
        /// COCO-style background annotations
        #[arg(long)]
        backgrounds: Option<PathBuf>,
        /// Directory the background `file_name`s are relative to
        #[arg(long)]
        background_images: Option<PathBuf>,
        /// Number of scenes
        #[arg(long, default_value_t = 1)]
        count: u64,
    },
    /// Overlay masks and boxes for a COCO file or a scored manifest
    Viz {
        input: PathBuf,
        /// Image directory for COCO input (default: the file's directory)
        #[arg(long)]
        images: Option<PathBuf>,
        /// Maximum number of overlays
        #[arg(long)]
        limit: Option<usize>,
        /// Outline boxes on COCO overlays
        #[arg(long)]
        boxes: bool,
    },
    /// Counts by class, source and verdict over scored manifests
    Stats {
        #[arg(required = true)]
        manifests: Vec<PathBuf>,
    },
}

/// Config file, then environment, then flags.
pub fn resolve_config(global: &GlobalArgs) -> Result<PipelineConfig> {
    let mut cfg = PipelineConfig::load(global.config.as_deref())?;
    if let Some(seed) = global.seed {
        cfg.synth.seed = seed;
    }
    if let Some(w) = global.workers {
        cfg.io.workers = Some(w);
    }
    if let Some(out) = &global.out {
        cfg.io.out_dir = Some(out.clone());
    }
    cfg.validate()?;
    Ok(cfg)
}

pub fn workers(cfg: &PipelineConfig) -> usize {
    cfg.io.workers.unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
}

pub fn out_dir(cfg: &PipelineConfig) -> PathBuf {
    cfg.io.out_dir.clone().unwrap_or_else(|| PathBuf::from("out"))
}

fn required(flag: Option<PathBuf>, fallback: &Option<PathBuf>, what: &str) -> Result<PathBuf> {
    flag.or_else(|| fallback.clone())
        .with_context(|| format!("no {what} given (flag, config io section, or environment)"))
}

pub fn run(cli: Cli) -> Result<RunReport> {
    let mut cfg = resolve_config(&cli.global)?;
    let pool = rayon::ThreadPoolBuilder::new().num_threads(workers(&cfg)).build()?;
    let out = out_dir(&cfg);
    match cli.command {
        Command::Refine { manifest } => {
            let manifest = required(manifest, &cfg.io.manifest, "manifest")?;
            pool.install(|| refine::cmd_refine(&manifest, &cfg, &out))
        }
        Command::Rank { manifest, score_threshold, drop_threshold } => {
            let manifest = required(manifest, &cfg.io.manifest, "manifest")?;
            if let Some(s) = score_threshold {
                cfg.rank.score = s;
            }
            if let Some(d) = drop_threshold {
                cfg.rank.drop = d;
            }
            cfg.validate()?;
            pool.install(|| rank::cmd_rank(&manifest, &cfg, &out))
        }
        Command::Synth { manifest, backgrounds, background_images, count } => {
            let manifest = required(manifest, &cfg.io.manifest, "scored manifest")?;
            let backgrounds = required(backgrounds, &cfg.io.backgrounds, "backgrounds file")?;
            let images = background_images
                .or_else(|| cfg.io.background_images.clone())
                .unwrap_or_else(|| parent_dir(&backgrounds));
            let inputs = synth::SynthInputs { manifest, backgrounds, background_images: images, count };
            pool.install(|| synth::cmd_synth(&inputs, &cfg, &out))
        }
        Command::Viz { input, images, limit, boxes } => {
            let images = images.unwrap_or_else(|| parent_dir(&input));
            let opts = viz::VizOptions { images_dir: images, limit, boxes };
            pool.install(|| viz::cmd_viz(&input, &opts, &out))
        }
        Command::Stats { manifests } => {
            let out = cli.global.out.as_deref().or(cfg.io.out_dir.as_deref());
            let (report, table) = stats::cmd_stats(&manifests, out)?;
            print!("{table}");
            Ok(report)
        }
    }
}

fn parent_dir(p: &Path) -> PathBuf {
    match p.parent() {
        Some(d) if !d.as_os_str().is_empty() => d.to_owned(),
        _ => PathBuf::from("."),
    }
}

/// File-name-safe form of a record id.
pub fn sanitize(id: &str) -> String {
    id.chars()
        .map(|c| if c.is_ascii_alphanumeric() || matches!(c, '-' | '_' | '.') { c } else { '_' })
        .take(80)
        .collect()
}
