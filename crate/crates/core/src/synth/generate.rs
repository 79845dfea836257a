use std::collections::BTreeMap;

use image::RgbImage;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::raster::BinaryMask;

use super::scene::{OcclusionRule, SceneStats, SynthScene};
use super::transform::{apply_paste_draw, draw_paste, transform_background};
use super::{PastePolicy, SynthError};

/// An instance annotation that ships with a background image.
#[derive(Debug, Clone, PartialEq)]
pub struct NativeAnnotation {
    pub class_id: u64,
    pub mask: BinaryMask,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Background {
    pub id: u64,
    pub image: RgbImage,
    pub annotations: Vec<NativeAnnotation>,
}

/// A kept segment together with its object-centric source image.
#[derive(Debug, Clone, PartialEq)]
pub struct SegmentSource {
    pub record_id: String,
    pub class_id: u64,
    pub image: RgbImage,
    pub mask: BinaryMask,
}

/// Per-scene random stream: the root seed keys a ChaCha8 generator and the
/// scene index selects its stream, so scenes are independent of one
/// another and of generation order.
pub fn scene_rng(seed: u64, scene_index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(scene_index);
    rng
}

/// Totals over a synthesis run.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SynthStats {
    pub scenes: u64,
    pub pastes_requested: u64,
    pub pastes_placed: u64,
    pub pastes_skipped: u64,
    pub degenerate_redraws: u64,
    pub native_lost_in_resize: u64,
    pub native_dropped: u64,
    pub pasted_dropped: u64,
    pub annotations_emitted: u64,
    /// Surviving pasted annotations per class.
    pub pasted_per_class: BTreeMap<u64, u64>,
}

impl SynthStats {
    pub fn record(&mut self, scene: &SynthScene) {
        let s: &SceneStats = &scene.stats;
        self.scenes += 1;
        self.pastes_requested += s.pastes_requested;
        self.pastes_placed += s.pastes_placed;
        self.pastes_skipped += s.pastes_skipped;
        self.degenerate_redraws += s.degenerate_redraws;
        self.native_lost_in_resize += s.native_lost_in_resize;
        self.native_dropped += s.native_dropped;
        self.pasted_dropped += s.pasted_dropped;
        self.annotations_emitted += scene.annotations.len() as u64;
        for a in scene.annotations.iter().filter(|a| a.paste_index.is_some()) {
            *self.pasted_per_class.entry(a.class_id).or_default() += 1;
        }
    }
}

pub struct Synthesizer<'a> {
    backgrounds: &'a [Background],
    segments: &'a [SegmentSource],
    policy: &'a PastePolicy,
    by_class: Vec<Vec<usize>>,
}

impl<'a> Synthesizer<'a> {
    pub fn new(backgrounds: &'a [Background], segments: &'a [SegmentSource], policy: &'a PastePolicy) -> Result<Self, SynthError> {
        policy.validate()?;
        if backgrounds.is_empty() {
            return Err(SynthError::EmptyCatalog("backgrounds"));
        }
        if segments.is_empty() {
            return Err(SynthError::EmptyCatalog("segments"));
        }
        for s in segments {
            if s.image.dimensions() != s.mask.dims() {
                let (w, h) = s.image.dimensions();
                return Err(SynthError::DimensionMismatch(w, h, s.mask.width(), s.mask.height()));
            }
        }
        let mut groups: BTreeMap<u64, Vec<usize>> = BTreeMap::new();
        for (i, s) in segments.iter().enumerate() {
            groups.entry(s.class_id).or_default().push(i);
        }
        Ok(Self { backgrounds, segments, policy, by_class: groups.into_values().collect() })
    }

    fn pick_segment(&self, rng: &mut ChaCha8Rng) -> usize {
        if self.policy.balance_classes {
            let group = &self.by_class[rng.gen_range(0..self.by_class.len())];
            group[rng.gen_range(0..group.len())]
        } else {
            rng.gen_range(0..self.segments.len())
        }
    }

    /// Generates scene `index`. The result depends only on the seed, the
    /// index, the catalogs and the policy.
    ///
    /// Draw order: background, background transform, paste count, the
    /// segments for every slot, then each slot's transform attempts.
    pub fn scene(&self, index: u64) -> SynthScene {
        let policy = self.policy;
        let mut rng = scene_rng(policy.seed, index);
        let bg = &self.backgrounds[rng.gen_range(0..self.backgrounds.len())];
        let (image, natives) = transform_background(&bg.image, &bg.annotations, policy, &mut rng);
        let lost = (bg.annotations.len() - natives.len()) as u64;
        let mut scene = SynthScene::new(index, bg.id, image, natives).expect("transformed masks match the image");
        scene.stats.native_lost_in_resize = lost;

        let [lo, hi] = policy.n_range;
        let n = rng.gen_range(lo..=hi);
        let picks: Vec<usize> = (0..n).map(|_| self.pick_segment(&mut rng)).collect();
        scene.stats.pastes_requested = u64::from(n);

        let rule = OcclusionRule {
            min_visible_fraction: policy.min_visible_fraction,
            min_visible_pixels: policy.min_visible_pixels,
        };
        let (tw, th) = (scene.width(), scene.height());
        for pick in picks {
            let seg = &self.segments[pick];
            let mut placed = false;
            for _ in 0..policy.max_paste_attempts {
                let draw = draw_paste(seg.mask.width(), seg.mask.height(), tw, th, policy, &mut rng);
                match apply_paste_draw(&seg.image, &seg.mask, tw, th, &draw, policy.min_visible_pixels) {
                    Ok((patch, mask)) => {
                        scene
                            .paste(&seg.record_id, &patch, &mask, seg.class_id, &rule)
                            .expect("patch sized to the scene");
                        placed = true;
                        break;
                    }
                    Err(_) => scene.stats.degenerate_redraws += 1,
                }
            }
            if !placed {
                scene.stats.pastes_skipped += 1;
            }
        }
        scene
    }

    /// Generates scenes `0..count` on `workers` threads, maps each through
    /// `map` in parallel, and hands the results to `sink` in index order.
    pub fn run<T, E>(
        &self,
        count: u64,
        workers: usize,
        map: impl Fn(SynthScene) -> T + Sync,
        mut sink: impl FnMut(T) -> Result<(), E>,
    ) -> Result<(), E>
    where
        T: Send,
    {
        let workers = workers.max(1);
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build()
            .expect("thread pool");
        let chunk = (workers as u64 * 4).max(8);
        let mut start = 0;
        while start < count {
            let end = (start + chunk).min(count);
            let batch: Vec<T> = pool.install(|| (start..end).into_par_iter().map(|i| map(self.scene(i))).collect());
            for item in batch {
                sink(item)?;
            }
            start = end;
        }
        Ok(())
    }
}

/// Convenience wrapper: collects `count` scenes in index order.
pub fn synthesize(
    backgrounds: &[Background],
    segments: &[SegmentSource],
    policy: &PastePolicy,
    count: u64,
) -> Result<Vec<SynthScene>, SynthError> {
    let synth = Synthesizer::new(backgrounds, segments, policy)?;
    let mut out = Vec::with_capacity(count as usize);
    synth.run(count, rayon::current_num_threads(), |s| s, |s| {
        out.push(s);
        Ok::<_, SynthError>(())
    })?;
    Ok(out)
}
