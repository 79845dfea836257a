//! Copy-paste synthesis: kept segments composited onto scene backgrounds
//! with occlusion-consistent annotations.

mod generate;
mod policy;
mod scene;
mod transform;

use thiserror::Error;

pub use generate::{scene_rng, synthesize, Background, NativeAnnotation, SegmentSource, SynthStats, Synthesizer};
pub use policy::PastePolicy;
pub use scene::{AnnotationSource, OcclusionRule, PasteRecord, SceneAnnotation, SceneStats, SynthScene};
pub use transform::{
    apply_paste_draw, background_target_size, draw_paste, flip_image, resize_image, scaled_size, transform_background,
    transform_paste, PasteDraw,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SynthError {
    #[error("paste left no visible mask pixels on the canvas")]
    DegeneratePaste,
    #[error("raster dimensions differ: {0}x{1} vs {2}x{3}")]
    DimensionMismatch(u32, u32, u32, u32),
    #[error("{0} catalog is empty")]
    EmptyCatalog(&'static str),
    #[error("invalid paste policy: {0}")]
    InvalidPolicy(String),
}
