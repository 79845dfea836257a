//! Reading and writing everything the pipeline exchanges with the outside:
//! JSON-lines manifests, COCO-style annotation files, images and the
//! pipeline configuration.

mod catalog;
mod coco;
mod config;
mod image_io;
mod manifest;
mod numbers;

use std::path::{Path, PathBuf};

use thiserror::Error;

pub use catalog::{load_backgrounds, load_kept_segments, CatalogRead, CocoSceneWriter};
pub use coco::{
    parse_coco, read_coco, read_json_value, write_coco, CocoAnnotation, CocoCategory, CocoDataset, CocoImage, CocoRead,
    RleCounts, RleSegmentation, Segmentation,
};
pub use config::{
    read_class_map, IoConfig, PipelineConfig, ENV_BACKGROUNDS, ENV_BACKGROUND_IMAGES, ENV_MANIFEST, ENV_OUT, ENV_SEED,
};
pub use image_io::{decode_graymap, decode_image, decode_mask, encode_mask_png, encode_png, image_dimensions, luma, png_bytes};
pub use manifest::{
    read_candidate_manifest, read_jsonl, read_refined_manifest, read_scored_manifest, write_candidate_manifest, write_jsonl,
    CandidateRecord, LineDiagnostic, ManifestRead, RefinedRecord, ScoredRecord, SourceTag,
};
pub use numbers::{opt_number, opt_number_array, opt_sig6, round_sig, sig6};

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{}: invalid JSON: {message}", path.display())]
    Json { path: PathBuf, message: String },
    #[error("{}: {message}", path.display())]
    Image { path: PathBuf, message: String },
    #[error("{}: {message}", path.display())]
    Config { path: PathBuf, message: String },
}

impl IngestError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        IngestError::Io { path: path.to_owned(), source }
    }
}
