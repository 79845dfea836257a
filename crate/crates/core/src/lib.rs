//! Segment refinement, ranking and copy-paste synthesis for building
//! augmented instance-segmentation datasets from object-centric images.
//!
//! The pipeline has three stages, each usable on its own:
//!
//! * [`refine`] turns a raw grayscale co-segmentation map into one binary mask.
//! * [`rank`] scores a mask against its localisation box and classifier
//!   confidences and keeps only high-quality segments.
//! * [`synth`] pastes kept segments onto scene images and rewrites the scene
//!   annotations for occlusion.
//!
//! [`ingest`] covers manifests, COCO JSON, images and configuration.

pub mod geometry;
pub mod ingest;
pub mod raster;
pub mod rank;
pub mod refine;
pub mod rle;
pub mod synth;

pub use geometry::{bbox_of, intersection_area, BoundingBox, GeometryError};
pub use raster::{BinaryMask, GrayMap, RasterError};
pub use rle::{rle_decode, rle_encode, RleError, RleMask};
