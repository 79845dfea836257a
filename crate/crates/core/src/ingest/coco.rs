//! COCO-style annotation files.
//!
//! Only the fields the pipeline uses are typed; everything else is carried
//! through `extra` maps so a read/write cycle does not lose information.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::numbers::{opt_number, opt_number_array};
use super::IngestError;
use crate::raster::BinaryMask;
use crate::rle::{counts_from_string, rle_decode, RleError, RleMask};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CocoDataset {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub info: Option<Value>,
    #[serde(default)]
    pub images: Vec<CocoImage>,
    #[serde(default)]
    pub annotations: Vec<CocoAnnotation>,
    #[serde(default)]
    pub categories: Vec<CocoCategory>,
    #[serde(flatten)]
    pub extra: BTreeMap<String, Value>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CocoImage {
    pub id: u64,
    pub file_name: String,
    pub width: u32,
    pub height: u32,
    #[serde(flatten)]
    pub extra: BTreeMap<String, Value>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CocoAnnotation {
    pub id: u64,
    pub image_id: u64,
    pub category_id: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub segmentation: Option<Segmentation>,
    #[serde(default, skip_serializing_if = "Option::is_none", serialize_with = "opt_number")]
    pub area: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none", serialize_with = "opt_number_array")]
    pub bbox: Option<[f64; 4]>,
    #[serde(flatten)]
    pub extra: BTreeMap<String, Value>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CocoCategory {
    pub id: u64,
    pub name: String,
    #[serde(flatten)]
    pub extra: BTreeMap<String, Value>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Segmentation {
    Rle(RleSegmentation),
    /// Polygons or anything else; preserved verbatim but not rasterised.
    Other(Value),
}

/// `size` is `[height, width]`, as in COCO.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RleSegmentation {
    pub size: [u32; 2],
    pub counts: RleCounts,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum RleCounts {
    Runs(Vec<u32>),
    Compressed(String),
}

impl RleSegmentation {
    pub fn from_rle(rle: &RleMask) -> Self {
        Self { size: rle.size(), counts: RleCounts::Runs(rle.counts.clone()) }
    }

    pub fn to_rle(&self) -> Result<RleMask, RleError> {
        let [height, width] = self.size;
        let counts = match &self.counts {
            RleCounts::Runs(c) => c.clone(),
            RleCounts::Compressed(s) => counts_from_string(s)?,
        };
        let rle = RleMask { width, height, counts };
        rle.validate()?;
        Ok(rle)
    }

    pub fn to_mask(&self) -> Result<BinaryMask, RleError> {
        rle_decode(&self.to_rle()?)
    }
}

impl CocoAnnotation {
    /// The annotation's mask, if its segmentation is RLE.
    pub fn rle(&self) -> Option<&RleSegmentation> {
        match &self.segmentation {
            Some(Segmentation::Rle(r)) => Some(r),
            _ => None,
        }
    }
}

/// A parsed file plus diagnostics for annotations that were rejected.
#[derive(Debug, Clone)]
pub struct CocoRead {
    pub dataset: CocoDataset,
    pub diagnostics: Vec<String>,
}

pub fn parse_coco(bytes: &[u8], origin: &Path) -> Result<CocoRead, IngestError> {
    let mut dataset: CocoDataset = serde_json::from_slice(bytes)
        .map_err(|e| IngestError::Json { path: origin.to_owned(), message: e.to_string() })?;
    let mut diagnostics = Vec::new();
    dataset.annotations.retain(|a| match a.rle().map(RleSegmentation::to_rle) {
        Some(Err(e)) => {
            diagnostics.push(format!("annotation {} (image {}): {e}", a.id, a.image_id));
            false
        }
        _ => true,
    });
    Ok(CocoRead { dataset, diagnostics })
}

pub fn read_coco(path: &Path) -> Result<CocoRead, IngestError> {
    let bytes = std::fs::read(path).map_err(|e| IngestError::io(path, e))?;
    parse_coco(&bytes, path)
}

pub fn write_coco(dataset: &CocoDataset, path: &Path) -> Result<(), IngestError> {
    let file = File::create(path).map_err(|e| IngestError::io(path, e))?;
    let mut w = BufWriter::new(file);
    serde_json::to_writer(&mut w, dataset).map_err(|e| IngestError::Json { path: path.to_owned(), message: e.to_string() })?;
    w.write_all(b"\n").map_err(|e| IngestError::io(path, e))?;
    w.flush().map_err(|e| IngestError::io(path, e))
}

/// Reads only the JSON value, for callers that want the raw document.
pub fn read_json_value(path: &Path) -> Result<Value, IngestError> {
    let file = File::open(path).map_err(|e| IngestError::io(path, e))?;
    serde_json::from_reader(BufReader::new(file)).map_err(|e| IngestError::Json { path: path.to_owned(), message: e.to_string() })
}
