//! Building synthesis catalogs from files, and turning generated scenes
//! back into a COCO-style dataset.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use rayon::prelude::*;
use serde_json::Value;

use super::coco::{CocoAnnotation, CocoCategory, CocoDataset, CocoImage, RleSegmentation, Segmentation};
use super::image_io::{decode_image, decode_mask};
use super::manifest::ScoredRecord;
use super::IngestError;
use crate::rle::rle_encode;
use crate::synth::{Background, NativeAnnotation, SegmentSource, SynthScene};

/// Loaded catalog entries plus one diagnostic per skipped input.
#[derive(Debug)]
pub struct CatalogRead<T> {
    pub items: Vec<T>,
    pub diagnostics: Vec<String>,
}

/// Loads every image of a COCO file as a background. Native annotations are
/// taken from RLE segmentations; polygon annotations are skipped.
pub fn load_backgrounds(dataset: &CocoDataset, images_dir: &Path) -> Result<CatalogRead<Background>, IngestError> {
    let mut by_image: BTreeMap<u64, Vec<&CocoAnnotation>> = BTreeMap::new();
    for a in &dataset.annotations {
        by_image.entry(a.image_id).or_default().push(a);
    }
    let loaded: Vec<(Option<Background>, Vec<String>)> = dataset
        .images
        .par_iter()
        .map(|img| {
            let mut notes = Vec::new();
            let path = images_dir.join(&img.file_name);
            let image = match decode_image(&path) {
                Ok(i) => i,
                Err(e) => return (None, vec![e.to_string()]),
            };
            let mut annotations = Vec::new();
            let mut polygons = 0usize;
            for a in by_image.get(&img.id).map(Vec::as_slice).unwrap_or(&[]) {
                let Some(rle) = a.rle() else {
                    polygons += usize::from(a.segmentation.is_some());
                    continue;
                };
                match rle.to_mask() {
                    Ok(mask) if mask.dims() == image.dimensions() => {
                        annotations.push(NativeAnnotation { class_id: a.category_id, mask })
                    }
                    Ok(mask) => notes.push(format!(
                        "annotation {} (image {}): mask is {}x{} but image is {}x{}",
                        a.id,
                        img.id,
                        mask.width(),
                        mask.height(),
                        image.width(),
                        image.height()
                    )),
                    Err(e) => notes.push(format!("annotation {} (image {}): {e}", a.id, img.id)),
                }
            }
            if polygons > 0 {
                notes.push(format!("image {}: {polygons} non-RLE annotation(s) skipped", img.id));
            }
            (Some(Background { id: img.id, image, annotations }), notes)
        })
        .collect();
    let mut read = CatalogRead { items: Vec::new(), diagnostics: Vec::new() };
    for (bg, notes) in loaded {
        read.items.extend(bg);
        read.diagnostics.extend(notes);
    }
    Ok(read)
}

/// Loads kept records of a scored manifest as paste sources. With a class
/// map, class ids are translated and unmapped records are skipped.
pub fn load_kept_segments(
    records: &[ScoredRecord],
    class_map: Option<&BTreeMap<u64, u64>>,
) -> Result<CatalogRead<SegmentSource>, IngestError> {
    let loaded: Vec<Result<Option<SegmentSource>, String>> = records
        .par_iter()
        .filter(|r| r.kept)
        .map(|r| {
            let c = &r.candidate;
            let class_id = match class_map {
                Some(m) => *m.get(&c.class_id).ok_or_else(|| format!("{}: class {} not in class map", c.record_id, c.class_id))?,
                None => c.class_id,
            };
            let mask_path = r.mask_path.as_deref().ok_or_else(|| format!("{}: kept record has no mask_path", c.record_id))?;
            let image = decode_image(Path::new(&c.image_path)).map_err(|e| format!("{}: {e}", c.record_id))?;
            let mask = decode_mask(Path::new(mask_path)).map_err(|e| format!("{}: {e}", c.record_id))?;
            if mask.dims() != image.dimensions() {
                return Err(format!(
                    "{}: mask is {}x{} but image is {}x{}",
                    c.record_id,
                    mask.width(),
                    mask.height(),
                    image.width(),
                    image.height()
                ));
            }
            if mask.is_empty() {
                return Err(format!("{}: mask is empty", c.record_id));
            }
            Ok(Some(SegmentSource { record_id: c.record_id.clone(), class_id, image, mask }))
        })
        .collect();
    let mut read = CatalogRead { items: Vec::new(), diagnostics: Vec::new() };
    for r in loaded {
        match r {
            Ok(s) => read.items.extend(s),
            Err(d) => read.diagnostics.push(d),
        }
    }
    Ok(read)
}

/// Accumulates scenes, in the order given, into one COCO-style dataset.
#[derive(Debug)]
pub struct CocoSceneWriter {
    dataset: CocoDataset,
    category_names: BTreeMap<u64, String>,
    seen_categories: BTreeSet<u64>,
    next_annotation_id: u64,
}

impl CocoSceneWriter {
    /// `category_names` supplies names for output categories; ids without a
    /// name are emitted as `class_<id>`.
    pub fn new(category_names: BTreeMap<u64, String>) -> Self {
        Self {
            dataset: CocoDataset {
                info: Some(serde_json::json!({ "description": "freeseg synthesized scenes" })),
                images: Vec::new(),
                annotations: Vec::new(),
                categories: Vec::new(),
                extra: BTreeMap::new(),
            },
            category_names,
            seen_categories: BTreeSet::new(),
            next_annotation_id: 1,
        }
    }

    pub fn push(&mut self, scene: &SynthScene, file_name: String) {
        let image_id = scene.index + 1;
        let mut extra = BTreeMap::new();
        extra.insert("background_id".to_owned(), Value::from(scene.background_id));
        self.dataset.images.push(CocoImage { id: image_id, file_name, width: scene.width(), height: scene.height(), extra });
        for a in &scene.annotations {
            let mut extra = BTreeMap::new();
            extra.insert("iscrowd".to_owned(), Value::from(0));
            extra.insert("source".to_owned(), Value::from(a.source.as_str()));
            self.dataset.annotations.push(CocoAnnotation {
                id: self.next_annotation_id,
                image_id,
                category_id: a.class_id,
                segmentation: Some(Segmentation::Rle(RleSegmentation::from_rle(&rle_encode(&a.mask)))),
                area: Some(a.visible_area as f64),
                bbox: Some(a.bbox.to_xywh().map(f64::from)),
                extra,
            });
            self.next_annotation_id += 1;
            self.seen_categories.insert(a.class_id);
        }
    }

    pub fn finish(mut self) -> CocoDataset {
        self.dataset.categories = self
            .seen_categories
            .iter()
            .map(|&id| CocoCategory {
                id,
                name: self.category_names.get(&id).cloned().unwrap_or_else(|| format!("class_{id}")),
                extra: BTreeMap::new(),
            })
            .collect();
        self.dataset
    }
}
