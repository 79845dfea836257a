use image::RgbImage;
use serde::{Deserialize, Serialize};

use crate::geometry::{bbox_of, BoundingBox};
use crate::raster::BinaryMask;
use crate::rle::{rle_encode, RleMask};

use super::{NativeAnnotation, SynthError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AnnotationSource {
    Native,
    Pasted,
}

impl AnnotationSource {
    pub fn as_str(&self) -> &'static str {
        match self {
            AnnotationSource::Native => "native",
            AnnotationSource::Pasted => "pasted",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SceneAnnotation {
    pub class_id: u64,
    pub mask: BinaryMask,
    pub bbox: BoundingBox,
    pub source: AnnotationSource,
    pub visible_area: u64,
    /// Area when the annotation entered the scene, before any occlusion.
    pub original_area: u64,
    /// Index into [`SynthScene::pastes`] for pasted instances.
    pub paste_index: Option<usize>,
}

/// Visibility minima below which an occluded annotation is removed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OcclusionRule {
    pub min_visible_fraction: f64,
    pub min_visible_pixels: u64,
}

impl OcclusionRule {
    pub fn keeps(&self, visible: u64, original: u64) -> bool {
        visible >= self.min_visible_pixels.max(1)
            && (original == 0 || visible as f64 / original as f64 >= self.min_visible_fraction)
    }
}

/// Record of one successful paste, kept for auditing and statistics.
#[derive(Debug, Clone, PartialEq)]
pub struct PasteRecord {
    pub record_id: String,
    pub class_id: u64,
    /// Full paste footprint on the canvas, before later pastes occlude it.
    pub mask: RleMask,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SceneStats {
    pub pastes_requested: u64,
    pub pastes_placed: u64,
    pub pastes_skipped: u64,
    pub degenerate_redraws: u64,
    pub native_lost_in_resize: u64,
    pub native_dropped: u64,
    pub pasted_dropped: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthScene {
    pub index: u64,
    pub background_id: u64,
    pub image: RgbImage,
    pub annotations: Vec<SceneAnnotation>,
    pub pastes: Vec<PasteRecord>,
    pub stats: SceneStats,
}

impl SynthScene {
    /// Starts a scene from an (already transformed) background.
    pub fn new(index: u64, background_id: u64, image: RgbImage, natives: Vec<NativeAnnotation>) -> Result<Self, SynthError> {
        let (w, h) = image.dimensions();
        let mut annotations = Vec::with_capacity(natives.len());
        for n in natives {
            if n.mask.dims() != (w, h) {
                return Err(SynthError::DimensionMismatch(w, h, n.mask.width(), n.mask.height()));
            }
            let Ok(bbox) = bbox_of(&n.mask) else { continue };
            let area = n.mask.area();
            annotations.push(SceneAnnotation {
                class_id: n.class_id,
                mask: n.mask,
                bbox,
                source: AnnotationSource::Native,
                visible_area: area,
                original_area: area,
                paste_index: None,
            });
        }
        Ok(Self { index, background_id, image, annotations, pastes: Vec::new(), stats: SceneStats::default() })
    }

    pub fn width(&self) -> u32 {
        self.image.width()
    }

    pub fn height(&self) -> u32 {
        self.image.height()
    }

    /// Composites `patch` where `mask` is set and removes the covered pixels
    /// from every earlier annotation. Annotations left below the occlusion
    /// rule are dropped. Returns the number of annotations dropped.
    pub fn paste(
        &mut self,
        record_id: &str,
        patch: &RgbImage,
        mask: &BinaryMask,
        class_id: u64,
        rule: &OcclusionRule,
    ) -> Result<usize, SynthError> {
        let (w, h) = self.image.dimensions();
        if patch.dimensions() != (w, h) || mask.dims() != (w, h) {
            return Err(SynthError::DimensionMismatch(w, h, mask.width(), mask.height()));
        }
        let bbox = bbox_of(mask).map_err(|_| SynthError::DegeneratePaste)?;

        for (x, y) in mask.foreground() {
            self.image.put_pixel(x, y, *patch.get_pixel(x, y));
        }

        let mut dropped = 0;
        let mut kept = Vec::with_capacity(self.annotations.len() + 1);
        for mut ann in self.annotations.drain(..) {
            if ann.bbox.right() > bbox.x
                && bbox.right() > ann.bbox.x
                && ann.bbox.bottom() > bbox.y
                && bbox.bottom() > ann.bbox.y
            {
                let removed = ann.mask.subtract_in_place(mask).expect("dimensions checked");
                if removed > 0 {
                    ann.visible_area -= removed;
                    if !rule.keeps(ann.visible_area, ann.original_area) {
                        match ann.source {
                            AnnotationSource::Native => self.stats.native_dropped += 1,
                            AnnotationSource::Pasted => self.stats.pasted_dropped += 1,
                        }
                        dropped += 1;
                        continue;
                    }
                    ann.bbox = bbox_of(&ann.mask).expect("visible area is positive");
                }
            }
            kept.push(ann);
        }
        self.annotations = kept;

        let area = mask.area();
        self.pastes.push(PasteRecord { record_id: record_id.to_owned(), class_id, mask: rle_encode(mask) });
        self.annotations.push(SceneAnnotation {
            class_id,
            mask: mask.clone(),
            bbox,
            source: AnnotationSource::Pasted,
            visible_area: area,
            original_area: area,
            paste_index: Some(self.pastes.len() - 1),
        });
        self.stats.pastes_placed += 1;
        Ok(dropped)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use image::Rgb;

    const RULE: OcclusionRule = OcclusionRule { min_visible_fraction: 0.05, min_visible_pixels: 1 };

    fn scene_with_native(mask: BinaryMask) -> SynthScene {
        let img = RgbImage::from_pixel(mask.width(), mask.height(), Rgb([10, 10, 10]));
        SynthScene::new(0, 7, img, vec![NativeAnnotation { class_id: 1, mask }]).unwrap()
    }

    fn red(w: u32, h: u32) -> RgbImage {
        RgbImage::from_pixel(w, h, Rgb([255, 0, 0]))
    }

    #[test]
    fn full_cover_drops_native() {
        let native = BinaryMask::from_fn(10, 10, |x, y| (2..5).contains(&x) && (2..5).contains(&y));
        let mut scene = scene_with_native(native);
        let cover = BinaryMask::from_fn(10, 10, |x, y| x < 6 && y < 6);
        assert_eq!(scene.paste("p", &red(10, 10), &cover, 2, &RULE).unwrap(), 1);
        assert_eq!(scene.annotations.len(), 1);
        assert_eq!(scene.annotations[0].source, AnnotationSource::Pasted);
        assert_eq!(scene.stats.native_dropped, 1);
        assert_eq!(*scene.image.get_pixel(0, 0), Rgb([255, 0, 0]));
        assert_eq!(*scene.image.get_pixel(9, 9), Rgb([10, 10, 10]));
    }

    #[test]
    fn disjoint_paste_leaves_natives() {
        let native = BinaryMask::from_fn(10, 10, |x, y| x < 3 && y < 3);
        let mut scene = scene_with_native(native.clone());
        let far = BinaryMask::from_fn(10, 10, |x, y| x > 6 && y > 6);
        scene.paste("p", &red(10, 10), &far, 2, &RULE).unwrap();
        assert_eq!(scene.annotations.len(), 2);
        assert_eq!(scene.annotations[0].mask, native);
        assert_eq!(scene.annotations[1].bbox, BoundingBox::new(7, 7, 3, 3));
    }

    #[test]
    fn half_cover_halves_and_rebounds() {
        // Native 4x4 block at (2..6, 2..6); paste covers its left half.
        let native = BinaryMask::from_fn(10, 10, |x, y| (2..6).contains(&x) && (2..6).contains(&y));
        let mut scene = scene_with_native(native);
        let left = BinaryMask::from_fn(10, 10, |x, _| x < 4);
        scene.paste("p", &red(10, 10), &left, 2, &RULE).unwrap();
        let ann = &scene.annotations[0];
        let oracle = (2..6).flat_map(|y| (4..6).map(move |x| (x, y))).count() as u64;
        assert_eq!(ann.visible_area, oracle);
        assert_eq!(ann.mask.area(), 8);
        assert_eq!(ann.bbox, BoundingBox::new(4, 2, 2, 4));
        assert_eq!(ann.original_area, 16);
    }

    #[test]
    fn later_pastes_win() {
        let mut scene = scene_with_native(BinaryMask::empty(8, 8));
        let a = BinaryMask::from_fn(8, 8, |x, _| x < 5);
        let b = BinaryMask::from_fn(8, 8, |x, _| x >= 3);
        scene.paste("a", &red(8, 8), &a, 1, &RULE).unwrap();
        scene.paste("b", &red(8, 8), &b, 2, &RULE).unwrap();
        assert_eq!(scene.annotations[0].mask, BinaryMask::from_fn(8, 8, |x, _| x < 3));
        assert_eq!(scene.annotations[1].mask, b);
        assert_eq!(scene.annotations[0].mask.intersection_area(&scene.annotations[1].mask).unwrap(), 0);
    }

    #[test]
    fn fraction_threshold_drops_slivers() {
        let native = BinaryMask::from_fn(10, 10, |x, y| x < 10 && y < 5); // 50 px
        let mut scene = scene_with_native(native);
        let almost = BinaryMask::from_fn(10, 10, |x, y| !(y == 0 && x < 2)); // leaves 2 px = 4%
        scene.paste("p", &red(10, 10), &almost, 2, &RULE).unwrap();
        assert_eq!(scene.annotations.len(), 1);
        let native = BinaryMask::from_fn(10, 10, |x, y| x < 10 && y < 5);
        let mut scene = scene_with_native(native);
        let leave3 = BinaryMask::from_fn(10, 10, |x, y| !(y == 0 && x < 3)); // 6%
        scene.paste("p", &red(10, 10), &leave3, 2, &RULE).unwrap();
        assert_eq!(scene.annotations.len(), 2);
        assert_eq!(scene.annotations[0].visible_area, 3);
    }
}
