//! Segment quality scoring against a localisation box and classifier
//! confidences.
//!
//! IoB (intersection over box) and IoM (intersection over mask) share the
//! IoU numerator but each trusts one operand's extent. Their mean is the
//! FreeSeg score. A segment is kept when both the FreeSeg score and the
//! classifier drop rate are strictly above their thresholds.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{intersection_area, BoundingBox, GeometryError};
use crate::raster::BinaryMask;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RankError {
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error("confidence before removal is zero; drop rate undefined")]
    ZeroConfidence,
    #[error("confidence {0} outside [0, 1]")]
    InvalidConfidence(f64),
    #[error("threshold {0} outside [0, 1]")]
    InvalidThreshold(f64),
}

/// Pixel counts and the three overlap ratios for one (mask, box) pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Overlap {
    pub intersection: u64,
    pub mask_area: u64,
    pub box_area: u64,
    pub iou: f64,
    pub iob: f64,
    pub iom: f64,
}

impl Overlap {
    pub fn freeseg_score(&self) -> f64 {
        (self.iob + self.iom) / 2.0
    }
}

fn ratio(num: u64, den: u64) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

/// Overlap of `mask` with the filled rectangle `bbox`. Zero denominators
/// give a ratio of zero.
pub fn overlap(mask: &BinaryMask, bbox: &BoundingBox) -> Result<Overlap, GeometryError> {
    let intersection = intersection_area(mask, bbox)?;
    let mask_area = mask.area();
    let box_area = bbox.area();
    Ok(Overlap {
        intersection,
        mask_area,
        box_area,
        iou: ratio(intersection, mask_area + box_area - intersection),
        iob: ratio(intersection, box_area),
        iom: ratio(intersection, mask_area),
    })
}

pub fn iou(mask: &BinaryMask, bbox: &BoundingBox) -> Result<f64, GeometryError> {
    overlap(mask, bbox).map(|o| o.iou)
}

pub fn iob(mask: &BinaryMask, bbox: &BoundingBox) -> Result<f64, GeometryError> {
    overlap(mask, bbox).map(|o| o.iob)
}

pub fn iom(mask: &BinaryMask, bbox: &BoundingBox) -> Result<f64, GeometryError> {
    overlap(mask, bbox).map(|o| o.iom)
}

pub fn freeseg_score(mask: &BinaryMask, bbox: &BoundingBox) -> Result<f64, GeometryError> {
    overlap(mask, bbox).map(|o| o.freeseg_score())
}

/// Classifier probability for the target class before and after the
/// localised region is removed from the image.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConfidencePair {
    before: f64,
    after: f64,
}

impl ConfidencePair {
    pub fn new(before: f64, after: f64) -> Result<Self, RankError> {
        for v in [before, after] {
            if !(0.0..=1.0).contains(&v) {
                return Err(RankError::InvalidConfidence(v));
            }
        }
        Ok(Self { before, after })
    }

    pub fn before(&self) -> f64 {
        self.before
    }

    pub fn after(&self) -> f64 {
        self.after
    }
}

/// Relative confidence drop `(before - after) / before`. Negative when the
/// confidence rose.
pub fn drop_rate(conf: &ConfidencePair) -> Result<f64, RankError> {
    if conf.before == 0.0 {
        return Err(RankError::ZeroConfidence);
    }
    Ok((conf.before - conf.after) / conf.before)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Thresholds {
    pub score: f64,
    pub drop: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Self { score: 0.5, drop: 0.5 }
    }
}

impl Thresholds {
    pub fn new(score: f64, drop: f64) -> Result<Self, RankError> {
        let t = Self { score, drop };
        t.validate()?;
        Ok(t)
    }

    pub fn validate(&self) -> Result<(), RankError> {
        for v in [self.score, self.drop] {
            if !(0.0..=1.0).contains(&v) {
                return Err(RankError::InvalidThreshold(v));
            }
        }
        Ok(())
    }

    /// The dual strict-inequality filter.
    pub fn accepts(&self, freeseg_score: f64, drop_rate: Option<f64>) -> bool {
        freeseg_score > self.score && drop_rate.is_some_and(|d| d > self.drop)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RejectReason {
    EmptyMask,
    ZeroConfidence,
    DimensionMismatch,
    LowScore,
    LowDropRate,
}

impl RejectReason {
    pub fn as_str(&self) -> &'static str {
        match self {
            RejectReason::EmptyMask => "empty_mask",
            RejectReason::ZeroConfidence => "zero_confidence",
            RejectReason::DimensionMismatch => "dimension_mismatch",
            RejectReason::LowScore => "low_score",
            RejectReason::LowDropRate => "low_drop_rate",
        }
    }
}

impl std::fmt::Display for RejectReason {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One record to be ranked.
#[derive(Debug, Clone)]
pub struct RankInput {
    pub record_id: String,
    pub class_id: u64,
    pub mask: BinaryMask,
    pub bbox: BoundingBox,
    pub confidence: ConfidencePair,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScoredSegment {
    pub record_id: String,
    pub class_id: u64,
    pub mask: BinaryMask,
    pub bbox: BoundingBox,
    pub iou: f64,
    pub iob: f64,
    pub iom: f64,
    pub freeseg_score: f64,
    /// `None` when the record has no usable pre-removal confidence.
    pub drop_rate: Option<f64>,
    pub kept: bool,
    pub reject_reason: Option<RejectReason>,
}

/// Scores one record. Record-level problems become reject reasons.
pub fn score_segment(input: RankInput, thresholds: &Thresholds) -> ScoredSegment {
    let drop = drop_rate(&input.confidence).ok();
    let (metrics, geometry_error) = match overlap(&input.mask, &input.bbox) {
        Ok(o) => (o, false),
        Err(_) => (
            Overlap { intersection: 0, mask_area: input.mask.area(), box_area: input.bbox.area(), iou: 0.0, iob: 0.0, iom: 0.0 },
            true,
        ),
    };
    let score = metrics.freeseg_score();
    let kept = !geometry_error && thresholds.accepts(score, drop);
    let reject_reason = if kept {
        None
    } else if geometry_error {
        Some(RejectReason::DimensionMismatch)
    } else if metrics.mask_area == 0 {
        Some(RejectReason::EmptyMask)
    } else if drop.is_none() {
        Some(RejectReason::ZeroConfidence)
    } else if score <= thresholds.score {
        Some(RejectReason::LowScore)
    } else {
        Some(RejectReason::LowDropRate)
    };
    ScoredSegment {
        record_id: input.record_id,
        class_id: input.class_id,
        mask: input.mask,
        bbox: input.bbox,
        iou: metrics.iou,
        iob: metrics.iob,
        iom: metrics.iom,
        freeseg_score: score,
        drop_rate: drop,
        kept,
        reject_reason,
    }
}

/// Scores every record in parallel; output order follows input order.
pub fn rank_segments(records: Vec<RankInput>, thresholds: &Thresholds) -> Vec<ScoredSegment> {
    records.into_par_iter().map(|r| score_segment(r, thresholds)).collect()
}
