//! Integer bounding boxes and their overlap with masks.
//!
//! Boxes have an inclusive origin and an exclusive extent: a box `(x, y, w, h)`
//! covers columns `x..x + w` and rows `y..y + h`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::raster::BinaryMask;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GeometryError {
    #[error("mask has no foreground pixels")]
    EmptyMask,
    #[error("box {bbox:?} does not fit a {width}x{height} image")]
    DimensionMismatch { bbox: BoundingBox, width: u32, height: u32 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BoundingBox {
    pub x: u32,
    pub y: u32,
    pub w: u32,
    pub h: u32,
}

impl BoundingBox {
    pub const fn new(x: u32, y: u32, w: u32, h: u32) -> Self {
        Self { x, y, w, h }
    }

    /// Builds a box from possibly loose coordinates, clamped to a
    /// `width` x `height` image. Negative extents collapse to zero.
    pub fn clamped(x: i64, y: i64, w: i64, h: i64, width: u32, height: u32) -> Self {
        let (x0, x1) = clamp_span(x, w, width);
        let (y0, y1) = clamp_span(y, h, height);
        Self { x: x0, y: y0, w: x1 - x0, h: y1 - y0 }
    }

    pub fn right(&self) -> u32 {
        self.x + self.w
    }

    pub fn bottom(&self) -> u32 {
        self.y + self.h
    }

    pub fn area(&self) -> u64 {
        u64::from(self.w) * u64::from(self.h)
    }

    pub fn contains(&self, px: u32, py: u32) -> bool {
        px >= self.x && px < self.right() && py >= self.y && py < self.bottom()
    }

    pub fn fits(&self, width: u32, height: u32) -> bool {
        self.right() <= width && self.bottom() <= height
    }

    /// The box rasterised as a filled mask on a `width` x `height` grid.
    pub fn to_mask(&self, width: u32, height: u32) -> BinaryMask {
        BinaryMask::from_fn(width, height, |x, y| self.contains(x, y))
    }

    pub fn to_xywh(&self) -> [u32; 4] {
        [self.x, self.y, self.w, self.h]
    }
}

fn clamp_span(start: i64, len: i64, limit: u32) -> (u32, u32) {
    let limit = i64::from(limit);
    let lo = start.clamp(0, limit);
    let hi = start.saturating_add(len.max(0)).clamp(lo, limit);
    (lo as u32, hi as u32)
}

/// Smallest box containing every foreground pixel of `mask`.
pub fn bbox_of(mask: &BinaryMask) -> Result<BoundingBox, GeometryError> {
    let (w, h) = mask.dims();
    let bits = mask.bits();
    let (mut x0, mut y0, mut x1, mut y1) = (u32::MAX, u32::MAX, 0u32, 0u32);
    for y in 0..h {
        let row = &bits[y as usize * w as usize..(y as usize + 1) * w as usize];
        let Some(first) = row.iter().position(|&b| b) else { continue };
        let last = row.iter().rposition(|&b| b).unwrap_or(first);
        x0 = x0.min(first as u32);
        x1 = x1.max(last as u32 + 1);
        y0 = y0.min(y);
        y1 = y + 1;
    }
    if x0 == u32::MAX {
        return Err(GeometryError::EmptyMask);
    }
    Ok(BoundingBox { x: x0, y: y0, w: x1 - x0, h: y1 - y0 })
}

/// Number of foreground pixels of `mask` inside `bbox`.
///
/// The box must already be clamped to the mask's grid; a box reaching past
/// the mask is taken to belong to a different image.
pub fn intersection_area(mask: &BinaryMask, bbox: &BoundingBox) -> Result<u64, GeometryError> {
    let (w, h) = mask.dims();
    if !bbox.fits(w, h) {
        return Err(GeometryError::DimensionMismatch { bbox: *bbox, width: w, height: h });
    }
    let bits = mask.bits();
    let count = (bbox.y..bbox.bottom())
        .map(|y| {
            let start = y as usize * w as usize;
            bits[start + bbox.x as usize..start + bbox.right() as usize]
                .iter()
                .filter(|&&b| b)
                .count() as u64
        })
        .sum();
    Ok(count)
}
