//! Binary erosion and dilation with a square structuring element.
//!
//! Pixels outside the raster count as background for both operations, so
//! erosion always clears a band of `halfwidth` pixels along the border.
//! The square element is separable; each pass keeps a running count of
//! foreground pixels in the sliding window.

use crate::raster::BinaryMask;

use super::MorphOrder;

pub fn erode(mask: &BinaryMask, halfwidth: u32) -> BinaryMask {
    let window = 2 * halfwidth as usize + 1;
    let rows = pass_rows(mask, halfwidth, |count| count == window);
    pass_cols(&rows, halfwidth, |count| count == window)
}

pub fn dilate(mask: &BinaryMask, halfwidth: u32) -> BinaryMask {
    let rows = pass_rows(mask, halfwidth, |count| count > 0);
    pass_cols(&rows, halfwidth, |count| count > 0)
}

pub fn open(mask: &BinaryMask, halfwidth: u32) -> BinaryMask {
    dilate(&erode(mask, halfwidth), halfwidth)
}

pub fn close(mask: &BinaryMask, halfwidth: u32) -> BinaryMask {
    erode(&dilate(mask, halfwidth), halfwidth)
}

/// Boundary smoothing: an opening and a closing in the configured order.
pub fn smooth(mask: &BinaryMask, halfwidth: u32, order: MorphOrder) -> BinaryMask {
    match order {
        MorphOrder::OpenThenClose => close(&open(mask, halfwidth), halfwidth),
        MorphOrder::CloseThenOpen => open(&close(mask, halfwidth), halfwidth),
    }
}

fn sliding(line: &[bool], halfwidth: usize, keep: impl Fn(usize) -> bool, out: &mut [bool]) {
    let n = line.len();
    let mut count = line[..halfwidth.min(n)].iter().filter(|&&b| b).count();
    for i in 0..n {
        if i + halfwidth < n && line[i + halfwidth] {
            count += 1;
        }
        if i > halfwidth && line[i - halfwidth - 1] {
            count -= 1;
        }
        out[i] = keep(count);
    }
}

fn pass_rows(mask: &BinaryMask, halfwidth: u32, keep: impl Fn(usize) -> bool) -> BinaryMask {
    let (w, h) = mask.dims();
    let mut bits = vec![false; mask.bits().len()];
    if w > 0 {
        for (src, dst) in mask.bits().chunks(w as usize).zip(bits.chunks_mut(w as usize)) {
            sliding(src, halfwidth as usize, &keep, dst);
        }
    }
    BinaryMask::new(w, h, bits).expect("same dimensions")
}

fn pass_cols(mask: &BinaryMask, halfwidth: u32, keep: impl Fn(usize) -> bool) -> BinaryMask {
    let (w, h) = (mask.width() as usize, mask.height() as usize);
    let mut bits = vec![false; w * h];
    let mut column = vec![false; h];
    let mut result = vec![false; h];
    for x in 0..w {
        for (y, c) in column.iter_mut().enumerate() {
            *c = mask.bits()[y * w + x];
        }
        sliding(&column, halfwidth as usize, &keep, &mut result);
        for (y, &r) in result.iter().enumerate() {
            bits[y * w + x] = r;
        }
    }
    BinaryMask::new(mask.width(), mask.height(), bits).expect("same dimensions")
}
