//! COCO run-length encoding.
//!
//! Runs are taken over the mask in column-major order and alternate
//! background/foreground, always starting with a (possibly empty) background
//! run. This matches the uncompressed `counts` arrays used by COCO and LVIS.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::raster::BinaryMask;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RleError {
    #[error("run lengths sum to {sum}, expected {expected} for {width}x{height}")]
    CountMismatch { width: u32, height: u32, sum: u64, expected: u64 },
    #[error("malformed compressed RLE string at byte {0}")]
    MalformedString(usize),
    #[error("negative run length in compressed RLE string")]
    NegativeRun,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RleMask {
    pub width: u32,
    pub height: u32,
    pub counts: Vec<u32>,
}

impl RleMask {
    /// Validates that the runs exactly cover the declared grid.
    pub fn validate(&self) -> Result<(), RleError> {
        let sum: u64 = self.counts.iter().map(|&c| u64::from(c)).sum();
        let expected = u64::from(self.width) * u64::from(self.height);
        if sum != expected {
            return Err(RleError::CountMismatch { width: self.width, height: self.height, sum, expected });
        }
        Ok(())
    }

    /// Foreground area, summed from the odd-indexed runs.
    pub fn area(&self) -> u64 {
        self.counts.iter().skip(1).step_by(2).map(|&c| u64::from(c)).sum()
    }

    /// COCO's `size` field: `[height, width]`.
    pub fn size(&self) -> [u32; 2] {
        [self.height, self.width]
    }
}

pub fn rle_encode(mask: &BinaryMask) -> RleMask {
    let (w, h) = mask.dims();
    let bits = mask.bits();
    let mut counts = Vec::new();
    let mut current = false;
    let mut run = 0u32;
    for x in 0..w as usize {
        for y in 0..h as usize {
            let v = bits[y * w as usize + x];
            if v != current {
                counts.push(run);
                run = 0;
                current = v;
            }
            run += 1;
        }
    }
    counts.push(run);
    RleMask { width: w, height: h, counts }
}

pub fn rle_decode(rle: &RleMask) -> Result<BinaryMask, RleError> {
    rle.validate()?;
    let (w, h) = (rle.width as usize, rle.height as usize);
    let mut bits = vec![false; w * h];
    let mut pos = 0usize;
    for (i, &run) in rle.counts.iter().enumerate() {
        let run = run as usize;
        if i % 2 == 1 {
            for p in pos..pos + run {
                // column-major position p -> (x = p / h, y = p % h)
                bits[(p % h) * w + p / h] = true;
            }
        }
        pos += run;
    }
    Ok(BinaryMask::new(rle.width, rle.height, bits).expect("length checked by validate"))
}

/// Encodes run lengths as a COCO compressed RLE string.
pub fn counts_to_string(counts: &[u32]) -> String {
    let mut out = Vec::new();
    for (i, &c) in counts.iter().enumerate() {
        let mut x = i64::from(c);
        if i > 2 {
            x -= i64::from(counts[i - 2]);
        }
        loop {
            let mut chunk = (x & 0x1f) as u8;
            x >>= 5;
            let more = if chunk & 0x10 != 0 { x != -1 } else { x != 0 };
            if more {
                chunk |= 0x20;
            }
            out.push(chunk + 48);
            if !more {
                break;
            }
        }
    }
    String::from_utf8(out).expect("ascii output")
}

/// Decodes a COCO compressed RLE string into run lengths.
pub fn counts_from_string(s: &str) -> Result<Vec<u32>, RleError> {
    let bytes = s.as_bytes();
    let mut counts: Vec<u32> = Vec::new();
    let mut p = 0usize;
    while p < bytes.len() {
        let mut x: i64 = 0;
        let mut k = 0u32;
        loop {
            let byte = *bytes.get(p).ok_or(RleError::MalformedString(p))?;
            if !(48..48 + 64).contains(&byte) || k > 12 {
                return Err(RleError::MalformedString(p));
            }
            let c = i64::from(byte - 48);
            x |= (c & 0x1f) << (5 * k);
            p += 1;
            k += 1;
            if c & 0x20 == 0 {
                if c & 0x10 != 0 {
                    x |= -1i64 << (5 * k);
                }
                break;
            }
        }
        let m = counts.len();
        if m > 2 {
            x += i64::from(counts[m - 2]);
        }
        counts.push(u32::try_from(x).map_err(|_| RleError::NegativeRun)?);
    }
    Ok(counts)
}
