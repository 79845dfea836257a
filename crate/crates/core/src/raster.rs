//! Single-channel rasters: grayscale intensity maps and binary masks.

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RasterError {
    #[error("raster data length {len} does not match {width}x{height}")]
    LengthMismatch { width: u32, height: u32, len: usize },
    #[error("intensity {value} at index {index} is outside [0, 255]")]
    OutOfRange { index: usize, value: f32 },
    #[error("raster dimensions differ: {0}x{1} vs {2}x{3}")]
    DimensionMismatch(u32, u32, u32, u32),
}

/// Row-major intensity raster with values in `[0, 255]`.
///
/// Values are stored as `f32` so that filtered maps keep sub-level precision
/// between the blur and the threshold search.
#[derive(Debug, Clone, PartialEq)]
pub struct GrayMap {
    width: u32,
    height: u32,
    data: Vec<f32>,
}

impl GrayMap {
    pub fn new(width: u32, height: u32, data: Vec<f32>) -> Result<Self, RasterError> {
        if data.len() != width as usize * height as usize {
            return Err(RasterError::LengthMismatch { width, height, len: data.len() });
        }
        if let Some((index, &value)) = data
            .iter()
            .enumerate()
            .find(|(_, v)| !(0.0..=255.0).contains(*v))
        {
            return Err(RasterError::OutOfRange { index, value });
        }
        Ok(Self { width, height, data })
    }

    pub fn from_u8(width: u32, height: u32, data: &[u8]) -> Result<Self, RasterError> {
        Self::new(width, height, data.iter().map(|&v| f32::from(v)).collect())
    }

    pub fn filled(width: u32, height: u32, value: f32) -> Result<Self, RasterError> {
        Self::new(width, height, vec![value; width as usize * height as usize])
    }

    pub fn from_fn(width: u32, height: u32, mut f: impl FnMut(u32, u32) -> f32) -> Result<Self, RasterError> {
        let mut data = Vec::with_capacity(width as usize * height as usize);
        for y in 0..height {
            for x in 0..width {
                data.push(f(x, y));
            }
        }
        Self::new(width, height, data)
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn data(&self) -> &[f32] {
        &self.data
    }

    pub fn get(&self, x: u32, y: u32) -> f32 {
        self.data[y as usize * self.width as usize + x as usize]
    }

    /// Values rounded to the nearest 8-bit level.
    pub fn to_u8(&self) -> Vec<u8> {
        self.data.iter().map(|v| v.round() as u8).collect()
    }
}

/// Row-major boolean raster.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BinaryMask {
    width: u32,
    height: u32,
    bits: Vec<bool>,
}

impl BinaryMask {
    pub fn new(width: u32, height: u32, bits: Vec<bool>) -> Result<Self, RasterError> {
        if bits.len() != width as usize * height as usize {
            return Err(RasterError::LengthMismatch { width, height, len: bits.len() });
        }
        Ok(Self { width, height, bits })
    }

    pub fn empty(width: u32, height: u32) -> Self {
        Self { width, height, bits: vec![false; width as usize * height as usize] }
    }

    pub fn full(width: u32, height: u32) -> Self {
        Self { width, height, bits: vec![true; width as usize * height as usize] }
    }

    pub fn from_fn(width: u32, height: u32, mut f: impl FnMut(u32, u32) -> bool) -> Self {
        let mut bits = Vec::with_capacity(width as usize * height as usize);
        for y in 0..height {
            for x in 0..width {
                bits.push(f(x, y));
            }
        }
        Self { width, height, bits }
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn dims(&self) -> (u32, u32) {
        (self.width, self.height)
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn get(&self, x: u32, y: u32) -> bool {
        self.bits[self.index(x, y)]
    }

    pub fn set(&mut self, x: u32, y: u32, value: bool) {
        let i = self.index(x, y);
        self.bits[i] = value;
    }

    #[inline]
    fn index(&self, x: u32, y: u32) -> usize {
        debug_assert!(x < self.width && y < self.height);
        y as usize * self.width as usize + x as usize
    }

    /// Number of foreground pixels.
    pub fn area(&self) -> u64 {
        self.bits.iter().filter(|&&b| b).count() as u64
    }

    pub fn is_empty(&self) -> bool {
        !self.bits.iter().any(|&b| b)
    }

    pub fn complement(&self) -> Self {
        Self { width: self.width, height: self.height, bits: self.bits.iter().map(|b| !b).collect() }
    }

    fn check_dims(&self, other: &Self) -> Result<(), RasterError> {
        if self.dims() != other.dims() {
            return Err(RasterError::DimensionMismatch(self.width, self.height, other.width, other.height));
        }
        Ok(())
    }

    /// Number of pixels set in both masks.
    pub fn intersection_area(&self, other: &Self) -> Result<u64, RasterError> {
        self.check_dims(other)?;
        Ok(self.bits.iter().zip(&other.bits).filter(|(a, b)| **a && **b).count() as u64)
    }

    pub fn union(&self, other: &Self) -> Result<Self, RasterError> {
        self.check_dims(other)?;
        let bits = self.bits.iter().zip(&other.bits).map(|(a, b)| *a || *b).collect();
        Ok(Self { width: self.width, height: self.height, bits })
    }

    /// Clears every pixel that is set in `other`. Returns the number of pixels removed.
    pub fn subtract_in_place(&mut self, other: &Self) -> Result<u64, RasterError> {
        self.check_dims(other)?;
        let mut removed = 0;
        for (a, b) in self.bits.iter_mut().zip(&other.bits) {
            if *a && *b {
                *a = false;
                removed += 1;
            }
        }
        Ok(removed)
    }

    /// True if every foreground pixel of `self` is also set in `other`.
    pub fn is_subset_of(&self, other: &Self) -> bool {
        self.dims() == other.dims() && self.bits.iter().zip(&other.bits).all(|(a, b)| !*a || *b)
    }

    /// Mirror around the vertical axis.
    pub fn flip_horizontal(&self) -> Self {
        let w = self.width as usize;
        let mut bits = Vec::with_capacity(self.bits.len());
        for row in self.bits.chunks(w.max(1)) {
            bits.extend(row.iter().rev());
        }
        Self { width: self.width, height: self.height, bits }
    }

    /// Nearest-neighbour resample to `new_width` x `new_height`.
    ///
    /// Destination pixel centres are mapped back into the source grid, so an
    /// integer upscale replicates every source pixel into a k x k block.
    pub fn resize_nearest(&self, new_width: u32, new_height: u32) -> Self {
        if (new_width, new_height) == self.dims() {
            return self.clone();
        }
        if self.width == 0 || self.height == 0 {
            return Self::empty(new_width, new_height);
        }
        let xs: Vec<usize> = (0..new_width)
            .map(|x| nearest_source(x, self.width, new_width))
            .collect();
        let w = self.width as usize;
        let mut bits = Vec::with_capacity(new_width as usize * new_height as usize);
        for y in 0..new_height {
            let sy = nearest_source(y, self.height, new_height);
            let row = &self.bits[sy * w..(sy + 1) * w];
            bits.extend(xs.iter().map(|&sx| row[sx]));
        }
        Self { width: new_width, height: new_height, bits }
    }

    /// Iterator over the coordinates of foreground pixels in row-major order.
    pub fn foreground(&self) -> impl Iterator<Item = (u32, u32)> + '_ {
        let w = self.width.max(1) as usize;
        self.bits
            .iter()
            .enumerate()
            .filter(|(_, &b)| b)
            .map(move |(i, _)| ((i % w) as u32, (i / w) as u32))
    }
}

fn nearest_source(dst: u32, src_len: u32, dst_len: u32) -> usize {
    let s = ((2 * dst as u64 + 1) * src_len as u64) / (2 * dst_len as u64);
    (s as usize).min(src_len as usize - 1)
}
