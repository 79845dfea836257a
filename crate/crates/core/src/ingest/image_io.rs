use std::fs::File;
use std::io::BufWriter;
use std::path::Path;

use image::{DynamicImage, ImageFormat, ImageReader, RgbImage};

use super::IngestError;
use crate::raster::{BinaryMask, GrayMap};

fn open(path: &Path) -> Result<DynamicImage, IngestError> {
    let bad = |e: &dyn std::fmt::Display| IngestError::Image { path: path.to_owned(), message: e.to_string() };
    ImageReader::open(path)
        .map_err(|e| IngestError::io(path, e))?
        .with_guessed_format()
        .map_err(|e| IngestError::io(path, e))?
        .decode()
        .map_err(|e| bad(&e))
}

pub fn image_dimensions(path: &Path) -> Result<(u32, u32), IngestError> {
    ImageReader::open(path)
        .map_err(|e| IngestError::io(path, e))?
        .with_guessed_format()
        .map_err(|e| IngestError::io(path, e))?
        .into_dimensions()
        .map_err(|e| IngestError::Image { path: path.to_owned(), message: e.to_string() })
}

/// Decodes PNG, JPEG or PNM into 8-bit RGB.
pub fn decode_image(path: &Path) -> Result<RgbImage, IngestError> {
    Ok(open(path)?.into_rgb8())
}

/// Integer luma `round((299 R + 587 G + 114 B) / 1000)`.
pub fn luma(r: u8, g: u8, b: u8) -> u8 {
    ((299 * u32::from(r) + 587 * u32::from(g) + 114 * u32::from(b) + 500) / 1000) as u8
}

/// Decodes a single-channel map. Colour files are reduced to integer luma.
pub fn decode_graymap(path: &Path) -> Result<GrayMap, IngestError> {
    let img = open(path)?;
    let (w, h) = (img.width(), img.height());
    let data: Vec<u8> = match img {
        DynamicImage::ImageLuma8(g) => g.into_raw(),
        DynamicImage::ImageLumaA8(g) => g.pixels().map(|p| p.0[0]).collect(),
        DynamicImage::ImageLuma16(g) => g.pixels().map(|p| ((u32::from(p.0[0]) + 128) / 257) as u8).collect(),
        DynamicImage::ImageLumaA16(g) => g.pixels().map(|p| ((u32::from(p.0[0]) + 128) / 257) as u8).collect(),
        other => other.into_rgb8().pixels().map(|p| luma(p.0[0], p.0[1], p.0[2])).collect(),
    };
    GrayMap::from_u8(w, h, &data).map_err(|e| IngestError::Image { path: path.to_owned(), message: e.to_string() })
}

/// Decodes a mask image; pixels brighter than mid-gray are foreground.
pub fn decode_mask(path: &Path) -> Result<BinaryMask, IngestError> {
    let map = decode_graymap(path)?;
    let bits = map.data().iter().map(|&v| v > 127.0).collect();
    Ok(BinaryMask::new(map.width(), map.height(), bits).expect("same dimensions"))
}

pub fn encode_png(image: &RgbImage, path: &Path) -> Result<(), IngestError> {
    image
        .save_with_format(path, ImageFormat::Png)
        .map_err(|e| IngestError::Image { path: path.to_owned(), message: e.to_string() })
}

/// PNG bytes for an RGB image, for callers that hash or buffer output.
pub fn png_bytes(image: &RgbImage) -> Vec<u8> {
    let mut out = std::io::Cursor::new(Vec::new());
    image.write_to(&mut out, ImageFormat::Png).expect("in-memory PNG encode");
    out.into_inner()
}

/// Writes a mask as a 1-bit grayscale PNG.
pub fn encode_mask_png(mask: &BinaryMask, path: &Path) -> Result<(), IngestError> {
    let file = File::create(path).map_err(|e| IngestError::io(path, e))?;
    let bad = |e: png::EncodingError| IngestError::Image { path: path.to_owned(), message: e.to_string() };
    let mut encoder = png::Encoder::new(BufWriter::new(file), mask.width(), mask.height());
    encoder.set_color(png::ColorType::Grayscale);
    encoder.set_depth(png::BitDepth::One);
    let mut writer = encoder.write_header().map_err(bad)?;
    let row_bytes = (mask.width() as usize).div_ceil(8);
    let mut packed = vec![0u8; row_bytes * mask.height() as usize];
    for (x, y) in mask.foreground() {
        packed[y as usize * row_bytes + x as usize / 8] |= 0x80 >> (x % 8);
    }
    writer.write_image_data(&packed).map_err(bad)?;
    writer.finish().map_err(bad)
}
