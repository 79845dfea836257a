use freeseg_core::{BinaryMask, BoundingBox};
use image::{Rgb, RgbImage};

use crate::font::{draw_text, text_width, GLYPH_H};

/// Tints for native (cool) and pasted (warm) annotations.
pub const NATIVE_TINTS: [[u8; 3]; 6] =
    [[0, 110, 255], [0, 200, 140], [90, 60, 255], [0, 190, 220], [60, 160, 60], [40, 80, 170]];
pub const PASTED_TINTS: [[u8; 3]; 6] =
    [[255, 60, 0], [255, 0, 150], [255, 190, 0], [200, 0, 230], [230, 90, 90], [170, 70, 0]];

/// Blends `tint` at 50% over every mask pixel.
pub fn tint_mask(img: &mut RgbImage, mask: &BinaryMask, tint: [u8; 3]) {
    for (x, y) in mask.foreground() {
        if x < img.width() && y < img.height() {
            let p = img.get_pixel_mut(x, y);
            for (v, &t) in p.0.iter_mut().zip(&tint) {
                *v = (u16::from(*v) + u16::from(t)).div_ceil(2) as u8;
            }
        }
    }
}

pub fn outline_box(img: &mut RgbImage, b: &BoundingBox, color: [u8; 3]) {
    if b.w == 0 || b.h == 0 {
        return;
    }
    let (w, h) = img.dimensions();
    let (x1, y1) = (b.right().min(w) - 1, b.bottom().min(h) - 1);
    for x in b.x..=x1 {
        img.put_pixel(x, b.y, Rgb(color));
        img.put_pixel(x, y1, Rgb(color));
    }
    for y in b.y..=y1 {
        img.put_pixel(b.x, y, Rgb(color));
        img.put_pixel(x1, y, Rgb(color));
    }
}

/// Writes `text` on a dark band along the top edge.
pub fn caption(img: &mut RgbImage, text: &str) {
    let scale = if img.width() >= 2 * text_width(text, 2) { 2 } else { 1 };
    let band = (GLYPH_H + 2) * scale;
    let (w, h) = img.dimensions();
    for y in 0..band.min(h) {
        for x in 0..w.min(text_width(text, scale) + 2 * scale) {
            img.put_pixel(x, y, Rgb([0, 0, 0]));
        }
    }
    draw_text(img, scale, scale, text, scale, Rgb([255, 255, 255]));
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tint_is_half_blend() {
        let mut img = RgbImage::from_pixel(2, 1, Rgb([100, 100, 100]));
        tint_mask(&mut img, &BinaryMask::from_fn(2, 1, |x, _| x == 0), [200, 0, 51]);
        assert_eq!(img.get_pixel(0, 0).0, [150, 50, 76]);
        assert_eq!(img.get_pixel(1, 0).0, [100, 100, 100]);
    }

    #[test]
    fn box_outline_perimeter() {
        let mut img = RgbImage::new(10, 10);
        outline_box(&mut img, &BoundingBox::new(2, 3, 4, 3), [9, 9, 9]);
        let n = img.pixels().filter(|p| p.0 == [9, 9, 9]).count();
        assert_eq!(n, 2 * 4 + 2 * 3 - 4);
    }
}
