//! Geometric augmentation of backgrounds and pasted segments.

use fast_image_resize::{FilterType, ResizeAlg, ResizeOptions, Resizer};
use image::imageops;
use image::{Rgb, RgbImage};
use rand::Rng;

use crate::geometry::bbox_of;
use crate::raster::BinaryMask;

use super::{NativeAnnotation, PastePolicy, SynthError};

/// Output size for a background whose shortest edge is resized to
/// `shortest_edge`, then uniformly shrunk if the long edge would exceed
/// `max_size`.
pub fn background_target_size(width: u32, height: u32, shortest_edge: u32, max_size: u32) -> (u32, u32) {
    let (w, h) = (f64::from(width), f64::from(height));
    let scale = f64::from(shortest_edge) / w.min(h);
    let (mut nw, mut nh) = (w * scale, h * scale);
    let long = nw.max(nh);
    if long > f64::from(max_size) {
        let cap = f64::from(max_size) / long;
        nw *= cap;
        nh *= cap;
    }
    ((nw.round() as u32).max(1), (nh.round() as u32).max(1))
}

pub fn flip_image(image: &RgbImage) -> RgbImage {
    imageops::flip_horizontal(image)
}

/// Bilinear resample; identity when the size is unchanged.
pub fn resize_image(image: &RgbImage, width: u32, height: u32) -> RgbImage {
    if image.dimensions() == (width, height) {
        image.clone()
    } else {
        let mut out = RgbImage::new(width, height);
        let options = ResizeOptions::new().resize_alg(ResizeAlg::Convolution(FilterType::Bilinear));
        Resizer::new().resize(image, &mut out, &options).expect("rgb8 buffers of matching pixel type");
        out
    }
}

/// Resizes and optionally flips a background and its annotations.
///
/// Draws, in order: the target shortest edge, then the flip decision.
/// Masks are resampled nearest-neighbour; annotations that vanish in the
/// resample are dropped.
pub fn transform_background<R: Rng + ?Sized>(
    image: &RgbImage,
    annotations: &[NativeAnnotation],
    policy: &PastePolicy,
    rng: &mut R,
) -> (RgbImage, Vec<NativeAnnotation>) {
    let edge = policy.bg_shortest_edges[rng.gen_range(0..policy.bg_shortest_edges.len())];
    let flip = rng.gen_bool(policy.bg_flip_prob);
    let (w, h) = image.dimensions();
    if w == 0 || h == 0 {
        return (image.clone(), Vec::new());
    }
    let (nw, nh) = background_target_size(w, h, edge, policy.bg_max_size);
    let mut out = resize_image(image, nw, nh);
    if flip {
        out = flip_image(&out);
    }
    let annotations = annotations
        .iter()
        .filter_map(|a| {
            let mut mask = a.mask.resize_nearest(nw, nh);
            if flip {
                mask = mask.flip_horizontal();
            }
            (!mask.is_empty()).then_some(NativeAnnotation { class_id: a.class_id, mask })
        })
        .collect();
    (out, annotations)
}

/// One set of random choices for a pasted segment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PasteDraw {
    pub flip: bool,
    pub scale: f64,
    /// Canvas position of the scaled source's top-left corner. Negative
    /// offsets crop the source; positive offsets pad it.
    pub offset_x: i64,
    pub offset_y: i64,
}

pub fn scaled_size(width: u32, height: u32, scale: f64) -> (u32, u32) {
    let s = |v: u32| ((f64::from(v) * scale).round() as u32).max(1);
    (s(width), s(height))
}

/// Draws flip, scale, then the x and y crop/pad offsets.
pub fn draw_paste<R: Rng + ?Sized>(
    source_w: u32,
    source_h: u32,
    target_w: u32,
    target_h: u32,
    policy: &PastePolicy,
    rng: &mut R,
) -> PasteDraw {
    let flip = rng.gen_bool(policy.paste_flip_prob);
    let [lo, hi] = policy.paste_scale_range;
    let scale = rng.gen_range(lo..=hi);
    let (sw, sh) = scaled_size(source_w, source_h, scale);
    let mut offset = |target: u32, scaled: u32| {
        let slack = i64::from(target) - i64::from(scaled);
        rng.gen_range(slack.min(0)..=slack.max(0))
    };
    let offset_x = offset(target_w, sw);
    let offset_y = offset(target_h, sh);
    PasteDraw { flip, scale, offset_x, offset_y }
}

/// Applies `draw` to a source image and mask, producing a patch and mask on
/// a `target_w` x `target_h` canvas. Fails when fewer than `min_pixels`
/// mask pixels land on the canvas.
pub fn apply_paste_draw(
    source: &RgbImage,
    mask: &BinaryMask,
    target_w: u32,
    target_h: u32,
    draw: &PasteDraw,
    min_pixels: u64,
) -> Result<(RgbImage, BinaryMask), SynthError> {
    if source.dimensions() != mask.dims() {
        let (w, h) = source.dimensions();
        return Err(SynthError::DimensionMismatch(w, h, mask.width(), mask.height()));
    }
    let (sw, sh) = scaled_size(mask.width(), mask.height(), draw.scale);
    let mut scaled_mask = mask.resize_nearest(sw, sh);
    if draw.flip {
        scaled_mask = scaled_mask.flip_horizontal();
    }

    // Visible window in scaled-source coordinates.
    let x0 = (-draw.offset_x).max(0) as u32;
    let y0 = (-draw.offset_y).max(0) as u32;
    let x1 = (i64::from(target_w) - draw.offset_x).clamp(0, i64::from(sw)) as u32;
    let y1 = (i64::from(target_h) - draw.offset_y).clamp(0, i64::from(sh)) as u32;

    let mut canvas_mask = BinaryMask::empty(target_w, target_h);
    let mut visible = 0u64;
    for sy in y0..y1.max(y0) {
        for sx in x0..x1.max(x0) {
            if scaled_mask.get(sx, sy) {
                let cx = (i64::from(sx) + draw.offset_x) as u32;
                let cy = (i64::from(sy) + draw.offset_y) as u32;
                canvas_mask.set(cx, cy, true);
                visible += 1;
            }
        }
    }
    if visible < min_pixels.max(1) {
        return Err(SynthError::DegeneratePaste);
    }

    let mut scaled = resize_image(source, sw, sh);
    if draw.flip {
        scaled = flip_image(&scaled);
    }
    let mut patch = RgbImage::from_pixel(target_w, target_h, Rgb([0, 0, 0]));
    for sy in y0..y1.max(y0) {
        for sx in x0..x1.max(x0) {
            let cx = (i64::from(sx) + draw.offset_x) as u32;
            let cy = (i64::from(sy) + draw.offset_y) as u32;
            patch.put_pixel(cx, cy, *scaled.get_pixel(sx, sy));
        }
    }
    Ok((patch, canvas_mask))
}

/// Random flip, rescale and crop/pad of a segment onto a target canvas.
pub fn transform_paste<R: Rng + ?Sized>(
    source: &RgbImage,
    mask: &BinaryMask,
    target_w: u32,
    target_h: u32,
    policy: &PastePolicy,
    rng: &mut R,
) -> Result<(RgbImage, BinaryMask), SynthError> {
    if bbox_of(mask).is_err() {
        return Err(SynthError::DegeneratePaste);
    }
    let draw = draw_paste(mask.width(), mask.height(), target_w, target_h, policy, rng);
    apply_paste_draw(source, mask, target_w, target_h, &draw, policy.min_visible_pixels)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn gradient(w: u32, h: u32) -> RgbImage {
        RgbImage::from_fn(w, h, |x, y| Rgb([(x * 7 % 256) as u8, (y * 11 % 256) as u8, ((x + y) % 256) as u8]))
    }

    #[test]
    fn resize_arithmetic() {
        // 640 / 600 = 1.0667 -> 853.33 x 640, under the cap.
        assert_eq!(background_target_size(800, 600, 640, 1333), (853, 640));
        // 800 / 1000 = 0.8 -> 3200 x 800, then capped by 1333 / 3200.
        assert_eq!(background_target_size(4000, 1000, 800, 1333), (1333, 333));
        assert_eq!(background_target_size(600, 800, 640, 1333), (640, 853));
    }

    #[test]
    fn aspect_ratio_within_a_pixel() {
        for (w, h) in [(800, 600), (4000, 1000), (333, 517), (1, 900), (512, 512)] {
            for edge in [640, 800] {
                let (nw, nh) = background_target_size(w, h, edge, 1333);
                // Each side is off by at most half a pixel from the exact scaled size.
                let cross = (i64::from(nw) * i64::from(h) - i64::from(nh) * i64::from(w)).abs();
                assert!(2 * cross <= i64::from(w + h), "{w}x{h} -> {nw}x{nh}");
                assert!(nw.max(nh) <= 1333);
            }
        }
    }

    #[test]
    fn double_flip_is_identity() {
        let img = gradient(9, 4);
        assert_eq!(flip_image(&flip_image(&img)), img);
        let m = BinaryMask::from_fn(9, 4, |x, y| x > y * 2);
        assert_eq!(m.flip_horizontal().flip_horizontal(), m);
    }

    #[test]
    fn background_masks_follow_the_image() {
        let img = gradient(100, 50);
        let ann = NativeAnnotation { class_id: 3, mask: BinaryMask::from_fn(100, 50, |x, _| x < 10) };
        let policy = PastePolicy { bg_shortest_edges: vec![100], bg_flip_prob: 1.0, ..PastePolicy::default() };
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let (out, anns) = transform_background(&img, &[ann], &policy, &mut rng);
        assert_eq!(out.dimensions(), (200, 100));
        assert_eq!(anns[0].mask, BinaryMask::from_fn(200, 100, |x, _| x >= 180));
    }

    #[test]
    fn identity_draw_reproduces_source() {
        let img = gradient(20, 15);
        let mask = BinaryMask::from_fn(20, 15, |x, y| (x + y) % 3 == 0);
        let draw = PasteDraw { flip: false, scale: 1.0, offset_x: 0, offset_y: 0 };
        let (patch, m) = apply_paste_draw(&img, &mask, 20, 15, &draw, 1).unwrap();
        assert_eq!(patch, img);
        assert_eq!(m, mask);
    }

    #[test]
    fn crop_and_pad_offsets() {
        let img = gradient(10, 10);
        let mask = BinaryMask::full(10, 10);
        // Pad: source lands at (5, 2) on a 20x20 canvas.
        let pad = PasteDraw { flip: false, scale: 1.0, offset_x: 5, offset_y: 2 };
        let (patch, m) = apply_paste_draw(&img, &mask, 20, 20, &pad, 1).unwrap();
        assert_eq!(m, BinaryMask::from_fn(20, 20, |x, y| (5..15).contains(&x) && (2..12).contains(&y)));
        assert_eq!(patch.get_pixel(5, 2), img.get_pixel(0, 0));
        // Crop: only the bottom-right 4x3 of the source is visible on a 4x3 canvas.
        let crop = PasteDraw { flip: false, scale: 1.0, offset_x: -6, offset_y: -7 };
        let (patch, m) = apply_paste_draw(&img, &mask, 4, 3, &crop, 1).unwrap();
        assert_eq!(m.area(), 12);
        assert_eq!(patch.get_pixel(0, 0), img.get_pixel(6, 7));
    }

    #[test]
    fn tiny_scale_is_degenerate() {
        // Seven by seven source with a single foreground pixel at the corner;
        // at scale 0.1 the 1x1 result samples the centre, which is background.
        let img = gradient(7, 7);
        let mask = BinaryMask::from_fn(7, 7, |x, y| (x, y) == (0, 0));
        let draw = PasteDraw { flip: false, scale: 0.1, offset_x: 3, offset_y: 3 };
        assert!(matches!(apply_paste_draw(&img, &mask, 10, 10, &draw, 1), Err(SynthError::DegeneratePaste)));
    }

    #[test]
    fn draws_respect_policy_ranges() {
        let policy = PastePolicy::default();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..500 {
            let d = draw_paste(100, 80, 300, 50, &policy, &mut rng);
            assert!((0.1..=2.0).contains(&d.scale));
            let (sw, sh) = scaled_size(100, 80, d.scale);
            assert!(d.offset_x >= 0 && d.offset_x + i64::from(sw) <= 300);
            if sh > 50 {
                assert!(d.offset_y <= 0 && d.offset_y + i64::from(sh) >= 50);
            } else {
                assert!(d.offset_y >= 0 && d.offset_y + i64::from(sh) <= 50);
            }
        }
    }

    #[test]
    fn seeded_paste_is_reproducible() {
        let img = gradient(40, 30);
        let mask = BinaryMask::from_fn(40, 30, |x, y| (10..30).contains(&x) && (5..25).contains(&y));
        let run = || {
            let mut rng = ChaCha8Rng::seed_from_u64(1234);
            transform_paste(&img, &mask, 64, 48, &PastePolicy::default(), &mut rng)
        };
        let (a, b) = (run(), run());
        match (a, b) {
            (Ok((pa, ma)), Ok((pb, mb))) => {
                assert_eq!(pa.as_raw(), pb.as_raw());
                assert_eq!(ma, mb);
            }
            (Err(_), Err(_)) => {}
            _ => panic!("runs diverged"),
        }
    }
}
