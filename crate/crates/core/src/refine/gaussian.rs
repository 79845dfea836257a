use crate::raster::GrayMap;

/// Discrete Gaussian taps `-radius..=radius`, normalised to sum to one.
pub fn gaussian_kernel(sigma: f64, radius: u32) -> Vec<f64> {
    let r = radius as i64;
    let two_sigma_sq = 2.0 * sigma * sigma;
    let raw: Vec<f64> = (-r..=r).map(|i| (-((i * i) as f64) / two_sigma_sq).exp()).collect();
    let sum: f64 = raw.iter().sum();
    raw.into_iter().map(|w| w / sum).collect()
}

/// Separable Gaussian blur with edge replication at the borders.
pub fn gaussian_filter(map: &GrayMap, sigma: f64, radius: u32) -> GrayMap {
    let (w, h) = (map.width() as usize, map.height() as usize);
    if w == 0 || h == 0 {
        return map.clone();
    }
    let kernel = gaussian_kernel(sigma, radius);
    let r = radius as isize;
    let src = map.data();

    let mut horizontal = vec![0f64; w * h];
    for y in 0..h {
        let row = &src[y * w..(y + 1) * w];
        for x in 0..w {
            let mut acc = 0.0;
            for (k, weight) in kernel.iter().enumerate() {
                let sx = (x as isize + k as isize - r).clamp(0, w as isize - 1) as usize;
                acc += weight * f64::from(row[sx]);
            }
            horizontal[y * w + x] = acc;
        }
    }

    let mut out = vec![0f32; w * h];
    for y in 0..h {
        for x in 0..w {
            let mut acc = 0.0;
            for (k, weight) in kernel.iter().enumerate() {
                let sy = (y as isize + k as isize - r).clamp(0, h as isize - 1) as usize;
                acc += weight * horizontal[sy * w + x];
            }
            out[y * w + x] = acc.clamp(0.0, 255.0) as f32;
        }
    }
    GrayMap::new(map.width(), map.height(), out).expect("clamped output is a valid map")
}
