//! Minimum cross-entropy (Li) thresholding.

use crate::raster::{BinaryMask, GrayMap};

use super::RefineError;

/// Replacement for a class mean of exactly zero before taking its logarithm.
pub const LI_ZERO_MEAN_GUARD: f64 = 1e-6;

/// Iterative minimum cross-entropy threshold.
///
/// Starts at the mean intensity and repeatedly moves the threshold to the
/// logarithmic mean of the background (`<= t`) and foreground (`> t`) class
/// means until successive estimates differ by less than `tolerance`.
pub fn li_threshold(map: &GrayMap, tolerance: f64, max_iters: u32) -> Result<f64, RefineError> {
    let data = map.data();
    let (min, max) = data.iter().fold((f32::INFINITY, f32::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    if data.is_empty() || min == max {
        return Err(RefineError::ConstantMap);
    }

    let mut t = data.iter().map(|&v| f64::from(v)).sum::<f64>() / data.len() as f64;
    for _ in 0..max_iters {
        let (mut sum_b, mut n_b, mut sum_f, mut n_f) = (0.0f64, 0u64, 0.0f64, 0u64);
        for &v in data {
            let v = f64::from(v);
            if v <= t {
                sum_b += v;
                n_b += 1;
            } else {
                sum_f += v;
                n_f += 1;
            }
        }
        if n_b == 0 || n_f == 0 {
            break;
        }
        let mean_b = guard(sum_b / n_b as f64);
        let mean_f = guard(sum_f / n_f as f64);
        let next = (mean_b - mean_f) / (mean_b.ln() - mean_f.ln());
        let delta = (next - t).abs();
        t = next;
        if delta < tolerance {
            break;
        }
    }
    Ok(t)
}

fn guard(mean: f64) -> f64 {
    if mean == 0.0 {
        LI_ZERO_MEAN_GUARD
    } else {
        mean
    }
}

/// Foreground is every pixel strictly brighter than `threshold`.
pub fn binarize(map: &GrayMap, threshold: f64) -> BinaryMask {
    let bits = map.data().iter().map(|&v| f64::from(v) > threshold).collect();
    BinaryMask::new(map.width(), map.height(), bits).expect("same dimensions as map")
}
