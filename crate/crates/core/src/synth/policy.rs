use serde::{Deserialize, Serialize};

use super::SynthError;

/// Copy-paste augmentation policy.
///
/// Defaults follow the standard LVIS training augmentation for backgrounds
/// and a flip + [0.1, 2.0] rescale for pasted segments.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PastePolicy {
    /// Inclusive range for the number of pastes per background.
    pub n_range: [u32; 2],
    pub paste_flip_prob: f64,
    pub paste_scale_range: [f64; 2],
    pub bg_shortest_edges: Vec<u32>,
    pub bg_max_size: u32,
    pub bg_flip_prob: f64,
    /// Annotations whose visible share of their pre-occlusion area falls
    /// below this are dropped.
    pub min_visible_fraction: f64,
    pub min_visible_pixels: u64,
    /// Draw a class uniformly first, then a segment within it.
    pub balance_classes: bool,
    /// Transform redraws allowed for one paste slot before it is skipped.
    pub max_paste_attempts: u32,
    pub seed: u64,
}

impl Default for PastePolicy {
    fn default() -> Self {
        Self {
            n_range: [1, 6],
            paste_flip_prob: 0.5,
            paste_scale_range: [0.1, 2.0],
            bg_shortest_edges: vec![640, 672, 704, 736, 768, 800],
            bg_max_size: 1333,
            bg_flip_prob: 0.5,
            min_visible_fraction: 0.05,
            min_visible_pixels: 1,
            balance_classes: false,
            max_paste_attempts: 10,
            seed: 0,
        }
    }
}

impl PastePolicy {
    pub fn validate(&self) -> Result<(), SynthError> {
        let bad = |msg: String| Err(SynthError::InvalidPolicy(msg));
        let [lo, hi] = self.n_range;
        if lo < 1 || lo > hi {
            return bad(format!("n_range {lo}..={hi} must satisfy 1 <= low <= high"));
        }
        let [s_lo, s_hi] = self.paste_scale_range;
        if !(s_lo > 0.0 && s_lo <= s_hi && s_hi.is_finite()) {
            return bad(format!("paste_scale_range [{s_lo}, {s_hi}] must be positive and ordered"));
        }
        for (name, p) in [("paste_flip_prob", self.paste_flip_prob), ("bg_flip_prob", self.bg_flip_prob)] {
            if !(0.0..=1.0).contains(&p) {
                return bad(format!("{name} {p} outside [0, 1]"));
            }
        }
        if !(0.0..=1.0).contains(&self.min_visible_fraction) {
            return bad(format!("min_visible_fraction {} outside [0, 1]", self.min_visible_fraction));
        }
        if self.bg_shortest_edges.is_empty() || self.bg_shortest_edges.contains(&0) {
            return bad("bg_shortest_edges must be a nonempty list of positive sizes".into());
        }
        if self.bg_max_size == 0 {
            return bad("bg_max_size must be positive".into());
        }
        if self.max_paste_attempts == 0 {
            return bad("max_paste_attempts must be at least 1".into());
        }
        Ok(())
    }
}
