//! Raw co-segmentation map to a single clean binary mask.
//!
//! The procedure is: Gaussian blur, Li threshold, strict binarisation,
//! opening/closing, then keep the largest connected component.

mod components;
mod gaussian;
mod morphology;
mod threshold;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::raster::{BinaryMask, GrayMap};

pub use components::{count_components, label_components, largest_connected_component};
pub use gaussian::{gaussian_filter, gaussian_kernel};
pub use morphology::{close, dilate, erode, open, smooth};
pub use threshold::{binarize, li_threshold, LI_ZERO_MEAN_GUARD};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RefineError {
    #[error("map is constant; no threshold separates foreground from background")]
    ConstantMap,
    #[error("invalid refine config: {0}")]
    InvalidConfig(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MorphOrder {
    OpenThenClose,
    CloseThenOpen,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Connectivity {
    Four,
    Eight,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RefineConfig {
    pub gaussian_sigma: f64,
    pub gaussian_radius: u32,
    pub morph_kernel: u32,
    pub morph_order: MorphOrder,
    pub li_tolerance: f64,
    pub li_max_iters: u32,
    pub connectivity: Connectivity,
}

impl Default for RefineConfig {
    fn default() -> Self {
        let sigma = 2.0f64;
        Self {
            gaussian_sigma: sigma,
            gaussian_radius: 2 * sigma.ceil() as u32,
            morph_kernel: 1,
            morph_order: MorphOrder::OpenThenClose,
            li_tolerance: 0.5,
            li_max_iters: 100,
            connectivity: Connectivity::Eight,
        }
    }
}

impl RefineConfig {
    pub fn validate(&self) -> Result<(), RefineError> {
        let bad = |msg: &str| Err(RefineError::InvalidConfig(msg.to_owned()));
        if !(self.gaussian_sigma > 0.0 && self.gaussian_sigma.is_finite()) {
            return bad("gaussian_sigma must be positive");
        }
        if self.gaussian_radius < 1 {
            return bad("gaussian_radius must be at least 1");
        }
        if self.li_tolerance.is_nan() || self.li_tolerance <= 0.0 {
            return bad("li_tolerance must be positive");
        }
        if self.li_max_iters < 1 {
            return bad("li_max_iters must be at least 1");
        }
        Ok(())
    }
}

/// Full refinement pipeline for one raw map.
///
/// A map whose threshold leaves no foreground yields an empty mask rather
/// than an error; callers decide how to tag such records.
pub fn refine_segment(map: &GrayMap, cfg: &RefineConfig) -> Result<BinaryMask, RefineError> {
    cfg.validate()?;
    let blurred = gaussian_filter(map, cfg.gaussian_sigma, cfg.gaussian_radius);
    let threshold = li_threshold(&blurred, cfg.li_tolerance, cfg.li_max_iters)?;
    let binary = binarize(&blurred, threshold);
    let smoothed = smooth(&binary, cfg.morph_kernel, cfg.morph_order);
    Ok(largest_connected_component(&smoothed, cfg.connectivity))
}
