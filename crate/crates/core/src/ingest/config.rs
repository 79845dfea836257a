//! Pipeline configuration file (TOML) with environment overrides.
//!
//! ```toml
//! [refine]
//! gaussian_sigma = 2.0
//!
//! [rank]
//! score = 0.5
//! drop = 0.5
//!
//! [synth]
//! n_range = [1, 6]
//! seed = 7
//!
//! [io]
//! out_dir = "out"
//! workers = 8
//! ```

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::IngestError;
use crate::rank::Thresholds;
use crate::refine::RefineConfig;
use crate::synth::PastePolicy;

pub const ENV_SEED: &str = "FREESEG_SEED";
pub const ENV_MANIFEST: &str = "FREESEG_MANIFEST";
pub const ENV_BACKGROUNDS: &str = "FREESEG_BACKGROUNDS";
pub const ENV_BACKGROUND_IMAGES: &str = "FREESEG_BACKGROUND_IMAGES";
pub const ENV_OUT: &str = "FREESEG_OUT";

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IoConfig {
    pub manifest: Option<PathBuf>,
    pub backgrounds: Option<PathBuf>,
    pub background_images: Option<PathBuf>,
    pub out_dir: Option<PathBuf>,
    pub class_map: Option<PathBuf>,
    /// Worker threads; `None` uses every available core.
    pub workers: Option<usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub refine: RefineConfig,
    pub rank: Thresholds,
    pub synth: PastePolicy,
    pub io: IoConfig,
}

impl PipelineConfig {
    pub fn from_toml_str(text: &str, origin: &Path) -> Result<Self, IngestError> {
        toml::from_str(text).map_err(|e| IngestError::Config { path: origin.to_owned(), message: e.to_string() })
    }

    /// Loads `path`, or the defaults when no file is given, then applies
    /// environment overrides and validates.
    pub fn load(path: Option<&Path>) -> Result<Self, IngestError> {
        let mut cfg = match path {
            Some(p) => {
                let text = std::fs::read_to_string(p).map_err(|e| IngestError::io(p, e))?;
                Self::from_toml_str(&text, p)?
            }
            None => Self::default(),
        };
        let env: BTreeMap<String, String> = std::env::vars().filter(|(k, _)| k.starts_with("FREESEG_")).collect();
        cfg.apply_env(|k| env.get(k).cloned())?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn apply_env(&mut self, lookup: impl Fn(&str) -> Option<String>) -> Result<(), IngestError> {
        if let Some(seed) = lookup(ENV_SEED) {
            self.synth.seed = seed.trim().parse().map_err(|_| IngestError::Config {
                path: PathBuf::from(ENV_SEED),
                message: format!("not a 64-bit unsigned integer: {seed:?}"),
            })?;
        }
        for (key, slot) in [
            (ENV_MANIFEST, &mut self.io.manifest),
            (ENV_BACKGROUNDS, &mut self.io.backgrounds),
            (ENV_BACKGROUND_IMAGES, &mut self.io.background_images),
            (ENV_OUT, &mut self.io.out_dir),
        ] {
            if let Some(v) = lookup(key) {
                *slot = Some(PathBuf::from(v));
            }
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<(), IngestError> {
        let err = |message: String| IngestError::Config { path: PathBuf::from("<config>"), message };
        self.refine.validate().map_err(|e| err(e.to_string()))?;
        self.rank.validate().map_err(|e| err(e.to_string()))?;
        self.synth.validate().map_err(|e| err(e.to_string()))?;
        if self.io.workers == Some(0) {
            return Err(err("io.workers must be at least 1".into()));
        }
        Ok(())
    }
}

/// Reads a two-column mapping from source class ids to output category ids.
/// Columns may be separated by whitespace or a comma; `#` starts a comment.
pub fn read_class_map(path: &Path) -> Result<BTreeMap<u64, u64>, IngestError> {
    let text = std::fs::read_to_string(path).map_err(|e| IngestError::io(path, e))?;
    let mut map = BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let cols: Vec<&str> = line.split(|c: char| c == ',' || c.is_whitespace()).filter(|s| !s.is_empty()).collect();
        let bad = || IngestError::Config { path: path.to_owned(), message: format!("line {}: expected two integer columns", i + 1) };
        let [src, dst] = cols.as_slice() else { return Err(bad()) };
        map.insert(src.parse().map_err(|_| bad())?, dst.parse().map_err(|_| bad())?);
    }
    Ok(map)
}
