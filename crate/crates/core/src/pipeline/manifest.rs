//! Dataset manifest: plants, imaging sessions and per-view inputs.
//!
//! Relative paths are resolved against the directory holding the manifest.

use std::collections::HashSet;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::record::{Genotype, Treatment};
use crate::error::{Result, WiltError};
use crate::metrics::QuotaBasis;
use crate::raster::FiducialObservation;
use crate::segmentation::{SegmentationOverrides, SegmentationParams};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ViewSpec {
    pub image_path: PathBuf,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stem_mask_path: Option<PathBuf>,
    pub fiducial: FiducialObservation,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub segmentation: Option<SegmentationOverrides>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Session {
    pub dpi: i32,
    pub views: Vec<ViewSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlantEntry {
    pub plant_id: String,
    pub genotype: Genotype,
    pub treatment: Treatment,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expert_score: Option<f64>,
    /// Row of the pot's upper edge, the baseline for heights.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pot_top_row: Option<usize>,
    pub sessions: Vec<Session>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    #[serde(default)]
    pub segmentation: SegmentationParams,
    #[serde(default)]
    pub quota_basis: QuotaBasis,
    pub plants: Vec<PlantEntry>,
}

impl Manifest {
    pub fn from_json(text: &str, origin: &Path) -> Result<Manifest> {
        let m: Manifest = serde_json::from_str(text).map_err(|e| WiltError::Manifest {
            path: origin.to_path_buf(),
            message: format!("line {}, column {}: {e}", e.line(), e.column()),
        })?;
        m.validate().map_err(|e| WiltError::Manifest {
            path: origin.to_path_buf(),
            message: e.to_string(),
        })?;
        Ok(m)
    }

    /// Reads, validates and resolves relative paths.
    pub fn load(path: &Path) -> Result<Manifest> {
        let text = std::fs::read_to_string(path).map_err(|e| WiltError::io(path, e))?;
        let mut m = Manifest::from_json(&text, path)?;
        let base = path.parent().unwrap_or_else(|| Path::new(""));
        m.resolve_paths(base);
        Ok(m)
    }

    pub fn resolve_paths(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        for view in self
            .plants
            .iter_mut()
            .flat_map(|p| p.sessions.iter_mut())
            .flat_map(|s| s.views.iter_mut())
        {
            fix(&mut view.image_path);
            if let Some(s) = view.stem_mask_path.as_mut() {
                fix(s);
            }
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.segmentation.validate()?;
        let mut ids = HashSet::new();
        for p in &self.plants {
            if p.plant_id.is_empty() {
                return Err(WiltError::Validation("empty plant_id".into()));
            }
            if !ids.insert(p.plant_id.as_str()) {
                return Err(WiltError::Validation(format!(
                    "duplicate plant_id `{}`",
                    p.plant_id
                )));
            }
            if let Some(s) = p.expert_score {
                if !(0.0..=1.0).contains(&s) {
                    return Err(WiltError::Validation(format!(
                        "plant {}: expert_score {s} outside [0, 1]",
                        p.plant_id
                    )));
                }
            }
            let mut days = HashSet::new();
            for s in &p.sessions {
                if !days.insert(s.dpi) {
                    return Err(WiltError::Validation(format!(
                        "plant {}: dpi {} listed twice",
                        p.plant_id, s.dpi
                    )));
                }
                for (i, v) in s.views.iter().enumerate() {
                    v.fiducial.validate().map_err(|e| {
                        WiltError::Validation(format!(
                            "plant {} dpi {} view {i}: {e}",
                            p.plant_id, s.dpi
                        ))
                    })?;
                    if let Some(o) = &v.segmentation {
                        self.segmentation.with_overrides(o).validate()?;
                    }
                }
            }
        }
        Ok(())
    }

    pub fn view_count(&self) -> usize {
        self.plants
            .iter()
            .flat_map(|p| &p.sessions)
            .map(|s| s.views.len())
            .sum()
    }

    pub fn plant(&self, id: &str) -> Option<&PlantEntry> {
        self.plants.iter().find(|p| p.plant_id == id)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(self)?;
        std::fs::write(path, text + "\n").map_err(|e| WiltError::io(path, e))
    }
}
