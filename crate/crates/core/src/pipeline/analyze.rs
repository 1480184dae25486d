//! Per-view measurement chain and per-plant-day aggregation.

use std::collections::BTreeMap;

use log::{debug, warn};
use rayon::prelude::*;

use super::manifest::{Manifest, PlantEntry, ViewSpec};
use super::record::{aggregate_views, PlantRecord};
use crate::error::{Result, WiltError};
use crate::metrics::{compute_all, MetricParams, QuotaBasis, ViewMetrics};
use crate::raster::{
    apply_color_transform, estimate_color_transform, load_mask, load_rgb, sample_fiducial,
    FiducialObservation, Mask, RgbImage,
};
use crate::segmentation::{segment_plant, SegmentationParams};

/// Clears the marker's footprint so the fiducial never counts as plant.
pub fn clear_fiducial(mask: &mut Mask, fm: &FiducialObservation) {
    let Some((x0, y0, x1, y1)) = fm.footprint() else {
        return;
    };
    let (w, h) = mask.dims();
    let clamp = |v: i64, hi: usize| v.clamp(0, hi as i64 - 1) as usize;
    if x1 < 0 || y1 < 0 || x0 >= w as i64 || y0 >= h as i64 {
        return;
    }
    for y in clamp(y0, h)..=clamp(y1, h) {
        for x in clamp(x0, w)..=clamp(x1, w) {
            mask.set(x, y, false);
        }
    }
}

/// Color-correct, segment and measure one in-memory view.
pub fn analyze_image(
    image: &RgbImage,
    stem: Option<&Mask>,
    fm: &FiducialObservation,
    seg: &SegmentationParams,
    params: &MetricParams,
) -> Result<ViewMetrics> {
    fm.validate()?;
    let observed = sample_fiducial(image, fm)?;
    let transform = estimate_color_transform(&observed, &fm.reference_colors)?;
    let corrected = apply_color_transform(image, &transform);
    let mut plant = segment_plant(&corrected, seg)?.mask;
    clear_fiducial(&mut plant, fm);
    compute_all(&corrected, &plant, stem, fm, params)
}

pub fn analyze_view(view: &ViewSpec, seg: &SegmentationParams, params: &MetricParams) -> Result<ViewMetrics> {
    let image = load_rgb(&view.image_path)?;
    let stem = view.stem_mask_path.as_deref().map(load_mask).transpose()?;
    let seg = match &view.segmentation {
        Some(o) => seg.with_overrides(o),
        None => seg.clone(),
    };
    analyze_image(&image, stem.as_ref(), &view.fiducial, &seg, params)
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnalyzeOutcome {
    /// One record per plant, ordered by plant_id.
    pub records: Vec<PlantRecord>,
    pub failed_views: usize,
}

fn assemble(
    plants: &[PlantEntry],
    outcomes: Vec<std::result::Result<ViewMetrics, String>>,
) -> AnalyzeOutcome {
    let mut outcomes = outcomes.into_iter();
    let mut failed = 0;
    let mut records: Vec<PlantRecord> = plants
        .iter()
        .map(|p| {
            let days: BTreeMap<i32, _> = p
                .sessions
                .iter()
                .map(|s| {
                    let views: Vec<_> = outcomes.by_ref().take(s.views.len()).collect();
                    let day = aggregate_views(s.dpi, &views);
                    for f in &day.failures {
                        warn!("plant {} dpi {} view {}: {}", p.plant_id, s.dpi, f.view, f.reason);
                    }
                    failed += day.failures.len();
                    (s.dpi, day)
                })
                .collect();
            PlantRecord {
                plant_id: p.plant_id.clone(),
                genotype: p.genotype,
                treatment: p.treatment,
                expert_score: p.expert_score,
                days,
            }
        })
        .collect();
    records.sort_by(|a, b| a.plant_id.cmp(&b.plant_id));
    AnalyzeOutcome {
        records,
        failed_views: failed,
    }
}

fn metric_params(quota_basis: QuotaBasis, plant: &PlantEntry) -> MetricParams {
    MetricParams {
        pot_top_row: plant.pot_top_row,
        quota_basis,
    }
}

/// Processes every view of the manifest on `jobs` workers (all cores when
/// `None`). Output does not depend on the worker count: views are measured
/// independently and reduced in manifest order.
pub fn run_analyze(manifest: &Manifest, jobs: Option<usize>) -> Result<AnalyzeOutcome> {
    manifest.validate()?;
    if manifest.plants.is_empty() {
        warn!("manifest lists no plants");
    }
    let items: Vec<(&PlantEntry, &ViewSpec)> = manifest
        .plants
        .iter()
        .flat_map(|p| p.sessions.iter().flat_map(move |s| s.views.iter().map(move |v| (p, v))))
        .collect();
    let work = || -> Vec<std::result::Result<ViewMetrics, String>> {
        items
            .par_iter()
            .map(|(p, v)| {
                debug!("analyzing {}", v.image_path.display());
                analyze_view(v, &manifest.segmentation, &metric_params(manifest.quota_basis, p))
                    .map_err(|e| e.to_string())
            })
            .collect()
    };
    let outcomes = with_workers(jobs, work)?;
    Ok(assemble(&manifest.plants, outcomes))
}

/// Runs `work` on a pool of `jobs` threads, or the global pool when `None`.
pub fn with_workers<T: Send>(jobs: Option<usize>, work: impl FnOnce() -> T + Send) -> Result<T> {
    match jobs {
        Some(n) => Ok(rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build()
            .map_err(|e| WiltError::Validation(format!("cannot start {n} workers: {e}")))?
            .install(work)),
        None => Ok(work()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::raster::FiducialSquare;

    fn fm() -> FiducialObservation {
        FiducialObservation {
            squares: (0..9)
                .map(|i| FiducialSquare {
                    centroid: [5 + 10 * (i % 3), 5 + 10 * (i / 3)],
                    sample_radius: 2,
                })
                .collect(),
            reference_colors: vec![[0.0; 3]; 9],
            square_side_cm: 0.5,
            square_side_px: 10.0,
        }
    }

    #[test]
    fn fiducial_footprint_is_cleared() {
        let mut m = Mask::new(50, 50, true).unwrap();
        clear_fiducial(&mut m, &fm());
        assert!(!m.get(0, 0) && !m.get(29, 29));
        assert!(m.get(31, 31) && m.get(45, 10));
    }
}
