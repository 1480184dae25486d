//! Synthetic cohorts: plant groups with known wilting severity imaged over
//! several days, written to disk as a manifest or analyzed in memory.

use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::truth::{ground_truth, silhouette};
use super::{
    browning, droop_px, fiducial_observation, max_droop, progress, render_shapes, render_view, sample_distortion,
    PlantGeometry, RenderSettings, ViewScene, POT_TOP,
};
use crate::error::{Result, WiltError};
use crate::metrics::{MetricParams, METRIC_NAMES};
use crate::pipeline::analyze::analyze_image;
use crate::pipeline::manifest::{Manifest, PlantEntry, Session, ViewSpec};
use crate::pipeline::record::{aggregate_views, DayRecord, Genotype, PlantRecord, Treatment};
use crate::raster::{pixel_resolution, save_mask, save_rgb, Mask};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SynthGroup {
    pub genotype: Genotype,
    pub treatment: Treatment,
    pub count: usize,
    /// Severity is drawn uniformly from `[lo, hi]`.
    pub severity: (f64, f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthParams {
    pub seed: u64,
    pub views: usize,
    pub dpi: Vec<i32>,
    pub droop_max_px: i64,
    pub browning_rate: f64,
    /// Day-to-day posture change: every session adds a uniform integer
    /// droop in `[-posture_jitter_px, posture_jitter_px]`.
    pub posture_jitter_px: i64,
    pub noise: i32,
    pub groups: Vec<SynthGroup>,
}

impl Default for SynthParams {
    fn default() -> Self {
        let g = |genotype, treatment, count, severity| SynthGroup {
            genotype,
            treatment,
            count,
            severity,
        };
        SynthParams {
            seed: 0,
            views: 8,
            dpi: vec![-1, 3, 4, 5, 6],
            droop_max_px: 10,
            browning_rate: 1.5,
            posture_jitter_px: 1,
            noise: 3,
            groups: vec![
                g(Genotype::HA, Treatment::Inoculated, 61, (0.0, 0.3)),
                g(Genotype::WV, Treatment::Inoculated, 61, (0.6, 1.0)),
                g(Genotype::HA, Treatment::Mock, 18, (0.0, 0.1)),
                g(Genotype::WV, Treatment::Mock, 18, (0.0, 0.1)),
            ],
        }
    }
}

impl SynthParams {
    pub fn from_json(text: &str) -> Result<SynthParams> {
        let p: SynthParams = serde_json::from_str(text)?;
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(WiltError::Validation(m));
        if self.views == 0 || self.dpi.is_empty() {
            return bad("need at least one view and one dpi".into());
        }
        if self.droop_max_px < 0 || self.posture_jitter_px < 0 || self.noise < 0 || self.browning_rate.is_nan() || self.browning_rate < 0.0 {
            return bad("droop_max_px, posture_jitter_px, noise and browning_rate must be non-negative".into());
        }
        for g in &self.groups {
            let (lo, hi) = g.severity;
            if !(0.0 <= lo && lo <= hi && hi <= 1.0) {
                return bad(format!("severity range ({lo}, {hi}) must satisfy 0 <= lo <= hi <= 1"));
            }
        }
        Ok(())
    }
}

/// Everything needed to re-render one plant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlantScenario {
    pub plant_id: String,
    pub genotype: Genotype,
    pub treatment: Treatment,
    pub severity: f64,
    pub expert_score: Option<f64>,
    pub geometry: PlantGeometry,
    pub sessions: Vec<SessionScenario>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionScenario {
    pub dpi: i32,
    /// Total droop, posture jitter included.
    pub droop_px: i64,
    pub posture_px: i64,
    pub browning: f64,
    pub distortion: [[f64; 3]; 3],
    pub render_seed: u64,
}

impl PlantScenario {
    pub fn render(&self, session: usize, view: usize, noise: i32) -> ViewScene {
        let s = &self.sessions[session];
        render_view(
            &self.geometry,
            view,
            &RenderSettings {
                droop: s.droop_px,
                browning: s.browning,
                noise,
                distortion: s.distortion,
                seed: s.render_seed.wrapping_add(view as u64),
            },
        )
    }

    pub fn stem(&self) -> Mask {
        render_shapes(&self.geometry, 0, 0).stem
    }
}

fn group_prefix(g: &SynthGroup) -> String {
    let t = match g.treatment {
        Treatment::Inoculated => "inoc",
        Treatment::Mock => "mock",
    };
    format!("{t}_{}", g.genotype.to_string().to_lowercase())
}

/// Deterministic plant scenarios; each plant draws from its own stream.
pub fn scenarios(params: &SynthParams) -> Result<Vec<PlantScenario>> {
    params.validate()?;
    let mut out = Vec::new();
    for g in &params.groups {
        for i in 0..g.count {
            let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
            rng.set_stream(out.len() as u64);
            let geometry = PlantGeometry::sample(&mut rng);
            let (lo, hi) = g.severity;
            let severity = if hi > lo { rng.random_range(lo..=hi) } else { lo };
            let jitter = params.posture_jitter_px;
            let cap = params.droop_max_px.min(max_droop(&geometry, params.views) - jitter).max(0);
            let sessions = params
                .dpi
                .iter()
                .map(|&dpi| {
                    let p = progress(dpi);
                    let posture = rng.random_range(-jitter..=jitter);
                    SessionScenario {
                        dpi,
                        droop_px: droop_px(severity, p, cap) + posture,
                        posture_px: posture,
                        browning: browning(severity, p, params.browning_rate),
                        distortion: sample_distortion(&mut rng),
                        render_seed: rng.random(),
                    }
                })
                .collect();
            out.push(PlantScenario {
                plant_id: format!("{}_{:03}", group_prefix(g), i + 1),
                genotype: g.genotype,
                treatment: g.treatment,
                severity,
                expert_score: (g.treatment == Treatment::Inoculated).then_some(severity),
                geometry,
                sessions,
            });
        }
    }
    Ok(out)
}

fn image_rel(plant: &str, dpi: i32, view: usize) -> PathBuf {
    PathBuf::from("images").join(format!("{plant}_d{dpi}_v{view}.png"))
}

fn stem_rel(plant: &str) -> PathBuf {
    PathBuf::from("stems").join(format!("{plant}.png"))
}

/// The manifest describing a generated cohort, paths relative to its root.
pub fn cohort_manifest(params: &SynthParams, plants: &[PlantScenario]) -> Manifest {
    let plants = plants
        .iter()
        .map(|p| PlantEntry {
            plant_id: p.plant_id.clone(),
            genotype: p.genotype,
            treatment: p.treatment,
            expert_score: p.expert_score,
            pot_top_row: Some(POT_TOP),
            sessions: p
                .sessions
                .iter()
                .map(|s| Session {
                    dpi: s.dpi,
                    views: (0..params.views)
                        .map(|v| ViewSpec {
                            image_path: image_rel(&p.plant_id, s.dpi, v),
                            stem_mask_path: Some(stem_rel(&p.plant_id)),
                            fiducial: fiducial_observation(),
                            segmentation: None,
                        })
                        .collect(),
                })
                .collect(),
        })
        .collect();
    Manifest {
        plants,
        ..Manifest::default()
    }
}

/// Expected metrics of one view, in table column order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ViewTruth {
    pub plant_id: String,
    pub dpi: i32,
    pub view: usize,
    pub metrics: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TruthFile {
    pub params: SynthParams,
    pub metric_names: Vec<String>,
    pub plants: Vec<PlantScenario>,
    pub views: Vec<ViewTruth>,
}

#[derive(Debug, Clone)]
pub struct SynthOutput {
    pub manifest_path: PathBuf,
    pub manifest: Manifest,
    pub truth: TruthFile,
}

fn view_truth(p: &PlantScenario, scene: &ViewScene, stem: &Mask, dpi: i32, view: usize) -> Result<ViewTruth> {
    let res = pixel_resolution(&scene.fiducial)?.cm_per_pixel();
    let sil = silhouette(&scene.shapes.raw);
    let gt = ground_truth(&sil, stem, &scene.true_image, POT_TOP, res, Default::default()).ok_or_else(|| {
        WiltError::Validation(format!("plant {} dpi {dpi} view {view}: degenerate scene", p.plant_id))
    })?;
    Ok(ViewTruth {
        plant_id: p.plant_id.clone(),
        dpi,
        view,
        metrics: gt.values().to_vec(),
    })
}

/// Writes `images/`, `stems/`, `manifest.json` and `ground_truth.json`
/// under `out_dir`.
pub fn generate(params: &SynthParams, out_dir: &Path) -> Result<SynthOutput> {
    let plants = scenarios(params)?;
    for sub in ["images", "stems"] {
        let d = out_dir.join(sub);
        std::fs::create_dir_all(&d).map_err(|e| WiltError::io(&d, e))?;
    }
    let per_plant: Vec<Vec<ViewTruth>> = plants
        .par_iter()
        .map(|p| {
            let stem = p.stem();
            save_mask(&stem, &out_dir.join(stem_rel(&p.plant_id)))?;
            let mut truths = Vec::new();
            for (si, s) in p.sessions.iter().enumerate() {
                for v in 0..params.views {
                    let scene = p.render(si, v, params.noise);
                    save_rgb(&scene.observed, &out_dir.join(image_rel(&p.plant_id, s.dpi, v)))?;
                    truths.push(view_truth(p, &scene, &stem, s.dpi, v)?);
                }
            }
            Ok(truths)
        })
        .collect::<Result<_>>()?;
    let manifest = cohort_manifest(params, &plants);
    let manifest_path = out_dir.join("manifest.json");
    manifest.save(&manifest_path)?;
    let truth = TruthFile {
        params: params.clone(),
        metric_names: METRIC_NAMES.iter().map(|s| s.to_string()).collect(),
        plants,
        views: per_plant.into_iter().flatten().collect(),
    };
    let path = out_dir.join("ground_truth.json");
    let text = serde_json::to_string(&truth)?;
    std::fs::write(&path, text).map_err(|e| WiltError::io(&path, e))?;
    Ok(SynthOutput {
        manifest_path,
        manifest,
        truth,
    })
}

/// Renders and analyzes a cohort without touching disk. Returns the
/// manifest the cohort would have on disk and one record per plant, in
/// plant-id order.
pub fn analyze_cohort(params: &SynthParams) -> Result<(Manifest, Vec<PlantRecord>)> {
    let plants = scenarios(params)?;
    let manifest = cohort_manifest(params, &plants);
    let metric_params = MetricParams {
        pot_top_row: Some(POT_TOP),
        quota_basis: manifest.quota_basis,
    };
    let mut records: Vec<PlantRecord> = plants
        .par_iter()
        .map(|p| {
            let stem = p.stem();
            let days = p
                .sessions
                .iter()
                .enumerate()
                .map(|(si, s)| {
                    let outcomes: Vec<_> = (0..params.views)
                        .map(|v| {
                            let scene = p.render(si, v, params.noise);
                            analyze_image(
                                &scene.observed,
                                Some(&stem),
                                &scene.fiducial,
                                &manifest.segmentation,
                                &metric_params,
                            )
                            .map_err(|e| e.to_string())
                        })
                        .collect();
                    (s.dpi, aggregate_views(s.dpi, &outcomes))
                })
                .collect::<std::collections::BTreeMap<i32, DayRecord>>();
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
    Ok((manifest, records))
}
