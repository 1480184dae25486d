//! Synthetic plant scenes with known ground truth.
//!
//! A scene is a straight stem band, elliptical leaves alternating left and
//! right, a pot below the stem and a 3×3 fiducial marker in the top-left
//! corner, imaged under a per-session linear color distortion. Wilting is
//! modelled as a rigid droop of every leaf (down and toward the stem by the
//! same integer number of pixels) plus brown patches covering a growing
//! share of the leaf pixels.

pub mod cohort;
pub mod truth;

use std::f64::consts::{FRAC_PI_4, TAU};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::raster::{FiducialObservation, FiducialSquare, Mask, Raster, Rgb, RgbImage};

pub use cohort::{analyze_cohort, generate, scenarios, PlantScenario, SynthGroup, SynthOutput, SynthParams, TruthFile};
pub use truth::{ground_truth, silhouette, GroundTruth};

pub const WIDTH: usize = 192;
pub const HEIGHT: usize = 160;
/// First pot row; the stem ends on the row above.
pub const POT_TOP: usize = 132;
pub const POT_BOTTOM: usize = 152;
const POT_HALF_WIDTH: f64 = 28.0;

pub const FIDUCIAL_ORIGIN: usize = 4;
pub const FIDUCIAL_SIDE_PX: usize = 10;
pub const FIDUCIAL_SIDE_CM: f64 = 0.52;
const FIDUCIAL_SAMPLE_RADIUS: u32 = 3;

pub const FIDUCIAL_COLORS: [Rgb; 9] = [
    [200, 40, 40],
    [40, 180, 60],
    [50, 60, 190],
    [220, 210, 60],
    [60, 190, 200],
    [190, 70, 180],
    [230, 230, 230],
    [120, 120, 120],
    [30, 30, 30],
];

pub const BACKGROUND: Rgb = [22, 32, 86];
pub const POT: Rgb = [52, 50, 68];
pub const LEAF_GREEN: Rgb = [62, 150, 48];
pub const LEAF_BROWN: Rgb = [150, 108, 46];

const STEM_HALF_WIDTH: f64 = 2.0;
/// Minimum horizontal clearance between a leaf edge and the stem axis.
const LEAF_CLEARANCE: f64 = 22.0;
const LEAF_VERTICAL_STEP: f64 = 9.5;

/// One elliptical leaf. `side` is -1 for left, +1 for right.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LeafSpec {
    pub side: i8,
    pub center_y: i64,
    pub semi_x: u32,
    pub semi_y: u32,
    /// Extra horizontal reach modulated by the view angle.
    pub reach: f64,
    pub azimuth: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlantGeometry {
    pub stem_base_x: f64,
    pub stem_beta: f64,
    pub stem_top: usize,
    pub leaves: Vec<LeafSpec>,
    pub green: Rgb,
}

impl PlantGeometry {
    /// Stem axis column at row `y`.
    pub fn stem_at(&self, y: f64) -> f64 {
        self.stem_base_x + self.stem_beta * (y - POT_TOP as f64)
    }

    pub fn sample(rng: &mut impl Rng) -> PlantGeometry {
        let stem_base_x = WIDTH as f64 / 2.0 + 10.0 + rng.random_range(-4.0..4.0);
        let stem_beta = rng.random_range(-0.08..0.08);
        let stem_top = rng.random_range(30..=36);
        let first_side: i8 = if rng.random::<bool>() { 1 } else { -1 };
        let leaves = (0..7)
            .map(|k| LeafSpec {
                side: if k % 2 == 0 { first_side } else { -first_side },
                center_y: (stem_top as f64 + 8.0 + k as f64 * LEAF_VERTICAL_STEP).round() as i64,
                semi_x: rng.random_range(9..=14),
                semi_y: rng.random_range(4..=6),
                reach: rng.random_range(0.0..8.0),
                azimuth: rng.random_range(0.0..TAU),
            })
            .collect();
        let base = LEAF_GREEN.map(i32::from);
        let green = std::array::from_fn(|c| (base[c] + rng.random_range(-6..=6)) as u8);
        PlantGeometry {
            stem_base_x,
            stem_beta,
            stem_top,
            leaves,
            green,
        }
    }

    /// Leaf center for a view and droop: the undrooped center sits
    /// `semi_x + clearance + reach·|cos(azimuth + view·45°)|` from the stem;
    /// droop moves it `droop` pixels down and `droop` pixels inward.
    pub fn leaf_center(&self, leaf: &LeafSpec, view: usize, droop: i64) -> (i64, i64) {
        let spread = leaf.reach * (leaf.azimuth + view as f64 * FRAC_PI_4).cos().abs();
        let offset = f64::from(leaf.semi_x) + LEAF_CLEARANCE + spread;
        let cx0 = (self.stem_at(leaf.center_y as f64) + f64::from(leaf.side) * offset).round() as i64;
        (cx0 - i64::from(leaf.side) * droop, leaf.center_y + droop)
    }
}

/// Stem band and leaf union before any morphology.
#[derive(Debug, Clone, PartialEq)]
pub struct Shapes {
    pub stem: Mask,
    pub raw: Mask,
}

pub fn render_shapes(g: &PlantGeometry, view: usize, droop: i64) -> Shapes {
    let stem = Raster::from_fn(WIDTH, HEIGHT, |x, y| {
        (g.stem_top..POT_TOP).contains(&y) && (x as f64 - g.stem_at(y as f64)).abs() <= STEM_HALF_WIDTH
    })
    .expect("fixed scene size");
    let mut raw = stem.clone();
    for leaf in &g.leaves {
        let (cx, cy) = g.leaf_center(leaf, view, droop);
        let (a, b) = (i64::from(leaf.semi_x), i64::from(leaf.semi_y));
        for y in (cy - b).max(0)..=(cy + b).min(HEIGHT as i64 - 1) {
            for x in (cx - a).max(0)..=(cx + a).min(WIDTH as i64 - 1) {
                let (dx, dy) = ((x - cx) as f64 / a as f64, (y - cy) as f64 / b as f64);
                if dx * dx + dy * dy <= 1.0 {
                    raw.set(x as usize, y as usize, true);
                }
            }
        }
    }
    Shapes { stem, raw }
}

/// Largest droop keeping every leaf at least 7 px of background away from
/// the stem band and 4 rows above the pot, for every view.
pub fn max_droop(g: &PlantGeometry, views: usize) -> i64 {
    let mut best = i64::MAX;
    for v in 0..views {
        for leaf in &g.leaves {
            let (cx, cy) = g.leaf_center(leaf, v, 0);
            let b = i64::from(leaf.semi_y);
            let down = POT_TOP as i64 - 4 - (cy + b);
            let gap = (cx as f64 - g.stem_at(cy as f64)).abs()
                - f64::from(leaf.semi_x)
                - g.stem_beta.abs() * b as f64
                - STEM_HALF_WIDTH
                - 7.0;
            let inward = (gap / (1.0 + g.stem_beta.abs())).floor() as i64;
            best = best.min(down).min(inward);
        }
    }
    best.max(0)
}

/// Integer droop in pixels for a severity and imaging-day progress.
pub fn droop_px(severity: f64, progress: f64, droop_max: i64) -> i64 {
    (severity * progress * droop_max as f64).round() as i64
}

/// Expected share of leaf pixels rendered brown.
pub fn browning(severity: f64, progress: f64, rate: f64) -> f64 {
    ((severity - 0.4).max(0.0) * rate * progress).clamp(0.0, 1.0)
}

/// Imaging-day progress of the disease: 0 before inoculation, 1 at day 6.
pub fn progress(dpi: i32) -> f64 {
    (f64::from(dpi.max(0)) / 6.0).min(1.0)
}

pub fn fiducial_observation() -> FiducialObservation {
    let squares = (0..9)
        .map(|i| {
            let c = |k: usize| (FIDUCIAL_ORIGIN + k * FIDUCIAL_SIDE_PX + FIDUCIAL_SIDE_PX / 2) as u32;
            FiducialSquare {
                centroid: [c(i % 3), c(i / 3)],
                sample_radius: FIDUCIAL_SAMPLE_RADIUS,
            }
        })
        .collect();
    FiducialObservation {
        squares,
        reference_colors: FIDUCIAL_COLORS.iter().map(|c| c.map(f64::from)).collect(),
        square_side_cm: FIDUCIAL_SIDE_CM,
        square_side_px: FIDUCIAL_SIDE_PX as f64,
    }
}

/// Random illumination: dominant diagonal, small non-negative crosstalk,
/// every column summing below one so no channel saturates.
pub fn sample_distortion(rng: &mut impl Rng) -> [[f64; 3]; 3] {
    std::array::from_fn(|i| {
        std::array::from_fn(|j| {
            if i == j {
                rng.random_range(0.86..0.90)
            } else {
                rng.random_range(0.0..0.04)
            }
        })
    })
}

/// `p · D`, rounded and clamped.
pub fn distort(p: Rgb, d: &[[f64; 3]; 3]) -> Rgb {
    let p = p.map(f64::from);
    std::array::from_fn(|j| (p[0] * d[0][j] + p[1] * d[1][j] + p[2] * d[2][j]).round().clamp(0.0, 255.0) as u8)
}

fn noisy(base: [f64; 3], noise: i32, rng: &mut impl Rng) -> Rgb {
    base.map(|c| {
        let n = if noise > 0 { rng.random_range(-noise..=noise) } else { 0 };
        (c.round() + f64::from(n)).clamp(0.0, 255.0) as u8
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ViewScene {
    /// Colors as they would appear under neutral illumination.
    pub true_image: RgbImage,
    /// What the camera records: `true_image` through the distortion.
    pub observed: RgbImage,
    pub shapes: Shapes,
    pub fiducial: FiducialObservation,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RenderSettings {
    pub droop: i64,
    pub browning: f64,
    pub noise: i32,
    pub distortion: [[f64; 3]; 3],
    pub seed: u64,
}

pub fn render_view(g: &PlantGeometry, view: usize, s: &RenderSettings) -> ViewScene {
    let shapes = render_shapes(g, view, s.droop);
    let mut rng = ChaCha8Rng::seed_from_u64(s.seed);
    let green = g.green.map(f64::from);
    let brown = LEAF_BROWN.map(f64::from);
    let fid_end = FIDUCIAL_ORIGIN + 3 * FIDUCIAL_SIDE_PX;
    let pot_x = (g.stem_base_x - POT_HALF_WIDTH, g.stem_base_x + POT_HALF_WIDTH);
    let true_image = Raster::from_fn(WIDTH, HEIGHT, |x, y| {
        if (FIDUCIAL_ORIGIN..fid_end).contains(&x) && (FIDUCIAL_ORIGIN..fid_end).contains(&y) {
            let k = (y - FIDUCIAL_ORIGIN) / FIDUCIAL_SIDE_PX * 3 + (x - FIDUCIAL_ORIGIN) / FIDUCIAL_SIDE_PX;
            return FIDUCIAL_COLORS[k];
        }
        let base = if shapes.raw.get(x, y) {
            if rng.random::<f64>() < s.browning {
                brown
            } else {
                green
            }
        } else if (POT_TOP..POT_BOTTOM).contains(&y) && (pot_x.0..=pot_x.1).contains(&(x as f64)) {
            POT.map(f64::from)
        } else {
            BACKGROUND.map(f64::from)
        };
        noisy(base, s.noise, &mut rng)
    })
    .expect("fixed scene size");
    let observed = true_image.map(|&p| distort(p, &s.distortion));
    ViewScene {
        true_image,
        observed,
        shapes,
        fiducial: fiducial_observation(),
    }
}
