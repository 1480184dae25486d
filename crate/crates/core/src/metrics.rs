//! Per-image wilting metrics.
//!
//! Every length is reported in centimeters and every area in square
//! centimeters via the fiducial pixel resolution. Vertical distributions are
//! heights above the pot edge `y_bot`; horizontal distributions are
//! distances from the stem line.

use serde::{Deserialize, Serialize};

use crate::error::{Result, WiltError};
use crate::geometry::{
    centroid_x, convex_hull, fit_stem_line, horizontal_profile, mask_perimeter_px, rectify_halves,
    split_mask, vertical_profile, HalfMasks, Profile, StemLine,
};
use crate::raster::{pixel_resolution, srgb_to_lab, FiducialObservation, Mask, PixelResolution, RgbImage};

pub const HISTOGRAM_BINS: usize = 256;

/// Quantiles sampled by the vertical and horizontal distributions.
pub const DISTRIBUTION_QUANTILES: [u32; 3] = [33, 66, 90];

/// Share of the plant trimmed from the top before measuring height, percent.
pub const HEIGHT_TRIM_PERCENT: u64 = 5;

/// Fixed field order of [`MetricVector`] for tables and feature vectors.
pub const METRIC_NAMES: [&str; 14] = [
    "plant_area",
    "plant_width",
    "plant_height",
    "hull_area",
    "hull_perimeter",
    "mask_perimeter",
    "cm_hor_dis",
    "cm_height",
    "v33",
    "v66",
    "v90",
    "h33",
    "h66",
    "h90",
];

/// Denominator used for the distribution quotas.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum QuotaBasis {
    /// Pixel count of the whole plant mask.
    #[default]
    Full,
    /// Pixel count of the half being measured.
    Half,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlantBaseline {
    pub y_bot: usize,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct MetricFlags {
    /// Stem mask missing or unusable; the plant-centroid vertical was used.
    pub degenerate_stem: bool,
    /// A distribution quota exceeded the pixels of a half.
    pub quantile_saturated: bool,
    /// The 5% line fell below `y_bot`; height reported as zero.
    pub height_clamped: bool,
    /// Fewer than three non-collinear pixels; hull area set to zero.
    pub degenerate_hull: bool,
    /// At least one half is empty so CM and distribution metrics are absent.
    pub undefined_cm: bool,
}

impl MetricFlags {
    const NAMES: [&'static str; 5] = [
        "degenerate_stem",
        "quantile_saturated",
        "height_clamped",
        "degenerate_hull",
        "undefined_cm",
    ];

    fn bits(&self) -> [bool; 5] {
        [
            self.degenerate_stem,
            self.quantile_saturated,
            self.height_clamped,
            self.degenerate_hull,
            self.undefined_cm,
        ]
    }

    pub fn union(&self, other: &MetricFlags) -> MetricFlags {
        let (a, b) = (self.bits(), other.bits());
        let u: [bool; 5] = std::array::from_fn(|i| a[i] || b[i]);
        MetricFlags {
            degenerate_stem: u[0],
            quantile_saturated: u[1],
            height_clamped: u[2],
            degenerate_hull: u[3],
            undefined_cm: u[4],
        }
    }

    /// `|`-separated names of the raised flags, empty when none.
    pub fn to_field(&self) -> String {
        Self::NAMES
            .iter()
            .zip(self.bits())
            .filter(|(_, b)| *b)
            .map(|(n, _)| *n)
            .collect::<Vec<_>>()
            .join("|")
    }

    pub fn from_field(s: &str) -> Result<MetricFlags> {
        let mut f = MetricFlags::default();
        for name in s.split('|').map(str::trim).filter(|n| !n.is_empty()) {
            match name {
                "degenerate_stem" => f.degenerate_stem = true,
                "quantile_saturated" => f.quantile_saturated = true,
                "height_clamped" => f.height_clamped = true,
                "degenerate_hull" => f.degenerate_hull = true,
                "undefined_cm" => f.undefined_cm = true,
                other => return Err(WiltError::Validation(format!("unknown flag `{other}`"))),
            }
        }
        Ok(f)
    }
}

/// Full per-image metric set. `None` marks a metric that is undefined for
/// the view (empty half, empty mask).
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct MetricVector {
    pub plant_area: Option<f64>,
    pub plant_width: Option<f64>,
    pub plant_height: Option<f64>,
    pub hull_area: Option<f64>,
    pub hull_perimeter: Option<f64>,
    pub mask_perimeter: Option<f64>,
    pub cm_hor_dis: Option<f64>,
    pub cm_height: Option<f64>,
    pub v33: Option<f64>,
    pub v66: Option<f64>,
    pub v90: Option<f64>,
    pub h33: Option<f64>,
    pub h66: Option<f64>,
    pub h90: Option<f64>,
    pub flags: MetricFlags,
}

impl MetricVector {
    /// Values in [`METRIC_NAMES`] order.
    pub fn values(&self) -> [Option<f64>; 14] {
        [
            self.plant_area,
            self.plant_width,
            self.plant_height,
            self.hull_area,
            self.hull_perimeter,
            self.mask_perimeter,
            self.cm_hor_dis,
            self.cm_height,
            self.v33,
            self.v66,
            self.v90,
            self.h33,
            self.h66,
            self.h90,
        ]
    }

    pub fn from_values(v: [Option<f64>; 14], flags: MetricFlags) -> MetricVector {
        MetricVector {
            plant_area: v[0],
            plant_width: v[1],
            plant_height: v[2],
            hull_area: v[3],
            hull_perimeter: v[4],
            mask_perimeter: v[5],
            cm_hor_dis: v[6],
            cm_height: v[7],
            v33: v[8],
            v66: v[9],
            v90: v[10],
            h33: v[11],
            h66: v[12],
            h90: v[13],
            flags,
        }
    }

    pub fn index_of(name: &str) -> Result<usize> {
        METRIC_NAMES
            .iter()
            .position(|&n| n == name)
            .ok_or_else(|| WiltError::UnknownMetric {
                name: name.to_string(),
                valid: METRIC_NAMES.join(", "),
            })
    }

    pub fn get(&self, name: &str) -> Result<Option<f64>> {
        Ok(self.values()[Self::index_of(name)?])
    }
}

/// Counts of scaled a* values over plant pixels.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AStarHistogram {
    pub bins: Vec<u64>,
}

impl Default for AStarHistogram {
    fn default() -> Self {
        AStarHistogram {
            bins: vec![0; HISTOGRAM_BINS],
        }
    }
}

impl AStarHistogram {
    pub fn total(&self) -> u64 {
        self.bins.iter().sum()
    }

    /// Probabilities summing to one; `None` for an empty histogram.
    pub fn normalized(&self) -> Option<Vec<f64>> {
        let total = self.total();
        (total > 0).then(|| self.bins.iter().map(|&c| c as f64 / total as f64).collect())
    }

    pub fn add(&mut self, other: &AStarHistogram) {
        for (a, b) in self.bins.iter_mut().zip(&other.bins) {
            *a += b;
        }
    }

    #[inline]
    pub fn bin_of(astar_scaled: f64) -> usize {
        astar_scaled.round().clamp(0.0, 255.0) as usize
    }
}

pub fn plant_area(mask: &Mask, res: &PixelResolution) -> f64 {
    res.area(mask.count() as f64)
}

/// Distance between the first and last populated columns.
pub fn plant_width(mask: &Mask, res: &PixelResolution) -> Option<f64> {
    let prof = vertical_profile(mask);
    let (l, r) = (prof.first_nonzero()?, prof.last_nonzero()?);
    Some(res.length((r - l) as f64))
}

/// Smallest index where the running sum reaches `num / den` of `total`.
/// Saturates to the last populated index when the quota is out of reach.
fn quota_index(profile: &Profile, num: u64, den: u64, total: u64) -> Option<(usize, bool)> {
    let last = profile.last_nonzero()?;
    let mut cum = 0u64;
    for (i, &v) in profile.values.iter().enumerate() {
        cum += v;
        if cum > 0 && cum * den >= num * total {
            return Some((i, false));
        }
    }
    Some((last, true))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HeightMeasure {
    pub height: f64,
    pub y_top: usize,
    pub clamped: bool,
}

/// Height from the 5% material line down to `y_bot`.
pub fn plant_height(mask: &Mask, baseline: PlantBaseline, res: &PixelResolution) -> Option<HeightMeasure> {
    let prof = horizontal_profile(mask);
    let total = prof.total();
    let (y_top, _) = quota_index(&prof, HEIGHT_TRIM_PERCENT, 100, total)?;
    if baseline.y_bot < y_top {
        return Some(HeightMeasure {
            height: 0.0,
            y_top,
            clamped: true,
        });
    }
    Some(HeightMeasure {
        height: res.length((baseline.y_bot - y_top) as f64),
        y_top,
        clamped: false,
    })
}

/// First moments `(x, y)` of a mask.
pub fn center_of_mass(mask: &Mask) -> Option<(f64, f64)> {
    let (mut sx, mut sy, mut n) = (0.0, 0.0, 0u64);
    for (x, y) in mask.set_pixels() {
        sx += x as f64;
        sy += y as f64;
        n += 1;
    }
    (n > 0).then(|| (sx / n as f64, sy / n as f64))
}

pub type CenterPair = (Option<(f64, f64)>, Option<(f64, f64)>);

pub fn centers_of_mass(halves: &HalfMasks) -> CenterPair {
    (center_of_mass(&halves.left), center_of_mass(&halves.right))
}

/// `(cm_hor_dis, cm_height)`; undefined unless both centers exist.
pub fn cm_metrics(cms: CenterPair, baseline: PlantBaseline, res: &PixelResolution) -> Option<(f64, f64)> {
    let (l, r) = (cms.0?, cms.1?);
    let y_bot = baseline.y_bot as f64;
    let hor = res.length(r.0 - l.0);
    let height = res.length(((y_bot - l.1) + (y_bot - r.1)) / 2.0);
    Some((hor, height))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DistributionMeasure {
    pub value: f64,
    /// Row (vertical) or rectified column (horizontal) for left and right.
    pub lines: (usize, usize),
    pub saturated: bool,
}

fn half_totals(halves: &HalfMasks, plant_total: u64, basis: QuotaBasis) -> (u64, u64) {
    match basis {
        QuotaBasis::Full => (plant_total, plant_total),
        QuotaBasis::Half => (halves.left.count(), halves.right.count()),
    }
}

/// Vertical q% line: accumulating rows from the top, the first row where a
/// half holds `(100 - q)%` of the basis, averaged over both halves and
/// reported as a height above `y_bot`.
pub fn vertical_distribution(
    halves: &HalfMasks,
    q: u32,
    plant_total: u64,
    basis: QuotaBasis,
    baseline: PlantBaseline,
    res: &PixelResolution,
) -> Option<DistributionMeasure> {
    let (tl, tr) = half_totals(halves, plant_total, basis);
    let share = 100 - u64::from(q.min(100));
    let (l, sl) = quota_index(&horizontal_profile(&halves.left), share, 100, tl)?;
    let (r, sr) = quota_index(&horizontal_profile(&halves.right), share, 100, tr)?;
    let mean_row = (l as f64 + r as f64) / 2.0;
    Some(DistributionMeasure {
        value: res.length(baseline.y_bot as f64 - mean_row),
        lines: (l, r),
        saturated: sl || sr,
    })
}

/// Horizontal q% line: accumulating rectified columns outward from the
/// stem, the first column where a half holds `q%` of the basis. The value
/// is the sum of the left and right distances.
pub fn horizontal_distribution(
    rectified: &HalfMasks,
    q: u32,
    plant_total: u64,
    basis: QuotaBasis,
    res: &PixelResolution,
) -> Option<DistributionMeasure> {
    let (tl, tr) = half_totals(rectified, plant_total, basis);
    let share = u64::from(q.min(100));
    let (l, sl) = quota_index(&vertical_profile(&rectified.left), share, 100, tl)?;
    let (r, sr) = quota_index(&vertical_profile(&rectified.right), share, 100, tr)?;
    Some(DistributionMeasure {
        value: res.length((l + r) as f64),
        lines: (l, r),
        saturated: sl || sr,
    })
}

/// Histogram of scaled a* over the masked pixels.
pub fn astar_histogram(image: &RgbImage, mask: &Mask) -> Result<AStarHistogram> {
    image.same_dims(mask)?;
    let mut hist = AStarHistogram::default();
    for (&p, &m) in image.data().iter().zip(mask.data()) {
        if m {
            hist.bins[AStarHistogram::bin_of(srgb_to_lab(p)[1])] += 1;
        }
    }
    if hist.total() == 0 {
        return Err(WiltError::EmptyMask);
    }
    Ok(hist)
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct MetricParams {
    /// Row of the pot's upper edge; the lowest plant row when absent.
    pub pot_top_row: Option<usize>,
    pub quota_basis: QuotaBasis,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ViewMetrics {
    pub metrics: MetricVector,
    pub histogram: AStarHistogram,
    pub stem_line: StemLine,
}

/// Runs every metric on one color-corrected view. An empty plant mask is a
/// failed view.
pub fn compute_all(
    image: &RgbImage,
    plant: &Mask,
    stem: Option<&Mask>,
    fm: &FiducialObservation,
    params: &MetricParams,
) -> Result<ViewMetrics> {
    image.same_dims(plant)?;
    if let Some(s) = stem {
        image.same_dims(s)?;
    }
    let res = pixel_resolution(fm)?;
    let total = plant.count();
    if total == 0 {
        return Err(WiltError::EmptyMask);
    }
    let prof = horizontal_profile(plant);
    let y_bot = match params.pot_top_row {
        Some(r) if r >= plant.height() => {
            return Err(WiltError::Validation(format!(
                "pot_top_row {r} outside image of height {}",
                plant.height()
            )))
        }
        Some(r) => r,
        None => prof.last_nonzero().expect("non-empty mask"),
    };
    let baseline = PlantBaseline { y_bot };
    let mut flags = MetricFlags::default();

    let height = plant_height(plant, baseline, &res).expect("non-empty mask");
    flags.height_clamped = height.clamped;

    let (hull_area, hull_perimeter) = match convex_hull(plant, &res) {
        Ok(h) => (h.area, h.perimeter),
        Err(WiltError::DegenerateHull { perimeter_px }) => {
            flags.degenerate_hull = true;
            (0.0, res.length(perimeter_px))
        }
        Err(e) => return Err(e),
    };

    let stem_line = match stem.map(fit_stem_line) {
        Some(Ok(line)) => line,
        _ => {
            flags.degenerate_stem = true;
            StemLine::vertical(centroid_x(plant).expect("non-empty mask"))
        }
    };
    let halves = split_mask(plant, &stem_line);
    let cm = cm_metrics(centers_of_mass(&halves), baseline, &res);
    flags.undefined_cm = cm.is_none();

    let rectified = rectify_halves(&halves, &stem_line);
    let mut v = [None; 3];
    let mut h = [None; 3];
    for (i, &q) in DISTRIBUTION_QUANTILES.iter().enumerate() {
        if let Some(d) = vertical_distribution(&halves, q, total, params.quota_basis, baseline, &res) {
            flags.quantile_saturated |= d.saturated;
            v[i] = Some(d.value);
        }
        if let Some(d) = horizontal_distribution(&rectified, q, total, params.quota_basis, &res) {
            flags.quantile_saturated |= d.saturated;
            h[i] = Some(d.value);
        }
    }

    let metrics = MetricVector {
        plant_area: Some(plant_area(plant, &res)),
        plant_width: plant_width(plant, &res),
        plant_height: Some(height.height),
        hull_area: Some(hull_area),
        hull_perimeter: Some(hull_perimeter),
        mask_perimeter: Some(res.length(mask_perimeter_px(plant) as f64)),
        cm_hor_dis: cm.map(|c| c.0),
        cm_height: cm.map(|c| c.1),
        v33: v[0],
        v66: v[1],
        v90: v[2],
        h33: h[0],
        h66: h[1],
        h90: h[2],
        flags,
    };
    Ok(ViewMetrics {
        metrics,
        histogram: astar_histogram(image, plant)?,
        stem_line,
    })
}
