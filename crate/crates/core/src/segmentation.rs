//! Plant segmentation: dual-channel thresholding (HSV value and scaled
//! L*a*b* b*) joined by logical OR, then square-element morphology.

use serde::{Deserialize, Serialize};

use crate::error::{Result, WiltError};
use crate::raster::{bstar_plane, value_plane, Mask, Plane, Raster, RgbImage};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SegmentationParams {
    pub v_threshold: f64,
    pub bstar_threshold: f64,
    pub v_keep_above: bool,
    pub bstar_keep_above: bool,
    pub se_size: usize,
    pub cleanup_rounds: usize,
}

impl Default for SegmentationParams {
    fn default() -> Self {
        SegmentationParams {
            v_threshold: 140.0,
            bstar_threshold: 130.0,
            v_keep_above: true,
            bstar_keep_above: true,
            se_size: 3,
            cleanup_rounds: 1,
        }
    }
}

impl SegmentationParams {
    pub fn validate(&self) -> Result<()> {
        for (name, t) in [("v_threshold", self.v_threshold), ("bstar_threshold", self.bstar_threshold)] {
            if !(0.0..=255.0).contains(&t) {
                return Err(WiltError::Validation(format!("{name} must lie in [0, 255], got {t}")));
            }
        }
        SquareElement::new(self.se_size)?;
        Ok(())
    }

    pub fn with_overrides(&self, o: &SegmentationOverrides) -> SegmentationParams {
        SegmentationParams {
            v_threshold: o.v_threshold.unwrap_or(self.v_threshold),
            bstar_threshold: o.bstar_threshold.unwrap_or(self.bstar_threshold),
            v_keep_above: o.v_keep_above.unwrap_or(self.v_keep_above),
            bstar_keep_above: o.bstar_keep_above.unwrap_or(self.bstar_keep_above),
            se_size: o.se_size.unwrap_or(self.se_size),
            cleanup_rounds: o.cleanup_rounds.unwrap_or(self.cleanup_rounds),
        }
    }
}

/// Per-view partial parameter set; unset keys inherit the run defaults.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SegmentationOverrides {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub v_threshold: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bstar_threshold: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub v_keep_above: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bstar_keep_above: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub se_size: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cleanup_rounds: Option<usize>,
}

/// All-ones square structuring element with odd side length.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SquareElement {
    radius: usize,
}

impl SquareElement {
    pub fn new(side: usize) -> Result<Self> {
        if side == 0 || side.is_multiple_of(2) {
            return Err(WiltError::Validation(format!(
                "structuring element side must be odd and >= 1, got {side}"
            )));
        }
        Ok(SquareElement { radius: side / 2 })
    }

    pub fn radius(&self) -> usize {
        self.radius
    }

    pub fn side(&self) -> usize {
        2 * self.radius + 1
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlantMask {
    pub mask: Mask,
    pub coverage: f64,
}

impl PlantMask {
    pub fn from_mask(mask: Mask) -> Self {
        let coverage = mask.count() as f64 / (mask.width() * mask.height()) as f64;
        PlantMask { mask, coverage }
    }

    /// An empty mask marks a segmentation failure for the view.
    pub fn is_empty(&self) -> bool {
        self.coverage == 0.0
    }
}

/// Inclusive threshold: `v >= t` when keeping above, else `v <= t`.
pub fn threshold_channel(plane: &Plane, threshold: f64, keep_above: bool) -> Mask {
    if keep_above {
        plane.map(|&v| v >= threshold)
    } else {
        plane.map(|&v| v <= threshold)
    }
}

pub fn combine_or(a: &Mask, b: &Mask) -> Result<Mask> {
    a.same_dims(b)?;
    let data = a.data().iter().zip(b.data()).map(|(&p, &q)| p || q).collect();
    Raster::from_vec(a.width(), a.height(), data)
}

/// Running window count along a line of `len` samples read through `get`.
/// Positions outside the line count as background.
fn window_pass(
    len: usize,
    radius: usize,
    get: impl Fn(usize) -> bool,
    out: &mut [bool],
    prefix: &mut Vec<usize>,
    erode: bool,
) {
    let full = 2 * radius + 1;
    prefix.clear();
    prefix.push(0usize);
    for i in 0..len {
        prefix.push(prefix[i] + get(i) as usize);
    }
    for (i, o) in out.iter_mut().enumerate().take(len) {
        let lo = i.saturating_sub(radius);
        let hi = (i + radius + 1).min(len);
        let n = prefix[hi] - prefix[lo];
        *o = if erode { n == full } else { n > 0 };
    }
}

fn separable(mask: &Mask, se: SquareElement, erode: bool) -> Mask {
    let (w, h) = mask.dims();
    let r = se.radius();
    if r == 0 {
        return mask.clone();
    }
    let src = mask.data();
    let mut prefix = Vec::with_capacity(w.max(h) + 1);
    let mut rows = vec![false; w * h];
    for y in 0..h {
        window_pass(w, r, |x| src[y * w + x], &mut rows[y * w..(y + 1) * w], &mut prefix, erode);
    }
    // vertical pass: sliding per-column counts, one row at a time
    let full = 2 * r + 1;
    let mut count = vec![0usize; w];
    for y in 0..r.min(h) {
        for (c, &v) in count.iter_mut().zip(&rows[y * w..(y + 1) * w]) {
            *c += v as usize;
        }
    }
    let mut out = vec![false; w * h];
    for y in 0..h {
        if y + r < h {
            for (c, &v) in count.iter_mut().zip(&rows[(y + r) * w..(y + r + 1) * w]) {
                *c += v as usize;
            }
        }
        for (o, &c) in out[y * w..(y + 1) * w].iter_mut().zip(&count) {
            *o = if erode { c == full } else { c > 0 };
        }
        if y >= r {
            for (c, &v) in count.iter_mut().zip(&rows[(y - r) * w..(y - r + 1) * w]) {
                *c -= v as usize;
            }
        }
    }
    Raster::from_vec(w, h, out).expect("dimensions preserved")
}

/// A pixel survives iff the whole element around it is inside the image
/// and set.
pub fn erode(mask: &Mask, se: SquareElement) -> Mask {
    separable(mask, se, true)
}

/// A pixel is set iff any in-image pixel under the element is set.
pub fn dilate(mask: &Mask, se: SquareElement) -> Mask {
    separable(mask, se, false)
}

pub fn morph_open(mask: &Mask, se: SquareElement) -> Mask {
    dilate(&erode(mask, se), se)
}

pub fn morph_close(mask: &Mask, se: SquareElement) -> Mask {
    erode(&dilate(mask, se), se)
}

/// Thresholded channels OR-ed together, before any morphology.
pub fn raw_plant_mask(image: &RgbImage, params: &SegmentationParams) -> Mask {
    let v = threshold_channel(&value_plane(image), params.v_threshold, params.v_keep_above);
    let b = threshold_channel(&bstar_plane(image), params.bstar_threshold, params.bstar_keep_above);
    combine_or(&v, &b).expect("planes share the image dimensions")
}

/// Segments a color-corrected image. Each cleanup round is an opening
/// followed by a closing.
pub fn segment_plant(image: &RgbImage, params: &SegmentationParams) -> Result<PlantMask> {
    params.validate()?;
    let se = SquareElement::new(params.se_size)?;
    let mut mask = raw_plant_mask(image, params);
    for _ in 0..params.cleanup_rounds {
        mask = morph_close(&morph_open(&mask, se), se);
    }
    Ok(PlantMask::from_mask(mask))
}
