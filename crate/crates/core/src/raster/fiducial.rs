//! Fiducial marker sampling, least-squares color correction and pixel
//! resolution calibration.

use serde::{Deserialize, Serialize};

use super::RgbImage;
use crate::error::{Result, WiltError};

pub const FIDUCIAL_SQUARES: usize = 9;

/// One annotated color square. The sampling window is the axis-aligned
/// square of side `2 * sample_radius + 1` centered on `centroid`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FiducialSquare {
    pub centroid: [u32; 2],
    pub sample_radius: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FiducialObservation {
    pub squares: Vec<FiducialSquare>,
    pub reference_colors: Vec<[f64; 3]>,
    pub square_side_cm: f64,
    pub square_side_px: f64,
}

impl FiducialObservation {
    pub fn validate(&self) -> Result<()> {
        if self.squares.len() != FIDUCIAL_SQUARES {
            return Err(WiltError::Validation(format!(
                "fiducial needs {FIDUCIAL_SQUARES} squares, got {}",
                self.squares.len()
            )));
        }
        if self.reference_colors.len() != FIDUCIAL_SQUARES {
            return Err(WiltError::Validation(format!(
                "fiducial needs {FIDUCIAL_SQUARES} reference colors, got {}",
                self.reference_colors.len()
            )));
        }
        if self
            .reference_colors
            .iter()
            .flatten()
            .any(|c| !c.is_finite() || !(0.0..=255.0).contains(c))
        {
            return Err(WiltError::Validation(
                "reference colors must lie in [0, 255]".into(),
            ));
        }
        if !(self.square_side_cm > 0.0 && self.square_side_cm.is_finite()) {
            return Err(WiltError::Validation(format!(
                "square_side_cm must be positive, got {}",
                self.square_side_cm
            )));
        }
        if !(self.square_side_px > 0.0 && self.square_side_px.is_finite()) {
            return Err(WiltError::Validation(format!(
                "square_side_px must be positive, got {}",
                self.square_side_px
            )));
        }
        Ok(())
    }

    /// Inclusive pixel bounding box `(x0, y0, x1, y1)` covering every
    /// physical square of the marker.
    pub fn footprint(&self) -> Option<(i64, i64, i64, i64)> {
        let half = (self.square_side_px / 2.0).ceil() as i64;
        self.squares.iter().fold(None, |acc, sq| {
            let (cx, cy) = (sq.centroid[0] as i64, sq.centroid[1] as i64);
            let b = (cx - half, cy - half, cx + half, cy + half);
            Some(match acc {
                None => b,
                Some((x0, y0, x1, y1)) => (x0.min(b.0), y0.min(b.1), x1.max(b.2), y1.max(b.3)),
            })
        })
    }
}

/// Mean RGB over the `w x h` rectangle whose top-left pixel is `(x0, y0)`.
pub fn mean_rgb(image: &RgbImage, x0: usize, y0: usize, w: usize, h: usize) -> Option<[f64; 3]> {
    if w == 0 || h == 0 || x0 + w > image.width() || y0 + h > image.height() {
        return None;
    }
    let mut sum = [0u64; 3];
    for y in y0..y0 + h {
        for p in &image.row(y)[x0..x0 + w] {
            for c in 0..3 {
                sum[c] += u64::from(p[c]);
            }
        }
    }
    let n = (w * h) as f64;
    Some(sum.map(|s| s as f64 / n))
}

/// Mean color of each fiducial square, one row per square.
pub fn sample_fiducial(image: &RgbImage, fm: &FiducialObservation) -> Result<Vec<[f64; 3]>> {
    fm.squares
        .iter()
        .enumerate()
        .map(|(index, sq)| {
            let r = sq.sample_radius as usize;
            let (cx, cy) = (sq.centroid[0] as usize, sq.centroid[1] as usize);
            if cx < r || cy < r {
                return Err(WiltError::WindowOutOfBounds { index });
            }
            mean_rgb(image, cx - r, cy - r, 2 * r + 1, 2 * r + 1)
                .ok_or(WiltError::WindowOutOfBounds { index })
        })
        .collect()
}

/// Linear map applied to pixel row vectors: `p' = p * T`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ColorTransform {
    pub matrix: [[f64; 3]; 3],
}

impl ColorTransform {
    pub fn identity() -> Self {
        ColorTransform {
            matrix: [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]],
        }
    }

    #[inline]
    pub fn apply(&self, p: [f64; 3]) -> [f64; 3] {
        let t = &self.matrix;
        std::array::from_fn(|j| p[0] * t[0][j] + p[1] * t[1][j] + p[2] * t[2][j])
    }
}

/// Ordinary least-squares `T` minimizing `|C_image * T - C_real|` via the
/// normal equations `(C_image^T C_image) T = C_image^T C_real`.
pub fn estimate_color_transform(c_image: &[[f64; 3]], c_real: &[[f64; 3]]) -> Result<ColorTransform> {
    if c_image.len() != c_real.len() {
        return Err(WiltError::Validation(format!(
            "color matrices differ in rows: {} vs {}",
            c_image.len(),
            c_real.len()
        )));
    }
    if c_image.len() < 3 {
        return Err(WiltError::Singular(format!(
            "need at least 3 color samples, got {}",
            c_image.len()
        )));
    }
    let mut gram = [[0.0f64; 3]; 3];
    let mut rhs = [[0.0f64; 3]; 3];
    for (ci, cr) in c_image.iter().zip(c_real) {
        for i in 0..3 {
            for j in 0..3 {
                gram[i][j] += ci[i] * ci[j];
                rhs[i][j] += ci[i] * cr[j];
            }
        }
    }
    let matrix = solve3(gram, rhs)?;
    if matrix.iter().flatten().any(|v| !v.is_finite()) {
        return Err(WiltError::Singular("non-finite transform".into()));
    }
    Ok(ColorTransform { matrix })
}

/// Solves `A X = B` for 3x3 `X` by Gaussian elimination with partial pivoting.
fn solve3(mut a: [[f64; 3]; 3], mut b: [[f64; 3]; 3]) -> Result<[[f64; 3]; 3]> {
    let scale = a.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs()));
    if scale == 0.0 {
        return Err(WiltError::Singular("C_image is all zero".into()));
    }
    let tol = scale * 1e-12;
    for col in 0..3 {
        let pivot = (col..3)
            .max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))
            .expect("non-empty range");
        if a[pivot][col].abs() <= tol {
            return Err(WiltError::Singular(
                "C_image^T C_image is rank deficient".into(),
            ));
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        for row in col + 1..3 {
            let f = a[row][col] / a[col][col];
            for k in col..3 {
                a[row][k] -= f * a[col][k];
            }
            for k in 0..3 {
                b[row][k] -= f * b[col][k];
            }
        }
    }
    let mut x = [[0.0f64; 3]; 3];
    for k in 0..3 {
        for row in (0..3).rev() {
            let mut s = b[row][k];
            for c in row + 1..3 {
                s -= a[row][c] * x[c][k];
            }
            x[row][k] = s / a[row][row];
        }
    }
    Ok(x)
}

/// Applies `T` to every pixel, clamping to `[0, 255]` then rounding.
pub fn apply_color_transform(image: &RgbImage, t: &ColorTransform) -> RgbImage {
    image.map(|p| {
        t.apply(p.map(f64::from))
            .map(|v| v.clamp(0.0, 255.0).round() as u8)
    })
}

/// Physical size of one pixel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PixelResolution {
    cm_per_pixel: f64,
}

impl PixelResolution {
    pub fn new(cm_per_pixel: f64) -> Result<Self> {
        if !(cm_per_pixel > 0.0 && cm_per_pixel.is_finite()) {
            return Err(WiltError::Validation(format!(
                "cm_per_pixel must be positive, got {cm_per_pixel}"
            )));
        }
        Ok(PixelResolution { cm_per_pixel })
    }

    #[inline]
    pub fn cm_per_pixel(&self) -> f64 {
        self.cm_per_pixel
    }

    #[inline]
    pub fn length(&self, px: f64) -> f64 {
        px * self.cm_per_pixel
    }

    #[inline]
    pub fn area(&self, px2: f64) -> f64 {
        px2 * self.cm_per_pixel * self.cm_per_pixel
    }
}

pub fn pixel_resolution(fm: &FiducialObservation) -> Result<PixelResolution> {
    if fm.square_side_px.is_nan() || fm.square_side_cm.is_nan() || fm.square_side_px <= 0.0 || fm.square_side_cm <= 0.0 {
        return Err(WiltError::Validation(format!(
            "square sides must be positive (cm {}, px {})",
            fm.square_side_cm, fm.square_side_px
        )));
    }
    PixelResolution::new(fm.square_side_cm / fm.square_side_px)
}

impl Default for ColorTransform {
    fn default() -> Self {
        Self::identity()
    }
}
