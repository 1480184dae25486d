//! Mask geometry: stem-line regression, left/right splitting, profiles,
//! convex hull and stem-aligned rectification.

use serde::{Deserialize, Serialize};

use crate::error::{Result, WiltError};
use crate::raster::{Mask, PixelResolution, Raster};

/// `x = alpha + beta * y`, with `x` the column and `y` the row.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StemLine {
    pub alpha: f64,
    pub beta: f64,
}

impl StemLine {
    pub fn vertical(x: f64) -> Self {
        StemLine { alpha: x, beta: 0.0 }
    }

    #[inline]
    pub fn at(&self, y: f64) -> f64 {
        self.alpha + self.beta * y
    }
}

/// Least-squares regression of column on row over every set stem pixel.
pub fn fit_stem_line(stem: &Mask) -> Result<StemLine> {
    let pts: Vec<(f64, f64)> = stem.set_pixels().map(|(x, y)| (x as f64, y as f64)).collect();
    if pts.is_empty() {
        return Err(WiltError::DegenerateStem("stem mask is empty".into()));
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let (mut syy, mut sxy) = (0.0, 0.0);
    for &(x, y) in &pts {
        syy += (y - my) * (y - my);
        sxy += (y - my) * (x - mx);
    }
    if syy == 0.0 {
        return Err(WiltError::DegenerateStem("stem pixels occupy a single row".into()));
    }
    let beta = sxy / syy;
    Ok(StemLine {
        alpha: mx - beta * my,
        beta,
    })
}

/// The plant mask split by a stem line; ties on the line go left.
#[derive(Debug, Clone, PartialEq)]
pub struct HalfMasks {
    pub left: Mask,
    pub right: Mask,
}

pub fn split_mask(plant: &Mask, line: &StemLine) -> HalfMasks {
    let left = Raster::from_fn(plant.width(), plant.height(), |x, y| {
        plant.get(x, y) && (x as f64) <= line.at(y as f64)
    })
    .expect("plant mask has valid dimensions");
    let right = Raster::from_fn(plant.width(), plant.height(), |x, y| {
        plant.get(x, y) && !left.get(x, y)
    })
    .expect("plant mask has valid dimensions");
    HalfMasks { left, right }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Profile {
    pub values: Vec<u64>,
}

impl Profile {
    pub fn total(&self) -> u64 {
        self.values.iter().sum()
    }

    pub fn first_nonzero(&self) -> Option<usize> {
        self.values.iter().position(|&v| v > 0)
    }

    pub fn last_nonzero(&self) -> Option<usize> {
        self.values.iter().rposition(|&v| v > 0)
    }
}

/// Row sums, indexed by `y`.
pub fn horizontal_profile(mask: &Mask) -> Profile {
    Profile {
        values: (0..mask.height())
            .map(|y| mask.row(y).iter().filter(|&&b| b).count() as u64)
            .collect(),
    }
}

/// Column sums, indexed by `x`.
pub fn vertical_profile(mask: &Mask) -> Profile {
    let mut values = vec![0u64; mask.width()];
    for (x, _) in mask.set_pixels() {
        values[x] += 1;
    }
    Profile { values }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HullResult {
    /// Counter-clockwise in a y-up frame, starting at the lowest-x vertex.
    pub vertices: Vec<(i64, i64)>,
    pub area_px: f64,
    pub perimeter_px: f64,
    pub area: f64,
    pub perimeter: f64,
}

fn cross(o: (i64, i64), a: (i64, i64), b: (i64, i64)) -> i64 {
    (a.0 - o.0) * (b.1 - o.1) - (a.1 - o.1) * (b.0 - o.0)
}

/// Monotone-chain convex hull. Collinear points are dropped; input order
/// does not matter.
pub fn hull_of_points(points: &[(i64, i64)]) -> Vec<(i64, i64)> {
    let mut pts = points.to_vec();
    pts.sort_unstable();
    pts.dedup();
    if pts.len() < 3 {
        return pts;
    }
    // lower chain on the forward pass, upper chain on the reverse pass
    let mut hull: Vec<(i64, i64)> = Vec::with_capacity(2 * pts.len());
    for &p in &pts {
        while hull.len() >= 2 && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0 {
            hull.pop();
        }
        hull.push(p);
    }
    let lower_len = hull.len() + 1;
    for &p in pts.iter().rev().skip(1) {
        while hull.len() >= lower_len && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0 {
            hull.pop();
        }
        hull.push(p);
    }
    hull.pop();
    hull
}

/// Twice the signed shoelace area.
pub fn doubled_area(poly: &[(i64, i64)]) -> i64 {
    let n = poly.len();
    (0..n)
        .map(|i| {
            let (a, b) = (poly[i], poly[(i + 1) % n]);
            a.0 * b.1 - b.0 * a.1
        })
        .sum()
}

pub fn polygon_perimeter(poly: &[(i64, i64)]) -> f64 {
    let n = poly.len();
    (0..n)
        .map(|i| {
            let (a, b) = (poly[i], poly[(i + 1) % n]);
            (((b.0 - a.0) as f64).powi(2) + ((b.1 - a.1) as f64).powi(2)).sqrt()
        })
        .sum()
}

/// Hull of set-pixel centers. Only the leftmost and rightmost pixel of each
/// row can be hull vertices, so only those are fed to the construction.
pub fn convex_hull(mask: &Mask, res: &PixelResolution) -> Result<HullResult> {
    let mut pts = Vec::new();
    for y in 0..mask.height() {
        let row = mask.row(y);
        if let (Some(l), Some(r)) = (row.iter().position(|&b| b), row.iter().rposition(|&b| b)) {
            pts.push((l as i64, y as i64));
            pts.push((r as i64, y as i64));
        }
    }
    if pts.is_empty() {
        return Err(WiltError::EmptyMask);
    }
    let hull = hull_of_points(&pts);
    if hull.len() < 3 {
        // a segment's closed walk goes out and back: twice its length
        let perimeter_px = polygon_perimeter(&hull);
        return Err(WiltError::DegenerateHull { perimeter_px });
    }
    let area_px = doubled_area(&hull).abs() as f64 / 2.0;
    let perimeter_px = polygon_perimeter(&hull);
    Ok(HullResult {
        vertices: hull,
        area_px,
        perimeter_px,
        area: res.area(area_px),
        perimeter: res.length(perimeter_px),
    })
}

/// Boundary length: pixel edges shared between a set pixel and background
/// (outside the image counts as background).
pub fn mask_perimeter_px(mask: &Mask) -> u64 {
    let (w, h) = mask.dims();
    let at = |x: i64, y: i64| x >= 0 && y >= 0 && (x as usize) < w && (y as usize) < h && mask.get(x as usize, y as usize);
    let mut edges = 0;
    for (x, y) in mask.set_pixels() {
        let (x, y) = (x as i64, y as i64);
        edges += [(1, 0), (-1, 0), (0, 1), (0, -1)]
            .iter()
            .filter(|(dx, dy)| !at(x + dx, y + dy))
            .count() as u64;
    }
    edges
}

/// Mean column of the set pixels.
pub fn centroid_x(mask: &Mask) -> Option<f64> {
    let (mut sum, mut n) = (0.0, 0u64);
    for (x, _) in mask.set_pixels() {
        sum += x as f64;
        n += 1;
    }
    (n > 0).then(|| sum / n as f64)
}

/// Re-indexes each half by distance from the stem line. Pixel `(x, y)`
/// lands in column `floor(|x - s(y)|)`, so a vertical stem at column `c`
/// gives `R_right(i, y) = right(c + i, y)` and `R_left(i, y) = left(c - i, y)`.
/// The output is widened as needed so no pixel is lost.
pub fn rectify_halves(halves: &HalfMasks, line: &StemLine) -> HalfMasks {
    let index = |x: usize, y: usize| (x as f64 - line.at(y as f64)).abs().floor() as usize;
    let (w, h) = halves.left.dims();
    let mut width = w;
    for (x, y) in halves.left.set_pixels().chain(halves.right.set_pixels()) {
        width = width.max(index(x, y) + 1);
    }
    let place = |half: &Mask| {
        let mut out = Mask::empty(width, h).expect("non-zero dimensions");
        for (x, y) in half.set_pixels() {
            out.set(index(x, y), y, true);
        }
        out
    };
    HalfMasks {
        left: place(&halves.left),
        right: place(&halves.right),
    }
}
