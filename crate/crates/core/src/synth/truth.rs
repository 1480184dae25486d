//! Ground-truth metrics computed by direct enumeration, independent of the
//! measurement code: pixel-by-pixel morphology, closed-form integer least
//! squares, a gift-wrapping hull and sorted-list quantiles.

use serde::{Deserialize, Serialize};

use crate::metrics::{AStarHistogram, QuotaBasis};
use crate::raster::{srgb_to_lab, Mask, Raster, RgbImage};

/// Set-theoretic erosion (`erode = true`) or dilation by a `(2r+1)²`
/// square; pixels outside the image are background.
pub fn brute_morph(mask: &Mask, r: usize, erode: bool) -> Mask {
    let (w, h) = mask.dims();
    let r = r as i64;
    Raster::from_fn(w, h, |x, y| {
        let mut all = true;
        let mut any = false;
        for dy in -r..=r {
            for dx in -r..=r {
                let (nx, ny) = (x as i64 + dx, y as i64 + dy);
                let v = nx >= 0 && ny >= 0 && nx < w as i64 && ny < h as i64 && mask.get(nx as usize, ny as usize);
                all &= v;
                any |= v;
            }
        }
        if erode {
            all
        } else {
            any
        }
    })
    .expect("same dimensions")
}

/// `close(open(raw))` with a 3×3 element.
pub fn silhouette(raw: &Mask) -> Mask {
    let open = brute_morph(&brute_morph(raw, 1, true), 1, false);
    brute_morph(&brute_morph(&open, 1, false), 1, true)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TruthLine {
    pub alpha: f64,
    pub beta: f64,
}

impl TruthLine {
    fn at(&self, y: f64) -> f64 {
        self.alpha + self.beta * y
    }
}

/// `x = alpha + beta·y` from exact integer normal equations.
pub fn stem_fit(stem: &Mask) -> Option<TruthLine> {
    let (mut n, mut sx, mut sy, mut sxy, mut syy) = (0i128, 0i128, 0i128, 0i128, 0i128);
    for (x, y) in stem.set_pixels() {
        let (x, y) = (x as i128, y as i128);
        n += 1;
        sx += x;
        sy += y;
        sxy += x * y;
        syy += y * y;
    }
    let den = n * syy - sy * sy;
    if n == 0 || den == 0 {
        return None;
    }
    let beta = (n * sxy - sx * sy) as f64 / den as f64;
    Some(TruthLine {
        alpha: (sx as f64 - beta * sy as f64) / n as f64,
        beta,
    })
}

fn cross(o: (f64, f64), a: (f64, f64), b: (f64, f64)) -> f64 {
    (a.0 - o.0) * (b.1 - o.1) - (a.1 - o.1) * (b.0 - o.0)
}

fn dist2(a: (f64, f64), b: (f64, f64)) -> f64 {
    (a.0 - b.0).powi(2) + (a.1 - b.1).powi(2)
}

/// Gift wrapping over every pixel center; collinear candidates resolve to
/// the farthest point so only corners are kept.
pub fn jarvis_hull(points: &[(f64, f64)]) -> Vec<(f64, f64)> {
    let Some(&start) = points
        .iter()
        .min_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)))
    else {
        return Vec::new();
    };
    let mut hull = vec![start];
    let mut current = start;
    loop {
        let mut next = points[0];
        for &p in points {
            if next == current {
                next = p;
                continue;
            }
            let c = cross(current, next, p);
            if c < 0.0 || (c == 0.0 && dist2(current, p) > dist2(current, next)) {
                next = p;
            }
        }
        if next == start || next == current {
            break;
        }
        hull.push(next);
        current = next;
        if hull.len() > points.len() {
            break;
        }
    }
    hull
}

fn shoelace(poly: &[(f64, f64)]) -> f64 {
    let n = poly.len();
    (0..n)
        .map(|i| {
            let (a, b) = (poly[i], poly[(i + 1) % n]);
            a.0 * b.1 - b.0 * a.1
        })
        .sum::<f64>()
        .abs()
        / 2.0
}

fn closed_length(poly: &[(f64, f64)]) -> f64 {
    let n = poly.len();
    if n < 2 {
        return 0.0;
    }
    (0..n).map(|i| dist2(poly[i], poly[(i + 1) % n]).sqrt()).sum()
}

/// Expected per-view metrics, all in centimeters / square centimeters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub stem_line: TruthLine,
    pub plant_pixels: u64,
    pub plant_area: f64,
    pub plant_width: f64,
    pub plant_height: f64,
    pub hull_area: f64,
    pub hull_perimeter: f64,
    pub mask_perimeter: f64,
    pub cm_hor_dis: f64,
    pub cm_height: f64,
    pub v33: f64,
    pub v66: f64,
    pub v90: f64,
    pub h33: f64,
    pub h66: f64,
    pub h90: f64,
    pub histogram: AStarHistogram,
}

impl GroundTruth {
    /// Values in the metric-table column order.
    pub fn values(&self) -> [f64; 14] {
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
}

/// The `k`-th smallest (1-based) value, `k = max(1, ceil(share·basis/100))`,
/// or the largest when the half holds fewer than `k` values.
fn sorted_quota(sorted: &[i64], share: u64, basis: u64) -> i64 {
    let k = ((share * basis).div_ceil(100)).max(1) as usize;
    sorted[k.min(sorted.len()) - 1]
}

/// Brute-force metrics of `silhouette` with the stem line fitted to `stem`.
pub fn ground_truth(
    silhouette: &Mask,
    stem: &Mask,
    image: &RgbImage,
    y_bot: usize,
    cm_per_px: f64,
    basis: QuotaBasis,
) -> Option<GroundTruth> {
    let line = stem_fit(stem)?;
    let px: Vec<(i64, i64)> = silhouette.set_pixels().map(|(x, y)| (x as i64, y as i64)).collect();
    let n = px.len() as u64;
    if n == 0 {
        return None;
    }
    let len = |v: f64| v * cm_per_px;

    let xs: Vec<i64> = px.iter().map(|p| p.0).collect();
    let width = xs.iter().max()? - xs.iter().min()?;

    let mut rows: Vec<i64> = px.iter().map(|p| p.1).collect();
    rows.sort_unstable();
    let y_top = sorted_quota(&rows, 5, n);
    let height = (y_bot as i64 - y_top).max(0);

    let centers: Vec<(f64, f64)> = px.iter().map(|&(x, y)| (x as f64, y as f64)).collect();
    let hull = jarvis_hull(&centers);
    let (hull_area, hull_perimeter) = if hull.len() >= 3 {
        (shoelace(&hull), closed_length(&hull))
    } else {
        (0.0, closed_length(&hull))
    };

    let mut boundary = 0u64;
    for &(x, y) in &px {
        for (dx, dy) in [(1, 0), (-1, 0), (0, 1), (0, -1)] {
            let (nx, ny) = (x + dx, y + dy);
            let inside = nx >= 0
                && ny >= 0
                && (nx as usize) < silhouette.width()
                && (ny as usize) < silhouette.height()
                && silhouette.get(nx as usize, ny as usize);
            if !inside {
                boundary += 1;
            }
        }
    }

    let (left, right): (Vec<_>, Vec<_>) =
        px.iter().partition(|&&(x, y)| x as f64 <= line.at(y as f64));
    if left.is_empty() || right.is_empty() {
        return None;
    }
    let com = |h: &[(i64, i64)]| {
        let k = h.len() as f64;
        (
            h.iter().map(|p| p.0 as f64).sum::<f64>() / k,
            h.iter().map(|p| p.1 as f64).sum::<f64>() / k,
        )
    };
    let (cl, cr) = (com(&left), com(&right));
    let yb = y_bot as f64;

    let half_basis = |h: &[(i64, i64)]| match basis {
        QuotaBasis::Full => n,
        QuotaBasis::Half => h.len() as u64,
    };
    let sorted_rows = |h: &[(i64, i64)]| {
        let mut r: Vec<i64> = h.iter().map(|p| p.1).collect();
        r.sort_unstable();
        r
    };
    let sorted_dist = |h: &[(i64, i64)]| {
        let mut d: Vec<i64> = h
            .iter()
            .map(|&(x, y)| (x as f64 - line.at(y as f64)).abs().floor() as i64)
            .collect();
        d.sort_unstable();
        d
    };
    let (rl, rr) = (sorted_rows(&left), sorted_rows(&right));
    let (dl, dr) = (sorted_dist(&left), sorted_dist(&right));
    let (bl, br) = (half_basis(&left), half_basis(&right));
    let v = |q: u64| {
        let mean_row = (sorted_quota(&rl, 100 - q, bl) + sorted_quota(&rr, 100 - q, br)) as f64 / 2.0;
        len(yb - mean_row)
    };
    let h = |q: u64| len((sorted_quota(&dl, q, bl) + sorted_quota(&dr, q, br)) as f64);

    let mut histogram = AStarHistogram::default();
    for &(x, y) in &px {
        let a = srgb_to_lab(image.get(x as usize, y as usize))[1];
        histogram.bins[a.round().clamp(0.0, 255.0) as usize] += 1;
    }

    Some(GroundTruth {
        stem_line: line,
        plant_pixels: n,
        plant_area: n as f64 * cm_per_px * cm_per_px,
        plant_width: len(width as f64),
        plant_height: len(height as f64),
        hull_area: hull_area * cm_per_px * cm_per_px,
        hull_perimeter: len(hull_perimeter),
        mask_perimeter: len(boundary as f64),
        cm_hor_dis: len(cr.0 - cl.0),
        cm_height: len(((yb - cl.1) + (yb - cr.1)) / 2.0),
        v33: v(33),
        v66: v(66),
        v90: v(90),
        h33: h(33),
        h66: h(66),
        h90: h(90),
        histogram,
    })
}
