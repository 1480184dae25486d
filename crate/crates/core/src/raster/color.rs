//! sRGB to HSV and CIE L*a*b* conversions.
//!
//! Every output channel is rescaled to `[0, 255]` so that 8-bit thresholds
//! can be applied directly: hue `[0, 360)` and saturation `[0, 1]` are
//! stretched linearly, L* maps `[0, 100]` onto `[0, 255]` and a*, b* are
//! offset by 128 (so `[-128, 127]` maps onto `[0, 255]`).

use std::collections::HashMap;
use std::sync::OnceLock;

use super::{Plane, Raster, Rgb, RgbImage};

// D65 reference white, equal to the row sums of the sRGB->XYZ matrix.
const WHITE_X: f64 = 0.950_47;
const WHITE_Y: f64 = 1.0;
const WHITE_Z: f64 = 1.088_83;

const SRGB_TO_XYZ: [[f64; 3]; 3] = [
    [0.412_456_4, 0.357_576_1, 0.180_437_5],
    [0.212_672_9, 0.715_152_2, 0.072_175_0],
    [0.019_333_9, 0.119_192_0, 0.950_304_1],
];

fn linear_lut() -> &'static [f64; 256] {
    static LUT: OnceLock<[f64; 256]> = OnceLock::new();
    LUT.get_or_init(|| {
        let mut lut = [0.0; 256];
        for (i, v) in lut.iter_mut().enumerate() {
            let c = i as f64 / 255.0;
            *v = if c <= 0.040_45 {
                c / 12.92
            } else {
                ((c + 0.055) / 1.055).powf(2.4)
            };
        }
        lut
    })
}

fn lab_f(t: f64) -> f64 {
    const DELTA: f64 = 6.0 / 29.0;
    if t > DELTA * DELTA * DELTA {
        t.cbrt()
    } else {
        t / (3.0 * DELTA * DELTA) + 4.0 / 29.0
    }
}

/// HSV with all three channels in `[0, 255]`; V is the channel maximum.
pub fn srgb_to_hsv(p: Rgb) -> [f64; 3] {
    let [r, g, b] = p.map(f64::from);
    let max = r.max(g).max(b);
    let min = r.min(g).min(b);
    let delta = max - min;
    let s = if max == 0.0 { 0.0 } else { delta / max * 255.0 };
    let h = if delta == 0.0 {
        0.0
    } else if max == r {
        60.0 * ((g - b) / delta).rem_euclid(6.0)
    } else if max == g {
        60.0 * ((b - r) / delta + 2.0)
    } else {
        60.0 * ((r - g) / delta + 4.0)
    };
    [h * 255.0 / 360.0, s, max]
}

/// L*a*b* (D65, IEC 61966-2-1 transfer curve) rescaled to `[0, 255]`.
pub fn srgb_to_lab(p: Rgb) -> [f64; 3] {
    let lut = linear_lut();
    let rgb = p.map(|c| lut[c as usize]);
    let xyz: [f64; 3] = std::array::from_fn(|i| {
        SRGB_TO_XYZ[i][0] * rgb[0] + SRGB_TO_XYZ[i][1] * rgb[1] + SRGB_TO_XYZ[i][2] * rgb[2]
    });
    let fx = lab_f(xyz[0] / WHITE_X);
    let fy = lab_f(xyz[1] / WHITE_Y);
    let fz = lab_f(xyz[2] / WHITE_Z);
    let l = 116.0 * fy - 16.0;
    let a = 500.0 * (fx - fy);
    let b = 200.0 * (fy - fz);
    [
        (l * 255.0 / 100.0).clamp(0.0, 255.0),
        (a + 128.0).clamp(0.0, 255.0),
        (b + 128.0).clamp(0.0, 255.0),
    ]
}

pub fn value_plane(image: &RgbImage) -> Plane {
    image.map(|&[r, g, b]| f64::from(r.max(g).max(b)))
}

/// One Lab channel per pixel, converting each distinct color once.
fn lab_channel(image: &RgbImage, channel: usize) -> Plane {
    let mut seen: HashMap<Rgb, f64> = HashMap::new();
    image.map(|&p| *seen.entry(p).or_insert_with(|| srgb_to_lab(p)[channel]))
}

pub fn bstar_plane(image: &RgbImage) -> Plane {
    lab_channel(image, 2)
}

pub fn astar_plane(image: &RgbImage) -> Plane {
    lab_channel(image, 1)
}

/// All three scaled L*a*b* planes from a single conversion pass.
pub fn lab_planes(image: &RgbImage) -> [Plane; 3] {
    let (w, h) = image.dims();
    let mut planes: [Vec<f64>; 3] = std::array::from_fn(|_| Vec::with_capacity(w * h));
    for &p in image.data() {
        let lab = srgb_to_lab(p);
        for c in 0..3 {
            planes[c].push(lab[c]);
        }
    }
    planes.map(|data| Raster::from_vec(w, h, data).expect("dimensions already validated"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    // Published CIE L*a*b* (D65) coordinates of sRGB primaries, unscaled.
    const REFERENCE: [(Rgb, [f64; 3]); 4] = [
        ([255, 255, 255], [100.0, 0.0, 0.0]),
        ([255, 0, 0], [53.24, 80.09, 67.20]),
        ([0, 255, 0], [87.73, -86.18, 83.18]),
        ([0, 0, 255], [32.30, 79.19, -107.86]),
    ];

    #[test]
    fn black_and_white_hsv() {
        assert_eq!(srgb_to_hsv([0, 0, 0])[2], 0.0);
        let w = srgb_to_hsv([255, 255, 255]);
        assert_eq!(w[2], 255.0);
        assert_eq!(w[1], 0.0);
        assert_eq!(srgb_to_hsv([128, 64, 32])[2], 128.0);
    }

    #[test]
    fn hsv_hue_of_primaries() {
        assert_abs_diff_eq!(srgb_to_hsv([255, 0, 0])[0], 0.0);
        assert_abs_diff_eq!(srgb_to_hsv([0, 255, 0])[0], 120.0 * 255.0 / 360.0, epsilon = 1e-9);
        assert_abs_diff_eq!(srgb_to_hsv([0, 0, 255])[0], 240.0 * 255.0 / 360.0, epsilon = 1e-9);
        assert_abs_diff_eq!(srgb_to_hsv([255, 0, 1])[0], 255.0 * (360.0 - 60.0 / 255.0) / 360.0, epsilon = 1e-9);
    }

    #[test]
    fn lab_black_is_zero() {
        assert_eq!(srgb_to_lab([0, 0, 0])[0], 0.0);
    }

    #[test]
    fn lab_matches_published_primaries() {
        for (p, lab) in REFERENCE {
            let got = srgb_to_lab(p);
            assert_abs_diff_eq!(got[0], lab[0] * 2.55, epsilon = 0.2);
            assert_abs_diff_eq!(got[1], lab[1] + 128.0, epsilon = 0.1);
            // pure blue b* = -107.86 sits inside the clamp range
            assert_abs_diff_eq!(got[2], lab[2] + 128.0, epsilon = 0.1);
        }
        let green = srgb_to_lab([0, 255, 0]);
        assert!(green[1] < 128.0 && green[2] > 128.0);
    }

    #[test]
    fn gray_axis_is_neutral() {
        for v in 0..=255u8 {
            let lab = srgb_to_lab([v, v, v]);
            assert!((lab[1] - 128.0).abs() < 1.0, "a* for {v}");
            assert!((lab[2] - 128.0).abs() < 1.0, "b* for {v}");
            assert_eq!(srgb_to_hsv([v, v, v])[1], 0.0);
        }
    }

    #[test]
    fn planes_agree_with_pixel_conversion() {
        let img = Raster::from_fn(4, 3, |x, y| [x as u8 * 60, y as u8 * 90, 30]).unwrap();
        let [l, a, b] = lab_planes(&img);
        for (x, y, p) in img.enumerate() {
            let lab = srgb_to_lab(p);
            assert_eq!(l.get(x, y), lab[0]);
            assert_eq!(a.get(x, y), astar_plane(&img).get(x, y));
            assert_eq!(b.get(x, y), bstar_plane(&img).get(x, y));
            assert_eq!(value_plane(&img).get(x, y), srgb_to_hsv(p)[2]);
        }
        let _ = a;
    }
}
