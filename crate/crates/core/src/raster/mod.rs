//! Image representation, color conversion and fiducial-based calibration.
//!
//! Coordinates follow image convention: `x` is the column index growing to
//! the right, `y` is the row index growing downward from the top edge.

mod color;
mod fiducial;

use std::path::Path;

pub use color::{astar_plane, bstar_plane, lab_planes, srgb_to_hsv, srgb_to_lab, value_plane};
pub use fiducial::{
    apply_color_transform, estimate_color_transform, mean_rgb, pixel_resolution, sample_fiducial,
    ColorTransform, FiducialObservation, FiducialSquare, PixelResolution, FIDUCIAL_SQUARES,
};

use crate::error::{Result, WiltError};

/// 8-bit sRGB pixel.
pub type Rgb = [u8; 3];

/// Row-major 2D pixel grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Raster<P> {
    width: usize,
    height: usize,
    data: Vec<P>,
}

pub type RgbImage = Raster<Rgb>;
pub type Plane = Raster<f64>;
pub type Mask = Raster<bool>;

impl<P: Copy> Raster<P> {
    pub fn new(width: usize, height: usize, fill: P) -> Result<Self> {
        check_dims(width, height)?;
        Ok(Raster {
            width,
            height,
            data: vec![fill; width * height],
        })
    }

    pub fn from_vec(width: usize, height: usize, data: Vec<P>) -> Result<Self> {
        check_dims(width, height)?;
        if data.len() != width * height {
            return Err(WiltError::InvalidRaster(format!(
                "data length {} does not match {}x{}",
                data.len(),
                width,
                height
            )));
        }
        Ok(Raster {
            width,
            height,
            data,
        })
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> P) -> Result<Self> {
        check_dims(width, height)?;
        let mut data = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                data.push(f(x, y));
            }
        }
        Ok(Raster {
            width,
            height,
            data,
        })
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn data(&self) -> &[P] {
        &self.data
    }

    pub fn into_vec(self) -> Vec<P> {
        self.data
    }

    /// Panics when `(x, y)` lies outside the raster.
    #[inline]
    pub fn get(&self, x: usize, y: usize) -> P {
        assert!(x < self.width && y < self.height, "pixel ({x}, {y}) out of bounds");
        self.data[y * self.width + x]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, value: P) {
        assert!(x < self.width && y < self.height, "pixel ({x}, {y}) out of bounds");
        self.data[y * self.width + x] = value;
    }

    pub fn row(&self, y: usize) -> &[P] {
        &self.data[y * self.width..(y + 1) * self.width]
    }

    pub fn map<Q: Copy>(&self, f: impl FnMut(&P) -> Q) -> Raster<Q> {
        Raster {
            width: self.width,
            height: self.height,
            data: self.data.iter().map(f).collect(),
        }
    }

    /// Iterates `(x, y, pixel)` in row-major order.
    pub fn enumerate(&self) -> impl Iterator<Item = (usize, usize, P)> + '_ {
        let w = self.width;
        self.data.iter().enumerate().map(move |(i, p)| (i % w, i / w, *p))
    }

    pub fn same_dims<Q>(&self, other: &Raster<Q>) -> Result<()> {
        if self.width != other.width || self.height != other.height {
            return Err(WiltError::DimensionMismatch {
                left: self.dims(),
                right: (other.width, other.height),
            });
        }
        Ok(())
    }
}

impl Mask {
    pub fn empty(width: usize, height: usize) -> Result<Self> {
        Raster::new(width, height, false)
    }

    pub fn count(&self) -> u64 {
        self.data.iter().filter(|&&b| b).count() as u64
    }

    pub fn is_blank(&self) -> bool {
        !self.data.iter().any(|&b| b)
    }

    /// Coordinates of every set pixel in row-major order.
    pub fn set_pixels(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.enumerate().filter(|&(_, _, b)| b).map(|(x, y, _)| (x, y))
    }

    /// Intersection-over-union; two blank masks have IoU 1.
    pub fn iou(&self, other: &Mask) -> Result<f64> {
        self.same_dims(other)?;
        let (mut inter, mut union) = (0u64, 0u64);
        for (&a, &b) in self.data.iter().zip(&other.data) {
            inter += (a && b) as u64;
            union += (a || b) as u64;
        }
        Ok(if union == 0 {
            1.0
        } else {
            inter as f64 / union as f64
        })
    }
}

fn check_dims(width: usize, height: usize) -> Result<()> {
    if width == 0 || height == 0 {
        return Err(WiltError::InvalidRaster(format!(
            "dimensions must be positive, got {width}x{height}"
        )));
    }
    Ok(())
}

/// Decodes a PNG or JPEG into 8-bit RGB.
pub fn load_rgb(path: &Path) -> Result<RgbImage> {
    let img = image::open(path).map_err(|source| WiltError::Image {
        path: path.to_path_buf(),
        source,
    })?;
    let rgb = img.to_rgb8();
    let (w, h) = (rgb.width() as usize, rgb.height() as usize);
    let data = rgb.pixels().map(|p| p.0).collect();
    Raster::from_vec(w, h, data)
}

/// Loads a binary mask; any non-zero luma counts as set.
pub fn load_mask(path: &Path) -> Result<Mask> {
    let img = image::open(path).map_err(|source| WiltError::Image {
        path: path.to_path_buf(),
        source,
    })?;
    let gray = img.to_luma8();
    let (w, h) = (gray.width() as usize, gray.height() as usize);
    let data = gray.pixels().map(|p| p.0[0] > 0).collect();
    Raster::from_vec(w, h, data)
}

pub fn save_rgb(image: &RgbImage, path: &Path) -> Result<()> {
    let buf: Vec<u8> = image.data().iter().flat_map(|p| p.iter().copied()).collect();
    let out = image::RgbImage::from_raw(image.width() as u32, image.height() as u32, buf)
        .expect("buffer length matches dimensions");
    out.save(path).map_err(|source| WiltError::Image {
        path: path.to_path_buf(),
        source,
    })
}

pub fn save_mask(mask: &Mask, path: &Path) -> Result<()> {
    let buf: Vec<u8> = mask.data().iter().map(|&b| if b { 255 } else { 0 }).collect();
    let out = image::GrayImage::from_raw(mask.width() as u32, mask.height() as u32, buf)
        .expect("buffer length matches dimensions");
    out.save(path).map_err(|source| WiltError::Image {
        path: path.to_path_buf(),
        source,
    })
}
