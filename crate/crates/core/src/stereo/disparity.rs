use std::path::Path;

use crate::error::{Error, Result};
use crate::io::{write_pfm, write_pgm, write_png_gray, PfmImage};
use crate::plane::Plane;
use crate::scalar::{from_usize, lit, to_f64, Real};

/// Fixed-point scale of the 16-bit PNG export: `level = round(256 d)`.
pub const PNG_SCALE: f64 = 256.0;

/// Subpixel disparities with a per-pixel validity flag. Values at invalid
/// pixels carry no meaning.
#[derive(Clone, Debug, PartialEq)]
pub struct DisparityMap<T> {
    values: Plane<T>,
    valid: Vec<bool>,
}

impl<T: Real> DisparityMap<T> {
    pub fn new(values: Plane<T>, valid: Vec<bool>) -> Result<Self> {
        if valid.len() != values.data().len() {
            return Err(Error::param("valid", "mask length must equal width * height"));
        }
        Ok(Self { values, valid })
    }

    pub fn all_valid(values: Plane<T>) -> Self {
        let n = values.data().len();
        Self {
            values,
            valid: vec![true; n],
        }
    }

    pub fn dims(&self) -> (usize, usize) {
        self.values.dims()
    }

    pub fn width(&self) -> usize {
        self.values.width()
    }

    pub fn height(&self) -> usize {
        self.values.height()
    }

    pub fn values(&self) -> &Plane<T> {
        &self.values
    }

    pub fn valid(&self) -> &[bool] {
        &self.valid
    }

    #[inline]
    pub fn value(&self, x: usize, y: usize) -> T {
        self.values.get(x, y)
    }

    #[inline]
    pub fn is_valid(&self, x: usize, y: usize) -> bool {
        self.valid[y * self.values.width() + x]
    }

    /// The value at `(x, y)` when valid.
    pub fn get(&self, x: usize, y: usize) -> Option<T> {
        self.is_valid(x, y).then(|| self.value(x, y))
    }

    pub fn valid_count(&self) -> usize {
        self.valid.iter().filter(|&&v| v).count()
    }

    /// Valid pixels as a percentage of all pixels.
    pub fn coverage(&self) -> f64 {
        100.0 * self.valid_count() as f64 / self.valid.len() as f64
    }

    /// Clears validity wherever `mask` is set.
    pub fn invalidate(&mut self, mask: &[bool]) {
        for (v, &m) in self.valid.iter_mut().zip(mask) {
            if m {
                *v = false;
            }
        }
    }

    /// Single-channel PFM; invalid pixels are written as `+inf`.
    pub fn to_pfm(&self) -> PfmImage {
        PfmImage {
            width: self.width(),
            height: self.height(),
            channels: 1,
            data: self
                .values
                .data()
                .iter()
                .zip(&self.valid)
                .map(|(&d, &ok)| if ok { to_f64(d) as f32 } else { f32::INFINITY })
                .collect(),
        }
    }

    pub fn from_pfm(img: &PfmImage) -> Result<Self> {
        if img.channels != 1 {
            return Err(Error::PfmFormat {
                field: "header",
                detail: "disparity maps are single-channel".into(),
            });
        }
        let valid: Vec<bool> = img.data.iter().map(|v| v.is_finite()).collect();
        let values = img
            .data
            .iter()
            .map(|&v| if v.is_finite() { lit(v as f64) } else { T::zero() })
            .collect();
        Self::new(Plane::from_vec(img.width, img.height, values), valid)
    }

    pub fn write_pfm(&self, path: &Path) -> Result<()> {
        write_pfm(path, &self.to_pfm())
    }

    /// 16-bit PNG holding `round(256 d)`; invalid pixels are 0.
    pub fn write_png(&self, path: &Path) -> Result<()> {
        let s: Vec<u16> = self
            .values
            .data()
            .iter()
            .zip(&self.valid)
            .map(|(&d, &ok)| {
                if ok {
                    (to_f64(d) * PNG_SCALE).round().clamp(0.0, 65535.0) as u16
                } else {
                    0
                }
            })
            .collect();
        write_png_gray(path, self.width(), self.height(), &s, true)
    }

    /// Validity mask as an 8-bit PGM (255 valid, 0 invalid).
    pub fn write_mask(&self, path: &Path, comment: Option<&str>) -> Result<()> {
        let s: Vec<u16> = self.valid.iter().map(|&v| if v { 255 } else { 0 }).collect();
        write_pgm(path, self.width(), self.height(), 255, &s, comment)
    }

    /// Mean of the valid values, or `None` when nothing is valid.
    pub fn valid_mean(&self) -> Option<T> {
        let n = self.valid_count();
        (n > 0).then(|| {
            let s: T = self
                .values
                .data()
                .iter()
                .zip(&self.valid)
                .filter(|(_, &ok)| ok)
                .map(|(&d, _)| d)
                .sum();
            s / from_usize(n)
        })
    }
}
