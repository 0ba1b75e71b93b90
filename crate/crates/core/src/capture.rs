//! Camera capture model: exposure split into shutter and gain, pre-/post-gain
//! Gaussian noise, dynamic-range clipping, normalization and quantization.
//!
//! Per pixel, with `g = max(1, e / t_max)` and `t = e / g`:
//!
//! ```text
//! raw        = g * (phi * t + n_pre) + n_post
//! clipped    = clamp(raw, lo, hi)
//! normalized = (clipped - lo) / (hi - lo)
//! level      = round(clamp(normalized * K, 0, K))      K = 2^bits - 1
//! ```
//!
//! `[lo, hi]` is `[lower, upper]` of the camera bounds ([`ClipDomain::Signal`])
//! or those bounds scaled by `g * t` ([`ClipDomain::ExposureScaled`]). Rounding
//! is half-away-from-zero.

use std::path::Path;

use crate::error::{Error, Result};
use crate::io::{write_pgm, write_png_gray};
use crate::plane::Plane;
use crate::rng::{Camera, PixelNoise};
use crate::scalar::{from_usize, lit, Real};
use crate::scene::{DynamicRangeBounds, RadianceMap};

/// Exposure split into shutter time and gain, longest shutter first.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ExposureSetting<T> {
    pub exposure: T,
    pub shutter: T,
    pub gain: T,
    pub t_max: T,
}

pub fn exposure_to_shutter_gain<T: Real>(e: T, t_max: T) -> Result<ExposureSetting<T>> {
    if !(e > T::zero() && e.is_finite()) {
        return Err(Error::param("exposure", "must be finite and > 0"));
    }
    if !(t_max > T::zero() && t_max.is_finite()) {
        return Err(Error::param("t_max", "must be finite and > 0"));
    }
    let gain = T::one().max(e / t_max);
    Ok(ExposureSetting {
        exposure: e,
        shutter: e / gain,
        gain,
        t_max,
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NoiseParams<T> {
    /// Standard deviation of noise added before gain, radiance x shutter units.
    pub sigma_pre: T,
    /// Standard deviation of noise added after gain, signal units.
    pub sigma_post: T,
    pub seed: u64,
}

impl<T: Real> NoiseParams<T> {
    pub fn noiseless() -> Self {
        Self {
            sigma_pre: T::zero(),
            sigma_post: T::zero(),
            seed: 0,
        }
    }

    /// `sigma_pre` at 1% of the camera span, `sigma_post` at half a quantization step.
    pub fn default_for(bounds: &DynamicRangeBounds<T>, bits: u32, seed: u64) -> Self {
        let k = lit::<T>(max_level(bits) as f64);
        Self {
            sigma_pre: lit::<T>(0.01) * bounds.span(),
            sigma_post: lit::<T>(0.5) / k * bounds.span(),
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.sigma_pre >= T::zero() && self.sigma_post >= T::zero()) {
            return Err(Error::param("noise", "sigmas must be >= 0"));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum ClipDomain {
    /// Clip the post-gain signal to the camera bounds.
    #[default]
    Signal,
    /// Clip to the camera bounds multiplied by `gain * shutter`.
    ExposureScaled,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Normalization {
    /// Map the clipping interval onto `[0, 1]`.
    #[default]
    FixedBounds,
    /// Map the per-image min/max of the clipped signal onto `[0, 1]`.
    PerImage,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CaptureSettings<T> {
    pub bits: u32,
    /// Longest shutter. The default of 4 matches the upper exposure clamp, so
    /// gain (and with it amplified pre-gain noise) engages only beyond it.
    pub t_max: T,
    pub clip: ClipDomain,
    pub normalization: Normalization,
}

impl<T: Real> Default for CaptureSettings<T> {
    fn default() -> Self {
        Self {
            bits: 8,
            t_max: lit(4.0),
            clip: ClipDomain::Signal,
            normalization: Normalization::FixedBounds,
        }
    }
}

/// Frame index and camera that key the per-pixel noise stream.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FrameTag {
    pub frame: u32,
    pub camera: Camera,
}

impl FrameTag {
    pub fn new(frame: u32, camera: Camera) -> Self {
        Self { frame, camera }
    }
}

/// `2^bits - 1`.
#[inline]
pub fn max_level(bits: u32) -> u32 {
    (1u32 << bits) - 1
}

fn check_bits(bits: u32) -> Result<()> {
    if !(1..=16).contains(&bits) {
        return Err(Error::param("bits", "bit depth must be in 1..=16"));
    }
    Ok(())
}

/// Integer level for a normalized intensity: half-away-from-zero rounding of
/// the clipped, scaled value.
#[inline]
pub fn quantize_level<T: Real>(x: T, bits: u32) -> u16 {
    let k = lit::<T>(max_level(bits) as f64);
    let scaled = x * k;
    // NaN clips to zero.
    let clipped = if scaled > k {
        k
    } else if scaled >= T::zero() {
        scaled
    } else {
        T::zero()
    };
    clipped.round().to_u16().unwrap_or(0)
}

/// Quantizes a normalized intensity to `bits` and maps it back to `[0, 1]`.
pub fn quantize<T: Real>(x: T, bits: u32) -> T {
    let k = lit::<T>(max_level(bits) as f64);
    lit::<T>(quantize_level(x, bits) as f64) / k
}

/// Quantized intensity image: every pixel is `k / K` for an integer level `k`.
#[derive(Clone, Debug, PartialEq)]
pub struct CapturedImage<T> {
    width: usize,
    height: usize,
    bits: u32,
    levels: Vec<u16>,
    exposure: ExposureSetting<T>,
}

impl<T: Real> CapturedImage<T> {
    pub fn from_levels(
        width: usize,
        height: usize,
        bits: u32,
        levels: Vec<u16>,
        exposure: ExposureSetting<T>,
    ) -> Result<Self> {
        check_bits(bits)?;
        if width == 0 || height == 0 || levels.len() != width * height {
            return Err(Error::param("levels", "length must equal width * height > 0"));
        }
        let k = max_level(bits);
        if levels.iter().any(|&l| l as u32 > k) {
            return Err(Error::param("levels", "level exceeds 2^bits - 1"));
        }
        Ok(Self {
            width,
            height,
            bits,
            levels,
            exposure,
        })
    }

    /// Quantizes arbitrary normalized intensities.
    pub fn from_intensities(plane: &Plane<T>, bits: u32, exposure: ExposureSetting<T>) -> Result<Self> {
        check_bits(bits)?;
        let levels = plane.data().iter().map(|&v| quantize_level(v, bits)).collect();
        Self::from_levels(plane.width(), plane.height(), bits, levels, exposure)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn bits(&self) -> u32 {
        self.bits
    }

    /// Maximum detectable level `K = 2^bits - 1`.
    pub fn max_level(&self) -> u32 {
        max_level(self.bits)
    }

    pub fn levels(&self) -> &[u16] {
        &self.levels
    }

    pub fn exposure(&self) -> &ExposureSetting<T> {
        &self.exposure
    }

    pub fn len(&self) -> usize {
        self.levels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.levels.is_empty()
    }

    #[inline]
    pub fn value(&self, x: usize, y: usize) -> T {
        let k = lit::<T>(self.max_level() as f64);
        lit::<T>(self.levels[y * self.width + x] as f64) / k
    }

    /// Intensities `k / K` as a plane.
    pub fn intensities(&self) -> Plane<T> {
        let k = lit::<T>(self.max_level() as f64);
        Plane::from_vec(
            self.width,
            self.height,
            self.levels.iter().map(|&l| lit::<T>(l as f64) / k).collect(),
        )
    }

    pub fn mean(&self) -> T {
        let k = self.max_level() as f64;
        let s: u64 = self.levels.iter().map(|&l| l as u64).sum();
        lit::<T>(s as f64 / k) / from_usize(self.levels.len())
    }

    /// Exports as PGM with `maxval = K`.
    pub fn write_pgm(&self, path: &Path, comment: Option<&str>) -> Result<()> {
        write_pgm(
            path,
            self.width,
            self.height,
            self.max_level() as u16,
            &self.levels,
            comment,
        )
    }

    /// Exports as PNG; 8-bit for `bits <= 8` (levels rescaled to 0..=255), otherwise 16-bit.
    pub fn write_png(&self, path: &Path) -> Result<()> {
        let k = self.max_level();
        if self.bits <= 8 {
            let s: Vec<u16> = self
                .levels
                .iter()
                .map(|&l| ((l as u32 * 255 + k / 2) / k) as u16)
                .collect();
            write_png_gray(path, self.width, self.height, &s, false)
        } else {
            let s: Vec<u16> = self
                .levels
                .iter()
                .map(|&l| ((l as u64 * 65535 + k as u64 / 2) / k as u64) as u16)
                .collect();
            write_png_gray(path, self.width, self.height, &s, true)
        }
    }
}

/// Simulates one capture of `radiance` at exposure `e`.
pub fn capture<T: Real>(
    radiance: &RadianceMap<T>,
    e: T,
    bounds: &DynamicRangeBounds<T>,
    noise: &NoiseParams<T>,
    settings: &CaptureSettings<T>,
    tag: FrameTag,
) -> Result<CapturedImage<T>> {
    bounds.validate()?;
    noise.validate()?;
    check_bits(settings.bits)?;
    let exposure = exposure_to_shutter_gain(e, settings.t_max)?;
    let (g, t) = (exposure.gain, exposure.shutter);
    let (lo, hi) = match settings.clip {
        ClipDomain::Signal => (bounds.lower, bounds.upper),
        ClipDomain::ExposureScaled => (bounds.lower * g * t, bounds.upper * g * t),
    };
    let rng = PixelNoise::new(noise.seed, tag.frame, tag.camera);
    let noisy = noise.sigma_pre > T::zero() || noise.sigma_post > T::zero();

    let clipped: Vec<T> = radiance
        .values()
        .iter()
        .enumerate()
        .map(|(i, &phi)| {
            let (n_pre, n_post) = if noisy {
                let (a, b) = rng.normal_pair(i as u64);
                (noise.sigma_pre * lit(a), noise.sigma_post * lit(b))
            } else {
                (T::zero(), T::zero())
            };
            let raw = g * (phi * t + n_pre) + n_post;
            raw.max(lo).min(hi)
        })
        .collect();

    let (n_lo, n_span) = match settings.normalization {
        Normalization::FixedBounds => (lo, hi - lo),
        Normalization::PerImage => {
            let mn = clipped.iter().copied().fold(T::infinity(), T::min);
            let mx = clipped.iter().copied().fold(T::neg_infinity(), T::max);
            (mn, mx - mn)
        }
    };
    let levels = clipped
        .iter()
        .map(|&c| {
            let normalized = if n_span > T::zero() {
                (c - n_lo) / n_span
            } else {
                T::zero()
            };
            quantize_level(normalized, settings.bits)
        })
        .collect();
    CapturedImage::from_levels(
        radiance.width(),
        radiance.height(),
        settings.bits,
        levels,
        exposure,
    )
}
