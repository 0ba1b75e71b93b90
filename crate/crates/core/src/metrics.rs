//! Disparity accuracy, dynamic-range expansion and exposure coverage.

use serde::{Deserialize, Serialize};

use crate::adec::extreme_thresholds;
use crate::capture::CapturedImage;
use crate::error::{Error, Result};
use crate::scalar::{to_f64, Real};
use crate::stereo::DisparityMap;

/// Native camera dynamic range used by default, in dB.
pub const NATIVE_DR_DB: f64 = 42.0;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DrReport {
    pub native_db: f64,
    pub effective_db: f64,
    /// `100 * effective / native`, in percent.
    pub expansion_rate: f64,
}

/// Mean absolute error over pixels valid in both maps, and the jointly valid
/// fraction of all pixels in percent.
pub fn disparity_mae<T: Real>(est: &DisparityMap<T>, gt: &DisparityMap<T>) -> Result<(f64, f64)> {
    if est.dims() != gt.dims() {
        return Err(Error::mismatch(est.dims(), gt.dims()));
    }
    let mut sum = 0.0;
    let mut n = 0usize;
    for (i, (&a, &b)) in est.values().data().iter().zip(gt.values().data()).enumerate() {
        if est.valid()[i] && gt.valid()[i] {
            sum += (to_f64(a) - to_f64(b)).abs();
            n += 1;
        }
    }
    if n == 0 {
        return Err(Error::NoValidPixels);
    }
    let total = est.valid().len();
    Ok((sum / n as f64, 100.0 * n as f64 / total as f64))
}

/// Dynamic range spanned by two exposures: the native range widened by the
/// exposure ratio.
pub fn effective_dr(e1: f64, e2: f64, native_db: f64) -> Result<DrReport> {
    if !(e1 > 0.0 && e2 > 0.0 && e1.is_finite() && e2.is_finite()) {
        return Err(Error::param("exposure", "exposures must be positive and finite"));
    }
    if !(native_db > 0.0 && native_db.is_finite()) {
        return Err(Error::param("native_db", "must be positive"));
    }
    let ratio = e1.max(e2) / e1.min(e2);
    let effective_db = native_db + 20.0 * ratio.log10();
    Ok(DrReport {
        native_db,
        effective_db,
        expansion_rate: 100.0 * effective_db / native_db,
    })
}

#[inline]
fn well_exposed(level: u16, t_low: u32, t_high: u32) -> bool {
    let l = level as u32;
    l > t_low && l < t_high
}

/// Percentage of pixels strictly between the extreme thresholds.
pub fn single_coverage<T: Real>(img: &CapturedImage<T>) -> f64 {
    let (lo, hi) = extreme_thresholds(img.max_level());
    let n = img.levels().iter().filter(|&&l| well_exposed(l, lo, hi)).count();
    100.0 * n as f64 / img.len() as f64
}

/// Percentage of pixels well exposed in at least one of the two frames.
pub fn exposure_coverage<T: Real>(img1: &CapturedImage<T>, img2: &CapturedImage<T>) -> Result<f64> {
    if img1.dims() != img2.dims() {
        return Err(Error::mismatch(img1.dims(), img2.dims()));
    }
    let (lo1, hi1) = extreme_thresholds(img1.max_level());
    let (lo2, hi2) = extreme_thresholds(img2.max_level());
    let n = img1
        .levels()
        .iter()
        .zip(img2.levels())
        .filter(|(&a, &b)| well_exposed(a, lo1, hi1) || well_exposed(b, lo2, hi2))
        .count();
    Ok(100.0 * n as f64 / img1.len() as f64)
}
