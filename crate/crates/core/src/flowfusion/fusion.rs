use super::features::FeatureMap;
use crate::capture::CapturedImage;
use crate::error::{Error, Result};
use crate::plane::Plane;
use crate::scalar::{lit, Real};

/// Per-pixel fusion weights in `[0, 1]`.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightMap<T>(Plane<T>);

impl<T: Real> WeightMap<T> {
    pub fn from_plane(p: Plane<T>) -> Self {
        Self(p)
    }

    pub fn ones(width: usize, height: usize) -> Self {
        Self(Plane::filled(width, height, T::one()))
    }

    pub fn plane(&self) -> &Plane<T> {
        &self.0
    }

    pub fn dims(&self) -> (usize, usize) {
        self.0.dims()
    }

    /// Average-pooled to a reduced grid.
    pub fn resized(&self, width: usize, height: usize) -> Self {
        if self.dims() == (width, height) {
            return self.clone();
        }
        let mut p = self.0.clone();
        while p.width() >= 2 * width && p.height() >= 2 * height {
            p = p.downsample2();
        }
        Self(p.resize_bilinear(width, height))
    }

    /// Zeroes the weight wherever `mask` is set.
    pub fn masked(mut self, mask: &[bool]) -> Self {
        for (v, &m) in self.0.data_mut().iter_mut().zip(mask) {
            if m {
                *v = T::zero();
            }
        }
        self
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FusionParams {
    /// Weight rises linearly from 0 at intensity 0 to 1 at `w_alpha`.
    pub w_alpha: f64,
    /// Weight falls linearly from 1 at `w_beta` to 0 at intensity 1.
    pub w_beta: f64,
    /// Keeps the normalization finite where both weights vanish.
    pub epsilon: f64,
}

impl Default for FusionParams {
    fn default() -> Self {
        Self {
            w_alpha: 0.02,
            w_beta: 0.98,
            epsilon: 1e-8,
        }
    }
}

impl FusionParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.w_alpha > 0.0 && self.w_alpha < self.w_beta && self.w_beta < 1.0) {
            return Err(Error::param("fusion", "need 0 < w_alpha < w_beta < 1"));
        }
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return Err(Error::param("fusion.epsilon", "must be positive"));
        }
        Ok(())
    }
}

/// Trapezoidal weight of a normalized intensity.
pub fn trapezoid_weight<T: Real>(i: T, params: &FusionParams) -> T {
    let (a, b) = (lit::<T>(params.w_alpha), lit::<T>(params.w_beta));
    if i <= T::zero() || i >= T::one() {
        T::zero()
    } else if i < a {
        i / a
    } else if i <= b {
        T::one()
    } else {
        (T::one() - i) / (T::one() - b)
    }
}

pub fn weight_map<T: Real>(img: &CapturedImage<T>, params: &FusionParams) -> WeightMap<T> {
    WeightMap(img.intensities().map(|v| trapezoid_weight(v, params)))
}

/// Fused features plus the pixels where both weights were (near) zero.
#[derive(Clone, Debug, PartialEq)]
pub struct FusedFeatures<T> {
    pub features: FeatureMap<T>,
    pub low_confidence: Vec<bool>,
}

/// Weighted per-pixel blend `(W1 F1 + W2 F2) / (W1 + W2 + eps)`.
pub fn fuse<T: Real>(
    f1: &FeatureMap<T>,
    f2w: &FeatureMap<T>,
    w1: &WeightMap<T>,
    w2w: &WeightMap<T>,
    params: &FusionParams,
) -> Result<FusedFeatures<T>> {
    params.validate()?;
    for d in [f2w.dims(), w1.dims(), w2w.dims()] {
        if d != f1.dims() {
            return Err(Error::mismatch(f1.dims(), d));
        }
    }
    if f1.channels() != f2w.channels() {
        return Err(Error::param("features", "channel counts differ"));
    }
    let eps = lit::<T>(params.epsilon);
    let a = w1.plane().data();
    let b = w2w.plane().data();
    let planes = (0..f1.channels())
        .map(|c| {
            let (x1, x2) = (f1.channel(c), f2w.channel(c));
            let data = (0..a.len())
                .map(|i| (a[i] * x1[i] + b[i] * x2[i]) / (a[i] + b[i] + eps))
                .collect();
            Plane::from_vec(f1.width(), f1.height(), data)
        })
        .collect();
    Ok(FusedFeatures {
        features: FeatureMap::from_planes(planes)?,
        low_confidence: a.iter().zip(b).map(|(&p, &q)| p + q < eps).collect(),
    })
}
