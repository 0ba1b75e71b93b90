use crate::capture::CapturedImage;
use crate::error::{Error, Result};
use crate::plane::Plane;
use crate::scalar::{lit, Real};

/// Full-resolution channels: intensity, two gradients, eight census bits.
pub const FEATURE_CHANNELS: usize = 11;

/// Multi-channel map stored channel-major.
#[derive(Clone, Debug, PartialEq)]
pub struct FeatureMap<T> {
    width: usize,
    height: usize,
    channels: usize,
    data: Vec<T>,
}

impl<T: Real> FeatureMap<T> {
    pub fn from_planes(planes: Vec<Plane<T>>) -> Result<Self> {
        let first = planes
            .first()
            .ok_or_else(|| Error::param("features", "at least one channel is required"))?;
        let (w, h) = first.dims();
        if let Some(p) = planes.iter().find(|p| p.dims() != (w, h)) {
            return Err(Error::mismatch((w, h), p.dims()));
        }
        let channels = planes.len();
        let mut data = Vec::with_capacity(w * h * channels);
        for p in planes {
            data.extend(p.into_vec());
        }
        Ok(Self {
            width: w,
            height: h,
            channels,
            data,
        })
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

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn channel(&self, c: usize) -> &[T] {
        let n = self.width * self.height;
        &self.data[c * n..(c + 1) * n]
    }

    pub fn channel_plane(&self, c: usize) -> Plane<T> {
        Plane::from_vec(self.width, self.height, self.channel(c).to_vec())
    }

    #[inline]
    pub fn get(&self, c: usize, x: usize, y: usize) -> T {
        self.data[(c * self.height + y) * self.width + x]
    }

    pub fn data(&self) -> &[T] {
        &self.data
    }

    /// Stacks the channels of `other` after those of `self`.
    pub fn concat(mut self, other: &FeatureMap<T>) -> Result<Self> {
        if other.dims() != self.dims() {
            return Err(Error::mismatch(self.dims(), other.dims()));
        }
        self.data.extend_from_slice(&other.data);
        self.channels += other.channels;
        Ok(self)
    }

    /// Bilinear resize of every channel.
    pub fn resized(&self, width: usize, height: usize) -> Self {
        let planes = (0..self.channels)
            .map(|c| self.channel_plane(c).resize_bilinear(width, height))
            .collect();
        Self::from_planes(planes).expect("resized channels share dimensions")
    }
}

/// Horizontal and vertical intensity gradients: central differences inside,
/// one-sided differences on the border.
pub fn gradients<T: Real>(p: &Plane<T>) -> (Plane<T>, Plane<T>) {
    let (w, h) = p.dims();
    let half = lit::<T>(0.5);
    let diff = |n: usize, i: usize, at: &dyn Fn(usize) -> T| -> T {
        if n < 2 {
            T::zero()
        } else if i == 0 {
            at(1) - at(0)
        } else if i == n - 1 {
            at(n - 1) - at(n - 2)
        } else {
            (at(i + 1) - at(i - 1)) * half
        }
    };
    let gx = Plane::from_fn(w, h, |x, y| diff(w, x, &|i| p.get(i, y)));
    let gy = Plane::from_fn(w, h, |x, y| diff(h, y, &|i| p.get(x, i)));
    (gx, gy)
}

/// Eight binary channels, one per 3x3 neighbour, set where the neighbour is
/// strictly brighter than the centre. Borders replicate.
pub fn census_channels<T: Real>(p: &Plane<T>) -> Vec<Plane<T>> {
    const OFFSETS: [(isize, isize); 8] = [(-1, -1), (0, -1), (1, -1), (-1, 0), (1, 0), (-1, 1), (0, 1), (1, 1)];
    let (w, h) = p.dims();
    OFFSETS
        .iter()
        .map(|&(dx, dy)| {
            Plane::from_fn(w, h, |x, y| {
                let c = p.get(x, y);
                let n = p.get_clamped(x as isize + dx, y as isize + dy);
                if n > c {
                    T::one()
                } else {
                    T::zero()
                }
            })
        })
        .collect()
}

/// Features of an intensity plane; `with_intensity` prepends the raw channel.
pub fn extract_plane_features<T: Real>(p: &Plane<T>, with_intensity: bool) -> FeatureMap<T> {
    let (gx, gy) = gradients(p);
    let mut planes = Vec::with_capacity(FEATURE_CHANNELS);
    if with_intensity {
        planes.push(p.clone());
    }
    planes.push(gx);
    planes.push(gy);
    planes.extend(census_channels(p));
    FeatureMap::from_planes(planes).expect("feature channels share dimensions")
}

/// The full-resolution feature stack of a captured image.
pub fn extract_features<T: Real>(img: &CapturedImage<T>) -> FeatureMap<T> {
    extract_plane_features(&img.intensities(), true)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ramp_has_constant_gradient() {
        let p = Plane::<f64>::from_fn(6, 5, |x, y| 0.1 * x as f64 + 0.02 * y as f64);
        let (gx, gy) = gradients(&p);
        for v in gx.data() {
            assert!((v - 0.1).abs() < 1e-12);
        }
        for v in gy.data() {
            assert!((v - 0.02).abs() < 1e-12);
        }
    }

    #[test]
    fn census_is_strict_and_replicates_border() {
        let p = Plane::<f64>::from_vec(3, 1, vec![0.5, 0.5, 0.9]);
        let c = census_channels(&p);
        // Right neighbour (index 4) of the middle pixel is brighter.
        assert_eq!(c[4].get(1, 0), 1.0);
        // Equal left neighbour is not.
        assert_eq!(c[3].get(1, 0), 0.0);
        // Replicated border equals the centre.
        assert_eq!(c[4].get(2, 0), 0.0);
        assert_eq!(c[1].get(0, 0), 0.0);
    }

    #[test]
    fn channel_layout() {
        let p = Plane::<f64>::from_fn(4, 3, |x, _| x as f64);
        let f = extract_plane_features(&p, true);
        assert_eq!(f.channels(), FEATURE_CHANNELS);
        assert_eq!(f.get(0, 2, 1), 2.0);
        let coarse = extract_plane_features(&p, false);
        assert_eq!(coarse.channels(), FEATURE_CHANNELS - 1);
        let both = f.concat(&coarse).unwrap();
        assert_eq!(both.channels(), 2 * FEATURE_CHANNELS - 1);
    }
}
