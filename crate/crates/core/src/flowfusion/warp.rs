use super::features::FeatureMap;
use super::flow::FlowField;
use super::fusion::WeightMap;
use crate::capture::CapturedImage;
use crate::plane::Plane;
use crate::scalar::{from_usize, Real};

/// Backward-warped data plus a per-pixel flag for samples that fell outside
/// the source image. Flagged pixels hold zero.
#[derive(Clone, Debug, PartialEq)]
pub struct Warped<D> {
    pub data: D,
    pub out_of_bounds: Vec<bool>,
}

impl<D> Warped<D> {
    pub fn out_of_bounds_count(&self) -> usize {
        self.out_of_bounds.iter().filter(|&&b| b).count()
    }
}

/// Backward warping `out(p) = data(p + f(p))` with bilinear sampling. A flow
/// on a different grid is resampled first, scaling its vectors.
pub trait Warp<T: Real>: Sized {
    fn warp(&self, flow: &FlowField<T>) -> Warped<Self>;
}

pub fn warp<T: Real, D: Warp<T>>(data: &D, flow: &FlowField<T>) -> Warped<D> {
    data.warp(flow)
}

/// Source locations for every output pixel, `None` when out of bounds.
fn source_coords<T: Real>(w: usize, h: usize, flow: &FlowField<T>) -> Vec<Option<(T, T)>> {
    let flow = flow.resized(w, h);
    let (mx, my) = (from_usize::<T>(w - 1), from_usize::<T>(h - 1));
    let mut out = Vec::with_capacity(w * h);
    for y in 0..h {
        for x in 0..w {
            let (fx, fy) = flow.at(x, y);
            let sx = from_usize::<T>(x) + fx;
            let sy = from_usize::<T>(y) + fy;
            let inside = sx >= T::zero() && sy >= T::zero() && sx <= mx && sy <= my;
            out.push(inside.then_some((sx, sy)));
        }
    }
    out
}

fn warp_with<T: Real>(p: &Plane<T>, coords: &[Option<(T, T)>]) -> Plane<T> {
    let data = coords
        .iter()
        .map(|c| c.and_then(|(sx, sy)| p.sample_bilinear(sx, sy)).unwrap_or_else(T::zero))
        .collect();
    Plane::from_vec(p.width(), p.height(), data)
}

fn flags<T>(coords: &[Option<(T, T)>]) -> Vec<bool> {
    coords.iter().map(|c| c.is_none()).collect()
}

impl<T: Real> Warp<T> for Plane<T> {
    fn warp(&self, flow: &FlowField<T>) -> Warped<Self> {
        let coords = source_coords(self.width(), self.height(), flow);
        Warped {
            data: warp_with(self, &coords),
            out_of_bounds: flags(&coords),
        }
    }
}

impl<T: Real> Warp<T> for WeightMap<T> {
    fn warp(&self, flow: &FlowField<T>) -> Warped<Self> {
        let w = self.plane().warp(flow);
        Warped {
            data: WeightMap::from_plane(w.data),
            out_of_bounds: w.out_of_bounds,
        }
    }
}

impl<T: Real> Warp<T> for FeatureMap<T> {
    fn warp(&self, flow: &FlowField<T>) -> Warped<Self> {
        let (w, h) = self.dims();
        let coords = source_coords(w, h, flow);
        let planes = (0..self.channels())
            .map(|c| warp_with(&self.channel_plane(c), &coords))
            .collect();
        Warped {
            data: FeatureMap::from_planes(planes).expect("channel planes share dimensions"),
            out_of_bounds: flags(&coords),
        }
    }
}

impl<T: Real> Warp<T> for CapturedImage<T> {
    /// Interpolated intensities are re-quantized to the image's levels.
    fn warp(&self, flow: &FlowField<T>) -> Warped<Self> {
        let p = self.intensities().warp(flow);
        Warped {
            data: CapturedImage::from_intensities(&p.data, self.bits(), *self.exposure())
                .expect("warped intensities stay in [0, 1]"),
            out_of_bounds: p.out_of_bounds,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ramp(w: usize, h: usize) -> Plane<f64> {
        Plane::from_fn(w, h, |x, y| (x + 10 * y) as f64)
    }

    #[test]
    fn zero_flow_is_identity() {
        let p = ramp(9, 7);
        let w = p.warp(&FlowField::zeros(9, 7));
        assert_eq!(w.data, p);
        assert_eq!(w.out_of_bounds_count(), 0);
    }

    #[test]
    fn integer_shift_copies_and_flags_border() {
        let p = ramp(9, 7);
        let w = p.warp(&FlowField::constant(9, 7, 2.0, 0.0));
        for y in 0..7 {
            for x in 0..9 {
                if x + 2 < 9 {
                    assert_eq!(w.data.get(x, y), p.get(x + 2, y));
                    assert!(!w.out_of_bounds[y * 9 + x]);
                } else {
                    assert_eq!(w.data.get(x, y), 0.0);
                    assert!(w.out_of_bounds[y * 9 + x]);
                }
            }
        }
    }

    #[test]
    fn half_pixel_shift_interpolates_linear_ramp() {
        let p = ramp(9, 7);
        let w = p.warp(&FlowField::constant(9, 7, 0.5, 0.5));
        assert!((w.data.get(3, 2) - (3.5 + 25.0)).abs() < 1e-12);
    }

    #[test]
    fn coarse_data_uses_scaled_flow() {
        let p = ramp(8, 6);
        let w = p.warp(&FlowField::constant(16, 12, 4.0, 0.0));
        assert_eq!(w.data.get(1, 1), p.get(3, 1));
    }
}
