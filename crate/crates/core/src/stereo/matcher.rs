use crate::error::{Error, Result};
use crate::flowfusion::FeatureMap;
use crate::plane::{box_sum, Plane};
use crate::scalar::{lit, Real};

use super::disparity::DisparityMap;

/// Left-right consistency tolerance in pixels.
pub const LR_THRESHOLD: i64 = 1;

/// Window and centering settings of the correlation matcher.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MatchParams {
    /// Half-width of the aggregation window (9 columns).
    pub window_rx: usize,
    /// Half-height of the aggregation window (7 rows).
    pub window_ry: usize,
    /// Squared window norms at or below this leave the cost undefined.
    pub min_norm_sq: f64,
}

impl Default for MatchParams {
    fn default() -> Self {
        Self {
            window_rx: 4,
            window_ry: 3,
            min_norm_sq: 1e-9,
        }
    }
}

/// Matching costs `C(x, y, d)` for `d` in `0..=d_max`; lower is better and
/// `+inf` marks candidates that are out of range or undefined.
#[derive(Clone, Debug, PartialEq)]
pub struct CostVolume<T> {
    width: usize,
    height: usize,
    d_max: usize,
    costs: Vec<T>,
}

impl<T: Real> CostVolume<T> {
    pub fn from_costs(width: usize, height: usize, d_max: usize, costs: Vec<T>) -> Result<Self> {
        if d_max == 0 {
            return Err(Error::param("d_max", "must be at least 1"));
        }
        if costs.len() != width * height * (d_max + 1) {
            return Err(Error::param("costs", "length must equal width * height * (d_max + 1)"));
        }
        if costs.iter().any(|c| c.is_nan() || *c == T::neg_infinity()) {
            return Err(Error::param("costs", "costs must be finite or +inf"));
        }
        Ok(Self {
            width,
            height,
            d_max,
            costs,
        })
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn d_max(&self) -> usize {
        self.d_max
    }

    #[inline]
    pub fn cost(&self, x: usize, y: usize, d: usize) -> T {
        self.costs[(y * self.width + x) * (self.d_max + 1) + d]
    }

    /// All candidate costs of one pixel.
    pub fn costs_at(&self, x: usize, y: usize) -> &[T] {
        let n = self.d_max + 1;
        let i = (y * self.width + x) * n;
        &self.costs[i..i + n]
    }

    /// Integer winner-take-all disparity; ties keep the smaller `d`.
    pub fn argmin(&self, x: usize, y: usize) -> Option<usize> {
        argmin(self.costs_at(x, y).iter().copied())
    }

    /// Winner for right-view pixel `xr`, scanning `cost(xr + d, y, d)`.
    pub fn argmin_right(&self, xr: usize, y: usize) -> Option<usize> {
        let last = (self.width - 1 - xr).min(self.d_max);
        argmin((0..=last).map(|d| self.cost(xr + d, y, d)))
    }
}

fn argmin<T: Real>(costs: impl Iterator<Item = T>) -> Option<usize> {
    let mut best: Option<(usize, T)> = None;
    for (d, c) in costs.enumerate() {
        if c.is_finite() && best.is_none_or(|(_, b)| c < b) {
            best = Some((d, c));
        }
    }
    best.map(|(d, _)| d)
}

/// Subtracts from every channel its mean over the aggregation window.
pub fn center_features<T: Real>(f: &FeatureMap<T>, params: &MatchParams) -> FeatureMap<T> {
    let planes = (0..f.channels())
        .map(|c| {
            let p = f.channel_plane(c);
            let m = p.box_mean(params.window_rx, params.window_ry);
            Plane::from_vec(
                p.width(),
                p.height(),
                p.data().iter().zip(m.data()).map(|(&v, &mu)| v - mu).collect(),
            )
        })
        .collect();
    FeatureMap::from_planes(planes).expect("centered channels share dimensions")
}

/// Negative normalized correlation of locally centered feature windows.
///
/// For each candidate, the window around `(x, y)` is restricted to columns
/// `u >= d`, where both `(u, v)` on the left and `(u - d, v)` on the right
/// exist; the cost is `-sum<l, r> / sqrt(sum |l|^2 * sum |r|^2)`.
pub fn build_cost_volume<T: Real>(
    fl: &FeatureMap<T>,
    fr: &FeatureMap<T>,
    d_max: usize,
    params: &MatchParams,
) -> Result<CostVolume<T>> {
    if fl.dims() != fr.dims() {
        return Err(Error::mismatch(fl.dims(), fr.dims()));
    }
    if fl.channels() != fr.channels() {
        return Err(Error::param("features", "left and right channel counts differ"));
    }
    let (w, h) = fl.dims();
    if d_max == 0 || d_max >= w {
        return Err(Error::param("d_max", format!("must satisfy 1 <= d_max < width ({w})")));
    }
    let l = center_features(fl, params);
    let r = center_features(fr, params);
    let nd = d_max + 1;
    let mut costs = vec![T::infinity(); w * h * nd];
    let min_norm = lit::<T>(params.min_norm_sq);

    // Per-pixel squared norms, shared by every candidate.
    let norm = |f: &FeatureMap<T>| -> Vec<T> {
        let mut n = vec![T::zero(); w * h];
        for c in 0..f.channels() {
            for (a, &v) in n.iter_mut().zip(f.channel(c)) {
                *a += v * v;
            }
        }
        n
    };
    let nl = norm(&l);
    let nr = norm(&r);

    let mut prod = Plane::zeros(w, h);
    let mut el = Plane::zeros(w, h);
    let mut er = Plane::zeros(w, h);
    for d in 0..nd {
        for y in 0..h {
            for u in 0..w {
                let i = y * w + u;
                if u < d {
                    prod.data_mut()[i] = T::zero();
                    el.data_mut()[i] = T::zero();
                    er.data_mut()[i] = T::zero();
                    continue;
                }
                let j = i - d;
                let mut s = T::zero();
                for c in 0..l.channels() {
                    s += l.channel(c)[i] * r.channel(c)[j];
                }
                prod.data_mut()[i] = s;
                el.data_mut()[i] = nl[i];
                er.data_mut()[i] = nr[j];
            }
        }
        let sp = box_sum(&prod, params.window_rx, params.window_ry);
        let sl = box_sum(&el, params.window_rx, params.window_ry);
        let sr = box_sum(&er, params.window_rx, params.window_ry);
        for y in 0..h {
            for x in d..w {
                let i = y * w + x;
                let (a, b) = (sl.data()[i], sr.data()[i]);
                if a > min_norm && b > min_norm {
                    costs[i * nd + d] = -sp.data()[i] / (a * b).sqrt();
                }
            }
        }
    }
    CostVolume::from_costs(w, h, d_max, costs)
}

/// Winner-take-all with parabolic sub-pixel refinement and a left-right
/// consistency check on the integer winners.
pub fn estimate_disparity<T: Real>(vol: &CostVolume<T>) -> DisparityMap<T> {
    let (w, h) = vol.dims();
    let d_max = vol.d_max();
    let left: Vec<Option<usize>> = (0..w * h).map(|i| vol.argmin(i % w, i / w)).collect();
    let right: Vec<Option<usize>> = (0..w * h).map(|i| vol.argmin_right(i % w, i / w)).collect();
    let half = lit::<T>(0.5);
    let two = lit::<T>(2.0);
    let mut values = vec![T::zero(); w * h];
    let mut valid = vec![false; w * h];
    for y in 0..h {
        for x in 0..w {
            let i = y * w + x;
            let Some(d) = left[i].filter(|&d| d <= x) else { continue };
            let consistent = right[i - d].is_some_and(|dr| (dr as i64 - d as i64).abs() <= LR_THRESHOLD);
            if !consistent {
                continue;
            }
            let mut v = lit::<T>(d as f64);
            if d > 0 && d < d_max {
                let (cm, c0, cp) = (vol.cost(x, y, d - 1), vol.cost(x, y, d), vol.cost(x, y, d + 1));
                if cm.is_finite() && cp.is_finite() {
                    let den = cm - two * c0 + cp;
                    if den > T::zero() {
                        v += (half * (cm - cp) / den).max(-half).min(half);
                    }
                }
            }
            values[i] = v;
            valid[i] = true;
        }
    }
    DisparityMap::new(Plane::from_vec(w, h, values), valid).expect("mask matches plane")
}
