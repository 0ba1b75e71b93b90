//! Row-major single-channel grids and the resampling helpers shared by the
//! flow, fusion and stereo stages.

use crate::scalar::{from_usize, lit, Real};

#[derive(Clone, Debug, PartialEq)]
pub struct Plane<T> {
    width: usize,
    height: usize,
    data: Vec<T>,
}

impl<T: Real> Plane<T> {
    pub fn filled(width: usize, height: usize, value: T) -> Self {
        Self {
            width,
            height,
            data: vec![value; width * height],
        }
    }

    pub fn zeros(width: usize, height: usize) -> Self {
        Self::filled(width, height, T::zero())
    }

    /// Wraps row-major `data`; panics if the length does not match.
    pub fn from_vec(width: usize, height: usize, data: Vec<T>) -> Self {
        assert_eq!(data.len(), width * height, "plane data length");
        Self {
            width,
            height,
            data,
        }
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                data.push(f(x, y));
            }
        }
        Self {
            width,
            height,
            data,
        }
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

    #[inline]
    pub fn data(&self) -> &[T] {
        &self.data
    }

    #[inline]
    pub fn data_mut(&mut self) -> &mut [T] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<T> {
        self.data
    }

    #[inline(always)]
    pub fn get(&self, x: usize, y: usize) -> T {
        self.data[y * self.width + x]
    }

    #[inline(always)]
    pub fn set(&mut self, x: usize, y: usize, v: T) {
        self.data[y * self.width + x] = v;
    }

    /// Sample with coordinates clamped into the grid (replicate border).
    #[inline(always)]
    pub fn get_clamped(&self, x: isize, y: isize) -> T {
        let xc = x.clamp(0, self.width as isize - 1) as usize;
        let yc = y.clamp(0, self.height as isize - 1) as usize;
        self.get(xc, yc)
    }

    pub fn map(&self, f: impl Fn(T) -> T) -> Self {
        Self {
            width: self.width,
            height: self.height,
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }

    /// Bilinear sample at a real-valued location, or `None` when the location
    /// lies outside `[0, w-1] x [0, h-1]`. Integer locations return the stored
    /// value exactly.
    pub fn sample_bilinear(&self, sx: T, sy: T) -> Option<T> {
        let max_x = from_usize::<T>(self.width - 1);
        let max_y = from_usize::<T>(self.height - 1);
        if !(sx >= T::zero() && sy >= T::zero() && sx <= max_x && sy <= max_y) {
            return None;
        }
        let x0f = sx.floor();
        let y0f = sy.floor();
        let fx = sx - x0f;
        let fy = sy - y0f;
        let x0 = x0f.to_usize().unwrap_or(0);
        let y0 = y0f.to_usize().unwrap_or(0);
        let x1 = (x0 + 1).min(self.width - 1);
        let y1 = (y0 + 1).min(self.height - 1);
        let v00 = self.get(x0, y0);
        if fx == T::zero() && fy == T::zero() {
            return Some(v00);
        }
        let v10 = self.get(x1, y0);
        let v01 = self.get(x0, y1);
        let v11 = self.get(x1, y1);
        let top = v00 + (v10 - v00) * fx;
        let bottom = v01 + (v11 - v01) * fx;
        Some(top + (bottom - top) * fy)
    }

    /// 2x2 average pooling; odd trailing rows/columns are folded into the last cell.
    pub fn downsample2(&self) -> Self {
        let w = (self.width / 2).max(1);
        let h = (self.height / 2).max(1);
        let mut sums = vec![T::zero(); w * h];
        let mut counts = vec![0usize; w * h];
        for y in 0..self.height {
            let ty = (y / 2).min(h - 1);
            for x in 0..self.width {
                let tx = (x / 2).min(w - 1);
                sums[ty * w + tx] += self.get(x, y);
                counts[ty * w + tx] += 1;
            }
        }
        let data = sums
            .into_iter()
            .zip(counts)
            .map(|(s, c)| s / from_usize(c))
            .collect();
        Self::from_vec(w, h, data)
    }

    /// Bilinear resize to `(width, height)` using pixel-centre alignment.
    pub fn resize_bilinear(&self, width: usize, height: usize) -> Self {
        let sx = from_usize::<T>(self.width) / from_usize(width);
        let sy = from_usize::<T>(self.height) / from_usize(height);
        let half = lit::<T>(0.5);
        let max_x = from_usize::<T>(self.width - 1);
        let max_y = from_usize::<T>(self.height - 1);
        Self::from_fn(width, height, |x, y| {
            let u = ((from_usize::<T>(x) + half) * sx - half).max(T::zero()).min(max_x);
            let v = ((from_usize::<T>(y) + half) * sy - half).max(T::zero()).min(max_y);
            self.sample_bilinear(u, v).unwrap_or_else(T::zero)
        })
    }

    /// Mean over a `(2rx+1) x (2ry+1)` window truncated at the borders.
    pub fn box_mean(&self, rx: usize, ry: usize) -> Self {
        let sums = box_sum(self, rx, ry);
        let counts = box_counts(self.width, self.height, rx, ry);
        Self::from_vec(
            self.width,
            self.height,
            sums.data
                .iter()
                .zip(counts.iter())
                .map(|(&s, &c)| s / from_usize(c))
                .collect(),
        )
    }
}

/// Sum over a `(2rx+1) x (2ry+1)` window with zero padding (separable running sums).
pub fn box_sum<T: Real>(p: &Plane<T>, rx: usize, ry: usize) -> Plane<T> {
    let (w, h) = p.dims();
    let mut tmp = vec![T::zero(); w * h];
    for y in 0..h {
        let row = &p.data[y * w..(y + 1) * w];
        let out = &mut tmp[y * w..(y + 1) * w];
        for (x, o) in out.iter_mut().enumerate() {
            let lo = x.saturating_sub(rx);
            let hi = (x + rx).min(w - 1);
            let mut s = T::zero();
            for &v in &row[lo..=hi] {
                s += v;
            }
            *o = s;
        }
    }
    let mut data = vec![T::zero(); w * h];
    for y in 0..h {
        let lo = y.saturating_sub(ry);
        let hi = (y + ry).min(h - 1);
        for yy in lo..=hi {
            let src = &tmp[yy * w..(yy + 1) * w];
            let dst = &mut data[y * w..(y + 1) * w];
            for (d, &s) in dst.iter_mut().zip(src) {
                *d += s;
            }
        }
    }
    Plane::from_vec(w, h, data)
}

/// Number of in-bounds pixels in each truncated window.
pub fn box_counts(w: usize, h: usize, rx: usize, ry: usize) -> Vec<usize> {
    let mut out = Vec::with_capacity(w * h);
    for y in 0..h {
        let ny = (y + ry).min(h - 1) - y.saturating_sub(ry) + 1;
        for x in 0..w {
            let nx = (x + rx).min(w - 1) - x.saturating_sub(rx) + 1;
            out.push(nx * ny);
        }
    }
    out
}
