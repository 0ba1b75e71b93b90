use crate::capture::CapturedImage;
use crate::error::{Error, Result};
use crate::io::PfmImage;
use crate::plane::Plane;
use crate::scalar::{from_usize, lit, to_f64, Real};

/// Dense motion field on the first frame's grid: pixel `p` of frame 1 is
/// found at `p + f(p)` in frame 2.
#[derive(Clone, Debug, PartialEq)]
pub struct FlowField<T> {
    width: usize,
    height: usize,
    dx: Vec<T>,
    dy: Vec<T>,
}

impl<T: Real> FlowField<T> {
    pub fn new(width: usize, height: usize, dx: Vec<T>, dy: Vec<T>) -> Result<Self> {
        if dx.len() != width * height || dy.len() != width * height {
            return Err(Error::param("flow", "component length must equal width * height"));
        }
        if dx.iter().chain(dy.iter()).any(|v| !v.is_finite()) {
            return Err(Error::param("flow", "vectors must be finite"));
        }
        Ok(Self {
            width,
            height,
            dx,
            dy,
        })
    }

    pub fn constant(width: usize, height: usize, dx: T, dy: T) -> Self {
        Self {
            width,
            height,
            dx: vec![dx; width * height],
            dy: vec![dy; width * height],
        }
    }

    pub fn zeros(width: usize, height: usize) -> Self {
        Self::constant(width, height, T::zero(), T::zero())
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn dx(&self) -> &[T] {
        &self.dx
    }

    pub fn dy(&self) -> &[T] {
        &self.dy
    }

    #[inline]
    pub fn at(&self, x: usize, y: usize) -> (T, T) {
        let i = y * self.width + x;
        (self.dx[i], self.dy[i])
    }

    /// Resamples to another grid, scaling vectors by the size ratio.
    pub fn resized(&self, width: usize, height: usize) -> Self {
        if (width, height) == self.dims() {
            return self.clone();
        }
        let sx = from_usize::<T>(width) / from_usize(self.width);
        let sy = from_usize::<T>(height) / from_usize(self.height);
        let px = Plane::from_vec(self.width, self.height, self.dx.clone()).resize_bilinear(width, height);
        let py = Plane::from_vec(self.width, self.height, self.dy.clone()).resize_bilinear(width, height);
        Self {
            width,
            height,
            dx: px.into_vec().into_iter().map(|v| v * sx).collect(),
            dy: py.into_vec().into_iter().map(|v| v * sy).collect(),
        }
    }

    /// 3-channel PFM with channels `(dx, dy, 0)`.
    pub fn to_pfm(&self) -> PfmImage {
        let mut data = Vec::with_capacity(self.dx.len() * 3);
        for (a, b) in self.dx.iter().zip(&self.dy) {
            data.extend_from_slice(&[to_f64(*a) as f32, to_f64(*b) as f32, 0.0]);
        }
        PfmImage {
            width: self.width,
            height: self.height,
            channels: 3,
            data,
        }
    }

    pub fn from_pfm(img: &PfmImage) -> Result<Self> {
        if img.channels != 3 {
            return Err(Error::PfmFormat {
                field: "header",
                detail: "flow fields are stored as 3-channel PFM".into(),
            });
        }
        let dx = img.data.chunks_exact(3).map(|c| lit(c[0] as f64)).collect();
        let dy = img.data.chunks_exact(3).map(|c| lit(c[1] as f64)).collect();
        Self::new(img.width, img.height, dx, dy)
    }
}

/// Coarse-to-fine block search settings.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FlowParams {
    /// Pyramid levels including full resolution.
    pub levels: usize,
    /// Full search radius at the coarsest level, in coarse pixels.
    pub search_radius: i32,
    /// Refinement radius around the upsampled prior at finer levels.
    pub refine_radius: i32,
    /// Half-size of the matching patch.
    pub patch_radius: usize,
    /// Half-size of the window used for local mean/variance normalization.
    pub norm_radius: usize,
    /// Minimum estimated patch correlation for a vector to be trusted.
    pub min_correlation: f64,
    /// Half-size of the median filter applied after each level.
    pub median_radius: usize,
}

impl Default for FlowParams {
    fn default() -> Self {
        Self {
            levels: 3,
            search_radius: 4,
            refine_radius: 1,
            patch_radius: 3,
            norm_radius: 3,
            min_correlation: 0.5,
            median_radius: 2,
        }
    }
}

impl FlowParams {
    /// Smallest side length the coarsest pyramid level may have.
    pub fn min_coarse_side(&self) -> usize {
        2 * self.patch_radius + 2
    }
}

/// Locally mean/variance-normalized image plus its local standard deviation.
fn normalize<T: Real>(p: &Plane<T>, r: usize) -> (Plane<T>, Plane<T>) {
    let mean = p.box_mean(r, r);
    let sq = p.map(|v| v * v).box_mean(r, r);
    let eps = lit::<T>(1e-3);
    let mut sigma = Plane::zeros(p.width(), p.height());
    let mut out = Plane::zeros(p.width(), p.height());
    for i in 0..p.data().len() {
        let m = mean.data()[i];
        let s = (sq.data()[i] - m * m).max(T::zero()).sqrt();
        sigma.data_mut()[i] = s;
        out.data_mut()[i] = (p.data()[i] - m) / (s + eps);
    }
    (out, sigma)
}

/// Mean squared difference between the patch at `(x, y)` in `a` and at
/// `(x + vx, y + vy)` in `b`, with clamped sampling.
#[inline]
fn patch_cost<T: Real>(a: &Plane<T>, b: &Plane<T>, x: usize, y: usize, vx: i32, vy: i32, r: usize) -> T {
    let r = r as isize;
    let (x, y) = (x as isize, y as isize);
    let mut s = T::zero();
    for dy in -r..=r {
        for dx in -r..=r {
            let d = a.get_clamped(x + dx, y + dy) - b.get_clamped(x + dx + vx as isize, y + dy + vy as isize);
            s += d * d;
        }
    }
    s / from_usize((2 * r + 1) as usize * (2 * r + 1) as usize)
}

fn median(v: &mut [f64]) -> f64 {
    v.sort_by(|a, b| a.total_cmp(b));
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

fn median_filter<T: Real>(p: &Plane<T>, r: usize) -> Plane<T> {
    if r == 0 {
        return p.clone();
    }
    let ri = r as isize;
    let mut buf = Vec::with_capacity((2 * r + 1) * (2 * r + 1));
    Plane::from_fn(p.width(), p.height(), |x, y| {
        buf.clear();
        for dy in -ri..=ri {
            for dx in -ri..=ri {
                buf.push(to_f64(p.get_clamped(x as isize + dx, y as isize + dy)));
            }
        }
        lit(median(&mut buf))
    })
}

struct LevelResult {
    vx: Vec<i32>,
    vy: Vec<i32>,
    reliable: Vec<bool>,
}

fn median_of_reliable(v: &[i32], reliable: &[bool]) -> Option<f64> {
    let mut xs: Vec<f64> = v.iter().zip(reliable).filter(|(_, &r)| r).map(|(&a, _)| a as f64).collect();
    (!xs.is_empty()).then(|| median(&mut xs))
}

#[allow(clippy::too_many_arguments)]
fn match_level<T: Real>(
    n1: &Plane<T>,
    n2: &Plane<T>,
    sigma1: &Plane<T>,
    sigma2: &Plane<T>,
    prior: Option<(&[i32], &[i32])>,
    params: &FlowParams,
) -> LevelResult {
    let (w, h) = n1.dims();
    let radius = if prior.is_some() {
        params.refine_radius
    } else {
        params.search_radius
    };
    let max_cost = lit::<T>(2.0 * (1.0 - params.min_correlation));
    let min_sigma = lit::<T>(2e-3);
    let mut vx = vec![0i32; w * h];
    let mut vy = vec![0i32; w * h];
    let mut reliable = vec![false; w * h];
    for y in 0..h {
        for x in 0..w {
            let i = y * w + x;
            let (px, py) = prior.map(|(a, b)| (a[i], b[i])).unwrap_or((0, 0));
            // Prior first so ties keep it.
            let mut best = (px, py, patch_cost(n1, n2, x, y, px, py, params.patch_radius));
            for dy in -radius..=radius {
                for dx in -radius..=radius {
                    if dx == 0 && dy == 0 {
                        continue;
                    }
                    let (cx, cy) = (px + dx, py + dy);
                    let c = patch_cost(n1, n2, x, y, cx, cy, params.patch_radius);
                    if c < best.2 {
                        best = (cx, cy, c);
                    }
                }
            }
            let tx = (x as i32 + best.0).clamp(0, w as i32 - 1) as usize;
            let ty = (y as i32 + best.1).clamp(0, h as i32 - 1) as usize;
            reliable[i] = best.2 <= max_cost && sigma1.get(x, y) > min_sigma && sigma2.get(tx, ty) > min_sigma;
            vx[i] = best.0;
            vy[i] = best.1;
        }
    }
    // Untrusted vectors take the median of the trusted ones, or keep the prior
    // when nothing at this level is trusted.
    let fill = median_of_reliable(&vx, &reliable).zip(median_of_reliable(&vy, &reliable));
    for i in 0..w * h {
        if !reliable[i] {
            match fill {
                Some((mx, my)) => {
                    vx[i] = mx.round() as i32;
                    vy[i] = my.round() as i32;
                }
                None => {
                    let (px, py) = prior.map(|(a, b)| (a[i], b[i])).unwrap_or((0, 0));
                    vx[i] = px;
                    vy[i] = py;
                }
            }
        }
    }
    let fx = median_filter(&Plane::<f64>::from_vec(w, h, vx.iter().map(|&v| v as f64).collect()), params.median_radius);
    let fy = median_filter(&Plane::<f64>::from_vec(w, h, vy.iter().map(|&v| v as f64).collect()), params.median_radius);
    LevelResult {
        vx: fx.data().iter().map(|v| v.round() as i32).collect(),
        vy: fy.data().iter().map(|v| v.round() as i32).collect(),
        reliable,
    }
}

/// Dense flow from `i1` to `i2` by coarse-to-fine block search on locally
/// normalized patches, which makes matching insensitive to the exposure
/// difference between the frames. The finest level adds a parabolic
/// sub-pixel offset per axis.
pub fn estimate_flow<T: Real>(
    i1: &CapturedImage<T>,
    i2: &CapturedImage<T>,
    params: &FlowParams,
) -> Result<FlowField<T>> {
    if i1.dims() != i2.dims() {
        return Err(Error::mismatch(i1.dims(), i2.dims()));
    }
    let levels = params.levels.max(1);
    let (w, h) = i1.dims();
    let min = params.min_coarse_side();
    let scale = 1usize << (levels - 1);
    if w / scale < min || h / scale < min {
        return Err(Error::ImageTooSmall {
            width: w,
            height: h,
            levels,
            min: min * scale,
        });
    }
    let mut pyr1 = vec![i1.intensities()];
    let mut pyr2 = vec![i2.intensities()];
    for _ in 1..levels {
        let a = pyr1.last().unwrap().downsample2();
        let b = pyr2.last().unwrap().downsample2();
        pyr1.push(a);
        pyr2.push(b);
    }

    let mut current: Option<LevelResult> = None;
    let mut finest = None;
    for level in (0..levels).rev() {
        let (n1, s1) = normalize(&pyr1[level], params.norm_radius);
        let (n2, s2) = normalize(&pyr2[level], params.norm_radius);
        let (lw, lh) = n1.dims();
        let prior = current.as_ref().map(|c| {
            let (cw, ch) = pyr1[level + 1].dims();
            let mut px = vec![0i32; lw * lh];
            let mut py = vec![0i32; lw * lh];
            for y in 0..lh {
                for x in 0..lw {
                    let ci = (y / 2).min(ch - 1) * cw + (x / 2).min(cw - 1);
                    px[y * lw + x] = 2 * c.vx[ci];
                    py[y * lw + x] = 2 * c.vy[ci];
                }
            }
            (px, py)
        });
        let res = match_level(
            &n1,
            &n2,
            &s1,
            &s2,
            prior.as_ref().map(|(a, b)| (a.as_slice(), b.as_slice())),
            params,
        );
        if level == 0 {
            finest = Some((n1, n2));
        }
        current = Some(res);
    }
    let res = current.expect("at least one level");
    let (n1, n2) = finest.expect("finest level");

    let mut dx = Vec::with_capacity(w * h);
    let mut dy = Vec::with_capacity(w * h);
    let half = lit::<T>(0.5);
    let sub = |cm: T, c0: T, cp: T| -> T {
        let den = cm - lit::<T>(2.0) * c0 + cp;
        if den > T::zero() {
            (half * (cm - cp) / den).max(-half).min(half)
        } else {
            T::zero()
        }
    };
    let pr = params.patch_radius;
    for y in 0..h {
        for x in 0..w {
            let i = y * w + x;
            let (vx, vy) = (res.vx[i], res.vy[i]);
            if !res.reliable[i] {
                dx.push(lit::<T>(vx as f64));
                dy.push(lit::<T>(vy as f64));
                continue;
            }
            let c0 = patch_cost(&n1, &n2, x, y, vx, vy, pr);
            let ox = sub(
                patch_cost(&n1, &n2, x, y, vx - 1, vy, pr),
                c0,
                patch_cost(&n1, &n2, x, y, vx + 1, vy, pr),
            );
            let oy = sub(
                patch_cost(&n1, &n2, x, y, vx, vy - 1, pr),
                c0,
                patch_cost(&n1, &n2, x, y, vx, vy + 1, pr),
            );
            dx.push(lit::<T>(vx as f64) + ox);
            dy.push(lit::<T>(vy as f64) + oy);
        }
    }
    let sub_median = |v: &[T]| -> Option<T> {
        let mut xs: Vec<f64> = v.iter().zip(&res.reliable).filter(|(_, &r)| r).map(|(&a, _)| to_f64(a)).collect();
        (!xs.is_empty()).then(|| lit(median(&mut xs)))
    };
    if let (Some(mx), Some(my)) = (sub_median(&dx), sub_median(&dy)) {
        for i in 0..w * h {
            if !res.reliable[i] {
                dx[i] = mx;
                dy[i] = my;
            }
        }
    }
    FlowField::new(w, h, dx, dy)
}
