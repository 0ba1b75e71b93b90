//! Scene radiance: HDR ingest, camera dynamic-range bounds and synthetic
//! stereo sequences with exact ground truth.
//!
//! Radiance is single-channel and in relative units: with exposure 1 and
//! `t_max = 1`, a radiance equal to [`DynamicRangeBounds::middle`] captures
//! as intensity 0.5.

use std::path::Path;

use crate::error::{Error, Result};
use crate::flowfusion::FlowField;
use crate::io::{read_pfm, write_pfm, PfmImage};
use crate::kv::KvFile;
use crate::plane::Plane;
use crate::rng::philox4x32_10;
use crate::scalar::{lit, to_f64, Real};
use crate::stereo::DisparityMap;

/// Rec. 709 luminance weights applied to 3-channel input.
pub const LUMA_WEIGHTS: [f64; 3] = [0.2126, 0.7152, 0.0722];

/// Per-pixel non-negative linear scene radiance.
#[derive(Clone, Debug, PartialEq)]
pub struct RadianceMap<T> {
    plane: Plane<T>,
}

impl<T: Real> RadianceMap<T> {
    pub fn new(plane: Plane<T>) -> Result<Self> {
        if plane.width() == 0 || plane.height() == 0 {
            return Err(Error::param("radiance", "empty radiance map"));
        }
        let w = plane.width();
        for (i, &v) in plane.data().iter().enumerate() {
            if !v.is_finite() {
                return Err(Error::NonFiniteRadiance { x: i % w, y: i / w });
            }
            if v < T::zero() {
                return Err(Error::NegativeRadiance {
                    x: i % w,
                    y: i / w,
                    value: to_f64(v),
                });
            }
        }
        Ok(Self { plane })
    }

    pub fn from_vec(width: usize, height: usize, values: Vec<T>) -> Result<Self> {
        if values.len() != width * height {
            return Err(Error::param("radiance", "value count does not match dimensions"));
        }
        Self::new(Plane::from_vec(width, height, values))
    }

    pub fn plane(&self) -> &Plane<T> {
        &self.plane
    }

    pub fn width(&self) -> usize {
        self.plane.width()
    }

    pub fn height(&self) -> usize {
        self.plane.height()
    }

    pub fn dims(&self) -> (usize, usize) {
        self.plane.dims()
    }

    pub fn values(&self) -> &[T] {
        self.plane.data()
    }

    pub fn max(&self) -> T {
        self.values().iter().copied().fold(T::zero(), T::max)
    }

    /// Radiance multiplied by a constant (used to build brightness-scaled pairs).
    pub fn scaled(&self, k: T) -> Result<Self> {
        Self::new(self.plane.map(|v| v * k))
    }
}

/// Reads a PFM, reducing 3-channel data to luminance with [`LUMA_WEIGHTS`].
pub fn load_radiance<T: Real>(path: &Path) -> Result<RadianceMap<T>> {
    let img = read_pfm(path)?;
    radiance_from_pfm(&img)
}

pub fn radiance_from_pfm<T: Real>(img: &PfmImage) -> Result<RadianceMap<T>> {
    let n = img.width * img.height;
    let mut values = Vec::with_capacity(n);
    for i in 0..n {
        let v = if img.channels == 3 {
            let px = &img.data[3 * i..3 * i + 3];
            if let Some(bad) = px.iter().find(|c| !c.is_finite()) {
                let _ = bad;
                return Err(Error::NonFiniteRadiance {
                    x: i % img.width,
                    y: i / img.width,
                });
            }
            px.iter()
                .zip(LUMA_WEIGHTS)
                .map(|(&c, w)| c as f64 * w)
                .sum::<f64>()
        } else {
            img.data[i] as f64
        };
        values.push(T::from_f64(v).unwrap_or_else(T::nan));
    }
    RadianceMap::from_vec(img.width, img.height, values)
}

/// Writes a single-channel PFM. Values are stored as `f32`.
pub fn save_radiance<T: Real>(path: &Path, map: &RadianceMap<T>) -> Result<()> {
    write_pfm(path, &plane_to_pfm(map.plane()))
}

pub(crate) fn plane_to_pfm<T: Real>(p: &Plane<T>) -> PfmImage {
    PfmImage {
        width: p.width(),
        height: p.height(),
        channels: 1,
        data: p.data().iter().map(|&v| to_f64(v) as f32).collect(),
    }
}

/// Radiance interval the camera can register at exposure 1.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DynamicRangeBounds<T> {
    pub lower: T,
    pub upper: T,
    pub middle: T,
    pub range_ratio: T,
}

impl<T: Real> DynamicRangeBounds<T> {
    /// Bounds centred on `max_radiance / 2` whose ratio `upper / lower` is `range_ratio`.
    pub fn from_max(max_radiance: T, range_ratio: T) -> Result<Self> {
        if !(max_radiance.is_finite() && max_radiance >= T::zero()) {
            return Err(Error::param("max_radiance", "must be finite and non-negative"));
        }
        if max_radiance == T::zero() {
            return Err(Error::DegenerateScene);
        }
        if !(range_ratio > T::one() && range_ratio.is_finite()) {
            return Err(Error::param("range_ratio", "must be finite and > 1"));
        }
        let middle = max_radiance / lit(2.0);
        let interval = middle * (range_ratio - T::one()) / (range_ratio + T::one());
        Ok(Self {
            lower: middle - interval,
            upper: middle + interval,
            middle,
            range_ratio,
        })
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lower >= T::zero() && self.lower < self.upper && self.upper.is_finite()) {
            return Err(Error::param("bounds", "require 0 <= lower < upper"));
        }
        Ok(())
    }

    pub fn span(&self) -> T {
        self.upper - self.lower
    }
}

pub fn dynamic_range_bounds<T: Real>(
    radiance: &RadianceMap<T>,
    range_ratio: T,
) -> Result<DynamicRangeBounds<T>> {
    DynamicRangeBounds::from_max(radiance.max(), range_ratio)
}

/// Disparity in pixels of a point at depth `z` for focal length `f` (pixels)
/// and baseline `b` (meters).
pub fn disparity_from_depth<T: Real>(z: T, f: T, b: T) -> Result<T> {
    if !(z > T::zero()) {
        return Err(Error::param("depth", "must be > 0"));
    }
    if !(f > T::zero()) {
        return Err(Error::param("focal", "must be > 0"));
    }
    if !(b > T::zero()) {
        return Err(Error::param("baseline", "must be > 0"));
    }
    Ok(f * b / z)
}

/// One horizontal band of a synthetic scene.
#[derive(Clone, Debug, PartialEq)]
pub struct RegionSpec {
    /// Mean radiance of the band.
    pub level: f64,
    /// Base stereo disparity in pixels.
    pub disparity: u32,
    /// Relative band height; normalized over all regions.
    pub weight: f64,
}

/// Parameters of a synthetic stereo sequence.
///
/// The scene is a stack of horizontal textured bands in world coordinates.
/// Within a band, world rows alternate every `stripe_rows` rows between the
/// band disparity and that plus `depth_step`. Every frame the world
/// translates by `(motion_x, motion_y)` pixels, so the ground-truth flow is
/// that constant vector and disparity travels with the content.
#[derive(Clone, Debug, PartialEq)]
pub struct SceneSpec {
    pub width: usize,
    pub height: usize,
    pub frames: usize,
    pub regions: Vec<RegionSpec>,
    pub motion_x: i32,
    pub motion_y: i32,
    pub seed: u64,
    /// Texture amplitude relative to the band level.
    pub texture_amplitude: f64,
    /// Coarsest value-noise lattice cell in pixels.
    pub texture_cell: u32,
    /// Disparity added on alternate stripes.
    pub depth_step: u32,
    /// Height of a disparity stripe in world rows.
    pub stripe_rows: u32,
    pub focal: f64,
    pub baseline: f64,
}

impl SceneSpec {
    /// Bright, mid and dark bands plus a deep-shadow strip. No single
    /// exposure holds bright and dark together under an 8:1 camera range,
    /// and the shadow strip stays crushed at every usable exposure.
    pub fn split_dr() -> Self {
        let band = |level, disparity, weight| RegionSpec {
            level,
            disparity,
            weight,
        };
        Self {
            width: 160,
            height: 120,
            frames: 2,
            regions: vec![
                band(1.0, 6, 0.35),
                band(0.3, 10, 0.2),
                band(0.1, 14, 0.38),
                band(0.005, 18, 0.07),
            ],
            motion_x: 0,
            motion_y: 0,
            seed: 1,
            texture_amplitude: 0.3,
            texture_cell: 8,
            depth_step: 4,
            stripe_rows: 16,
            focal: 100.0,
            baseline: 0.4,
        }
    }

    /// Looks up a built-in preset by name.
    pub fn preset(name: &str) -> Option<Self> {
        match name {
            "split_dr" => Some(Self::split_dr()),
            "split_dr_moving" => Some(Self::split_dr_moving()),
            "narrow_dr" => Some(Self::narrow_dr()),
            _ => None,
        }
    }

    pub const PRESETS: [&'static str; 3] = ["split_dr", "split_dr_moving", "narrow_dr"];

    /// `split_dr` with content drifting 3 px right and 8 px down per frame.
    /// The vertical drift is half a depth stripe, so unaligned fusion mixes
    /// disparities.
    pub fn split_dr_moving() -> Self {
        Self {
            motion_x: 3,
            motion_y: 8,
            ..Self::split_dr()
        }
    }

    /// Two mid-level bands whose radiance stays within the camera range.
    pub fn narrow_dr() -> Self {
        Self {
            regions: vec![
                RegionSpec {
                    level: 0.7,
                    disparity: 8,
                    weight: 0.5,
                },
                RegionSpec {
                    level: 0.55,
                    disparity: 12,
                    weight: 0.5,
                },
            ],
            texture_amplitude: 0.3,
            ..Self::split_dr()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.width == 0 || self.height == 0 {
            return Err(Error::param("scene", "width and height must be >= 1"));
        }
        if self.frames == 0 {
            return Err(Error::param("frames", "must be >= 1"));
        }
        if self.regions.is_empty() {
            return Err(Error::param("regions", "at least one region required"));
        }
        for r in &self.regions {
            if (r.disparity + self.depth_step) as usize >= self.width {
                return Err(Error::param(
                    "disparity",
                    format!("{} px exceeds image width {}", r.disparity + self.depth_step, self.width),
                ));
            }
            if !(r.level.is_finite() && r.level >= 0.0) {
                return Err(Error::param("level", "must be finite and >= 0"));
            }
            if !(r.weight.is_finite() && r.weight > 0.0) {
                return Err(Error::param("weight", "zero-area region"));
            }
        }
        if !(0.0..1.0).contains(&self.texture_amplitude) {
            return Err(Error::param("texture_amplitude", "must be in [0, 1)"));
        }
        if self.stripe_rows == 0 {
            return Err(Error::param("stripe_rows", "must be >= 1"));
        }
        if self.texture_cell == 0 {
            return Err(Error::param("texture_cell", "must be >= 1"));
        }
        if self.band_rows().iter().any(|&(a, b)| b <= a) {
            return Err(Error::param("weight", "zero-area region after rounding to rows"));
        }
        Ok(())
    }

    /// Row ranges `[start, end)` of each band in world coordinates.
    pub fn band_rows(&self) -> Vec<(usize, usize)> {
        let total: f64 = self.regions.iter().map(|r| r.weight).sum();
        let mut acc = 0.0;
        let mut start = 0usize;
        let mut out = Vec::with_capacity(self.regions.len());
        for (i, r) in self.regions.iter().enumerate() {
            acc += r.weight;
            let end = if i + 1 == self.regions.len() {
                self.height
            } else {
                ((acc / total) * self.height as f64).round() as usize
            };
            out.push((start, end.max(start)));
            start = end.max(start);
        }
        out
    }

    /// Region index of world row `y` (the band layout repeats with period `height`).
    pub fn region_of_row(&self, y: i64) -> usize {
        let yw = y.rem_euclid(self.height as i64) as usize;
        self.band_rows()
            .iter()
            .position(|&(a, b)| yw >= a && yw < b)
            .unwrap_or(self.regions.len() - 1)
    }

    pub fn from_kv(kv: &KvFile) -> Result<Self> {
        Self::from_kv_prefixed(kv, "")
    }

    /// Reads scene keys, each prefixed by `prefix` (e.g. `"scene."`).
    pub fn from_kv_prefixed(kv: &KvFile, prefix: &str) -> Result<Self> {
        let d = Self::split_dr();
        let key = |k: &str| format!("{prefix}{k}");
        let mut regions = Vec::new();
        let region_prefix = key("region");
        for idx in kv.indexed(&region_prefix).keys() {
            let rk = |f: &str| format!("{region_prefix}.{idx}.{f}");
            regions.push(RegionSpec {
                level: kv.get(&rk("level"))?.ok_or_else(|| Error::Config {
                    line: 0,
                    detail: format!("missing `{}`", rk("level")),
                })?,
                disparity: kv.get(&rk("disparity"))?.ok_or_else(|| Error::Config {
                    line: 0,
                    detail: format!("missing `{}`", rk("disparity")),
                })?,
                weight: kv.get_or(&rk("weight"), 1.0)?,
            });
        }
        let spec = Self {
            width: kv.get_or(&key("width"), d.width)?,
            height: kv.get_or(&key("height"), d.height)?,
            frames: kv.get_or(&key("frames"), d.frames)?,
            regions: if regions.is_empty() { d.regions } else { regions },
            motion_x: kv.get_or(&key("motion_x"), d.motion_x)?,
            motion_y: kv.get_or(&key("motion_y"), d.motion_y)?,
            seed: kv.get_or(&key("seed"), d.seed)?,
            texture_amplitude: kv.get_or(&key("texture_amplitude"), d.texture_amplitude)?,
            texture_cell: kv.get_or(&key("texture_cell"), d.texture_cell)?,
            depth_step: kv.get_or(&key("depth_step"), d.depth_step)?,
            stripe_rows: kv.get_or(&key("stripe_rows"), d.stripe_rows)?,
            focal: kv.get_or(&key("focal"), d.focal)?,
            baseline: kv.get_or(&key("baseline"), d.baseline)?,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn is_scene_key(k: &str) -> bool {
        const PLAIN: [&str; 12] = [
            "depth_step",
            "stripe_rows",
            "width",
            "height",
            "frames",
            "motion_x",
            "motion_y",
            "seed",
            "texture_amplitude",
            "texture_cell",
            "focal",
            "baseline",
        ];
        if PLAIN.contains(&k) {
            return true;
        }
        let parts: Vec<&str> = k.split('.').collect();
        parts.len() == 3
            && parts[0] == "region"
            && parts[1].parse::<usize>().is_ok()
            && matches!(parts[2], "level" | "disparity" | "weight")
    }

    /// Texture in `[-1, 1]` at integer world coordinates for `region`.
    pub fn texture(&self, region: usize, xw: i64, yw: i64) -> f64 {
        let mut acc = 0.0;
        let mut cell = self.texture_cell.max(1) as i64;
        let mut amp = 0.5;
        let mut norm = 0.0;
        for octave in 0..3u32 {
            acc += amp * value_noise(self.seed, region as u32, octave, xw, yw, cell);
            norm += amp;
            amp *= 0.6;
            cell = (cell / 2).max(1);
        }
        acc / norm
    }

    /// Disparity of world row `yw` inside `region`.
    pub fn disparity_at(&self, region: usize, yw: i64) -> u32 {
        let stripe = yw.div_euclid(self.stripe_rows.max(1) as i64).rem_euclid(2) as u32;
        self.regions[region].disparity + stripe * self.depth_step
    }

    fn radiance_at(&self, region: usize, xw: i64, yw: i64) -> f64 {
        self.regions[region].level * (1.0 + self.texture_amplitude * self.texture(region, xw, yw))
    }
}

fn lattice(seed: u64, region: u32, octave: u32, ix: i64, iy: i64) -> f64 {
    let w = philox4x32_10(
        [ix as u32, iy as u32, region, 0x7e57_0000 | octave],
        [seed as u32, (seed >> 32) as u32],
    );
    (w[0] as f64 / u32::MAX as f64) * 2.0 - 1.0
}

fn smoothstep(t: f64) -> f64 {
    t * t * (3.0 - 2.0 * t)
}

/// Smoothly interpolated lattice noise with period-free hashing.
fn value_noise(seed: u64, region: u32, octave: u32, x: i64, y: i64, cell: i64) -> f64 {
    let ix = x.div_euclid(cell);
    let iy = y.div_euclid(cell);
    let fx = smoothstep(x.rem_euclid(cell) as f64 / cell as f64);
    let fy = smoothstep(y.rem_euclid(cell) as f64 / cell as f64);
    let v00 = lattice(seed, region, octave, ix, iy);
    let v10 = lattice(seed, region, octave, ix + 1, iy);
    let v01 = lattice(seed, region, octave, ix, iy + 1);
    let v11 = lattice(seed, region, octave, ix + 1, iy + 1);
    let top = v00 + (v10 - v00) * fx;
    let bottom = v01 + (v11 - v01) * fx;
    top + (bottom - top) * fy
}

/// Left/right radiance of one time step.
#[derive(Clone, Debug, PartialEq)]
pub struct StereoRadiance<T> {
    pub left: RadianceMap<T>,
    pub right: RadianceMap<T>,
}

/// Ordered stereo radiance frames with ground truth for the left view.
#[derive(Clone, Debug, PartialEq)]
pub struct SceneSequence<T> {
    pub frames: Vec<StereoRadiance<T>>,
    pub gt_disparity: Vec<DisparityMap<T>>,
    /// Flow from frame `k` to frame `k + 1`, when known.
    pub gt_flow: Option<Vec<FlowField<T>>>,
    pub focal: T,
    pub baseline: T,
}

impl<T: Real> SceneSequence<T> {
    pub fn dims(&self) -> (usize, usize) {
        self.frames[0].left.dims()
    }

    pub fn validate(&self) -> Result<()> {
        let dims = self.dims();
        for f in &self.frames {
            for m in [&f.left, &f.right] {
                if m.dims() != dims {
                    return Err(Error::mismatch(dims, m.dims()));
                }
            }
        }
        if self.gt_disparity.len() != self.frames.len() {
            return Err(Error::param("gt_disparity", "one map per frame required"));
        }
        if let Some(flows) = &self.gt_flow {
            if flows.len() + 1 != self.frames.len() {
                return Err(Error::param("gt_flow", "count must be frames - 1"));
            }
        }
        Ok(())
    }

    /// Maximum radiance over every frame of both views.
    pub fn max_radiance(&self) -> T {
        self.frames
            .iter()
            .flat_map(|f| [f.left.max(), f.right.max()])
            .fold(T::zero(), T::max)
    }
}

/// Renders a synthetic sequence. Ground truth is exact by construction: the
/// right view samples the same world texture shifted by each band's disparity.
pub fn synth_scene<T: Real>(spec: &SceneSpec) -> Result<SceneSequence<T>> {
    spec.validate()?;
    let (w, h) = (spec.width, spec.height);
    let mut frames = Vec::with_capacity(spec.frames);
    let mut gt_disparity = Vec::with_capacity(spec.frames);
    for k in 0..spec.frames as i64 {
        let ox = k * spec.motion_x as i64;
        let oy = k * spec.motion_y as i64;
        let region_rows: Vec<usize> = (0..h as i64).map(|y| spec.region_of_row(y - oy)).collect();
        let left = Plane::from_fn(w, h, |x, y| {
            let r = region_rows[y];
            lit(spec.radiance_at(r, x as i64 - ox, y as i64 - oy))
        });
        let right = Plane::from_fn(w, h, |x, y| {
            let r = region_rows[y];
            let d = spec.disparity_at(r, y as i64 - oy) as i64;
            lit(spec.radiance_at(r, x as i64 + d - ox, y as i64 - oy))
        });
        let disp = Plane::from_fn(w, h, |_, y| lit::<T>(spec.disparity_at(region_rows[y], y as i64 - oy) as f64));
        frames.push(StereoRadiance {
            left: RadianceMap::new(left)?,
            right: RadianceMap::new(right)?,
        });
        gt_disparity.push(DisparityMap::all_valid(disp));
    }
    let flows = (1..spec.frames)
        .map(|_| FlowField::constant(w, h, lit(spec.motion_x as f64), lit(spec.motion_y as f64)))
        .collect();
    let seq = SceneSequence {
        frames,
        gt_disparity,
        gt_flow: Some(flows),
        focal: lit(spec.focal),
        baseline: lit(spec.baseline),
    };
    seq.validate()?;
    Ok(seq)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn bounds_for_range_eight() {
        let b = DynamicRangeBounds::from_max(2.0f64, 8.0).unwrap();
        assert_eq!(b.middle, 1.0);
        assert!((b.lower - 2.0 / 9.0).abs() < 1e-15);
        assert!((b.upper - 16.0 / 9.0).abs() < 1e-15);
        assert!(matches!(
            DynamicRangeBounds::from_max(0.0f64, 8.0),
            Err(Error::DegenerateScene)
        ));
        assert!(DynamicRangeBounds::from_max(1.0f64, 1.0).is_err());
    }

    proptest! {
        #[test]
        fn bounds_ratio_identity(max in 1e-6f64..1e6, ratio in 1.001f64..1e4) {
            let b = DynamicRangeBounds::from_max(max, ratio).unwrap();
            let interval = b.middle * (ratio - 1.0) / (ratio + 1.0);
            prop_assert_eq!(b.upper - b.lower, (b.middle + interval) - (b.middle - interval));
            prop_assert!(((b.upper / b.lower) - ratio).abs() <= 1e-9 * ratio);
        }
    }

    #[test]
    fn depth_to_disparity() {
        assert!((disparity_from_depth(20.0f64, 100.0, 0.4).unwrap() - 2.0).abs() < 1e-12);
        assert!((disparity_from_depth(4000.0f64, 100.0, 0.4).unwrap() - 0.01).abs() < 1e-15);
        assert!(disparity_from_depth(0.0f64, 100.0, 0.4).is_err());
        assert!(disparity_from_depth(-1.0f64, 100.0, 0.4).is_err());
    }

    #[test]
    fn radiance_rejects_bad_values() {
        assert!(matches!(
            RadianceMap::from_vec(2, 1, vec![1.0f64, f64::NAN]),
            Err(Error::NonFiniteRadiance { x: 1, y: 0 })
        ));
        assert!(matches!(
            RadianceMap::from_vec(1, 2, vec![1.0f64, -0.5]),
            Err(Error::NegativeRadiance { x: 0, y: 1, .. })
        ));
    }

    #[test]
    fn three_channel_luminance() {
        let img = PfmImage {
            width: 1,
            height: 1,
            channels: 3,
            data: vec![1.0, 0.0, 0.0],
        };
        let m: RadianceMap<f64> = radiance_from_pfm(&img).unwrap();
        assert_eq!(m.values()[0], 0.2126);
    }

    #[test]
    fn synth_ground_truth_by_construction() {
        let mut spec = SceneSpec::split_dr();
        spec.width = 48;
        spec.height = 30;
        let seq = synth_scene::<f64>(&spec).unwrap();
        for f in seq.gt_flow.as_ref().unwrap() {
            assert!(f.dx().iter().chain(f.dy()).all(|&v| v == 0.0));
        }
        spec.frames = 3;
        spec.motion_x = 3;
        let seq = synth_scene::<f64>(&spec).unwrap();
        assert_eq!(seq.gt_flow.as_ref().unwrap().len(), 2);
        for f in seq.gt_flow.as_ref().unwrap() {
            assert!(f.dx().iter().all(|&v| v == 3.0));
            assert!(f.dy().iter().all(|&v| v == 0.0));
        }
        // Content moves by the flow between consecutive frames.
        let (a, b) = (&seq.frames[0].left, &seq.frames[1].left);
        for y in 0..30 {
            for x in 0..45 {
                assert_eq!(a.plane().get(x, y), b.plane().get(x + 3, y));
            }
        }
    }

    #[test]
    fn right_view_is_shifted_left_view() {
        let mut spec = SceneSpec::split_dr();
        spec.width = 64;
        spec.height = 40;
        spec.regions[0].disparity = 7;
        spec.regions[0].weight = 1.0;
        spec.motion_y = 2;
        spec.frames = 3;
        let seq = synth_scene::<f64>(&spec).unwrap();
        for (k, f) in seq.frames.iter().enumerate() {
            let gt = &seq.gt_disparity[k];
            for y in 0..40 {
                for x in 0..64 {
                    let d = gt.value(x, y) as usize;
                    if x >= d {
                        assert_eq!(f.left.plane().get(x, y), f.right.plane().get(x - d, y));
                    }
                }
            }
        }
        let rows = spec.band_rows();
        assert_eq!(seq.gt_disparity[0].value(5, rows[0].0), 7.0);
        // Alternate stripes step by `depth_step`; motion carries them along.
        assert_eq!(seq.gt_disparity[0].value(5, 16), 7.0 + spec.depth_step as f64);
        assert_eq!(seq.gt_disparity[1].value(5, 18), 7.0 + spec.depth_step as f64);
    }

    #[test]
    fn synth_errors() {
        let mut spec = SceneSpec::split_dr();
        spec.regions[0].disparity = spec.width as u32;
        assert!(synth_scene::<f64>(&spec).is_err());
        let mut spec = SceneSpec::split_dr();
        spec.regions[1].weight = 0.0;
        assert!(synth_scene::<f64>(&spec).is_err());
        let mut spec = SceneSpec::split_dr();
        spec.height = 2;
        assert!(synth_scene::<f64>(&spec).is_err());
    }

    #[test]
    fn scene_spec_from_kv() {
        let kv = KvFile::parse(
            "width = 40\nheight = 20\nframes = 4\nmotion_x = 2\nregion.0.level = 1.0\nregion.0.disparity = 3\nregion.1.level = 0.1\nregion.1.disparity = 5\nregion.1.weight = 2\n",
        )
        .unwrap();
        let spec = SceneSpec::from_kv(&kv).unwrap();
        assert_eq!(spec.regions.len(), 2);
        assert_eq!(spec.band_rows(), vec![(0, 7), (7, 20)]);
        assert!(kv.keys().all(SceneSpec::is_scene_key));
    }
}
