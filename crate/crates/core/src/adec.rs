//! Automatic dual-exposure control.
//!
//! Each step reads the left-camera captures of the two alternating frames,
//! reduces them to histogram statistics and moves the exposure pair:
//! diverge while either frame is both under- and over-exposed (until the
//! exposure gap exceeds its cap), otherwise drive each frame's skewness to zero.

use std::fmt;

use crate::capture::CapturedImage;
use crate::error::{Error, Result};
use crate::scalar::{lit, Real};

/// Intensity histogram over levels `0..=K`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Histogram {
    bins: Vec<u64>,
    total: u64,
}

impl Histogram {
    pub fn from_bins(bins: Vec<u64>) -> Self {
        let total = bins.iter().sum();
        Self { bins, total }
    }

    pub fn bins(&self) -> &[u64] {
        &self.bins
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    /// Maximum level `K`.
    pub fn max_level(&self) -> u32 {
        (self.bins.len() - 1) as u32
    }
}

pub fn histogram<T: Real>(img: &CapturedImage<T>) -> Histogram {
    let mut bins = vec![0u64; img.max_level() as usize + 1];
    for &l in img.levels() {
        bins[l as usize] += 1;
    }
    Histogram {
        bins,
        total: img.len() as u64,
    }
}

/// Under-/over-exposure thresholds `(floor(0.05 K), floor(0.95 K))`.
pub fn extreme_thresholds(k: u32) -> (u32, u32) {
    ((k as u64 * 5 / 100) as u32, (k as u64 * 95 / 100) as u32)
}

/// Cubed-deviation skewness in `[-1, 1]`; negative when intensities pile up dark.
pub fn skewness<T: Real>(h: &Histogram) -> Result<T> {
    if h.total == 0 {
        return Err(Error::EmptyHistogram);
    }
    let half = lit::<T>(h.max_level() as f64) / lit(2.0);
    let n = lit::<T>(h.total as f64);
    let mut s = T::zero();
    for (j, &count) in h.bins.iter().enumerate() {
        if count == 0 {
            continue;
        }
        let basis = (lit::<T>(j as f64) - half) / half;
        s += basis * basis * basis * lit::<T>(count as f64) / n;
    }
    Ok(s)
}

/// Fractions `(L, H)` of pixels at or below `T_low` and at or above `T_high`.
pub fn extreme_ratios<T: Real>(h: &Histogram) -> Result<(T, T)> {
    if h.total == 0 {
        return Err(Error::EmptyHistogram);
    }
    let (t_low, t_high) = extreme_thresholds(h.max_level());
    let low: u64 = h.bins[..=t_low as usize].iter().sum();
    let high: u64 = h.bins[t_high as usize..].iter().sum();
    let n = lit::<T>(h.total as f64);
    Ok((lit::<T>(low as f64) / n, lit::<T>(high as f64) / n))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FrameStats<T> {
    pub skewness: T,
    pub low: T,
    pub high: T,
}

impl<T: Real> FrameStats<T> {
    pub fn from_histogram(h: &Histogram) -> Result<Self> {
        let (low, high) = extreme_ratios(h)?;
        Ok(Self {
            skewness: skewness(h)?,
            low,
            high,
        })
    }

    pub fn of(img: &CapturedImage<T>) -> Result<Self> {
        Self::from_histogram(&histogram(img))
    }

    /// Both extremes exceed `tau_h`: the frame alone cannot hold the scene.
    pub fn is_wide(&self, tau_h: T) -> bool {
        self.low > tau_h && self.high > tau_h
    }
}

/// How the exposure gap is measured against `tau_de`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum GapMode {
    /// `|e1 - e2|`
    #[default]
    Difference,
    /// `max(e1, e2) / min(e1, e2)`
    Ratio,
}

/// Which frame becomes the long exposure when `e1 == e2` on divergence.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum TieBreak {
    /// Frame 1 short, frame 2 long.
    #[default]
    SecondLong,
    /// Frame 1 long, frame 2 short.
    FirstLong,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AdecParams<T> {
    pub tau_h: T,
    pub tau_de: T,
    /// Step size of the divergence update.
    pub alpha_diverge: T,
    /// Step size of the skewness update.
    pub alpha_skew: T,
    pub e_min: T,
    pub e_max: T,
    pub gap_mode: GapMode,
    pub tie_break: TieBreak,
}

impl<T: Real> Default for AdecParams<T> {
    fn default() -> Self {
        Self {
            tau_h: lit(0.05),
            tau_de: lit(2.5),
            alpha_diverge: lit(0.5),
            alpha_skew: lit(0.5),
            e_min: lit(0.25),
            e_max: lit(4.0),
            gap_mode: GapMode::Difference,
            tie_break: TieBreak::SecondLong,
        }
    }
}

impl<T: Real> AdecParams<T> {
    pub fn validate(&self) -> Result<()> {
        if !(self.tau_h > T::zero() && self.tau_h < T::one()) {
            return Err(Error::param("tau_h", "must lie in (0, 1)"));
        }
        if !(self.tau_de > T::zero()) {
            return Err(Error::param("tau_de", "must be > 0"));
        }
        if !(self.alpha_diverge > T::zero() && self.alpha_skew > T::zero()) {
            return Err(Error::param("alpha", "must be > 0"));
        }
        if !(self.e_min > T::zero() && self.e_min < self.e_max) {
            return Err(Error::param("exposure clamp", "require 0 < e_min < e_max"));
        }
        Ok(())
    }

    pub fn clamp(&self, e: T) -> T {
        e.max(self.e_min).min(self.e_max)
    }

    pub fn gap(&self, e1: T, e2: T) -> T {
        match self.gap_mode {
            GapMode::Difference => (e1 - e2).abs(),
            GapMode::Ratio => e1.max(e2) / e1.min(e2),
        }
    }
}

/// Which rule produced the last update.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Branch {
    Diverge,
    GapCapped,
    SkewnessZeroing,
}

impl Branch {
    pub fn as_str(self) -> &'static str {
        match self {
            Branch::Diverge => "diverge",
            Branch::GapCapped => "gap_capped",
            Branch::SkewnessZeroing => "skewness_zeroing",
        }
    }
}

impl fmt::Display for Branch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ControllerState<T> {
    pub e1: T,
    pub e2: T,
    pub last_stats: Option<(FrameStats<T>, FrameStats<T>)>,
    pub last_branch: Option<Branch>,
    pub step_count: u64,
}

impl<T: Real> ControllerState<T> {
    /// Initial state with both exposures clamped into range.
    pub fn new(e1: T, e2: T, params: &AdecParams<T>) -> Self {
        Self {
            e1: params.clamp(e1),
            e2: params.clamp(e2),
            last_stats: None,
            last_branch: None,
            step_count: 0,
        }
    }
}

/// Exposure update from precomputed frame statistics, before clamping.
pub fn update_exposures<T: Real>(
    e1: T,
    e2: T,
    s1: &FrameStats<T>,
    s2: &FrameStats<T>,
    params: &AdecParams<T>,
) -> (T, T, Branch) {
    if s1.is_wide(params.tau_h) || s2.is_wide(params.tau_h) {
        if params.gap(e1, e2) > params.tau_de {
            return (e1, e2, Branch::GapCapped);
        }
        let a = params.alpha_diverge;
        let first_long = e1 > e2 || (e1 == e2 && params.tie_break == TieBreak::FirstLong);
        let (n1, n2) = if first_long {
            (e1 + a * s1.low, e2 - a * s2.high)
        } else {
            (e1 - a * s1.high, e2 + a * s2.low)
        };
        (n1, n2, Branch::Diverge)
    } else {
        let a = params.alpha_skew;
        (e1 - a * s1.skewness, e2 - a * s2.skewness, Branch::SkewnessZeroing)
    }
}

/// Advances the controller by one dual-exposure pair of left-camera images.
pub fn adec_step<T: Real>(
    state: &ControllerState<T>,
    img1: &CapturedImage<T>,
    img2: &CapturedImage<T>,
    params: &AdecParams<T>,
) -> Result<ControllerState<T>> {
    if img1.dims() != img2.dims() {
        return Err(Error::mismatch(img1.dims(), img2.dims()));
    }
    let s1 = FrameStats::of(img1)?;
    let s2 = FrameStats::of(img2)?;
    let (n1, n2, branch) = update_exposures(state.e1, state.e2, &s1, &s2, params);
    Ok(ControllerState {
        e1: params.clamp(n1),
        e2: params.clamp(n2),
        last_stats: Some((s1, s2)),
        last_branch: Some(branch),
        step_count: state.step_count + 1,
    })
}

/// Column order of the controller trace CSV.
pub const TRACE_HEADER: &str = "step,e1,e2,S1,S2,L1,H1,L2,H2,branch";

/// One trace row: exposures used for the pair, its statistics and the rule applied.
pub fn trace_row(step: usize, e1: f64, e2: f64, s: &(FrameStats<f64>, FrameStats<f64>), branch: &str) -> String {
    format!(
        "{step},{e1},{e2},{},{},{},{},{},{},{branch}",
        s.0.skewness, s.1.skewness, s.0.low, s.0.high, s.1.low, s.1.high
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::capture::exposure_to_shutter_gain;
    use proptest::prelude::*;

    fn image(levels: Vec<u16>, w: usize) -> CapturedImage<f64> {
        let h = levels.len() / w;
        CapturedImage::from_levels(w, h, 8, levels, exposure_to_shutter_gain(1.0, 1.0).unwrap()).unwrap()
    }

    fn stats(s: f64, l: f64, h: f64) -> FrameStats<f64> {
        FrameStats {
            skewness: s,
            low: l,
            high: h,
        }
    }

    #[test]
    fn histogram_counts() {
        let h = histogram(&image(vec![0; 4], 2));
        assert_eq!(h.bins()[0], 4);
        assert_eq!(h.bins().iter().sum::<u64>(), 4);
        let h = histogram(&image(vec![0, 255, 0, 255], 2));
        assert_eq!((h.bins()[0], h.bins()[255]), (2, 2));
    }

    #[test]
    fn skewness_extremes() {
        let mut bins = vec![0u64; 256];
        bins[255] = 10;
        assert_eq!(skewness::<f64>(&Histogram::from_bins(bins.clone())).unwrap(), 1.0);
        bins[255] = 0;
        bins[0] = 10;
        assert_eq!(skewness::<f64>(&Histogram::from_bins(bins)).unwrap(), -1.0);
        let mut sym = vec![0u64; 256];
        sym[10] = 3;
        sym[245] = 3;
        sym[100] = 5;
        sym[155] = 5;
        assert!(skewness::<f64>(&Histogram::from_bins(sym)).unwrap().abs() < 1e-12);
        assert!(matches!(
            skewness::<f64>(&Histogram::from_bins(vec![0; 256])),
            Err(Error::EmptyHistogram)
        ));
    }

    #[test]
    fn thresholds_and_ratios() {
        assert_eq!(extreme_thresholds(255), (12, 242));
        let (l, h) = extreme_ratios::<f64>(&histogram(&image(vec![0; 4], 2))).unwrap();
        assert_eq!((l, h), (1.0, 0.0));
        for bits in 5..=12u32 {
            let k = (1u32 << bits) - 1;
            let mut bins = vec![0u64; k as usize + 1];
            bins[(k / 2) as usize] = 7;
            let (l, h) = extreme_ratios::<f64>(&Histogram::from_bins(bins)).unwrap();
            assert_eq!((l, h), (0.0, 0.0));
        }
        assert!(extreme_ratios::<f64>(&Histogram::from_bins(vec![0; 256])).is_err());
    }

    #[test]
    fn divergence_example() {
        let p = AdecParams::<f64>::default();
        let (a, b, br) = update_exposures(1.0, 1.0, &stats(0.0, 0.2, 0.2), &stats(0.0, 0.3, 0.1), &p);
        assert_eq!(br, Branch::Diverge);
        assert!((a - 0.9).abs() < 1e-15 && (b - 1.15).abs() < 1e-15);
        let p2 = AdecParams {
            tie_break: TieBreak::FirstLong,
            ..p
        };
        let (a, b, _) = update_exposures(1.0, 1.0, &stats(0.0, 0.2, 0.2), &stats(0.0, 0.3, 0.1), &p2);
        assert!((a - 1.1).abs() < 1e-15 && (b - 0.95).abs() < 1e-15);
    }

    #[test]
    fn gap_cap_holds_exposures() {
        let p = AdecParams::<f64>::default();
        let wide = stats(0.0, 0.3, 0.3);
        let (a, b, br) = update_exposures(3.8, 1.0, &wide, &wide, &p);
        assert_eq!((a, b, br), (3.8, 1.0, Branch::GapCapped));
        let ratio = AdecParams {
            gap_mode: GapMode::Ratio,
            ..p
        };
        // Ratio 3.8 > 2.5 also caps.
        assert_eq!(update_exposures(3.8, 1.0, &wide, &wide, &ratio).2, Branch::GapCapped);
        // Ratio 2.0 diverges where difference 1.0 would too.
        assert_eq!(update_exposures(2.0, 1.0, &wide, &wide, &ratio).2, Branch::Diverge);
    }

    #[test]
    fn skewness_example() {
        let p = AdecParams::<f64>::default();
        let (a, b, br) = update_exposures(1.0, 1.0, &stats(0.4, 0.01, 0.01), &stats(-0.2, 0.0, 0.02), &p);
        assert_eq!(br, Branch::SkewnessZeroing);
        assert!((a - 0.8).abs() < 1e-15 && (b - 1.1).abs() < 1e-15);
    }

    #[test]
    fn step_clamps_and_records() {
        let p = AdecParams::<f64>::default();
        let bright = image(vec![255; 16], 4);
        let st = ControllerState::new(0.3, 0.3, &p);
        let next = adec_step(&st, &bright, &bright, &p).unwrap();
        assert_eq!(next.step_count, 1);
        assert_eq!(next.e1, 0.25);
        assert_eq!(next.last_branch, Some(Branch::SkewnessZeroing));
        let small = image(vec![0; 4], 2);
        assert!(adec_step(&st, &bright, &small, &p).is_err());
    }

    proptest! {
        #[test]
        fn skewness_bounded(bins in proptest::collection::vec(0u64..50, 256)) {
            let h = Histogram::from_bins(bins);
            prop_assume!(h.total() > 0);
            let s: f64 = skewness(&h).unwrap();
            prop_assert!((-1.0..=1.0).contains(&s));
        }

        #[test]
        fn exposures_stay_clamped(e1 in 0.25f64..4.0, e2 in 0.25f64..4.0,
                                  s1 in -1.0f64..1.0, s2 in -1.0f64..1.0,
                                  l1 in 0.0f64..0.5, h1 in 0.0f64..0.5,
                                  l2 in 0.0f64..0.5, h2 in 0.0f64..0.5) {
            let p = AdecParams::<f64>::default();
            let (a, b, _) = update_exposures(e1, e2, &stats(s1, l1, h1), &stats(s2, l2, h2), &p);
            prop_assert!((0.25..=4.0).contains(&p.clamp(a)));
            prop_assert!((0.25..=4.0).contains(&p.clamp(b)));
        }

        #[test]
        fn divergence_widens(e1 in 0.25f64..4.0, e2 in 0.25f64..4.0,
                             l1 in 0.06f64..0.5, h1 in 0.06f64..0.5,
                             l2 in 0.0f64..0.5, h2 in 0.0f64..0.5) {
            let p = AdecParams::<f64>::default();
            let (a, b, br) = update_exposures(e1, e2, &stats(0.0, l1, h1), &stats(0.0, l2, h2), &p);
            if br == Branch::Diverge {
                let (long0, short0, long1, short1) = if e1 > e2 { (e1, e2, a, b) } else { (e2, e1, b, a) };
                prop_assert!(long1 >= long0);
                prop_assert!(short1 <= short0);
                prop_assert!((long1 - short1) >= (long0 - short0));
            }
        }

        #[test]
        fn zero_skew_is_fixed_point(e1 in 0.25f64..4.0, e2 in 0.25f64..4.0) {
            let p = AdecParams::<f64>::default();
            let s = stats(0.0, 0.01, 0.01);
            let (a, b, _) = update_exposures(e1, e2, &s, &s, &p);
            prop_assert_eq!((a, b), (e1, e2));
        }
    }

    #[test]
    fn bright_histogram_lowers_exposure() {
        let p = AdecParams::<f64>::default();
        let img = image(vec![200; 16], 4);
        let s = FrameStats::of(&img).unwrap();
        assert!(s.skewness > 0.0);
        let st = ControllerState::new(1.0, 1.0, &p);
        let next = adec_step(&st, &img, &img, &p).unwrap();
        assert!(next.e1 < 1.0 && next.e2 < 1.0);
    }
}
