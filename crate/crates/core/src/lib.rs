//! Dual-exposure stereo imaging simulator.
//!
//! Simulates a limited-dynamic-range stereo camera observing HDR scenes,
//! drives its two alternating exposures with a histogram-skewness
//! controller, fuses the exposure pair with motion compensation, and
//! estimates disparity on the fused features.
//!
//! Everything numeric is generic over [`Real`] (`f32` or `f64`); the
//! aliases at the crate root fix it to `f64`.

// `!(x > 0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod adec;
pub mod capture;
pub mod error;
pub mod flowfusion;
pub mod harness;
pub mod io;
pub mod kv;
pub mod metrics;
pub mod plane;
pub mod rng;
pub mod scalar;
pub mod scene;
pub mod stereo;

pub use error::{Error, Result};
pub use scalar::Real;

pub type Plane = plane::Plane<f64>;
pub type RadianceMap = scene::RadianceMap<f64>;
pub type SceneSequence = scene::SceneSequence<f64>;
pub type DynamicRangeBounds = scene::DynamicRangeBounds<f64>;
pub type CapturedImage = capture::CapturedImage<f64>;
pub type ExposureSetting = capture::ExposureSetting<f64>;
pub type NoiseParams = capture::NoiseParams<f64>;
pub type CaptureSettings = capture::CaptureSettings<f64>;
pub type AdecParams = adec::AdecParams<f64>;
pub type ControllerState = adec::ControllerState<f64>;
pub type FrameStats = adec::FrameStats<f64>;
pub type FlowField = flowfusion::FlowField<f64>;
pub type FeatureMap = flowfusion::FeatureMap<f64>;
pub type WeightMap = flowfusion::WeightMap<f64>;
pub type CostVolume = stereo::CostVolume<f64>;
pub type DisparityMap = stereo::DisparityMap<f64>;
