//! Disparity estimation over fused features.
//!
//! Disparities follow the rectified convention: left pixel `x` matches right
//! pixel `x - d` with `d >= 0`.

mod disparity;
mod matcher;
mod pipeline;

pub use disparity::DisparityMap;
pub use matcher::{
    build_cost_volume, center_features, estimate_disparity, CostVolume, MatchParams, LR_THRESHOLD,
};
pub use pipeline::{
    dual_exposure_disparity, fused_camera_features, single_exposure_disparity, CameraFusion, DualOutput,
    PipelineParams, StereoFrames,
};
