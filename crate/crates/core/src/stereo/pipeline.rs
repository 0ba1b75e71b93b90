use crate::capture::CapturedImage;
use crate::error::{Error, Result};
use crate::flowfusion::{
    estimate_flow, extract_features, extract_plane_features, fuse, weight_map, FeatureMap, FlowField, FlowParams,
    FusionParams, Warp, WeightMap,
};
use crate::scalar::Real;

use super::disparity::DisparityMap;
use super::matcher::{build_cost_volume, estimate_disparity, MatchParams};

/// Stereo pipeline switches and sub-stage settings.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PipelineParams {
    pub d_max: usize,
    /// Off replaces both weight maps by one.
    pub weighted_fusion: bool,
    /// Off aligns the second frame with zero flow.
    pub motion_compensation: bool,
    /// Pyramid levels fused and concatenated (1 = full resolution only).
    pub fusion_levels: usize,
    pub fusion: FusionParams,
    pub flow: FlowParams,
    pub matcher: MatchParams,
}

impl Default for PipelineParams {
    fn default() -> Self {
        Self {
            d_max: 64,
            weighted_fusion: true,
            motion_compensation: true,
            fusion_levels: 3,
            fusion: FusionParams::default(),
            flow: FlowParams::default(),
            matcher: MatchParams::default(),
        }
    }
}

impl PipelineParams {
    pub fn validate(&self) -> Result<()> {
        if self.d_max == 0 {
            return Err(Error::param("d_max", "must be at least 1"));
        }
        if self.fusion_levels == 0 {
            return Err(Error::param("fusion_levels", "must be at least 1"));
        }
        self.fusion.validate()
    }
}

/// The four images of one dual-exposure cycle; frame 1 uses `e1`, frame 2 `e2`.
#[derive(Clone, Copy, Debug)]
pub struct StereoFrames<'a, T> {
    pub left1: &'a CapturedImage<T>,
    pub right1: &'a CapturedImage<T>,
    pub left2: &'a CapturedImage<T>,
    pub right2: &'a CapturedImage<T>,
}

/// Fused features of one camera.
#[derive(Clone, Debug)]
pub struct CameraFusion<T> {
    pub features: FeatureMap<T>,
    pub low_confidence: Vec<bool>,
    pub flow: FlowField<T>,
}

#[derive(Clone, Debug)]
pub struct DualOutput<T> {
    pub disparity: DisparityMap<T>,
    pub left: CameraFusion<T>,
    pub right: CameraFusion<T>,
}

fn level_features<T: Real>(img: &CapturedImage<T>, level: usize) -> FeatureMap<T> {
    if level == 0 {
        return extract_features(img);
    }
    let mut p = img.intensities();
    for _ in 0..level {
        p = p.downsample2();
    }
    extract_plane_features(&p, false)
}

fn level_weights<T: Real>(
    img: &CapturedImage<T>,
    dims: (usize, usize),
    params: &PipelineParams,
) -> WeightMap<T> {
    if params.weighted_fusion {
        weight_map(img, &params.fusion).resized(dims.0, dims.1)
    } else {
        WeightMap::ones(dims.0, dims.1)
    }
}

/// Fuses one camera's dual-exposure frames at every pyramid level and
/// concatenates the results at full resolution. With `second == None` the
/// single frame is passed through the same weighting.
pub fn fused_camera_features<T: Real>(
    first: &CapturedImage<T>,
    second: Option<(&CapturedImage<T>, &FlowField<T>)>,
    params: &PipelineParams,
) -> Result<CameraFusion<T>> {
    let (w, h) = first.dims();
    let mut stacked: Option<FeatureMap<T>> = None;
    let mut low_confidence = vec![false; w * h];
    for level in 0..params.fusion_levels {
        let f1 = level_features(first, level);
        let dims = f1.dims();
        if dims.0 == 0 || dims.1 == 0 {
            break;
        }
        let w1 = level_weights(first, dims, params);
        let fused = match second {
            Some((img2, flow)) => {
                if img2.dims() != first.dims() {
                    return Err(Error::mismatch(first.dims(), img2.dims()));
                }
                let f2w = level_features(img2, level).warp(flow);
                let w2w = level_weights(img2, dims, params).warp(flow);
                let w2w = w2w.data.masked(&w2w.out_of_bounds);
                fuse(&f1, &f2w.data, &w1, &w2w, &params.fusion)?
            }
            None => {
                let zero = WeightMap::from_plane(crate::plane::Plane::zeros(dims.0, dims.1));
                fuse(&f1, &f1, &w1, &zero, &params.fusion)?
            }
        };
        if level == 0 {
            low_confidence = fused.low_confidence;
        }
        let full = fused.features.resized(w, h);
        stacked = Some(match stacked {
            None => full,
            Some(s) => s.concat(&full)?,
        });
    }
    Ok(CameraFusion {
        features: stacked.expect("at least one level"),
        low_confidence,
        flow: second.map(|(_, f)| f.clone()).unwrap_or_else(|| FlowField::zeros(w, h)),
    })
}

fn camera_flow<T: Real>(
    i1: &CapturedImage<T>,
    i2: &CapturedImage<T>,
    oracle: Option<&FlowField<T>>,
    params: &PipelineParams,
) -> Result<FlowField<T>> {
    let (w, h) = i1.dims();
    if !params.motion_compensation {
        return Ok(FlowField::zeros(w, h));
    }
    match oracle {
        Some(f) => Ok(f.resized(w, h)),
        None => estimate_flow(i1, i2, &params.flow).map_err(|e| e.in_stage("flow")),
    }
}

fn disparity_from<T: Real>(
    left: &CameraFusion<T>,
    right: &CameraFusion<T>,
    params: &PipelineParams,
) -> Result<DisparityMap<T>> {
    let vol = build_cost_volume(&left.features, &right.features, params.d_max, &params.matcher)
        .map_err(|e| e.in_stage("cost volume"))?;
    let mut d = estimate_disparity(&vol);
    d.invalidate(&left.low_confidence);
    Ok(d)
}

/// Full dual-exposure pipeline: per-camera flow, warping and weighted fusion,
/// then matching on the fused features. The result lies on the frame-1 grid.
/// `oracle_flow` replaces estimated `(left, right)` flows when given.
pub fn dual_exposure_disparity<T: Real>(
    frames: &StereoFrames<'_, T>,
    oracle_flow: Option<(&FlowField<T>, &FlowField<T>)>,
    params: &PipelineParams,
) -> Result<DualOutput<T>> {
    params.validate()?;
    let fl = camera_flow(frames.left1, frames.left2, oracle_flow.map(|f| f.0), params)?;
    let fr = camera_flow(frames.right1, frames.right2, oracle_flow.map(|f| f.1), params)?;
    let left = fused_camera_features(frames.left1, Some((frames.left2, &fl)), params)
        .map_err(|e| e.in_stage("fusion"))?;
    let right = fused_camera_features(frames.right1, Some((frames.right2, &fr)), params)
        .map_err(|e| e.in_stage("fusion"))?;
    let disparity = disparity_from(&left, &right, params)?;
    Ok(DualOutput { disparity, left, right })
}

/// Single-exposure baseline through the same feature and matching stages.
pub fn single_exposure_disparity<T: Real>(
    left: &CapturedImage<T>,
    right: &CapturedImage<T>,
    params: &PipelineParams,
) -> Result<DisparityMap<T>> {
    params.validate()?;
    let l = fused_camera_features(left, None, params).map_err(|e| e.in_stage("fusion"))?;
    let r = fused_camera_features(right, None, params).map_err(|e| e.in_stage("fusion"))?;
    disparity_from(&l, &r, params)
}
