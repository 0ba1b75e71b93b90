//! Motion compensation and dual-exposure feature fusion.
//!
//! The second frame of a dual-exposure pair is aligned to the first with a
//! dense flow field, its features and weights are backward-warped, and the
//! two feature maps are blended with intensity-based trapezoidal weights.

mod features;
mod flow;
mod fusion;
mod warp;

pub use features::{census_channels, extract_features, extract_plane_features, FeatureMap, FEATURE_CHANNELS};
pub use flow::{estimate_flow, FlowField, FlowParams};
pub use fusion::{fuse, trapezoid_weight, weight_map, FusedFeatures, FusionParams, WeightMap};
pub use warp::{warp, Warp, Warped};
