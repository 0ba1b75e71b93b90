use std::path::Path;
use std::time::Instant;

use crate::adec::{adec_step, ControllerState, FrameStats};
use crate::capture::{capture, CapturedImage, NoiseParams};
use crate::error::{Error, Result};
use crate::flowfusion::FlowField;
use crate::io::read_pfm;
use crate::metrics::{disparity_mae, effective_dr, exposure_coverage};
use crate::rng::Camera;
use crate::capture::FrameTag;
use crate::scene::{load_radiance, synth_scene, DynamicRangeBounds, SceneSequence, StereoRadiance};
use crate::stereo::{dual_exposure_disparity, single_exposure_disparity, DisparityMap, StereoFrames};

use super::config::{Controller, ScenarioConfig, SceneSource};
use super::report::{RunReport, StepMetrics, Timings, TraceRecord, SCHEMA_VERSION};

/// Damping exponent of the mean-to-midgray baseline.
pub const AVERAGE_AE_EXPONENT: f64 = 0.5;
/// Exposure growth applied when the image is entirely black.
pub const AVERAGE_AE_GROWTH_CAP: f64 = 2.0;

/// One update of the single-exposure baseline, `e * (0.5 / mean)^0.5`,
/// clamped to `[e_min, e_max]`.
pub fn average_ae_step(e: f64, img: &CapturedImage<f64>, e_min: f64, e_max: f64) -> Result<f64> {
    if !(e > 0.0 && e.is_finite()) {
        return Err(Error::param("exposure", "must be positive"));
    }
    let mean = img.mean();
    let next = if mean > 0.0 {
        e * (0.5 / mean).powf(AVERAGE_AE_EXPONENT)
    } else {
        e * AVERAGE_AE_GROWTH_CAP
    };
    Ok(next.max(e_min).min(e_max))
}

/// Radiance frames and ground truth for a scenario, with at least
/// `cfg.frames_needed()` frames.
pub fn load_sequence(cfg: &ScenarioConfig) -> Result<SceneSequence<f64>> {
    match &cfg.scene {
        SceneSource::Synthetic(spec) => {
            let mut spec = spec.clone();
            spec.frames = spec.frames.max(cfg.frames_needed());
            synth_scene(&spec)
        }
        SceneSource::Files {
            left,
            right,
            gt_disparity,
        } => {
            let n = cfg.frames_needed();
            let mut frames = Vec::with_capacity(n);
            for k in 0..n {
                let i = k % left.len();
                frames.push(StereoRadiance {
                    left: load_radiance(&left[i])?,
                    right: load_radiance(&right[i])?,
                });
            }
            let gt = match gt_disparity {
                Some(p) => {
                    let d = DisparityMap::from_pfm(&read_pfm(p)?)?;
                    vec![d; n]
                }
                None => Vec::new(),
            };
            let seq = SceneSequence {
                frames,
                gt_disparity: gt,
                gt_flow: None,
                focal: 1.0,
                baseline: 1.0,
            };
            seq.validate()?;
            Ok(seq)
        }
    }
}

struct CapturedPair {
    left1: CapturedImage<f64>,
    right1: CapturedImage<f64>,
    left2: CapturedImage<f64>,
    right2: CapturedImage<f64>,
}

fn capture_pair(
    seq: &SceneSequence<f64>,
    step: usize,
    e: (f64, f64),
    bounds: &DynamicRangeBounds<f64>,
    noise: &NoiseParams<f64>,
    cfg: &ScenarioConfig,
) -> Result<CapturedPair> {
    let (f1, f2) = (2 * step, 2 * step + 1);
    let shot = |frame: usize, camera: Camera, ev: f64| -> Result<CapturedImage<f64>> {
        let fr = &seq.frames[frame];
        let map = match camera {
            Camera::Left => &fr.left,
            Camera::Right => &fr.right,
        };
        capture(map, ev, bounds, noise, &cfg.capture.settings, FrameTag::new(frame as u32, camera))
    };
    Ok(CapturedPair {
        left1: shot(f1, Camera::Left, e.0)?,
        right1: shot(f1, Camera::Right, e.0)?,
        left2: shot(f2, Camera::Left, e.1)?,
        right2: shot(f2, Camera::Right, e.1)?,
    })
}

fn noise_params(cfg: &ScenarioConfig, bounds: &DynamicRangeBounds<f64>) -> NoiseParams<f64> {
    if !cfg.noise.enabled {
        return NoiseParams {
            seed: cfg.seed,
            ..NoiseParams::noiseless()
        };
    }
    let d = NoiseParams::default_for(bounds, cfg.capture.settings.bits, cfg.seed);
    NoiseParams {
        sigma_pre: cfg.noise.sigma_pre.unwrap_or(d.sigma_pre),
        sigma_post: cfg.noise.sigma_post.unwrap_or(d.sigma_post),
        seed: cfg.seed,
    }
}

/// Runs the alternating-exposure loop: each step captures a dual pair
/// (frames `2k` at `e1`, `2k + 1` at `e2`), estimates disparity on frame
/// `2k`, scores it, then lets the controller choose the next exposures.
/// Writes outputs when `cfg.out` is set.
pub fn run_scenario(cfg: &ScenarioConfig) -> Result<RunReport> {
    cfg.validate()?;
    let scenario_hash = cfg.scenario_hash()?;
    let config_hash = cfg.config_hash()?;
    let mut timings = Timings::default();

    let t = Instant::now();
    let seq = load_sequence(cfg).map_err(|e| e.in_stage("scene"))?;
    // Fixed camera: one set of bounds for the whole sequence.
    let bounds = DynamicRangeBounds::from_max(seq.max_radiance(), cfg.capture.range_ratio)
        .map_err(|e| e.in_stage("scene"))?;
    let noise = noise_params(cfg, &bounds);
    timings.scene = t.elapsed().as_secs_f64();
    if cfg.oracle_flow && seq.gt_flow.is_none() {
        return Err(Error::Config {
            line: 0,
            detail: "oracle flow requested but the scene has no ground-truth flow".into(),
        });
    }

    let mut state = match cfg.controller {
        Controller::Adec => ControllerState::new(cfg.init_e1, cfg.init_e2, &cfg.adec),
        Controller::AverageAe => {
            let e = cfg.adec.clamp(cfg.init_e1);
            ControllerState::new(e, e, &cfg.adec)
        }
        Controller::Fixed => ControllerState {
            e1: cfg.init_e1,
            e2: cfg.init_e2,
            last_stats: None,
            last_branch: None,
            step_count: 0,
        },
    };

    let mut trace = Vec::with_capacity(cfg.steps);
    let mut metrics = Vec::with_capacity(cfg.steps);
    let mut final_disparity = None;
    for step in 0..cfg.steps {
        let e = (state.e1, state.e2);
        let t = Instant::now();
        let pair = capture_pair(&seq, step, e, &bounds, &noise, cfg).map_err(|e| e.in_stage("capture"))?;
        timings.capture += t.elapsed().as_secs_f64();

        let t = Instant::now();
        let disparity = match cfg.controller {
            Controller::AverageAe => single_exposure_disparity(&pair.left1, &pair.right1, &cfg.pipeline),
            _ => {
                let oracle: Option<(FlowField<f64>, FlowField<f64>)> = cfg.oracle_flow.then(|| {
                    let f = &seq.gt_flow.as_ref().expect("checked above")[2 * step];
                    (f.clone(), f.clone())
                });
                let frames = StereoFrames {
                    left1: &pair.left1,
                    right1: &pair.right1,
                    left2: &pair.left2,
                    right2: &pair.right2,
                };
                dual_exposure_disparity(&frames, oracle.as_ref().map(|(a, b)| (a, b)), &cfg.pipeline)
                    .map(|o| o.disparity)
            }
        }
        .map_err(|e| e.in_stage("stereo"))?;
        timings.stereo += t.elapsed().as_secs_f64();

        let t = Instant::now();
        let mae = match seq.gt_disparity.get(2 * step) {
            Some(gt) => match disparity_mae(&disparity, gt) {
                Ok((m, _)) => Some(m),
                Err(Error::NoValidPixels) => None,
                Err(e) => return Err(e.in_stage("metrics")),
            },
            None => None,
        };
        metrics.push(StepMetrics {
            step,
            mae,
            coverage: disparity.coverage(),
            exposure_coverage: exposure_coverage(&pair.left1, &pair.left2).map_err(|e| e.in_stage("metrics"))?,
            dr: effective_dr(e.0, e.1, cfg.native_db).map_err(|e| e.in_stage("metrics"))?,
        });
        timings.metrics += t.elapsed().as_secs_f64();

        let t = Instant::now();
        let (next, rule) = match cfg.controller {
            Controller::Adec => {
                let s = adec_step(&state, &pair.left1, &pair.left2, &cfg.adec).map_err(|e| e.in_stage("controller"))?;
                let rule = s.last_branch.map(|b| b.as_str()).unwrap_or("none");
                (s, rule)
            }
            Controller::AverageAe => {
                let en = average_ae_step(state.e1, &pair.left1, cfg.adec.e_min, cfg.adec.e_max)
                    .map_err(|e| e.in_stage("controller"))?;
                (
                    ControllerState {
                        e1: en,
                        e2: en,
                        step_count: state.step_count + 1,
                        ..state
                    },
                    "average_ae",
                )
            }
            Controller::Fixed => (
                ControllerState {
                    step_count: state.step_count + 1,
                    ..state
                },
                "fixed",
            ),
        };
        timings.controller += t.elapsed().as_secs_f64();

        let s1 = FrameStats::of(&pair.left1).map_err(|e| e.in_stage("controller"))?;
        let s2 = FrameStats::of(&pair.left2).map_err(|e| e.in_stage("controller"))?;
        trace.push(TraceRecord {
            step,
            e1: e.0,
            e2: e.1,
            s1: s1.skewness,
            s2: s2.skewness,
            l1: s1.low,
            h1: s1.high,
            l2: s2.low,
            h2: s2.high,
            rule: rule.to_string(),
        });
        state = next;
        final_disparity = Some(disparity);
    }
    timings.controller_fps = if timings.controller > 0.0 {
        cfg.steps as f64 / timings.controller
    } else {
        0.0
    };

    let report = RunReport {
        schema_version: SCHEMA_VERSION,
        label: cfg.label.clone(),
        controller: cfg.controller.as_str().to_string(),
        scenario_hash,
        config_hash,
        seed: cfg.seed,
        steps: cfg.steps,
        aggregate: RunReport::aggregate(&metrics, (state.e1, state.e2)),
        trace,
        metrics,
        timings,
        final_disparity,
    };
    if let Some(out) = &cfg.out {
        write_outputs(&report, out)?;
    }
    Ok(report)
}

/// Writes `trace.csv`, `metrics.csv`, `summary.json` and the final
/// disparity (`disparity.pfm`, `disparity.png`, `valid.pgm`).
pub fn write_outputs(report: &RunReport, dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let write = |name: &str, text: &str| -> Result<()> {
        let p = dir.join(name);
        std::fs::write(&p, text).map_err(|e| Error::io(&p, e))
    };
    write("trace.csv", &report.trace_csv())?;
    write("metrics.csv", &report.metrics_csv())?;
    write("summary.json", &(report.to_json()? + "\n"))?;
    if let Some(d) = &report.final_disparity {
        d.write_pfm(&dir.join("disparity.pfm"))?;
        d.write_png(&dir.join("disparity.png"))?;
        d.write_mask(&dir.join("valid.pgm"), Some(&format!("scenario_hash={}", report.scenario_hash)))?;
    }
    Ok(())
}
