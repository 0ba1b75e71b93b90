use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use crate::adec::{AdecParams, GapMode, TieBreak};
use crate::capture::{CaptureSettings, ClipDomain, Normalization};
use crate::error::{Error, Result};
use crate::kv::{parse_switch, KvFile};
use crate::metrics::NATIVE_DR_DB;
use crate::scene::SceneSpec;
use crate::stereo::PipelineParams;

/// Pipeline switches accepted by `--toggle name=on|off`.
pub const TOGGLES: [&str; 4] = ["weighted_fusion", "motion_compensation", "oracle_flow", "noise"];

#[derive(Clone, Debug, PartialEq)]
pub enum SceneSource {
    Synthetic(SceneSpec),
    /// Radiance PFM frames per camera, reused cyclically when the run needs
    /// more frames than given.
    Files {
        left: Vec<PathBuf>,
        right: Vec<PathBuf>,
        gt_disparity: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Controller {
    Adec,
    AverageAe,
    Fixed,
}

impl Controller {
    pub fn as_str(self) -> &'static str {
        match self {
            Controller::Adec => "adec",
            Controller::AverageAe => "average_ae",
            Controller::Fixed => "fixed",
        }
    }

    fn parse(s: &str) -> Option<Self> {
        match s {
            "adec" => Some(Controller::Adec),
            "average_ae" => Some(Controller::AverageAe),
            "fixed" => Some(Controller::Fixed),
            _ => None,
        }
    }
}

/// Noise levels; `None` selects defaults derived from the camera bounds.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NoiseConfig {
    pub enabled: bool,
    pub sigma_pre: Option<f64>,
    pub sigma_post: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CaptureConfig {
    pub settings: CaptureSettings<f64>,
    pub range_ratio: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScenarioConfig {
    pub label: String,
    pub scene: SceneSource,
    pub controller: Controller,
    pub init_e1: f64,
    pub init_e2: f64,
    pub adec: AdecParams<f64>,
    pub noise: NoiseConfig,
    pub capture: CaptureConfig,
    pub pipeline: PipelineParams,
    pub oracle_flow: bool,
    pub native_db: f64,
    pub steps: usize,
    pub seed: u64,
    pub out: Option<PathBuf>,
}

fn cfg_err(detail: impl Into<String>) -> Error {
    Error::Config {
        line: 0,
        detail: detail.into(),
    }
}

fn known_key(k: &str) -> bool {
    const PLAIN: [&str; 36] = [
        "label",
        "controller",
        "steps",
        "seed",
        "out",
        "init.e1",
        "init.e2",
        "scene.left",
        "scene.right",
        "scene.gt_disparity",
        "adec.tau_h",
        "adec.tau_de",
        "adec.alpha",
        "adec.alpha_diverge",
        "adec.alpha_skew",
        "adec.e_min",
        "adec.e_max",
        "adec.gap_mode",
        "adec.tie_break",
        "noise.enabled",
        "noise.sigma_pre",
        "noise.sigma_post",
        "capture.bits",
        "capture.t_max",
        "capture.range_ratio",
        "capture.normalization",
        "capture.clip_domain",
        "pipeline.weighted_fusion",
        "pipeline.motion_compensation",
        "pipeline.oracle_flow",
        "pipeline.d_max",
        "pipeline.fusion_levels",
        "pipeline.flow_levels",
        "pipeline.flow_radius",
        "metrics.native_db",
        "scene.preset",
    ];
    PLAIN.contains(&k) || k.strip_prefix("scene.").is_some_and(SceneSpec::is_scene_key)
}

impl ScenarioConfig {
    /// Defaults around the split-DR synthetic scene.
    pub fn new(scene: SceneSource, controller: Controller) -> Self {
        Self {
            label: controller.as_str().to_string(),
            scene,
            controller,
            init_e1: 1.0,
            init_e2: 1.0,
            adec: AdecParams::default(),
            noise: NoiseConfig {
                enabled: true,
                sigma_pre: None,
                sigma_post: None,
            },
            capture: CaptureConfig {
                settings: CaptureSettings::default(),
                range_ratio: 8.0,
            },
            pipeline: PipelineParams::default(),
            oracle_flow: false,
            native_db: NATIVE_DR_DB,
            steps: 10,
            seed: 0,
            out: None,
        }
    }

    pub fn read(path: &Path) -> Result<Self> {
        let kv = KvFile::read(path)?;
        let base = path.parent().unwrap_or(Path::new("."));
        Self::from_kv(&kv, base)
    }

    /// Builds a config from key-value pairs; relative file paths resolve
    /// against `base`.
    pub fn from_kv(kv: &KvFile, base: &Path) -> Result<Self> {
        kv.reject_unknown(known_key)?;
        let controller = match kv.raw("controller") {
            None => Controller::Adec,
            Some(s) => Controller::parse(s).ok_or_else(|| cfg_err(format!("unknown controller `{s}`")))?,
        };
        let resolve = |p: &str| -> PathBuf {
            let p = Path::new(p.trim());
            if p.is_absolute() {
                p.to_path_buf()
            } else {
                base.join(p)
            }
        };
        let scene = if let Some(left) = kv.raw("scene.left") {
            let right = kv
                .raw("scene.right")
                .ok_or_else(|| cfg_err("`scene.left` requires `scene.right`"))?;
            let list = |s: &str| s.split(',').filter(|p| !p.trim().is_empty()).map(resolve).collect::<Vec<_>>();
            SceneSource::Files {
                left: list(left),
                right: list(right),
                gt_disparity: kv.raw("scene.gt_disparity").map(resolve),
            }
        } else {
            let name = kv.raw("scene.preset").unwrap_or("split_dr");
            let mut spec = SceneSpec::preset(name).ok_or_else(|| {
                cfg_err(format!(
                    "unknown scene preset `{name}` (expected one of {})",
                    SceneSpec::PRESETS.join(", ")
                ))
            })?;
            // Overlay explicit keys on the preset.
            let mut overlay = KvFile::default();
            for k in kv.keys().filter(|k| k.starts_with("scene.") && *k != "scene.preset") {
                overlay.set(&k["scene.".len()..], kv.raw(k).unwrap_or_default());
            }
            if overlay.keys().next().is_some() {
                spec = overlay_scene(&spec, &overlay)?;
            }
            SceneSource::Synthetic(spec)
        };

        let mut cfg = Self::new(scene, controller);
        cfg.label = kv.get_or("label", controller.as_str().to_string())?;
        cfg.init_e1 = kv.get_or("init.e1", cfg.init_e1)?;
        cfg.init_e2 = kv.get_or("init.e2", cfg.init_e2)?;
        cfg.steps = kv.get_or("steps", cfg.steps)?;
        cfg.seed = kv.get_or("seed", cfg.seed)?;
        cfg.out = kv.raw("out").map(resolve);

        let a = &mut cfg.adec;
        a.tau_h = kv.get_or("adec.tau_h", a.tau_h)?;
        a.tau_de = kv.get_or("adec.tau_de", a.tau_de)?;
        if let Some(alpha) = kv.get::<f64>("adec.alpha")? {
            a.alpha_diverge = alpha;
            a.alpha_skew = alpha;
        }
        a.alpha_diverge = kv.get_or("adec.alpha_diverge", a.alpha_diverge)?;
        a.alpha_skew = kv.get_or("adec.alpha_skew", a.alpha_skew)?;
        a.e_min = kv.get_or("adec.e_min", a.e_min)?;
        a.e_max = kv.get_or("adec.e_max", a.e_max)?;
        a.gap_mode = match kv.raw("adec.gap_mode") {
            None | Some("difference") => GapMode::Difference,
            Some("ratio") => GapMode::Ratio,
            Some(s) => return Err(cfg_err(format!("unknown gap mode `{s}`"))),
        };
        a.tie_break = match kv.raw("adec.tie_break") {
            None | Some("second_long") => TieBreak::SecondLong,
            Some("first_long") => TieBreak::FirstLong,
            Some(s) => return Err(cfg_err(format!("unknown tie break `{s}`"))),
        };

        cfg.noise.enabled = kv.get_switch("noise.enabled", true)?;
        cfg.noise.sigma_pre = kv.get("noise.sigma_pre")?;
        cfg.noise.sigma_post = kv.get("noise.sigma_post")?;

        let c = &mut cfg.capture;
        c.settings.bits = kv.get_or("capture.bits", c.settings.bits)?;
        c.settings.t_max = kv.get_or("capture.t_max", c.settings.t_max)?;
        c.range_ratio = kv.get_or("capture.range_ratio", c.range_ratio)?;
        c.settings.normalization = match kv.raw("capture.normalization") {
            None | Some("fixed") => Normalization::FixedBounds,
            Some("per_image") => Normalization::PerImage,
            Some(s) => return Err(cfg_err(format!("unknown normalization `{s}`"))),
        };
        c.settings.clip = match kv.raw("capture.clip_domain") {
            None | Some("signal") => ClipDomain::Signal,
            Some("exposure_scaled") => ClipDomain::ExposureScaled,
            Some(s) => return Err(cfg_err(format!("unknown clip domain `{s}`"))),
        };

        let p = &mut cfg.pipeline;
        p.weighted_fusion = kv.get_switch("pipeline.weighted_fusion", p.weighted_fusion)?;
        p.motion_compensation = kv.get_switch("pipeline.motion_compensation", p.motion_compensation)?;
        p.d_max = kv.get_or("pipeline.d_max", p.d_max)?;
        p.fusion_levels = kv.get_or("pipeline.fusion_levels", p.fusion_levels)?;
        p.flow.levels = kv.get_or("pipeline.flow_levels", p.flow.levels)?;
        p.flow.search_radius = kv.get_or("pipeline.flow_radius", p.flow.search_radius)?;
        cfg.oracle_flow = kv.get_switch("pipeline.oracle_flow", false)?;
        cfg.native_db = kv.get_or("metrics.native_db", cfg.native_db)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.steps == 0 {
            return Err(cfg_err("`steps` must be >= 1"));
        }
        if !(self.init_e1 > 0.0 && self.init_e2 > 0.0) {
            return Err(cfg_err("initial exposures must be positive"));
        }
        self.adec.validate()?;
        self.pipeline.validate()?;
        if !(self.capture.range_ratio > 1.0) {
            return Err(cfg_err("`capture.range_ratio` must exceed 1"));
        }
        match &self.scene {
            SceneSource::Synthetic(s) => s.validate()?,
            SceneSource::Files {
                left,
                right,
                gt_disparity,
            } => {
                if left.is_empty() || left.len() != right.len() {
                    return Err(cfg_err("`scene.left` and `scene.right` need the same non-zero frame count"));
                }
                for p in left.iter().chain(right).chain(gt_disparity) {
                    if !p.is_file() {
                        return Err(cfg_err(format!("missing file {}", p.display())));
                    }
                }
            }
        }
        Ok(())
    }

    /// Applies `name=on|off` for one of [`TOGGLES`].
    pub fn apply_toggle(&mut self, spec: &str) -> Result<()> {
        let (name, value) = spec
            .split_once('=')
            .ok_or_else(|| cfg_err(format!("toggle `{spec}` is not name=on|off")))?;
        let on = parse_switch(value).ok_or_else(|| cfg_err(format!("toggle value `{value}` is not on|off")))?;
        match name.trim() {
            "weighted_fusion" => self.pipeline.weighted_fusion = on,
            "motion_compensation" => self.pipeline.motion_compensation = on,
            "oracle_flow" => self.oracle_flow = on,
            "noise" => self.noise.enabled = on,
            other => return Err(cfg_err(format!("unknown toggle `{other}` (known: {})", TOGGLES.join(", ")))),
        }
        Ok(())
    }

    /// Frames the run consumes: two per step.
    pub fn frames_needed(&self) -> usize {
        2 * self.steps
    }

    /// Identity of everything that determines the captured images: scene,
    /// capture model, noise and seed. Controller and pipeline are excluded so
    /// that runs of different methods on one scenario compare.
    pub fn scenario_hash(&self) -> Result<String> {
        let mut h = Sha256::new();
        match &self.scene {
            SceneSource::Synthetic(s) => h.update(format!("synthetic {s:?}\n")),
            SceneSource::Files {
                left,
                right,
                gt_disparity,
            } => {
                for p in left.iter().chain(right).chain(gt_disparity) {
                    let bytes = std::fs::read(p).map_err(|e| Error::io(p, e))?;
                    h.update(Sha256::digest(&bytes));
                }
            }
        }
        h.update(format!(
            "capture {:?} {}\nnoise {:?}\nseed {}\nsteps {}\n",
            self.capture.settings, self.capture.range_ratio, self.noise, self.seed, self.steps
        ));
        Ok(hex::encode(h.finalize()))
    }

    /// Identity of the full configuration.
    pub fn config_hash(&self) -> Result<String> {
        let mut h = Sha256::new();
        h.update(self.scenario_hash()?);
        h.update(format!(
            "{} {:?} {} {} {:?} {:?} {} {}",
            self.label,
            self.controller,
            self.init_e1,
            self.init_e2,
            self.adec,
            self.pipeline,
            self.oracle_flow,
            self.native_db
        ));
        Ok(hex::encode(h.finalize()))
    }
}

fn overlay_scene(base: &SceneSpec, kv: &KvFile) -> Result<SceneSpec> {
    // Unset keys fall back to the base preset, region lists replace wholesale.
    let mut full = KvFile::default();
    full.set("width", base.width.to_string());
    full.set("height", base.height.to_string());
    full.set("frames", base.frames.to_string());
    full.set("motion_x", base.motion_x.to_string());
    full.set("motion_y", base.motion_y.to_string());
    full.set("seed", base.seed.to_string());
    full.set("texture_amplitude", base.texture_amplitude.to_string());
    full.set("texture_cell", base.texture_cell.to_string());
    full.set("depth_step", base.depth_step.to_string());
    full.set("stripe_rows", base.stripe_rows.to_string());
    full.set("focal", base.focal.to_string());
    full.set("baseline", base.baseline.to_string());
    let explicit_regions = kv.keys().any(|k| k.starts_with("region."));
    if !explicit_regions {
        for (i, r) in base.regions.iter().enumerate() {
            full.set(&format!("region.{i}.level"), r.level.to_string());
            full.set(&format!("region.{i}.disparity"), r.disparity.to_string());
            full.set(&format!("region.{i}.weight"), r.weight.to_string());
        }
    }
    for k in kv.keys() {
        full.set(k, kv.raw(k).unwrap_or_default());
    }
    SceneSpec::from_kv(&full)
}
