use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metrics::DrReport;
use crate::stereo::DisparityMap;

pub const SCHEMA_VERSION: u32 = 1;

/// Exposures used for one dual pair, the left-camera statistics and the
/// controller rule that produced the next exposures.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub step: usize,
    pub e1: f64,
    pub e2: f64,
    pub s1: f64,
    pub s2: f64,
    pub l1: f64,
    pub h1: f64,
    pub l2: f64,
    pub h2: f64,
    pub rule: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepMetrics {
    pub step: usize,
    /// `None` without ground truth or without jointly valid pixels.
    pub mae: Option<f64>,
    /// Valid disparity pixels in percent.
    pub coverage: f64,
    /// Pixels well exposed in at least one frame of the pair, in percent.
    pub exposure_coverage: f64,
    pub dr: DrReport,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub mean_mae: Option<f64>,
    pub mean_coverage: f64,
    pub mean_exposure_coverage: f64,
    pub mean_expansion_rate: f64,
    pub final_e1: f64,
    pub final_e2: f64,
}

/// Wall-clock seconds per stage, summed over steps.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Timings {
    pub scene: f64,
    pub capture: f64,
    pub controller: f64,
    pub stereo: f64,
    pub metrics: f64,
    /// Controller updates per second, excluding every other stage.
    pub controller_fps: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub schema_version: u32,
    pub label: String,
    pub controller: String,
    pub scenario_hash: String,
    pub config_hash: String,
    pub seed: u64,
    pub steps: usize,
    pub trace: Vec<TraceRecord>,
    pub metrics: Vec<StepMetrics>,
    pub aggregate: Aggregate,
    pub timings: Timings,
    #[serde(skip)]
    pub final_disparity: Option<DisparityMap<f64>>,
}

impl RunReport {
    pub fn aggregate(metrics: &[StepMetrics], final_e: (f64, f64)) -> Aggregate {
        let n = metrics.len().max(1) as f64;
        let maes: Vec<f64> = metrics.iter().filter_map(|m| m.mae).collect();
        Aggregate {
            mean_mae: (!maes.is_empty()).then(|| maes.iter().sum::<f64>() / maes.len() as f64),
            mean_coverage: metrics.iter().map(|m| m.coverage).sum::<f64>() / n,
            mean_exposure_coverage: metrics.iter().map(|m| m.exposure_coverage).sum::<f64>() / n,
            mean_expansion_rate: metrics.iter().map(|m| m.dr.expansion_rate).sum::<f64>() / n,
            final_e1: final_e.0,
            final_e2: final_e.1,
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Reads `summary.json`, or the file itself when `path` is not a directory.
    pub fn read(path: &Path) -> Result<Self> {
        let file = if path.is_dir() {
            path.join("summary.json")
        } else {
            path.to_path_buf()
        };
        let text = std::fs::read_to_string(&file).map_err(|e| Error::io(&file, e))?;
        let r: RunReport = serde_json::from_str(&text)?;
        if r.schema_version != SCHEMA_VERSION {
            return Err(Error::param(
                "schema_version",
                format!("expected {SCHEMA_VERSION}, found {}", r.schema_version),
            ));
        }
        Ok(r)
    }

    pub fn trace_csv(&self) -> String {
        let mut s = format!("# scenario_hash={}\n{}\n", self.scenario_hash, crate::adec::TRACE_HEADER);
        for t in &self.trace {
            let _ = writeln!(
                s,
                "{},{},{},{},{},{},{},{},{},{}",
                t.step, t.e1, t.e2, t.s1, t.s2, t.l1, t.h1, t.l2, t.h2, t.rule
            );
        }
        s
    }

    pub fn metrics_csv(&self) -> String {
        let mut s = format!(
            "# scenario_hash={}\nstep,mae,coverage,exposure_coverage,native_db,effective_db,expansion_rate\n",
            self.scenario_hash
        );
        for m in &self.metrics {
            let mae = m.mae.map(|v| v.to_string()).unwrap_or_default();
            let _ = writeln!(
                s,
                "{},{},{},{},{},{},{}",
                m.step, mae, m.coverage, m.exposure_coverage, m.dr.native_db, m.dr.effective_db, m.dr.expansion_rate
            );
        }
        s
    }
}


/// Aligned comparison of several runs on one scenario.
#[derive(Clone, Debug, PartialEq)]
pub struct Comparison {
    pub csv: String,
    pub text: String,
}

/// Tabulates runs; every run must share the first run's scenario hash.
pub fn compare_report(runs: &[RunReport]) -> Result<Comparison> {
    let first = runs
        .first()
        .ok_or_else(|| Error::param("runs", "at least one report is required"))?;
    if let Some(r) = runs.iter().find(|r| r.scenario_hash != first.scenario_hash) {
        return Err(Error::ScenarioMismatch {
            expected: first.scenario_hash.clone(),
            found: r.scenario_hash.clone(),
        });
    }
    const HEADER: [&str; 8] = [
        "label",
        "controller",
        "mae_px",
        "coverage_pct",
        "exposure_coverage_pct",
        "expansion_pct",
        "controller_ms",
        "controller_fps",
    ];
    let rows: Vec<[String; 8]> = runs
        .iter()
        .map(|r| {
            let a = &r.aggregate;
            let ms = if r.timings.controller_fps > 0.0 {
                1000.0 / r.timings.controller_fps
            } else {
                0.0
            };
            [
                r.label.clone(),
                r.controller.clone(),
                a.mean_mae.map(|v| format!("{v:.4}")).unwrap_or_else(|| "-".into()),
                format!("{:.2}", a.mean_coverage),
                format!("{:.2}", a.mean_exposure_coverage),
                format!("{:.2}", a.mean_expansion_rate),
                format!("{ms:.4}"),
                format!("{:.1}", r.timings.controller_fps),
            ]
        })
        .collect();
    let mut csv = format!("# scenario_hash={}\n{}\n", first.scenario_hash, HEADER.join(","));
    for row in &rows {
        csv.push_str(&row.join(","));
        csv.push('\n');
    }
    let widths: Vec<usize> = (0..HEADER.len())
        .map(|c| rows.iter().map(|r| r[c].len()).chain([HEADER[c].len()]).max().unwrap_or(0))
        .collect();
    let line = |cells: &[&str]| -> String {
        let mut s = String::new();
        for (c, cell) in cells.iter().enumerate() {
            if c > 0 {
                s.push_str("  ");
            }
            if c < 2 {
                let _ = write!(s, "{cell:<w$}", w = widths[c]);
            } else {
                let _ = write!(s, "{cell:>w$}", w = widths[c]);
            }
        }
        s.trim_end().to_string()
    };
    let mut text = format!("scenario {}\n", &first.scenario_hash[..first.scenario_hash.len().min(16)]);
    text.push_str(&line(&HEADER));
    text.push('\n');
    for row in &rows {
        let cells: Vec<&str> = row.iter().map(String::as_str).collect();
        text.push_str(&line(&cells));
        text.push('\n');
    }
    Ok(Comparison { csv, text })
}
