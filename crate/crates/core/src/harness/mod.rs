//! Scenario runner: configuration, the capture/control/stereo loop, and
//! run reports with comparison tables.

mod config;
mod report;
mod run;

pub use config::{CaptureConfig, Controller, NoiseConfig, ScenarioConfig, SceneSource, TOGGLES};
pub use report::{compare_report, Aggregate, Comparison, RunReport, StepMetrics, Timings, TraceRecord, SCHEMA_VERSION};
pub use run::{average_ae_step, load_sequence, run_scenario, write_outputs, AVERAGE_AE_EXPONENT, AVERAGE_AE_GROWTH_CAP};
