use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};

use dualex::adec::{FrameStats, Histogram};
use dualex::harness::{compare_report, run_scenario, RunReport, ScenarioConfig};
use dualex::io::{read_pfm, read_pgm, write_pfm};
use dualex::kv::KvFile;
use dualex::scene::{dynamic_range_bounds, radiance_from_pfm, save_radiance, synth_scene, SceneSpec};

#[derive(Parser)]
#[command(name = "dualex", version, about = "Dual-exposure stereo simulation and evaluation")]
struct Cli {
    /// Overrides the scenario (or scene) seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory (run, synth) or CSV file (compare).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Pipeline switch, e.g. `motion_compensation=off`; repeatable.
    #[arg(long = "toggle", global = true, value_name = "NAME=on|off")]
    toggles: Vec<String>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Runs a scenario config and writes its report.
    Run { config: PathBuf },
    /// Tabulates run reports (summary.json files or run directories).
    Compare {
        #[arg(required = true, num_args = 1..)]
        reports: Vec<PathBuf>,
    },
    /// Renders a synthetic scene spec (or a preset: `split_dr`, `split_dr_moving`, `narrow_dr`) to PFM files.
    Synth { scene_spec: String },
    /// Prints statistics of a PFM radiance map or PGM capture.
    Inspect { image: PathBuf },
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    match &cli.command {
        Command::Run { config } => run(&cli, config),
        Command::Compare { reports } => compare(&cli, reports),
        Command::Synth { scene_spec } => synth(&cli, scene_spec),
        Command::Inspect { image } => inspect(image),
    }
}

fn run(cli: &Cli, config: &Path) -> Result<()> {
    let mut cfg = ScenarioConfig::read(config).with_context(|| format!("loading {}", config.display()))?;
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(out) = &cli.out {
        cfg.out = Some(out.clone());
    }
    for t in &cli.toggles {
        cfg.apply_toggle(t)?;
    }
    if cfg.out.is_none() {
        cfg.out = Some(PathBuf::from("out").join(&cfg.label));
    }
    let report = run_scenario(&cfg)?;
    print!("{}", compare_report(std::slice::from_ref(&report))?.text);
    println!("outputs in {}", cfg.out.as_ref().expect("set above").display());
    Ok(())
}

fn compare(cli: &Cli, reports: &[PathBuf]) -> Result<()> {
    let runs = reports
        .iter()
        .map(|p| RunReport::read(p).with_context(|| format!("reading {}", p.display())))
        .collect::<Result<Vec<_>>>()?;
    let table = compare_report(&runs)?;
    print!("{}", table.text);
    if let Some(out) = &cli.out {
        std::fs::write(out, &table.csv).with_context(|| format!("writing {}", out.display()))?;
    }
    Ok(())
}

fn synth(cli: &Cli, spec_arg: &str) -> Result<()> {
    let mut spec = match SceneSpec::preset(spec_arg) {
        Some(spec) => spec,
        None => SceneSpec::from_kv(&KvFile::read(Path::new(spec_arg))?)?,
    };
    if let Some(seed) = cli.seed {
        spec.seed = seed;
    }
    let out = cli.out.clone().unwrap_or_else(|| PathBuf::from("scene"));
    std::fs::create_dir_all(&out).with_context(|| format!("creating {}", out.display()))?;
    let seq = synth_scene::<f64>(&spec)?;
    for (k, frame) in seq.frames.iter().enumerate() {
        save_radiance(&out.join(format!("left_{k:03}.pfm")), &frame.left)?;
        save_radiance(&out.join(format!("right_{k:03}.pfm")), &frame.right)?;
        seq.gt_disparity[k].write_pfm(&out.join(format!("disparity_{k:03}.pfm")))?;
    }
    for (k, flow) in seq.gt_flow.iter().flatten().enumerate() {
        write_pfm(&out.join(format!("flow_{k:03}.pfm")), &flow.to_pfm())?;
    }
    println!("{} frames of {}x{} written to {}", seq.frames.len(), spec.width, spec.height, out.display());
    Ok(())
}

fn inspect(path: &Path) -> Result<()> {
    let ext = path.extension().and_then(|e| e.to_str()).unwrap_or_default();
    match ext.to_ascii_lowercase().as_str() {
        "pfm" => {
            let img = read_pfm(path)?;
            println!("{}x{} PFM, {} channel(s)", img.width, img.height, img.channels);
            let map = radiance_from_pfm::<f64>(&img)?;
            let v = map.values();
            let min = v.iter().copied().fold(f64::INFINITY, f64::min);
            let mean = v.iter().sum::<f64>() / v.len() as f64;
            println!("radiance min {min} max {} mean {mean}", map.max());
            if map.max() > 0.0 {
                let b = dynamic_range_bounds(&map, 8.0)?;
                println!("camera window (8:1) [{}, {}]", b.lower, b.upper);
            }
        }
        "pgm" => {
            let (w, h, maxval, samples) = read_pgm(path)?;
            println!("{w}x{h} PGM, maxval {maxval}");
            let mut bins = vec![0u64; maxval as usize + 1];
            for s in samples {
                bins[s as usize] += 1;
            }
            let st = FrameStats::<f64>::from_histogram(&Histogram::from_bins(bins))?;
            println!("skewness {:.4} low {:.4} high {:.4}", st.skewness, st.low, st.high);
        }
        _ => bail!("unsupported image type `{ext}` (expected .pfm or .pgm)"),
    }
    Ok(())
}
