//! `primfit`: reproducible primitive-fitting experiments on synthetic scans.

mod config;
mod fits;
mod ply;
mod run;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Args, Parser, Subcommand};

use config::ExperimentConfig;
use run::Run;

#[derive(Parser)]
#[command(name = "primfit", version, about = "Segmentation-guided primitive fitting experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    opts: Overrides,
}

#[derive(Subcommand)]
enum Command {
    /// Generate scene descriptions.
    Gen,
    /// Render range images and label maps.
    Scan,
    /// Derive probability maps from ground truth.
    Segment,
    /// Detect primitives with the segmentation pipeline or the baseline.
    Fit,
    /// Score detections against ground truth.
    Eval {
        /// Tabulate the baseline and pipeline reports side by side.
        #[arg(long)]
        compare: bool,
    },
    /// Write PLY point clouds and primitive meshes.
    Export,
    /// Every step, end to end.
    All,
}

#[derive(Args)]
struct Overrides {
    /// Experiment config (TOML) or a run manifest.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    scenes: Option<usize>,
    #[arg(long, global = true)]
    scans_per_scene: Option<usize>,
    /// Depth noise in metres.
    #[arg(long, global = true)]
    sigma: Option<f64>,
    #[arg(long, global = true, value_parser = ["k4", "k5b", "k5o", "k6"])]
    scheme: Option<String>,
    #[arg(long, global = true)]
    flip_rate: Option<f64>,
    /// Fit or score the all-points baseline instead of the pipeline.
    #[arg(long, global = true)]
    baseline: bool,
    /// Worker threads.
    #[arg(long, global = true, default_value_t = 1)]
    jobs: usize,
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

impl Overrides {
    fn apply(&self, cfg: &mut ExperimentConfig) {
        if let Some(v) = self.seed {
            cfg.seed = v;
        }
        if let Some(v) = self.scenes {
            cfg.dataset.scenes = v;
        }
        if let Some(v) = self.scans_per_scene {
            cfg.dataset.scans_per_scene = v;
        }
        if let Some(v) = self.sigma {
            cfg.scanner.sigma = v;
        }
        if let Some(v) = &self.scheme {
            cfg.scheme = v.clone();
        }
        if let Some(v) = self.flip_rate {
            cfg.corruption.flip_rate = v;
        }
        if let Some(v) = &self.out {
            cfg.out = v.clone();
        }
    }
}

fn execute(cli: Cli) -> Result<()> {
    let mut cfg = match &cli.opts.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::default(),
    };
    cli.opts.apply(&mut cfg);
    let out = cfg.out.clone();
    let run = Run::new(cfg, out, cli.opts.jobs.max(1))?;
    match cli.command {
        Command::Gen => run.gen()?,
        Command::Scan => run.scan()?,
        Command::Segment => run.segment()?,
        Command::Fit => run.fit(cli.opts.baseline)?,
        Command::Eval { compare: true } => print!("{}", run.compare()?),
        Command::Eval { compare: false } => print!("{}", run.eval(cli.opts.baseline)?),
        Command::Export => run.export()?,
        Command::All => print!("{}", run.all()?),
    }
    Ok(())
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
