//! Subcommands. Each one reads its inputs from the output directory, writes
//! its artifacts there and records them in a manifest.
//!
//! ```text
//! <out>/
//!   scenes/scene_000.txt
//!   scans/scene_000/scan_000.range, scan_000.labels
//!   maps/<scheme>/scene_000/scan_000.prob
//!   fits/<method>/scene_000/scan_000.fit
//!   reports/<method>.csv, compare.csv, compare.txt
//!   export/scene_000/scan_000_points.ply, scan_000_primitives.ply
//!   manifests/<step>.toml
//! ```
//!
//! `<method>` is `baseline` or `pipeline-<scheme>`.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context as _, Result};
use primfit::eval::{
    aggregate_report, eransac_baseline, format_report_csv, format_report_table, match_detections, parse_report_csv,
    primitive_fitting, DetectionReport,
};
use primfit::range_image::io::{load_label_map, load_range_image, write_label_map, write_range_image};
use primfit::range_image::{compute_boundaries, make_bags_labels, LabelMap, RangeImage, DEFAULT_WINDOW};
use primfit::rng::{derive_seed, rng_from_seed};
use primfit::scene::{generate_scene, render_scan, sample_scan_poses, PoseConfig, SceneDescription};
use primfit::seg::{argmax_segmentation, load_probability_maps, oracle_probability_maps, write_probability_maps, ProbabilityMaps};
use rayon::prelude::*;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::config::ExperimentConfig;
use crate::{fits, ply};

// Seed streams under the experiment seed.
const SCENE_STREAM: u64 = 0;
const CORRUPTION_STREAM: u64 = 1;
const RANSAC_STREAM: u64 = 2;
const COLOR_STREAM: u64 = 3;

pub struct Run {
    pub cfg: ExperimentConfig,
    pub out: PathBuf,
    pub pool: rayon::ThreadPool,
}

#[derive(Serialize)]
struct Manifest<'a> {
    manifest_version: u32,
    step: &'a str,
    seed: u64,
    config_sha256: String,
    artifacts: BTreeMap<String, String>,
    config: &'a ExperimentConfig,
}

type Artifacts = BTreeMap<String, String>;

fn scene_name(s: usize) -> String {
    format!("scene_{s:03}")
}

fn scan_name(j: usize) -> String {
    format!("scan_{j:03}")
}

impl Run {
    pub fn new(cfg: ExperimentConfig, out: PathBuf, jobs: usize) -> Result<Self> {
        cfg.validate()?;
        let pool = rayon::ThreadPoolBuilder::new().num_threads(jobs).build()?;
        Ok(Self { cfg, out, pool })
    }

    fn scheme_name(&self) -> &str {
        &self.cfg.scheme
    }

    pub fn method(&self, baseline: bool) -> String {
        if baseline { "baseline".into() } else { format!("pipeline-{}", self.scheme_name()) }
    }

    fn scans(&self) -> Vec<(usize, usize)> {
        let d = &self.cfg.dataset;
        (0..d.scenes).flat_map(|s| (0..d.scans_per_scene).map(move |j| (s, j))).collect()
    }

    fn scene_path(&self, s: usize) -> PathBuf {
        self.out.join("scenes").join(format!("{}.txt", scene_name(s)))
    }

    fn scan_path(&self, s: usize, j: usize, ext: &str) -> PathBuf {
        self.out.join("scans").join(scene_name(s)).join(format!("{}.{ext}", scan_name(j)))
    }

    fn maps_path(&self, s: usize, j: usize) -> PathBuf {
        self.out.join("maps").join(self.scheme_name()).join(scene_name(s)).join(format!("{}.prob", scan_name(j)))
    }

    fn fit_path(&self, method: &str, s: usize, j: usize) -> PathBuf {
        self.out.join("fits").join(method).join(scene_name(s)).join(format!("{}.fit", scan_name(j)))
    }

    fn report_path(&self, name: &str) -> PathBuf {
        self.out.join("reports").join(name)
    }

    fn scene_seed(&self, s: usize) -> u64 {
        derive_seed(self.cfg.seed, &[SCENE_STREAM, s as u64])
    }

    fn write(&self, artifacts: &mut Artifacts, path: &Path, bytes: &[u8]) -> Result<()> {
        if let Some(dir) = path.parent() {
            fs::create_dir_all(dir)?;
        }
        fs::write(path, bytes).with_context(|| format!("cannot write `{}`", path.display()))?;
        let rel = path.strip_prefix(&self.out).unwrap_or(path).to_string_lossy().replace('\\', "/");
        artifacts.insert(rel, hex::encode(Sha256::digest(bytes)));
        Ok(())
    }

    fn manifest(&self, step: &str, artifacts: Artifacts) -> Result<()> {
        let m = Manifest {
            manifest_version: 1,
            step,
            seed: self.cfg.seed,
            config_sha256: self.cfg.hash(),
            artifacts,
            config: &self.cfg,
        };
        let path = self.out.join("manifests").join(format!("{step}.toml"));
        fs::create_dir_all(path.parent().expect("has parent"))?;
        fs::write(&path, toml::to_string(&m)?)?;
        Ok(())
    }

    fn require(path: &Path, made_by: &str) -> Result<()> {
        if !path.exists() {
            bail!("missing input `{}` (run `{made_by}` first)", path.display());
        }
        Ok(())
    }

    fn load_scene(&self, s: usize) -> Result<SceneDescription> {
        let path = self.scene_path(s);
        Self::require(&path, "gen")?;
        let text = fs::read_to_string(&path)?;
        SceneDescription::from_text(&text).map_err(|e| anyhow::anyhow!("`{}` line {}: {}", path.display(), e.line, e.message))
    }

    fn load_scan(&self, s: usize, j: usize) -> Result<(RangeImage, LabelMap)> {
        let (r, l) = (self.scan_path(s, j, "range"), self.scan_path(s, j, "labels"));
        Self::require(&r, "scan")?;
        Self::require(&l, "scan")?;
        let img = load_range_image(&r).with_context(|| format!("cannot read `{}`", r.display()))?;
        let labels = load_label_map(&l).with_context(|| format!("cannot read `{}`", l.display()))?;
        Ok((img, labels))
    }

    fn load_maps(&self, s: usize, j: usize) -> Result<ProbabilityMaps> {
        let path = self.maps_path(s, j);
        Self::require(&path, "segment")?;
        load_probability_maps(&path).with_context(|| format!("cannot read `{}`", path.display()))
    }

    fn load_fits(&self, method: &str, s: usize, j: usize) -> Result<Vec<primfit::ransac::Candidate>> {
        let path = self.fit_path(method, s, j);
        let hint = if method == "baseline" { "fit --baseline" } else { "fit" };
        Self::require(&path, hint)?;
        fits::from_text(&fs::read_to_string(&path)?).with_context(|| format!("cannot read `{}`", path.display()))
    }

    /// Runs `f` for every scan on the worker pool and writes the returned
    /// files in scan order.
    fn per_scan<F>(&self, f: F) -> Result<Artifacts>
    where
        F: Fn(usize, usize) -> Result<Vec<(PathBuf, Vec<u8>)>> + Sync,
    {
        let outputs: Vec<Result<Vec<(PathBuf, Vec<u8>)>>> =
            self.pool.install(|| self.scans().into_par_iter().map(|(s, j)| f(s, j)).collect());
        let mut artifacts = Artifacts::new();
        for files in outputs {
            for (path, bytes) in files? {
                self.write(&mut artifacts, &path, &bytes)?;
            }
        }
        Ok(artifacts)
    }

    pub fn gen(&self) -> Result<()> {
        let config = self.cfg.scene_config();
        let scenes: Vec<Result<String>> = self.pool.install(|| {
            (0..self.cfg.dataset.scenes)
                .into_par_iter()
                .map(|s| Ok(generate_scene(self.scene_seed(s), &config)?.to_text()))
                .collect()
        });
        let mut artifacts = Artifacts::new();
        for (s, text) in scenes.into_iter().enumerate() {
            self.write(&mut artifacts, &self.scene_path(s), text?.as_bytes())?;
        }
        self.manifest("gen", artifacts)
    }

    pub fn scan(&self) -> Result<()> {
        let scanner = self.cfg.scanner_config()?;
        let scenes = (0..self.cfg.dataset.scenes).map(|s| self.load_scene(s)).collect::<Result<Vec<_>>>()?;
        let poses: Vec<Vec<_>> = scenes
            .iter()
            .enumerate()
            .map(|(s, scene)| {
                let seed = self.scene_seed(s);
                let all = sample_scan_poses(scene, &PoseConfig::default(), seed);
                let mut rng = rng_from_seed(derive_seed(seed, &[1]));
                let mut pick = rand::seq::index::sample(&mut rng, all.len(), self.cfg.dataset.scans_per_scene).into_vec();
                pick.sort_unstable();
                pick.into_iter().map(|k| (k, all[k].clone())).collect()
            })
            .collect();
        let artifacts = self.per_scan(|s, j| {
            let (k, pose) = &poses[s][j];
            let seed = derive_seed(self.scene_seed(s), &[2, *k as u64]);
            let (img, labels) = render_scan(&scenes[s], pose, &scanner, seed);
            let (mut r, mut l) = (Vec::new(), Vec::new());
            write_range_image(&mut r, &img)?;
            write_label_map(&mut l, &labels)?;
            Ok(vec![(self.scan_path(s, j, "range"), r), (self.scan_path(s, j, "labels"), l)])
        })?;
        self.manifest("scan", artifacts)
    }

    pub fn segment(&self) -> Result<()> {
        let scheme = self.cfg.label_scheme().map_err(anyhow::Error::msg)?;
        let artifacts = self.per_scan(|s, j| {
            let (_, labels) = self.load_scan(s, j)?;
            let boundary = compute_boundaries(&labels, DEFAULT_WINDOW);
            let gt = make_bags_labels(&labels, &boundary, scheme);
            let seed = derive_seed(self.cfg.seed, &[CORRUPTION_STREAM, s as u64, j as u64]);
            let maps = oracle_probability_maps(&gt, &self.cfg.corruption_config(seed));
            let mut bytes = Vec::new();
            write_probability_maps(&mut bytes, &maps)?;
            Ok(vec![(self.maps_path(s, j), bytes)])
        })?;
        self.manifest(&format!("segment-{}", self.scheme_name()), artifacts)
    }

    pub fn fit(&self, baseline: bool) -> Result<()> {
        let method = self.method(baseline);
        let artifacts = self.per_scan(|s, j| {
            let (img, _) = self.load_scan(s, j)?;
            let params = self.cfg.ransac_params(derive_seed(self.cfg.seed, &[RANSAC_STREAM, s as u64, j as u64]));
            let found = if baseline {
                eransac_baseline(&img, &params)
            } else {
                primitive_fitting(&img, &self.load_maps(s, j)?, &params)
            };
            Ok(vec![(self.fit_path(&method, s, j), fits::to_text(&found).into_bytes())])
        })?;
        self.manifest(&format!("fit-{method}"), artifacts)
    }

    /// Scores the detections of one method and returns the report table.
    pub fn eval(&self, baseline: bool) -> Result<String> {
        let method = self.method(baseline);
        let opts = self.cfg.eval_options();
        let reports: Vec<Result<DetectionReport>> = self.pool.install(|| {
            self.scans()
                .into_par_iter()
                .map(|(s, j)| {
                    let scene = self.load_scene(s)?;
                    let (img, labels) = self.load_scan(s, j)?;
                    let found = self.load_fits(&method, s, j)?;
                    Ok(match_detections(&found, &img, &labels, &scene, &opts)?.report)
                })
                .collect()
        });
        let reports = reports.into_iter().collect::<Result<Vec<_>>>()?;
        let total = aggregate_report(&reports);
        let mut artifacts = Artifacts::new();
        let csv = format_report_csv(&[(&method, &total)]);
        self.write(&mut artifacts, &self.report_path(&format!("{method}.csv")), csv.as_bytes())?;
        self.manifest(&format!("eval-{method}"), artifacts)?;
        Ok(format_report_table(&[(&method, &total)]))
    }

    /// Side-by-side table of the baseline and pipeline reports.
    pub fn compare(&self) -> Result<String> {
        let mut methods = Vec::new();
        for baseline in [true, false] {
            let method = self.method(baseline);
            let path = self.report_path(&format!("{method}.csv"));
            let hint = if baseline { "eval --baseline" } else { "eval" };
            Self::require(&path, hint)?;
            let parsed = parse_report_csv(&fs::read_to_string(&path)?)
                .with_context(|| format!("cannot read `{}`", path.display()))?;
            let Some((_, report)) = parsed.into_iter().find(|(m, _)| *m == method) else {
                bail!("`{}` has no rows for `{method}`", path.display());
            };
            methods.push((method, report));
        }
        let refs: Vec<(&str, &DetectionReport)> = methods.iter().map(|(m, r)| (m.as_str(), r)).collect();
        let table = format_report_table(&refs);
        let mut artifacts = Artifacts::new();
        self.write(&mut artifacts, &self.report_path("compare.csv"), format_report_csv(&refs).as_bytes())?;
        self.write(&mut artifacts, &self.report_path("compare.txt"), table.as_bytes())?;
        self.manifest("eval-compare", artifacts)?;
        Ok(table)
    }

    pub fn export(&self) -> Result<()> {
        let method = self.method(false);
        let artifacts = self.per_scan(|s, j| {
            let (img, _) = self.load_scan(s, j)?;
            let seg = argmax_segmentation(&self.load_maps(s, j)?);
            let found = self.load_fits(&method, s, j)?;
            let dir = self.out.join("export").join(scene_name(s));
            let seed = derive_seed(self.cfg.seed, &[COLOR_STREAM, s as u64, j as u64]);
            Ok(vec![
                (dir.join(format!("{}_points.ply", scan_name(j))), ply::labelled_cloud(&img, &seg).into_bytes()),
                (dir.join(format!("{}_primitives.ply", scan_name(j))), ply::primitive_meshes(&img, &found, seed).into_bytes()),
            ])
        })?;
        self.manifest("export", artifacts)
    }

    /// Every step in order; returns the comparison table.
    pub fn all(&self) -> Result<String> {
        self.gen()?;
        self.scan()?;
        self.segment()?;
        self.fit(false)?;
        self.fit(true)?;
        self.eval(false)?;
        self.eval(true)?;
        let table = self.compare()?;
        self.export()?;
        Ok(table)
    }
}

