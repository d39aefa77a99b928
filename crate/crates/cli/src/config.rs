//! Experiment configuration, read from TOML.
//!
//! Every section and key is optional; missing values take the defaults
//! below. Unknown keys are rejected.
//!
//! ```toml
//! seed = 2024
//! scheme = "k6"            # k4 | k5b | k5o | k6
//! out = "out"
//!
//! [dataset]
//! scenes = 2
//! scans_per_scene = 3
//!
//! [scene]                  # object counts per scene
//! disks = 2
//! patches = 2
//! spheres = 2
//! cylinders = 2
//! cones = 2
//! boxes = 1
//! axis_aligned_fraction = 0.5
//!
//! [scanner]
//! width = 640
//! height = 480
//! sigma = 0.005            # metres
//! noise = "constant"       # constant | quadratic
//! max_range = 6.0
//!
//! [corruption]
//! flip_rate = 0.0
//! blur_radius = 0.0        # pixels
//! boundary_erode_dilate = 0
//! temperature = 1.0
//! multinomial = true
//!
//! [ransac]
//! min_support = 1000
//! inlier_dist = 0.03       # metres
//! angle_score_deg = 30.0
//! angle_expand_deg = 45.0
//! p_outlook = 1e-4
//! max_candidates_per_round = 20000
//! sample_radius_fraction = 0.02
//! refit = true
//!
//! [eval]
//! iot_threshold = 0.3
//! max_matches_per_instance = 3
//! min_instance_pixels = 1
//! clean_fit_error = false  # measure fitting error on noise-free points
//! ```

use std::path::{Path, PathBuf};

use anyhow::{bail, Context as _, Result};
use primfit::eval::{EvalOptions, FitErrorSource};
use primfit::range_image::{Intrinsics, LabelScheme};
use primfit::ransac::RansacParams;
use primfit::scene::{NoiseModel, SceneConfig, ScannerConfig};
use primfit::seg::CorruptionConfig;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub seed: u64,
    pub scheme: String,
    pub out: PathBuf,
    pub dataset: DatasetSection,
    pub scene: SceneSection,
    pub scanner: ScannerSection,
    pub corruption: CorruptionSection,
    pub ransac: RansacSection,
    pub eval: EvalSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DatasetSection {
    pub scenes: usize,
    pub scans_per_scene: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SceneSection {
    pub disks: usize,
    pub patches: usize,
    pub spheres: usize,
    pub cylinders: usize,
    pub cones: usize,
    pub boxes: usize,
    pub axis_aligned_fraction: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScannerSection {
    pub width: usize,
    pub height: usize,
    pub sigma: f64,
    pub noise: String,
    pub max_range: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CorruptionSection {
    pub flip_rate: f64,
    pub blur_radius: f64,
    pub boundary_erode_dilate: i32,
    pub temperature: f64,
    pub multinomial: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RansacSection {
    pub min_support: usize,
    pub inlier_dist: f64,
    pub angle_score_deg: f64,
    pub angle_expand_deg: f64,
    pub p_outlook: f64,
    pub max_candidates_per_round: usize,
    pub sample_radius_fraction: f64,
    pub refit: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvalSection {
    pub iot_threshold: f64,
    pub max_matches_per_instance: usize,
    pub min_instance_pixels: usize,
    pub clean_fit_error: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            seed: 2024,
            scheme: "k6".into(),
            out: PathBuf::from("out"),
            dataset: DatasetSection::default(),
            scene: SceneSection::default(),
            scanner: ScannerSection::default(),
            corruption: CorruptionSection::default(),
            ransac: RansacSection::default(),
            eval: EvalSection::default(),
        }
    }
}

impl Default for DatasetSection {
    fn default() -> Self {
        Self { scenes: 2, scans_per_scene: 3 }
    }
}

impl Default for SceneSection {
    fn default() -> Self {
        let d = SceneConfig::default();
        Self {
            disks: d.disks,
            patches: d.patches,
            spheres: d.spheres,
            cylinders: d.cylinders,
            cones: d.cones,
            boxes: d.boxes,
            axis_aligned_fraction: d.axis_aligned_fraction,
        }
    }
}

impl Default for ScannerSection {
    fn default() -> Self {
        let d = ScannerConfig::default();
        Self { width: d.width, height: d.height, sigma: d.noise_sigma, noise: "constant".into(), max_range: d.max_range }
    }
}

impl Default for CorruptionSection {
    fn default() -> Self {
        let d = CorruptionConfig::default();
        Self {
            flip_rate: d.flip_rate,
            blur_radius: d.blur_radius,
            boundary_erode_dilate: d.boundary_erode_dilate,
            temperature: d.temperature,
            multinomial: d.multinomial,
        }
    }
}

impl Default for RansacSection {
    fn default() -> Self {
        let d = RansacParams::default();
        Self {
            min_support: d.min_support,
            inlier_dist: d.inlier_dist,
            angle_score_deg: d.angle_score.to_degrees(),
            angle_expand_deg: d.angle_expand.to_degrees(),
            p_outlook: d.p_outlook,
            max_candidates_per_round: d.max_candidates_per_round,
            sample_radius_fraction: d.sample_radius_fraction,
            refit: d.refit,
        }
    }
}

impl Default for EvalSection {
    fn default() -> Self {
        let d = EvalOptions::default();
        Self {
            iot_threshold: d.iot_threshold,
            max_matches_per_instance: d.max_matches_per_instance,
            min_instance_pixels: d.min_instance_pixels,
            clean_fit_error: false,
        }
    }
}

impl ExperimentConfig {
    /// Reads a config file, or the config embedded in a run manifest.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("cannot read config `{}`", path.display()))?;
        Self::parse(&text).with_context(|| format!("invalid config `{}`", path.display()))
    }

    pub fn parse(text: &str) -> Result<Self> {
        let table: toml::Table = toml::from_str(text)?;
        let cfg: Self = if table.contains_key("manifest_version") {
            match table.get("config") {
                Some(toml::Value::Table(t)) => t.clone().try_into()?,
                _ => bail!("manifest has no [config] table"),
            }
        } else {
            toml::from_str(text)?
        };
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// SHA-256 of the canonical serialization.
    pub fn hash(&self) -> String {
        hex::encode(Sha256::digest(self.to_toml().as_bytes()))
    }

    pub fn validate(&self) -> Result<()> {
        if self.seed > i64::MAX as u64 {
            bail!("seed: must not exceed {}", i64::MAX);
        }
        self.label_scheme().map_err(|e| anyhow::anyhow!("scheme: {e}"))?;
        if self.dataset.scenes == 0 || self.dataset.scans_per_scene == 0 {
            bail!("[dataset] scenes and scans_per_scene must be at least 1");
        }
        if self.dataset.scans_per_scene > primfit::scene::PoseConfig::default().directions().len() * 2 {
            bail!("[dataset] scans_per_scene exceeds the number of scan poses");
        }
        self.scene_config().validate().map_err(|e| anyhow::anyhow!("[scene] {e}"))?;
        self.scanner_config()?.validate().map_err(|e| anyhow::anyhow!("[scanner] {e}"))?;
        self.corruption_config(0).validate().map_err(|e| anyhow::anyhow!("[corruption] {e}"))?;
        self.ransac_params(0).validate().map_err(|e| anyhow::anyhow!("[ransac] {e}"))?;
        let e = &self.eval;
        if !(e.iot_threshold > 0.0 && e.iot_threshold <= 1.0) {
            bail!("[eval] iot_threshold must lie in (0, 1]");
        }
        if e.max_matches_per_instance == 0 {
            bail!("[eval] max_matches_per_instance must be at least 1");
        }
        Ok(())
    }

    pub fn label_scheme(&self) -> Result<LabelScheme, String> {
        self.scheme.parse()
    }

    pub fn scene_config(&self) -> SceneConfig {
        let s = &self.scene;
        SceneConfig {
            disks: s.disks,
            patches: s.patches,
            spheres: s.spheres,
            cylinders: s.cylinders,
            cones: s.cones,
            boxes: s.boxes,
            axis_aligned_fraction: s.axis_aligned_fraction,
            ..SceneConfig::default()
        }
    }

    pub fn scanner_config(&self) -> Result<ScannerConfig> {
        let s = &self.scanner;
        let noise_model = match s.noise.as_str() {
            "constant" => NoiseModel::Constant,
            "quadratic" => NoiseModel::Quadratic,
            other => bail!("[scanner] noise: unknown model `{other}` (expected constant or quadratic)"),
        };
        // the principal point follows the image size
        let vga = Intrinsics::kinect_vga();
        let intrinsics = Intrinsics {
            cx: (s.width as f64 - 1.0) / 2.0,
            cy: (s.height as f64 - 1.0) / 2.0,
            ..vga
        };
        Ok(ScannerConfig {
            width: s.width,
            height: s.height,
            intrinsics,
            noise_sigma: s.sigma,
            noise_model,
            max_range: s.max_range,
        })
    }

    pub fn corruption_config(&self, seed: u64) -> CorruptionConfig {
        let c = &self.corruption;
        CorruptionConfig {
            flip_rate: c.flip_rate,
            blur_radius: c.blur_radius,
            boundary_erode_dilate: c.boundary_erode_dilate,
            temperature: c.temperature,
            multinomial: c.multinomial,
            seed,
        }
    }

    pub fn ransac_params(&self, seed: u64) -> RansacParams {
        let r = &self.ransac;
        RansacParams {
            min_support: r.min_support,
            inlier_dist: r.inlier_dist,
            angle_score: r.angle_score_deg.to_radians(),
            angle_expand: r.angle_expand_deg.to_radians(),
            p_outlook: r.p_outlook,
            max_candidates_per_round: r.max_candidates_per_round,
            sample_radius_fraction: r.sample_radius_fraction,
            refit: r.refit,
            seed,
        }
    }

    pub fn eval_options(&self) -> EvalOptions {
        let e = &self.eval;
        EvalOptions {
            iot_threshold: e.iot_threshold,
            max_matches_per_instance: e.max_matches_per_instance,
            min_instance_pixels: e.min_instance_pixels,
            fit_error_source: if e.clean_fit_error { FitErrorSource::Clean } else { FitErrorSource::Observed },
        }
    }
}
