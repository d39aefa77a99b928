//! Greedy multi-instance primitive detection in the style of efficient
//! RANSAC: localized minimal samples, subset-estimated scores, acceptance
//! by overlooking probability, then inlier expansion, connected-component
//! filtering and least-squares refinement before extraction.

mod components;
mod detect;
mod points;
mod sampling;

pub use components::largest_component;
pub use detect::{detect_primitives, detect_with_stats, DetectionStats};
pub use points::{scan_diameter, PixelGrid, PointSet};

use crate::geom::PrimitiveModel;

#[derive(Debug, Clone, PartialEq)]
pub struct RansacParams {
    /// Smallest accepted inlier count.
    pub min_support: usize,
    /// Largest point-to-surface distance of an inlier, in metres.
    pub inlier_dist: f64,
    /// Largest normal deviation while scoring candidates, in radians.
    pub angle_score: f64,
    /// Largest normal deviation when collecting the final inlier set.
    pub angle_expand: f64,
    /// Acceptable probability of having overlooked a better candidate.
    pub p_outlook: f64,
    /// Minimal samples drawn without an extraction before giving up.
    pub max_candidates_per_round: usize,
    /// Radius of the sampling ball as a fraction of the scene diameter.
    pub sample_radius_fraction: f64,
    /// Least-squares refinement of accepted candidates.
    pub refit: bool,
    pub seed: u64,
}

impl Default for RansacParams {
    fn default() -> Self {
        Self {
            min_support: 1000,
            inlier_dist: 0.03,
            angle_score: 30f64.to_radians(),
            angle_expand: 45f64.to_radians(),
            p_outlook: 1e-4,
            max_candidates_per_round: 20_000,
            sample_radius_fraction: 0.02,
            refit: true,
            seed: 0,
        }
    }
}

impl RansacParams {
    pub fn validate(&self) -> Result<(), String> {
        if self.min_support == 0 {
            return Err("min_support must be at least 1".into());
        }
        if !(self.inlier_dist > 0.0 && self.inlier_dist.is_finite()) {
            return Err("inlier_dist must be positive".into());
        }
        let half_pi = std::f64::consts::FRAC_PI_2;
        if !(self.angle_score > 0.0 && self.angle_score <= self.angle_expand && self.angle_expand < half_pi) {
            return Err("angles must satisfy 0 < angle_score <= angle_expand < pi/2".into());
        }
        if !(self.p_outlook > 0.0 && self.p_outlook < 1.0) {
            return Err("p_outlook must lie in (0, 1)".into());
        }
        if self.max_candidates_per_round == 0 {
            return Err("max_candidates_per_round must be at least 1".into());
        }
        if !(self.sample_radius_fraction > 0.0 && self.sample_radius_fraction <= 1.0) {
            return Err("sample_radius_fraction must lie in (0, 1]".into());
        }
        Ok(())
    }
}

/// A primitive hypothesis with its inliers (indices into the point set).
#[derive(Debug, Clone, PartialEq)]
pub struct Candidate {
    pub model: PrimitiveModel,
    /// Equals `inliers.len()`.
    pub score: usize,
    /// Ascending.
    pub inliers: Vec<u32>,
}

/// Whether point `i` is an inlier of `model`: within `inlier_dist` of the
/// surface and with a normal within `acos(cos_angle)` of the surface normal
/// at the projection, up to sign.
#[inline]
pub(crate) fn is_inlier(model: &PrimitiveModel, set: &PointSet, i: usize, inlier_dist: f64, cos_angle: f64) -> bool {
    let (d, n) = model.distance_and_normal(&set.points[i]);
    d <= inlier_dist && n.dot(&set.normals[i]).abs() >= cos_angle
}

/// Inliers of `model` among all points of `set`.
pub fn score_candidate(model: &PrimitiveModel, set: &PointSet, inlier_dist: f64, angle: f64) -> Candidate {
    let c = angle.cos();
    let inliers: Vec<u32> = (0..set.len()).filter(|&i| is_inlier(model, set, i, inlier_dist, c)).map(|i| i as u32).collect();
    Candidate { model: *model, score: inliers.len(), inliers }
}

/// Probability that `s` independent minimal samples of size `k` all missed
/// a primitive of `n` points among `big_n`: `(1 − (n/N)^k)^s`.
pub fn overlooking_probability(n: usize, big_n: usize, s: usize, k: u32) -> f64 {
    assert!(n > 0 && n <= big_n, "need 0 < n <= N");
    let hit = (n as f64 / big_n as f64).powi(k as i32);
    if hit >= 1.0 {
        return if s == 0 { 1.0 } else { 0.0 };
    }
    // exp(s·ln(1 − hit)) keeps precision for tiny hit probabilities
    (s as f64 * (-hit).ln_1p()).exp()
}
