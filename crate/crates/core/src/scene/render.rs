use nalgebra::Isometry3;
use rand::Rng as _;
use rand_distr::{Distribution, Normal};

use crate::range_image::{Intrinsics, LabelMap, RangeImage, SemanticClass};
use crate::rng::{derive_seed, rng_from_seed};
use crate::Vec3;

use super::description::SceneDescription;
use super::poses::ScanPose;
use super::shapes::{Aabb, RAY_EPS};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NoiseModel {
    /// Constant `σ`.
    Constant,
    /// `σ · (z / 2 m)²`.
    Quadratic,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScannerConfig {
    pub width: usize,
    pub height: usize,
    pub intrinsics: Intrinsics,
    /// Depth noise standard deviation in metres.
    pub noise_sigma: f64,
    pub noise_model: NoiseModel,
    /// Hits deeper than this are dropped.
    pub max_range: f64,
}

impl Default for ScannerConfig {
    fn default() -> Self {
        Self {
            width: 640,
            height: 480,
            intrinsics: Intrinsics::kinect_vga(),
            noise_sigma: 0.005,
            noise_model: NoiseModel::Constant,
            max_range: 6.0,
        }
    }
}

impl ScannerConfig {
    pub fn sigma_at(&self, depth: f64) -> f64 {
        match self.noise_model {
            NoiseModel::Constant => self.noise_sigma,
            NoiseModel::Quadratic => self.noise_sigma * (depth / 2.0).powi(2),
        }
    }

    pub fn validate(&self) -> Result<(), String> {
        if self.width == 0 || self.height == 0 {
            return Err("image size must be positive".into());
        }
        if !self.intrinsics.is_valid() {
            return Err("invalid intrinsics".into());
        }
        if !(self.noise_sigma >= 0.0 && self.noise_sigma.is_finite()) {
            return Err("noise_sigma must be a finite non-negative number".into());
        }
        if !(self.max_range > 0.0) {
            return Err("max_range must be positive".into());
        }
        Ok(())
    }
}

/// Nearest-hit queries against a scene, with box culling.
pub struct Tracer<'a> {
    scene: &'a SceneDescription,
    boxes: Vec<Aabb>,
}

impl<'a> Tracer<'a> {
    pub fn new(scene: &'a SceneDescription) -> Self {
        let pad = Vec3::repeat(1e-7);
        let boxes = scene
            .instances
            .iter()
            .map(|i| {
                let b = i.shape.aabb();
                Aabb { min: b.min - pad, max: b.max + pad }
            })
            .collect();
        Self { scene, boxes }
    }

    /// Ray parameter and id of the nearest surface along a unit direction.
    pub fn nearest_hit(&self, origin: &Vec3, dir: &Vec3) -> Option<(f64, u32)> {
        let inv = dir.map(|c| 1.0 / c);
        let mut best: Option<(f64, u32)> = None;
        for (inst, b) in self.scene.instances.iter().zip(&self.boxes) {
            let limit = best.map_or(f64::INFINITY, |(t, _)| t);
            if b.ray_interval(origin, &inv, limit).is_none() {
                continue;
            }
            if let Some(t) = inst.shape.intersect(origin, dir, RAY_EPS) {
                if t < limit {
                    best = Some((t, inst.id));
                }
            }
        }
        best
    }
}

/// Casts one ray per pixel and records noisy depth and ground-truth labels.
///
/// Noise is drawn from a per-row stream derived from `seed`, so rows can be
/// rendered in any order with identical results.
pub fn render_scan(
    scene: &SceneDescription,
    pose: &ScanPose,
    config: &ScannerConfig,
    seed: u64,
) -> (RangeImage, LabelMap) {
    render_from(scene, &pose.camera_pose, config, seed)
}

pub fn render_from(
    scene: &SceneDescription,
    camera_pose: &Isometry3<f64>,
    config: &ScannerConfig,
    seed: u64,
) -> (RangeImage, LabelMap) {
    let (w, h) = (config.width, config.height);
    let mut img = RangeImage::new(w, h, config.intrinsics, *camera_pose);
    let mut labels = LabelMap::invalid(w, h);
    let tracer = Tracer::new(scene);
    let origin = camera_pose.translation.vector;
    for v in 0..h {
        let mut rng = rng_from_seed(derive_seed(seed, &[v as u64]));
        for u in 0..w {
            let ray = config.intrinsics.ray(u as f64, v as f64);
            let len = ray.norm();
            let dir = camera_pose.rotation * (ray / len);
            let Some((t, id)) = tracer.nearest_hit(&origin, &dir) else { continue };
            let z = t / len;
            if z > config.max_range {
                continue;
            }
            let sigma = config.sigma_at(z);
            let noisy = if sigma > 0.0 {
                z + Normal::new(0.0, sigma).expect("finite sigma").sample(&mut rng)
            } else {
                // keep the stream layout independent of sigma
                let _: f64 = rng.random();
                z
            };
            if !(noisy > 0.0) {
                continue;
            }
            let i = v * w + u;
            img.depth[i] = noisy as f32;
            let inst = scene.instance(id).expect("hit ids come from the scene");
            labels.class[i] = inst.class();
            labels.instance[i] = id;
        }
    }
    debug_assert!(labels.class.iter().zip(&img.depth).all(|(c, d)| (*c == SemanticClass::Invalid) == (*d == 0.0)));
    (img, labels)
}

#[cfg(test)]
mod tests {
    use approx::assert_abs_diff_eq;

    use super::*;
    use crate::geom::{Plane, PrimitiveClass, Sphere};
    use crate::scene::Shape;

    fn frontal_plane(z: f64) -> SceneDescription {
        let mut s = SceneDescription::empty();
        let plane = Plane::new(Vec3::z(), z).unwrap();
        s.push(Shape::Rect { plane, center: Vec3::new(0.0, 0.0, z), u_axis: Vec3::x(), half_u: 50.0, half_v: 50.0 });
        s
    }

    fn small() -> ScannerConfig {
        let intrinsics = Intrinsics { fx: 57.5, fy: 57.5, cx: 31.5, cy: 23.5 };
        ScannerConfig { width: 64, height: 48, intrinsics, noise_sigma: 0.0, ..Default::default() }
    }

    #[test]
    fn noiseless_frontal_plane_is_constant_depth() {
        let (img, lm) = render_from(&frontal_plane(2.0), &Isometry3::identity(), &small(), 1);
        assert!(img.depth.iter().all(|&d| d == 2.0));
        assert!(lm.class.iter().all(|&c| c == SemanticClass::Primitive(PrimitiveClass::Plane)));
        assert!(lm.instance.iter().all(|&i| i == 1));
    }

    #[test]
    fn beyond_max_range_is_invalid() {
        let (img, lm) = render_from(&frontal_plane(7.0), &Isometry3::identity(), &small(), 1);
        assert_eq!(img.valid_count(), 0);
        assert!(lm.is_consistent());
    }

    #[test]
    fn sphere_in_front_occludes_plane() {
        let mut s = frontal_plane(3.0);
        s.push(Shape::Sphere(Sphere { center: Vec3::new(0.0, 0.0, 1.5), radius: 0.2 }));
        let (img, lm) = render_from(&s, &Isometry3::identity(), &small(), 1);
        let c = img.index(32, 24);
        assert_eq!(lm.instance[c], 2);
        let p = img.point(c).unwrap();
        assert_abs_diff_eq!((p - Vec3::new(0.0, 0.0, 1.5)).norm(), 0.2, epsilon = 1e-6);
        assert_eq!(lm.instance[0], 1);
    }
}
