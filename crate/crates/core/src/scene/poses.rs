use std::f64::consts::PI;

use nalgebra::{Isometry3, Matrix3, Rotation3, Translation3, UnitQuaternion};
use rand::Rng as _;

use crate::rng::rng_from_seed;
use crate::Vec3;

use super::description::SceneDescription;

#[derive(Debug, Clone, PartialEq)]
pub struct ScanPose {
    /// Camera to world; the camera looks along its +z with +y down.
    pub camera_pose: Isometry3<f64>,
    pub target: Vec3,
    /// Sampled distance to the target, in metres.
    pub distance: f64,
    /// Viewing direction angles after jitter, in radians.
    pub longitude: f64,
    pub latitude: f64,
}

/// Viewpoint grid around the table centre.
#[derive(Debug, Clone, PartialEq)]
pub struct PoseConfig {
    pub longitude_step: f64,
    /// Half-open longitude range `[start, end)`.
    pub longitude_range: (f64, f64),
    pub latitude_step: f64,
    pub latitude_range: (f64, f64),
    pub distances_per_direction: usize,
    pub distance_range: (f64, f64),
    /// Uniform jitter half-width added to both angles of every pose.
    pub jitter: f64,
    /// Minimum clearance between the camera and the room box.
    pub room_margin: f64,
}

impl Default for PoseConfig {
    fn default() -> Self {
        Self {
            longitude_step: PI / 6.0,
            longitude_range: (-PI, PI),
            latitude_step: PI / 12.0,
            latitude_range: (-PI / 6.0, PI / 2.0),
            distances_per_direction: 2,
            distance_range: (1.5, 4.0),
            jitter: PI / 24.0,
            room_margin: 0.1,
        }
    }
}

fn grid(step: f64, (start, end): (f64, f64)) -> Vec<f64> {
    let n = ((end - start) / step - 1e-9).ceil().max(0.0) as usize;
    (0..n).map(|i| start + step * i as f64).collect()
}

impl PoseConfig {
    /// `(longitude, latitude)` of every grid direction, longitude-major.
    pub fn directions(&self) -> Vec<(f64, f64)> {
        let lats = grid(self.latitude_step, self.latitude_range);
        grid(self.longitude_step, self.longitude_range)
            .into_iter()
            .flat_map(|lon| lats.iter().map(move |&lat| (lon, lat)))
            .collect()
    }
}

/// Unit vector from the target towards the camera.
pub fn view_direction(longitude: f64, latitude: f64) -> Vec3 {
    Vec3::new(latitude.cos() * longitude.cos(), latitude.cos() * longitude.sin(), latitude.sin())
}

/// Camera-to-world pose at `eye` looking at `target` with world +z up.
pub fn look_at(eye: &Vec3, target: &Vec3) -> Isometry3<f64> {
    let z = (target - eye).normalize();
    let mut x = z.cross(&Vec3::z());
    if x.norm() < 1e-9 {
        // looking straight up or down: pick any horizontal right vector
        x = Vec3::x();
    }
    let x = x.normalize();
    let y = z.cross(&x);
    let r = Rotation3::from_matrix_unchecked(Matrix3::from_columns(&[x, y, z]));
    Isometry3::from_parts(Translation3::from(*eye), UnitQuaternion::from_rotation_matrix(&r))
}

/// All scan poses of a scene, in grid order. When the scene has a room the
/// camera is clamped inside it, keeping the viewing target.
///
/// # Panics
/// When the scene has no table.
pub fn sample_scan_poses(scene: &SceneDescription, config: &PoseConfig, seed: u64) -> Vec<ScanPose> {
    let target = scene.table_center().expect("scene has a table");
    let mut rng = rng_from_seed(seed);
    let mut poses = Vec::new();
    for (lon0, lat0) in config.directions() {
        for _ in 0..config.distances_per_direction {
            let (a, b) = config.distance_range;
            let distance = if a < b { rng.random_range(a..=b) } else { a };
            let (jl, jb) = if config.jitter > 0.0 {
                (rng.random_range(-config.jitter..=config.jitter), rng.random_range(-config.jitter..=config.jitter))
            } else {
                (0.0, 0.0)
            };
            let (longitude, latitude) = (lon0 + jl, lat0 + jb);
            let mut eye = target + view_direction(longitude, latitude) * distance;
            if let Some(room) = &scene.room {
                let m = config.room_margin;
                for i in 0..3 {
                    eye[i] = eye[i].clamp(room.min[i] + m, room.max[i] - m);
                }
            }
            poses.push(ScanPose { camera_pose: look_at(&eye, &target), target, distance, longitude, latitude });
        }
    }
    poses
}

#[cfg(test)]
mod tests {
    use approx::assert_abs_diff_eq;
    use nalgebra::Point3;

    use super::*;
    use crate::scene::{generate_scene, SceneConfig};

    #[test]
    fn default_grid_has_96_directions() {
        let c = PoseConfig::default();
        let d = c.directions();
        assert_eq!(d.len(), 96);
        assert_eq!(grid(c.longitude_step, c.longitude_range).len(), 12);
        assert_eq!(grid(c.latitude_step, c.latitude_range).len(), 8);
        assert!(d.iter().all(|&(lon, lat)| (-PI..PI).contains(&lon) && (-PI / 6.0..PI / 2.0).contains(&lat)));
    }

    #[test]
    fn look_at_centres_the_target() {
        let eye = Vec3::new(2.0, -1.0, 1.5);
        let target = Vec3::new(0.2, 0.3, 0.8);
        let pose = look_at(&eye, &target);
        let cam = pose.inverse() * Point3::from(target);
        assert_abs_diff_eq!(cam.x, 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(cam.y, 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(cam.z, (target - eye).norm(), epsilon = 1e-12);
        // image "down" has a negative world z component
        let down = pose.rotation * Vec3::y();
        assert!(down.z < 0.0);
    }

    #[test]
    fn poses_target_table_and_respect_distance_range() {
        let scene = generate_scene(5, &SceneConfig::bare()).unwrap();
        let poses = sample_scan_poses(&scene, &PoseConfig::default(), 9);
        assert_eq!(poses.len(), 192);
        let t = scene.table_center().unwrap();
        for p in &poses {
            assert_eq!(p.target, t);
            assert!((1.5..=4.0).contains(&p.distance));
        }
    }
}
