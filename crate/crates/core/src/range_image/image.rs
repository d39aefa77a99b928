use nalgebra::{Isometry3, Point3};

use crate::Vec3;

/// Pinhole intrinsics in pixels. Pixel `(u, v)` is centred on integer
/// coordinates; `v` grows downwards.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Intrinsics {
    pub fx: f64,
    pub fy: f64,
    pub cx: f64,
    pub cy: f64,
}

impl Intrinsics {
    /// Kinect-like VGA intrinsics.
    pub fn kinect_vga() -> Self {
        Self { fx: 575.0, fy: 575.0, cx: 319.5, cy: 239.5 }
    }

    /// Camera-frame ray through pixel `(u, v)` with unit z component.
    pub fn ray(&self, u: f64, v: f64) -> Vec3 {
        Vec3::new((u - self.cx) / self.fx, (v - self.cy) / self.fy, 1.0)
    }

    /// Pixel coordinates of a camera-frame point in front of the camera.
    pub fn project(&self, p: &Vec3) -> (f64, f64) {
        (self.fx * p.x / p.z + self.cx, self.fy * p.y / p.z + self.cy)
    }

    pub fn is_valid(&self) -> bool {
        self.fx > 0.0 && self.fy > 0.0 && self.cx.is_finite() && self.cy.is_finite()
    }
}

/// A depth image in metres; zero marks an invalid pixel.
#[derive(Debug, Clone, PartialEq)]
pub struct RangeImage {
    pub width: usize,
    pub height: usize,
    pub depth: Vec<f32>,
    pub intrinsics: Intrinsics,
    /// Camera to world.
    pub camera_pose: Isometry3<f64>,
}

impl RangeImage {
    pub fn new(width: usize, height: usize, intrinsics: Intrinsics, camera_pose: Isometry3<f64>) -> Self {
        Self { width, height, depth: vec![0.0; width * height], intrinsics, camera_pose }
    }

    pub fn len(&self) -> usize {
        self.width * self.height
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn index(&self, u: usize, v: usize) -> usize {
        v * self.width + u
    }

    pub fn is_valid_pixel(&self, i: usize) -> bool {
        self.depth[i] > 0.0
    }

    pub fn valid_count(&self) -> usize {
        self.depth.iter().filter(|&&d| d > 0.0).count()
    }

    /// Camera-frame point of pixel `i`, or `None` where the depth is zero.
    pub fn point(&self, i: usize) -> Option<Vec3> {
        let d = self.depth[i];
        if !(d > 0.0) {
            return None;
        }
        let (u, v) = ((i % self.width) as f64, (i / self.width) as f64);
        Some(self.intrinsics.ray(u, v) * d as f64)
    }

    /// Per-pixel camera-frame points: `p(u, v) = depth · ((u−cx)/fx, (v−cy)/fy, 1)`.
    pub fn unproject(&self) -> PointMap {
        PointMap {
            width: self.width,
            height: self.height,
            points: (0..self.len()).map(|i| self.point(i)).collect(),
        }
    }

    /// World-frame point of pixel `i`.
    pub fn world_point(&self, i: usize) -> Option<Vec3> {
        self.point(i).map(|p| (self.camera_pose * Point3::from(p)).coords)
    }
}

/// Per-pixel 3D points, `None` where the source pixel was invalid.
#[derive(Debug, Clone, PartialEq)]
pub struct PointMap {
    pub width: usize,
    pub height: usize,
    pub points: Vec<Option<Vec3>>,
}

#[cfg(test)]
mod tests {
    use approx::assert_abs_diff_eq;

    use super::*;

    #[test]
    fn unproject_examples() {
        let k = Intrinsics { fx: 500.0, fy: 500.0, cx: 2.0, cy: 1.0 };
        let mut img = RangeImage::new(1000, 3, k, Isometry3::identity());
        let c = img.index(2, 1);
        img.depth[c] = 1.0;
        let off = img.index(502, 1);
        img.depth[off] = 2.0;
        let pm = img.unproject();
        assert_eq!(pm.points[c], Some(Vec3::new(0.0, 0.0, 1.0)));
        assert_abs_diff_eq!(pm.points[off].unwrap(), Vec3::new(2.0, 0.0, 2.0));
        assert_eq!(pm.points[0], None);
    }
}
