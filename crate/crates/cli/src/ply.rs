//! ASCII PLY export: labelled point clouds and meshes of fitted primitives.

use std::f64::consts::TAU;
use std::fmt::Write as _;

use primfit::geom::{tangent_basis, PrimitiveModel};
use primfit::range_image::{BagsLabel, RangeImage};
use primfit::ransac::Candidate;
use primfit::rng::rng_from_seed;
use primfit::seg::Segmentation;
use primfit::Vec3;
use rand::Rng as _;

pub type Rgb = [u8; 3];

/// Legend order: Boundary, Plane, Sphere, Cylinder, Cone, Other.
pub const LEGEND: [(&str, Rgb); 6] = [
    ("boundary", [255, 215, 0]),
    ("plane", [31, 119, 180]),
    ("sphere", [214, 39, 40]),
    ("cylinder", [44, 160, 44]),
    ("cone", [148, 103, 189]),
    ("other", [127, 127, 127]),
];

pub fn label_color(label: BagsLabel) -> Rgb {
    match label {
        BagsLabel::Boundary => LEGEND[0].1,
        BagsLabel::Primitive(c) => LEGEND[1 + c.index()].1,
        BagsLabel::Other => LEGEND[5].1,
    }
}

/// World-space points of `img` coloured by their segment.
pub fn labelled_cloud(img: &RangeImage, seg: &Segmentation) -> String {
    let labels = seg.scheme.labels();
    let mut body = String::new();
    let mut n = 0;
    for (i, a) in seg.assignment.iter().enumerate() {
        let (Some(k), Some(p)) = (a, img.world_point(i)) else { continue };
        let [r, g, b] = label_color(labels[*k as usize]);
        let _ = writeln!(body, "{} {} {} {r} {g} {b}", p.x as f32, p.y as f32, p.z as f32);
        n += 1;
    }
    let mut s = header(n, 0);
    s.push_str(&body);
    s
}

#[derive(Default)]
struct Mesh {
    vertices: Vec<(Vec3, Rgb)>,
    faces: Vec<Vec<usize>>,
}

impl Mesh {
    /// Quad strip over an `rings × segments` vertex grid, closed around.
    fn push_grid(&mut self, rings: &[Vec<Vec3>], color: Rgb, closed: bool) {
        let base = self.vertices.len();
        let m = rings[0].len();
        for ring in rings {
            self.vertices.extend(ring.iter().map(|&p| (p, color)));
        }
        let cols = if closed { m } else { m - 1 };
        for r in 0..rings.len() - 1 {
            for j in 0..cols {
                let j1 = (j + 1) % m;
                self.faces.push(vec![base + r * m + j, base + r * m + j1, base + (r + 1) * m + j1, base + (r + 1) * m + j]);
            }
        }
    }
}

const SEGMENTS: usize = 32;

fn circle(center: Vec3, axis: &Vec3, radius: f64) -> Vec<Vec3> {
    let (u, v) = tangent_basis(axis);
    (0..SEGMENTS)
        .map(|j| {
            let a = TAU * j as f64 / SEGMENTS as f64;
            center + (u * a.cos() + v * a.sin()) * radius
        })
        .collect()
}

fn range(values: impl Iterator<Item = f64>) -> Option<(f64, f64)> {
    values.fold(None, |acc, x| match acc {
        None => Some((x, x)),
        Some((lo, hi)) => Some((lo.min(x), hi.max(x))),
    })
}

/// Meshes of fitted primitives, bounded by the extent of their inliers and
/// randomly coloured per detection from `seed`.
pub fn primitive_meshes(img: &RangeImage, cands: &[Candidate], seed: u64) -> String {
    let mut rng = rng_from_seed(seed);
    let mut mesh = Mesh::default();
    for c in cands {
        let color: Rgb = [rng.random_range(40..=255), rng.random_range(40..=255), rng.random_range(40..=255)];
        let pts: Vec<Vec3> = c.inliers.iter().filter_map(|&i| img.world_point(i as usize)).collect();
        if pts.is_empty() {
            continue;
        }
        match &c.model {
            PrimitiveModel::Plane(m) => {
                let (u, v) = tangent_basis(&m.normal);
                let o = m.normal * m.offset;
                let Some((a0, a1)) = range(pts.iter().map(|p| (p - o).dot(&u))) else { continue };
                let Some((b0, b1)) = range(pts.iter().map(|p| (p - o).dot(&v))) else { continue };
                let corner = |a: f64, b: f64| o + u * a + v * b;
                let rings = vec![vec![corner(a0, b0), corner(a1, b0)], vec![corner(a0, b1), corner(a1, b1)]];
                mesh.push_grid(&rings, color, false);
            }
            PrimitiveModel::Sphere(m) => {
                let rings: Vec<Vec<Vec3>> = (0..=SEGMENTS / 2)
                    .map(|i| {
                        let polar = std::f64::consts::PI * i as f64 / (SEGMENTS / 2) as f64;
                        circle(m.center + Vec3::z() * (m.radius * polar.cos()), &Vec3::z(), m.radius * polar.sin())
                    })
                    .collect();
                mesh.push_grid(&rings, color, true);
            }
            PrimitiveModel::Cylinder(m) => {
                let Some((t0, t1)) = range(pts.iter().map(|p| (p - m.axis_point).dot(&m.axis_dir))) else { continue };
                let rings = [t0, t1].map(|t| circle(m.axis_point + m.axis_dir * t, &m.axis_dir, m.radius));
                mesh.push_grid(&rings, color, true);
            }
            PrimitiveModel::Cone(m) => {
                let Some((h0, h1)) = range(pts.iter().map(|p| (p - m.apex).dot(&m.axis_dir).max(0.0))) else { continue };
                let tan = m.half_angle.tan();
                let rings = [h0, h1].map(|h| circle(m.apex + m.axis_dir * h, &m.axis_dir, h * tan));
                mesh.push_grid(&rings, color, true);
            }
        }
    }
    let mut s = header(mesh.vertices.len(), mesh.faces.len());
    for (p, [r, g, b]) in &mesh.vertices {
        let _ = writeln!(s, "{} {} {} {r} {g} {b}", p.x as f32, p.y as f32, p.z as f32);
    }
    for f in &mesh.faces {
        let _ = write!(s, "{}", f.len());
        for i in f {
            let _ = write!(s, " {i}");
        }
        s.push('\n');
    }
    s
}

fn header(vertices: usize, faces: usize) -> String {
    let mut s = String::from("ply\nformat ascii 1.0\ncomment generated by primfit\n");
    let _ = writeln!(s, "element vertex {vertices}");
    s.push_str("property float x\nproperty float y\nproperty float z\n");
    s.push_str("property uchar red\nproperty uchar green\nproperty uchar blue\n");
    let _ = writeln!(s, "element face {faces}");
    s.push_str("property list uchar int vertex_indices\nend_header\n");
    s
}

#[cfg(test)]
mod tests {
    use primfit::geom::{Cylinder, PrimitiveClass};
    use primfit::range_image::Intrinsics;

    use super::*;

    fn count(ply: &str, element: &str) -> usize {
        let line = ply.lines().find(|l| l.starts_with(&format!("element {element} "))).unwrap();
        line.rsplit(' ').next().unwrap().parse().unwrap()
    }

    #[test]
    fn legend_follows_class_order() {
        assert_eq!(label_color(BagsLabel::Boundary), LEGEND[0].1);
        assert_eq!(label_color(BagsLabel::Primitive(PrimitiveClass::Cone)), LEGEND[4].1);
        assert_eq!(label_color(BagsLabel::Other), LEGEND[5].1);
    }

    #[test]
    fn mesh_counts_match_header() {
        let mut img = RangeImage::new(4, 4, Intrinsics { fx: 10.0, fy: 10.0, cx: 1.5, cy: 1.5 }, primfit::nalgebra::Isometry3::identity());
        img.depth.iter_mut().for_each(|d| *d = 2.0);
        let model = Cylinder::new(Vec3::zeros(), Vec3::z(), 0.5).unwrap().into();
        let ply = primitive_meshes(&img, &[Candidate { model, score: 16, inliers: (0..16).collect() }], 1);
        assert_eq!(count(&ply, "vertex"), 2 * SEGMENTS);
        assert_eq!(count(&ply, "face"), SEGMENTS);
        let body = ply.split("end_header\n").nth(1).unwrap();
        assert_eq!(body.lines().count(), 3 * SEGMENTS);
        assert_eq!(primitive_meshes(&img, &[], 1), primitive_meshes(&img, &[], 2));
    }
}
