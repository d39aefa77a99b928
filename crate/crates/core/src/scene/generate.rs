use std::f64::consts::PI;

use rand::Rng as _;
use thiserror::Error;

use crate::geom::{tangent_basis, Cone, Cylinder, Plane, Sphere};
use crate::rng::{rng_from_seed, Rng};
use crate::Vec3;

use super::description::SceneDescription;
use super::patch::BezierPatch;
use super::shapes::{Aabb, Shape};

/// Random room generation parameters. Lengths in metres, angles in radians.
#[derive(Debug, Clone, PartialEq)]
pub struct SceneConfig {
    /// Horizontal side of the square room.
    pub room_extent: f64,
    pub room_height: f64,
    pub table_height: (f64, f64),
    /// Side lengths of the table top.
    pub table_size: (f64, f64),
    /// Largest horizontal offset of the table centre from the room centre.
    pub table_offset: f64,
    pub disks: usize,
    pub patches: usize,
    pub spheres: usize,
    pub cylinders: usize,
    pub cones: usize,
    pub boxes: usize,
    /// Probability that an oriented object gets an exactly vertical or
    /// horizontal axis (normal).
    pub axis_aligned_fraction: f64,
    /// Horizontal margin around the table inside which objects are placed.
    pub placement_margin: f64,
    /// Object centre height range relative to the table top.
    pub placement_height: (f64, f64),
    pub sphere_radius: (f64, f64),
    pub cylinder_radius: (f64, f64),
    pub cylinder_length: (f64, f64),
    pub cone_half_angle: (f64, f64),
    pub cone_length: (f64, f64),
    /// Largest distance of the truncation start from the apex.
    pub cone_truncation: f64,
    pub box_side: (f64, f64),
    pub disk_radius: (f64, f64),
    pub patch_size: (f64, f64),
    /// Control height amplitude as a fraction of the patch size.
    pub patch_amplitude: f64,
    /// Bounding spheres of two objects may overlap down to this fraction of
    /// the sum of their radii.
    pub min_separation: f64,
    pub max_placement_attempts: usize,
}

impl Default for SceneConfig {
    fn default() -> Self {
        Self {
            room_extent: 10.0,
            room_height: 3.0,
            table_height: (0.6, 1.0),
            table_size: (0.8, 1.6),
            table_offset: 1.0,
            disks: 2,
            patches: 2,
            spheres: 2,
            cylinders: 2,
            cones: 2,
            boxes: 1,
            axis_aligned_fraction: 0.5,
            placement_margin: 1.0,
            placement_height: (-0.3, 0.8),
            sphere_radius: (0.1, 0.4),
            cylinder_radius: (0.05, 0.35),
            cylinder_length: (0.3, 1.5),
            cone_half_angle: (10f64.to_radians(), 40f64.to_radians()),
            cone_length: (0.3, 1.0),
            cone_truncation: 0.3,
            box_side: (0.2, 0.8),
            disk_radius: (0.15, 0.5),
            patch_size: (0.5, 1.5),
            patch_amplitude: 0.15,
            min_separation: 0.6,
            max_placement_attempts: 200,
        }
    }
}

impl SceneConfig {
    /// Room and table only.
    pub fn bare() -> Self {
        Self { spheres: 0, cylinders: 0, cones: 0, boxes: 0, ..Self::default() }
    }

    pub fn validate(&self) -> Result<(), String> {
        let ranges = [
            ("table_height", self.table_height),
            ("table_size", self.table_size),
            ("sphere_radius", self.sphere_radius),
            ("cylinder_radius", self.cylinder_radius),
            ("cylinder_length", self.cylinder_length),
            ("cone_half_angle", self.cone_half_angle),
            ("cone_length", self.cone_length),
            ("box_side", self.box_side),
            ("disk_radius", self.disk_radius),
            ("patch_size", self.patch_size),
        ];
        for (name, (lo, hi)) in ranges {
            if !(lo > 0.0 && lo <= hi && hi.is_finite()) {
                return Err(format!("{name}: expected 0 < min <= max, got ({lo}, {hi})"));
            }
        }
        if !(self.room_extent > 0.0 && self.room_height > 0.0) {
            return Err("room dimensions must be positive".into());
        }
        if self.table_height.1 >= self.room_height {
            return Err("table must fit below the ceiling".into());
        }
        if !(0.0..=1.0).contains(&self.axis_aligned_fraction) {
            return Err("axis_aligned_fraction must lie in [0, 1]".into());
        }
        if self.cone_half_angle.1 >= PI / 2.0 {
            return Err("cone half angle must stay below pi/2".into());
        }
        if !(self.placement_height.0 <= self.placement_height.1) {
            return Err("placement_height: min exceeds max".into());
        }
        if self.max_placement_attempts == 0 {
            return Err("max_placement_attempts must be at least 1".into());
        }
        Ok(())
    }
}

#[derive(Debug, Error)]
pub enum SceneError {
    #[error("invalid scene config: {0}")]
    InvalidConfig(String),
    #[error("placement failed for {what} after {attempts} attempts ({placed} instances placed)")]
    PlacementFailed { what: String, attempts: usize, placed: usize, partial: Box<SceneDescription> },
}

fn uniform(rng: &mut Rng, (lo, hi): (f64, f64)) -> f64 {
    if lo == hi {
        lo
    } else {
        rng.random_range(lo..hi)
    }
}

fn random_unit(rng: &mut Rng) -> Vec3 {
    let z: f64 = rng.random_range(-1.0..1.0);
    let phi: f64 = rng.random_range(-PI..PI);
    let r = (1.0 - z * z).sqrt();
    Vec3::new(r * phi.cos(), r * phi.sin(), z)
}

/// Exactly vertical or horizontal when `aligned`, otherwise uniformly random.
fn random_axis(rng: &mut Rng, aligned: bool) -> Vec3 {
    if aligned {
        if rng.random_bool(0.5) {
            Vec3::z()
        } else {
            let phi: f64 = rng.random_range(-PI..PI);
            Vec3::new(phi.cos(), phi.sin(), 0.0)
        }
    } else {
        random_unit(rng)
    }
}

/// Right-handed orthonormal frame whose third axis is `n`, rotated about
/// `n` by a random angle.
fn random_frame(rng: &mut Rng, n: &Vec3) -> (Vec3, Vec3) {
    let (t1, t2) = tangent_basis(n);
    let a: f64 = rng.random_range(-PI..PI);
    let u = t1 * a.cos() + t2 * a.sin();
    (u, n.cross(&u))
}

fn rect(center: Vec3, normal: Vec3, u_axis: Vec3, half_u: f64, half_v: f64) -> Shape {
    let plane = Plane::from_point_normal(center, normal).expect("unit normal");
    Shape::Rect { plane, center, u_axis, half_u, half_v }
}

/// Builds a random room scene.
///
/// Instance order: floor, ceiling, four walls, table, disks, patches,
/// spheres, cylinders, cones, then six faces per box.
pub fn generate_scene(seed: u64, config: &SceneConfig) -> Result<SceneDescription, SceneError> {
    config.validate().map_err(SceneError::InvalidConfig)?;
    let mut rng = rng_from_seed(seed);
    let half = config.room_extent / 2.0;
    let h = config.room_height;
    let room = Aabb { min: Vec3::new(-half, -half, 0.0), max: Vec3::new(half, half, h) };
    let mut scene = SceneDescription::empty();
    scene.room = Some(room);

    scene.push(rect(Vec3::zeros(), Vec3::z(), Vec3::x(), half, half));
    scene.push(rect(Vec3::new(0.0, 0.0, h), -Vec3::z(), Vec3::x(), half, half));
    for (c, n) in [
        (Vec3::new(-half, 0.0, h / 2.0), Vec3::x()),
        (Vec3::new(half, 0.0, h / 2.0), -Vec3::x()),
        (Vec3::new(0.0, -half, h / 2.0), Vec3::y()),
        (Vec3::new(0.0, half, h / 2.0), -Vec3::y()),
    ] {
        // v = n × u must be vertical
        let u = Vec3::z().cross(&n);
        scene.push(rect(c, n, u, half, h / 2.0));
    }

    let table_h = uniform(&mut rng, config.table_height);
    let (tx, ty) = (uniform(&mut rng, config.table_size) / 2.0, uniform(&mut rng, config.table_size) / 2.0);
    let off = config.table_offset.min(half - tx.max(ty) - 1e-3).max(0.0);
    let table_center = Vec3::new(uniform(&mut rng, (-off, off)), uniform(&mut rng, (-off, off)), table_h);
    scene.table = Some(scene.push(rect(table_center, Vec3::z(), Vec3::x(), tx, ty)));

    let mut placer = Placer { rng, config, room, table_center, table_half: (tx, ty), placed: Vec::new() };

    for _ in 0..config.disks {
        placer.place(&mut scene, "disk", |rng, c, aligned| {
            let n = random_axis(rng, aligned);
            let plane = Plane::from_point_normal(Vec3::zeros(), n).expect("unit");
            vec![Shape::Disk { plane, center: Vec3::zeros(), radius: uniform(rng, c.disk_radius) }]
        })?;
    }
    for _ in 0..config.patches {
        placer.place(&mut scene, "patch", |rng, c, aligned| {
            let n = random_axis(rng, aligned);
            let (u, v) = random_frame(rng, &n);
            let (su, sv) = (uniform(rng, c.patch_size), uniform(rng, c.patch_size));
            let amp = c.patch_amplitude * su.min(sv);
            let mut heights = [[0.0; 4]; 4];
            for hgt in heights.iter_mut().flatten() {
                *hgt = if amp > 0.0 { rng.random_range(-amp..amp) } else { 0.0 };
            }
            let origin = -(u * (su / 2.0) + v * (sv / 2.0));
            vec![Shape::Patch(BezierPatch { origin, u_axis: u, v_axis: v, size_u: su, size_v: sv, heights })]
        })?;
    }
    for _ in 0..config.spheres {
        placer.place(&mut scene, "sphere", |rng, c, _| {
            vec![Shape::Sphere(Sphere { center: Vec3::zeros(), radius: uniform(rng, c.sphere_radius) })]
        })?;
    }
    for _ in 0..config.cylinders {
        placer.place(&mut scene, "cylinder", |rng, c, aligned| {
            let axis = random_axis(rng, aligned);
            let len = uniform(rng, c.cylinder_length);
            let model = Cylinder::new(Vec3::zeros(), axis, uniform(rng, c.cylinder_radius)).expect("valid");
            vec![Shape::Cylinder { model, t_min: -len / 2.0, t_max: len / 2.0 }]
        })?;
    }
    for _ in 0..config.cones {
        placer.place(&mut scene, "cone", |rng, c, aligned| {
            let mut axis = random_axis(rng, aligned);
            if rng.random_bool(0.5) {
                axis = -axis;
            }
            let ha = uniform(rng, c.cone_half_angle);
            let h_min = uniform(rng, (0.0, c.cone_truncation));
            let h_max = h_min + uniform(rng, c.cone_length);
            // apex placed so the truncated body is centred on the origin
            let apex = -axis * ((h_min + h_max) / 2.0);
            let model = Cone::new(apex, axis, ha).expect("valid");
            vec![Shape::Cone { model, h_min, h_max }]
        })?;
    }
    for _ in 0..config.boxes {
        placer.place(&mut scene, "box", |rng, c, aligned| {
            let up = if aligned { Vec3::z() } else { random_unit(rng) };
            let (ex, ey) = random_frame(rng, &up);
            let axes = [ex, ey, up];
            let half: [f64; 3] = std::array::from_fn(|_| uniform(rng, c.box_side) / 2.0);
            let mut faces = Vec::with_capacity(6);
            for k in 0..3 {
                let (a, b) = ((k + 1) % 3, (k + 2) % 3);
                for s in [1.0, -1.0] {
                    let n = axes[k] * s;
                    // u along axis a; v = n × u is ± axis b
                    faces.push(rect(n * half[k], n, axes[a], half[a], half[b]));
                }
            }
            faces
        })?;
    }
    Ok(scene)
}

struct Placer<'a> {
    rng: Rng,
    config: &'a SceneConfig,
    room: Aabb,
    table_center: Vec3,
    table_half: (f64, f64),
    /// Bounding spheres of placed objects.
    placed: Vec<(Vec3, f64)>,
}

impl Placer<'_> {
    /// Draws shape groups centred at the origin and random spots near the
    /// table until one fits the room without crowding earlier objects.
    fn place(
        &mut self,
        scene: &mut SceneDescription,
        what: &str,
        make: impl Fn(&mut Rng, &SceneConfig, bool) -> Vec<Shape>,
    ) -> Result<(), SceneError> {
        let c = self.config;
        let tol = 1e-9;
        // fixed across retries so rejections cannot bias the aligned fraction
        let aligned = self.rng.random_bool(c.axis_aligned_fraction);
        for _ in 0..c.max_placement_attempts {
            let group = make(&mut self.rng, c, aligned);
            let (mx, my) = (self.table_half.0 + c.placement_margin, self.table_half.1 + c.placement_margin);
            let offset = Vec3::new(
                self.table_center.x + uniform(&mut self.rng, (-mx, mx)),
                self.table_center.y + uniform(&mut self.rng, (-my, my)),
                self.table_center.z + uniform(&mut self.rng, c.placement_height),
            );
            let shapes: Vec<Shape> = group.into_iter().map(|s| translate(s, &offset)).collect();
            let bounds = shapes.iter().map(Shape::aabb).reduce(|a, b| a.union(&b)).expect("non-empty group");
            if !self.room.contains_box(&bounds, -tol) {
                continue;
            }
            let radius = (bounds.max - bounds.min).norm() / 2.0;
            let center = bounds.center();
            let crowded = self
                .placed
                .iter()
                .any(|(pc, pr)| (pc - center).norm() < c.min_separation * (pr + radius));
            if crowded {
                continue;
            }
            self.placed.push((center, radius));
            for s in shapes {
                scene.push(s);
            }
            return Ok(());
        }
        Err(SceneError::PlacementFailed {
            what: what.to_string(),
            attempts: c.max_placement_attempts,
            placed: scene.instances.len(),
            partial: Box::new(scene.clone()),
        })
    }
}

/// Moves a shape by `t`, keeping the cylinder axis point canonical.
pub fn translate(shape: Shape, t: &Vec3) -> Shape {
    match shape {
        Shape::Rect { plane, center, u_axis, half_u, half_v } => {
            let center = center + t;
            Shape::Rect { plane: Plane { normal: plane.normal, offset: plane.normal.dot(&center) }, center, u_axis, half_u, half_v }
        }
        Shape::Disk { plane, center, radius } => {
            let center = center + t;
            Shape::Disk { plane: Plane { normal: plane.normal, offset: plane.normal.dot(&center) }, center, radius }
        }
        Shape::Sphere(s) => Shape::Sphere(Sphere { center: s.center + t, radius: s.radius }),
        Shape::Cylinder { model, t_min, t_max } => {
            let moved = Cylinder::new(model.axis_point + t, model.axis_dir, model.radius).expect("valid");
            // the canonical axis point slides along the axis; shift the span to match
            let shift = (moved.axis_point - (model.axis_point + t)).dot(&moved.axis_dir);
            Shape::Cylinder { model: moved, t_min: t_min - shift, t_max: t_max - shift }
        }
        Shape::Cone { model, h_min, h_max } => {
            Shape::Cone { model: Cone { apex: model.apex + t, ..model }, h_min, h_max }
        }
        Shape::Patch(p) => Shape::Patch(BezierPatch { origin: p.origin + t, ..p }),
    }
}
