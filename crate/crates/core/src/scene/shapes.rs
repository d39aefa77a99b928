use crate::geom::{Cone, Cylinder, Plane, PrimitiveClass, PrimitiveModel, Sphere};
use crate::range_image::SemanticClass;
use crate::Vec3;

use super::patch::BezierPatch;

/// Minimum ray parameter accepted as a hit.
pub const RAY_EPS: f64 = 1e-9;

/// A surface with a finite extent.
#[derive(Debug, Clone, PartialEq)]
pub enum Shape {
    /// Rectangle on `plane`, centred at `center`, spanning `±half_u` along
    /// `u_axis` and `±half_v` along `normal × u_axis`.
    Rect { plane: Plane, center: Vec3, u_axis: Vec3, half_u: f64, half_v: f64 },
    Disk { plane: Plane, center: Vec3, radius: f64 },
    Sphere(Sphere),
    /// Axial coordinate `(p − axis_point)·axis_dir` limited to `[t_min, t_max]`.
    Cylinder { model: Cylinder, t_min: f64, t_max: f64 },
    /// Distance from the apex along the axis limited to `[h_min, h_max]`.
    Cone { model: Cone, h_min: f64, h_max: f64 },
    Patch(BezierPatch),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Aabb {
    pub min: Vec3,
    pub max: Vec3,
}

impl Aabb {
    pub fn empty() -> Self {
        Self { min: Vec3::repeat(f64::INFINITY), max: Vec3::repeat(f64::NEG_INFINITY) }
    }

    pub fn grow(&mut self, p: &Vec3) {
        self.min = self.min.inf(p);
        self.max = self.max.sup(p);
    }

    pub fn union(mut self, other: &Aabb) -> Self {
        self.grow(&other.min);
        self.grow(&other.max);
        self
    }

    /// Bounding box of a disk given its centre, unit normal and radius.
    fn disk(center: &Vec3, normal: &Vec3, r: f64) -> Self {
        let ext = Vec3::from_fn(|i, _| r * (1.0 - normal[i] * normal[i]).max(0.0).sqrt());
        Self { min: center - ext, max: center + ext }
    }

    pub fn contains_box(&self, other: &Aabb, tol: f64) -> bool {
        (0..3).all(|i| other.min[i] >= self.min[i] - tol && other.max[i] <= self.max[i] + tol)
    }

    pub fn center(&self) -> Vec3 {
        (self.min + self.max) * 0.5
    }

    /// Ray parameter interval inside the box, if any.
    pub fn ray_interval(&self, origin: &Vec3, inv_dir: &Vec3, t_max: f64) -> Option<(f64, f64)> {
        let mut lo = 0.0f64;
        let mut hi = t_max;
        for i in 0..3 {
            let t0 = (self.min[i] - origin[i]) * inv_dir[i];
            let t1 = (self.max[i] - origin[i]) * inv_dir[i];
            let (a, b) = if t0 <= t1 { (t0, t1) } else { (t1, t0) };
            // NaN arises for a zero direction component with origin on a slab face
            if a.is_nan() || b.is_nan() {
                continue;
            }
            lo = lo.max(a);
            hi = hi.min(b);
        }
        (lo <= hi).then_some((lo, hi))
    }
}

fn smallest_root_in(a: f64, b: f64, c: f64, t_min: f64, accept: impl Fn(f64) -> bool) -> Option<f64> {
    let mut roots = [f64::NAN; 2];
    if a.abs() < 1e-14 {
        if b.abs() < 1e-300 {
            return None;
        }
        roots[0] = -c / b;
    } else {
        let disc = b * b - 4.0 * a * c;
        if disc < 0.0 {
            return None;
        }
        // numerically stable pair
        let q = -0.5 * (b + b.signum() * disc.sqrt());
        let (r0, r1) = if q == 0.0 { (0.0, 0.0) } else { (q / a, c / q) };
        roots = if r0 <= r1 { [r0, r1] } else { [r1, r0] };
    }
    roots.into_iter().find(|&t| t.is_finite() && t > t_min && accept(t))
}

impl Shape {
    pub fn semantic_class(&self) -> SemanticClass {
        match self {
            Shape::Rect { .. } | Shape::Disk { .. } => SemanticClass::Primitive(PrimitiveClass::Plane),
            Shape::Sphere(_) => SemanticClass::Primitive(PrimitiveClass::Sphere),
            Shape::Cylinder { .. } => SemanticClass::Primitive(PrimitiveClass::Cylinder),
            Shape::Cone { .. } => SemanticClass::Primitive(PrimitiveClass::Cone),
            Shape::Patch(_) => SemanticClass::Other,
        }
    }

    /// Unbounded primitive carrying this surface, `None` for freeform patches.
    pub fn model(&self) -> Option<PrimitiveModel> {
        match self {
            Shape::Rect { plane, .. } | Shape::Disk { plane, .. } => Some(PrimitiveModel::Plane(*plane)),
            Shape::Sphere(s) => Some(PrimitiveModel::Sphere(*s)),
            Shape::Cylinder { model, .. } => Some(PrimitiveModel::Cylinder(*model)),
            Shape::Cone { model, .. } => Some(PrimitiveModel::Cone(*model)),
            Shape::Patch(_) => None,
        }
    }

    pub fn aabb(&self) -> Aabb {
        match self {
            Shape::Rect { plane, center, u_axis, half_u, half_v } => {
                let v_axis = plane.normal.cross(u_axis);
                let mut b = Aabb::empty();
                for su in [-1.0, 1.0] {
                    for sv in [-1.0, 1.0] {
                        b.grow(&(center + u_axis * (su * half_u) + v_axis * (sv * half_v)));
                    }
                }
                b
            }
            Shape::Disk { plane, center, radius } => Aabb::disk(center, &plane.normal, *radius),
            Shape::Sphere(s) => Aabb { min: s.center - Vec3::repeat(s.radius), max: s.center + Vec3::repeat(s.radius) },
            Shape::Cylinder { model, t_min, t_max } => {
                let a = model.axis_point + model.axis_dir * *t_min;
                let b = model.axis_point + model.axis_dir * *t_max;
                Aabb::disk(&a, &model.axis_dir, model.radius).union(&Aabb::disk(&b, &model.axis_dir, model.radius))
            }
            Shape::Cone { model, h_min, h_max } => {
                let tan = model.half_angle.tan();
                let a = model.apex + model.axis_dir * *h_min;
                let b = model.apex + model.axis_dir * *h_max;
                Aabb::disk(&a, &model.axis_dir, h_min * tan).union(&Aabb::disk(&b, &model.axis_dir, h_max * tan))
            }
            Shape::Patch(p) => {
                let mut b = Aabb::empty();
                for c in p.hull_corners() {
                    b.grow(&c);
                }
                b
            }
        }
    }

    /// Centre and radius of a bounding sphere.
    pub fn bounding_sphere(&self) -> (Vec3, f64) {
        match self {
            Shape::Sphere(s) => (s.center, s.radius),
            Shape::Disk { center, radius, .. } => (*center, *radius),
            Shape::Rect { center, half_u, half_v, .. } => (*center, half_u.hypot(*half_v)),
            _ => {
                let b = self.aabb();
                (b.center(), (b.max - b.min).norm() * 0.5)
            }
        }
    }

    /// Nearest hit `t > t_min` of the ray `origin + t·dir` (unit `dir`).
    pub fn intersect(&self, origin: &Vec3, dir: &Vec3, t_min: f64) -> Option<f64> {
        match self {
            Shape::Rect { plane, center, u_axis, half_u, half_v } => {
                let t = plane_hit(plane, origin, dir, t_min)?;
                let q = origin + dir * t - center;
                let v_axis = plane.normal.cross(u_axis);
                (q.dot(u_axis).abs() <= *half_u && q.dot(&v_axis).abs() <= *half_v).then_some(t)
            }
            Shape::Disk { plane, center, radius } => {
                let t = plane_hit(plane, origin, dir, t_min)?;
                ((origin + dir * t - center).norm() <= *radius).then_some(t)
            }
            Shape::Sphere(s) => {
                let w = origin - s.center;
                smallest_root_in(1.0, 2.0 * w.dot(dir), w.norm_squared() - s.radius * s.radius, t_min, |_| true)
            }
            Shape::Cylinder { model, t_min: a_min, t_max: a_max } => {
                let ax = model.axis_dir;
                let w = origin - model.axis_point;
                let dp = dir - ax * dir.dot(&ax);
                let wp = w - ax * w.dot(&ax);
                smallest_root_in(
                    dp.norm_squared(),
                    2.0 * dp.dot(&wp),
                    wp.norm_squared() - model.radius * model.radius,
                    t_min,
                    |t| {
                        let s = (w + dir * t).dot(&ax);
                        s >= *a_min && s <= *a_max
                    },
                )
            }
            Shape::Cone { model, h_min, h_max } => {
                let ax = model.axis_dir;
                let c2 = model.half_angle.cos().powi(2);
                let w = origin - model.apex;
                let (da, wa) = (dir.dot(&ax), w.dot(&ax));
                smallest_root_in(
                    da * da - c2,
                    2.0 * (da * wa - c2 * dir.dot(&w)),
                    wa * wa - c2 * w.norm_squared(),
                    t_min,
                    |t| {
                        let h = wa + da * t;
                        h >= *h_min && h <= *h_max
                    },
                )
            }
            Shape::Patch(p) => p.intersect(origin, dir, t_min),
        }
    }
}

fn plane_hit(plane: &Plane, origin: &Vec3, dir: &Vec3, t_min: f64) -> Option<f64> {
    let denom = plane.normal.dot(dir);
    if denom.abs() < 1e-14 {
        return None;
    }
    let t = (plane.offset - plane.normal.dot(origin)) / denom;
    (t > t_min).then_some(t)
}
