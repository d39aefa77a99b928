use std::f64::consts::FRAC_PI_2;
use std::fmt;

use crate::Vec3;

use super::GeomError;

const UNIT_TOL: f64 = 1e-9;
/// Below this radial distance a point counts as lying on an axis (or at a
/// centre) and the deterministic tie-break direction is used.
const AXIS_EPS: f64 = 1e-12;

/// The four primitive classes, in detection priority order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PrimitiveClass {
    Plane,
    Sphere,
    Cylinder,
    Cone,
}

impl PrimitiveClass {
    pub const ALL: [PrimitiveClass; 4] = [
        PrimitiveClass::Plane,
        PrimitiveClass::Sphere,
        PrimitiveClass::Cylinder,
        PrimitiveClass::Cone,
    ];

    /// Number of oriented points in a minimal sample.
    pub fn min_sample_size(self) -> usize {
        match self {
            PrimitiveClass::Plane => 3,
            PrimitiveClass::Sphere => 2,
            PrimitiveClass::Cylinder => 2,
            PrimitiveClass::Cone => 3,
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<Self> {
        Self::ALL.get(i).copied()
    }

    /// Lower-case name used by the text formats.
    pub fn name(self) -> &'static str {
        match self {
            PrimitiveClass::Plane => "plane",
            PrimitiveClass::Sphere => "sphere",
            PrimitiveClass::Cylinder => "cylinder",
            PrimitiveClass::Cone => "cone",
        }
    }

    /// Three letter column label used by reports.
    pub fn short(self) -> &'static str {
        match self {
            PrimitiveClass::Plane => "PLN",
            PrimitiveClass::Sphere => "SPH",
            PrimitiveClass::Cylinder => "CYL",
            PrimitiveClass::Cone => "CON",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|c| c.name() == s)
    }
}

impl fmt::Display for PrimitiveClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Surface `{x : normal · x = offset}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Plane {
    pub normal: Vec3,
    pub offset: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sphere {
    pub center: Vec3,
    pub radius: f64,
}

/// Infinite circular cylinder. `axis_point` is the point of the axis closest
/// to the origin and `axis_dir` is sign-canonical (see [`canonical_direction`]).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cylinder {
    pub axis_point: Vec3,
    pub axis_dir: Vec3,
    pub radius: f64,
}

/// Single-nappe cone; `axis_dir` points from the apex into the opening.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cone {
    pub apex: Vec3,
    pub axis_dir: Vec3,
    pub half_angle: f64,
}

/// A position with a unit surface normal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrientedPoint {
    pub position: Vec3,
    pub normal: Vec3,
}

impl OrientedPoint {
    /// Normalises `normal`; fails on a zero vector.
    pub fn new(position: Vec3, normal: Vec3) -> Result<Self, GeomError> {
        Ok(Self { position, normal: unit(normal)? })
    }
}

fn unit(v: Vec3) -> Result<Vec3, GeomError> {
    let n = v.norm();
    if !(n > 1e-300) || !n.is_finite() {
        return Err(GeomError::InvalidParameters("zero or non-finite direction"));
    }
    // keep already-unit vectors bit-exact so parameter round trips are stable
    if (n - 1.0).abs() <= 2.0 * f64::EPSILON {
        return Ok(v);
    }
    Ok(v / n)
}

/// Flips `d` so that its first non-zero component in the order z, y, x is
/// positive.
pub fn canonical_direction(d: Vec3) -> Vec3 {
    for i in [2, 1, 0] {
        if d[i] > 0.0 {
            return d;
        }
        if d[i] < 0.0 {
            return -d;
        }
    }
    d
}

/// Unit vector perpendicular to `axis`: +x projected off the axis, or +y
/// when the axis is (nearly) parallel to x.
pub fn tiebreak_perpendicular(axis: &Vec3) -> Vec3 {
    for e in [Vec3::x(), Vec3::y()] {
        let v = e - axis * axis.dot(&e);
        let n = v.norm();
        if n > 1e-6 {
            return v / n;
        }
    }
    unreachable!("x and y cannot both be parallel to a unit axis")
}

/// Orthonormal pair spanning the plane perpendicular to unit `n`.
pub fn tangent_basis(n: &Vec3) -> (Vec3, Vec3) {
    let t1 = tiebreak_perpendicular(n);
    let t2 = n.cross(&t1);
    (t1, t2)
}

impl Plane {
    pub fn new(normal: Vec3, offset: f64) -> Result<Self, GeomError> {
        let n = normal.norm();
        let unit_normal = unit(normal)?;
        let offset = if unit_normal == normal { offset } else { offset / n };
        Ok(Self { normal: unit_normal, offset })
    }

    pub fn from_point_normal(point: Vec3, normal: Vec3) -> Result<Self, GeomError> {
        let normal = unit(normal)?;
        Ok(Self { normal, offset: normal.dot(&point) })
    }

    pub fn signed_distance(&self, p: &Vec3) -> f64 {
        self.normal.dot(p) - self.offset
    }
}

impl Sphere {
    pub fn new(center: Vec3, radius: f64) -> Result<Self, GeomError> {
        if !(radius > 0.0) || !radius.is_finite() {
            return Err(GeomError::InvalidParameters("sphere radius must be positive"));
        }
        Ok(Self { center, radius })
    }
}

impl Cylinder {
    /// Builds a canonical cylinder from any point on the axis.
    pub fn new(point_on_axis: Vec3, axis_dir: Vec3, radius: f64) -> Result<Self, GeomError> {
        if !(radius > 0.0) || !radius.is_finite() {
            return Err(GeomError::InvalidParameters("cylinder radius must be positive"));
        }
        let axis_dir = canonical_direction(unit(axis_dir)?);
        let axis_point = point_on_axis - axis_dir * axis_dir.dot(&point_on_axis);
        Ok(Self { axis_point, axis_dir, radius })
    }

    /// Axial coordinate and radial vector of `p` relative to the axis.
    fn decompose(&self, p: &Vec3) -> (f64, Vec3) {
        let w = p - self.axis_point;
        let t = w.dot(&self.axis_dir);
        (t, w - self.axis_dir * t)
    }
}

impl Cone {
    pub fn new(apex: Vec3, axis_dir: Vec3, half_angle: f64) -> Result<Self, GeomError> {
        if !(half_angle > 0.0 && half_angle < FRAC_PI_2) {
            return Err(GeomError::InvalidParameters("cone half angle must lie in (0, pi/2)"));
        }
        Ok(Self { apex, axis_dir: unit(axis_dir)?, half_angle })
    }

    fn decompose(&self, p: &Vec3) -> (f64, Vec3) {
        let w = p - self.apex;
        let h = w.dot(&self.axis_dir);
        (h, w - self.axis_dir * h)
    }
}

/// A fitted or ground-truth primitive.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PrimitiveModel {
    Plane(Plane),
    Sphere(Sphere),
    Cylinder(Cylinder),
    Cone(Cone),
}

impl From<Plane> for PrimitiveModel {
    fn from(m: Plane) -> Self {
        PrimitiveModel::Plane(m)
    }
}
impl From<Sphere> for PrimitiveModel {
    fn from(m: Sphere) -> Self {
        PrimitiveModel::Sphere(m)
    }
}
impl From<Cylinder> for PrimitiveModel {
    fn from(m: Cylinder) -> Self {
        PrimitiveModel::Cylinder(m)
    }
}
impl From<Cone> for PrimitiveModel {
    fn from(m: Cone) -> Self {
        PrimitiveModel::Cone(m)
    }
}

impl PrimitiveModel {
    pub fn class(&self) -> PrimitiveClass {
        match self {
            PrimitiveModel::Plane(_) => PrimitiveClass::Plane,
            PrimitiveModel::Sphere(_) => PrimitiveClass::Sphere,
            PrimitiveModel::Cylinder(_) => PrimitiveClass::Cylinder,
            PrimitiveModel::Cone(_) => PrimitiveClass::Cone,
        }
    }

    /// Closest point on the (unbounded) surface.
    pub fn project(&self, p: &Vec3) -> Vec3 {
        self.project_with_normal(p).0
    }

    /// Euclidean distance from `p` to the surface.
    pub fn distance(&self, p: &Vec3) -> f64 {
        match self {
            PrimitiveModel::Plane(m) => m.signed_distance(p).abs(),
            PrimitiveModel::Sphere(m) => ((p - m.center).norm() - m.radius).abs(),
            PrimitiveModel::Cylinder(m) => {
                let (_, radial) = m.decompose(p);
                (radial.norm() - m.radius).abs()
            }
            PrimitiveModel::Cone(m) => {
                let (h, radial) = m.decompose(p);
                let r = radial.norm();
                let (sin, cos) = m.half_angle.sin_cos();
                let s = h * cos + r * sin;
                if s <= 0.0 {
                    (p - m.apex).norm()
                } else {
                    (r * cos - h * sin).abs()
                }
            }
        }
    }

    /// Distance to the surface and the surface normal at the projection.
    ///
    /// This is the hot path of inlier scoring; at the apex of a cone it
    /// reports the axis direction instead of failing.
    pub fn distance_and_normal(&self, p: &Vec3) -> (f64, Vec3) {
        match self {
            PrimitiveModel::Plane(m) => (m.signed_distance(p).abs(), m.normal),
            PrimitiveModel::Sphere(m) => {
                let w = p - m.center;
                let r = w.norm();
                let n = if r > AXIS_EPS { w / r } else { Vec3::x() };
                ((r - m.radius).abs(), n)
            }
            PrimitiveModel::Cylinder(m) => {
                let (_, radial) = m.decompose(p);
                let r = radial.norm();
                let n = if r > AXIS_EPS { radial / r } else { tiebreak_perpendicular(&m.axis_dir) };
                ((r - m.radius).abs(), n)
            }
            PrimitiveModel::Cone(m) => {
                let (h, radial) = m.decompose(p);
                let r = radial.norm();
                let (sin, cos) = m.half_angle.sin_cos();
                let rhat = if r > AXIS_EPS { radial / r } else { tiebreak_perpendicular(&m.axis_dir) };
                let s = h * cos + r * sin;
                if s <= 0.0 {
                    ((p - m.apex).norm(), -m.axis_dir)
                } else {
                    ((r * cos - h * sin).abs(), rhat * cos - m.axis_dir * sin)
                }
            }
        }
    }

    fn project_with_normal(&self, p: &Vec3) -> (Vec3, Vec3) {
        match self {
            PrimitiveModel::Plane(m) => (p - m.normal * m.signed_distance(p), m.normal),
            PrimitiveModel::Sphere(m) => {
                let w = p - m.center;
                let r = w.norm();
                let dir = if r > AXIS_EPS { w / r } else { Vec3::x() };
                (m.center + dir * m.radius, dir)
            }
            PrimitiveModel::Cylinder(m) => {
                let (t, radial) = m.decompose(p);
                let r = radial.norm();
                let dir = if r > AXIS_EPS { radial / r } else { tiebreak_perpendicular(&m.axis_dir) };
                (m.axis_point + m.axis_dir * t + dir * m.radius, dir)
            }
            PrimitiveModel::Cone(m) => {
                let (h, radial) = m.decompose(p);
                let r = radial.norm();
                let (sin, cos) = m.half_angle.sin_cos();
                let rhat = if r > AXIS_EPS { radial / r } else { tiebreak_perpendicular(&m.axis_dir) };
                let s = h * cos + r * sin;
                if s <= 0.0 {
                    (m.apex, -m.axis_dir)
                } else {
                    let generator = m.axis_dir * cos + rhat * sin;
                    (m.apex + generator * s, rhat * cos - m.axis_dir * sin)
                }
            }
        }
    }

    /// Outward unit normal at a surface point. For planes this is the stored
    /// normal; use [`PrimitiveModel::oriented_normal_at`] to pick a side.
    pub fn surface_normal_at(&self, q: &Vec3) -> Result<Vec3, GeomError> {
        match self {
            PrimitiveModel::Plane(m) => Ok(m.normal),
            PrimitiveModel::Sphere(m) => {
                let w = q - m.center;
                let r = w.norm();
                if r <= AXIS_EPS {
                    return Err(GeomError::DegenerateNormalQuery);
                }
                Ok(w / r)
            }
            PrimitiveModel::Cylinder(m) => {
                let (_, radial) = m.decompose(q);
                let r = radial.norm();
                if r <= AXIS_EPS {
                    return Err(GeomError::DegenerateNormalQuery);
                }
                Ok(radial / r)
            }
            PrimitiveModel::Cone(m) => {
                let (_, radial) = m.decompose(q);
                let r = radial.norm();
                if r <= AXIS_EPS {
                    return Err(GeomError::DegenerateNormalQuery);
                }
                let (sin, cos) = m.half_angle.sin_cos();
                Ok(radial / r * cos - m.axis_dir * sin)
            }
        }
    }

    /// Surface normal flipped to have a non-negative dot product with
    /// `reference`.
    pub fn oriented_normal_at(&self, q: &Vec3, reference: &Vec3) -> Result<Vec3, GeomError> {
        let n = self.surface_normal_at(q)?;
        Ok(if n.dot(reference) < 0.0 { -n } else { n })
    }

    /// Signed residual used by least-squares refinement. Its magnitude equals
    /// [`PrimitiveModel::distance`] except for cone points whose projection
    /// clamps to the apex.
    pub fn signed_residual(&self, p: &Vec3) -> f64 {
        match self {
            PrimitiveModel::Plane(m) => m.signed_distance(p),
            PrimitiveModel::Sphere(m) => (p - m.center).norm() - m.radius,
            PrimitiveModel::Cylinder(m) => m.decompose(p).1.norm() - m.radius,
            PrimitiveModel::Cone(m) => {
                let (h, radial) = m.decompose(p);
                let (sin, cos) = m.half_angle.sin_cos();
                radial.norm() * cos - h * sin
            }
        }
    }

    /// Implicit function whose zero set is the surface (used to cross-check
    /// normals by finite differences).
    pub fn implicit(&self, p: &Vec3) -> f64 {
        self.signed_residual(p)
    }

    /// Checks the type invariants (unit directions, positive sizes).
    pub fn is_valid(&self) -> bool {
        let unit_ok = |v: &Vec3| (v.norm() - 1.0).abs() <= UNIT_TOL;
        match self {
            PrimitiveModel::Plane(m) => unit_ok(&m.normal) && m.offset.is_finite(),
            PrimitiveModel::Sphere(m) => m.radius > 0.0 && m.center.iter().all(|c| c.is_finite()),
            PrimitiveModel::Cylinder(m) => unit_ok(&m.axis_dir) && m.radius > 0.0,
            PrimitiveModel::Cone(m) => {
                unit_ok(&m.axis_dir) && m.half_angle > 0.0 && m.half_angle < FRAC_PI_2
            }
        }
    }

    /// Flat parameter list used by the text formats:
    /// plane `nx ny nz d`, sphere `cx cy cz r`, cylinder `px py pz dx dy dz r`,
    /// cone `ax ay az dx dy dz half_angle`.
    pub fn params(&self) -> Vec<f64> {
        match self {
            PrimitiveModel::Plane(m) => vec![m.normal.x, m.normal.y, m.normal.z, m.offset],
            PrimitiveModel::Sphere(m) => vec![m.center.x, m.center.y, m.center.z, m.radius],
            PrimitiveModel::Cylinder(m) => vec![
                m.axis_point.x,
                m.axis_point.y,
                m.axis_point.z,
                m.axis_dir.x,
                m.axis_dir.y,
                m.axis_dir.z,
                m.radius,
            ],
            PrimitiveModel::Cone(m) => vec![
                m.apex.x,
                m.apex.y,
                m.apex.z,
                m.axis_dir.x,
                m.axis_dir.y,
                m.axis_dir.z,
                m.half_angle,
            ],
        }
    }

    /// Inverse of [`PrimitiveModel::params`].
    pub fn from_params(class: PrimitiveClass, p: &[f64]) -> Result<Self, GeomError> {
        let need = match class {
            PrimitiveClass::Plane | PrimitiveClass::Sphere => 4,
            PrimitiveClass::Cylinder | PrimitiveClass::Cone => 7,
        };
        if p.len() != need {
            return Err(GeomError::InvalidParameters("wrong parameter count"));
        }
        let v = |i: usize| Vec3::new(p[i], p[i + 1], p[i + 2]);
        Ok(match class {
            PrimitiveClass::Plane => Plane::new(v(0), p[3])?.into(),
            PrimitiveClass::Sphere => Sphere::new(v(0), p[3])?.into(),
            PrimitiveClass::Cylinder => Cylinder::new(v(0), v(3), p[6])?.into(),
            PrimitiveClass::Cone => Cone::new(v(0), v(3), p[6])?.into(),
        })
    }
}
