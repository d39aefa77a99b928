//! Closed-form fits from minimal sets of oriented points.

use nalgebra::Matrix3;

use crate::Vec3;

use super::{Cone, Cylinder, GeomError, OrientedPoint, Plane, PrimitiveClass, PrimitiveModel, Sphere};

const MIN_TRIANGLE_AREA: f64 = 1e-12;
const MIN_NORMAL_CROSS: f64 = 1e-9;
/// Relative disagreement allowed between the two sphere radii.
const SPHERE_RADIUS_TOL: f64 = 0.10;
/// Reciprocal condition number below which the tangent-plane system of a
/// cone sample is treated as singular.
const CONE_MIN_RCOND: f64 = 1e-6;
const CONE_ANGLE_TOL: f64 = 1.0 * std::f64::consts::PI / 180.0;

pub fn fit_plane_min(p1: &Vec3, p2: &Vec3, p3: &Vec3) -> Result<Plane, GeomError> {
    let n = (p2 - p1).cross(&(p3 - p1));
    if 0.5 * n.norm() <= MIN_TRIANGLE_AREA {
        return Err(GeomError::DegenerateSample);
    }
    Plane::from_point_normal(*p1, n)
}

/// Parameters `(t, s)` of the mutually closest points of the lines
/// `a + t·u` and `b + s·v`, or `None` when the lines are parallel.
fn closest_line_params(a: &Vec3, u: &Vec3, b: &Vec3, v: &Vec3, min_cross: f64) -> Option<(f64, f64)> {
    let uu = u.dot(u);
    let vv = v.dot(v);
    let uv = u.dot(v);
    let denom = uu * vv - uv * uv;
    if u.cross(v).norm() <= min_cross * (uu * vv).sqrt() || denom <= 0.0 {
        return None;
    }
    let w = a - b;
    let d = u.dot(&w);
    let e = v.dot(&w);
    let t = (uv * e - vv * d) / denom;
    let s = (uu * e - uv * d) / denom;
    Some((t, s))
}

/// Sphere whose centre is the midpoint of the shortest segment between the
/// two normal lines.
pub fn fit_sphere_min(s1: &OrientedPoint, s2: &OrientedPoint) -> Result<Sphere, GeomError> {
    let (t, s) = closest_line_params(&s1.position, &s1.normal, &s2.position, &s2.normal, MIN_NORMAL_CROSS)
        .ok_or(GeomError::DegenerateSample)?;
    let c1 = s1.position + s1.normal * t;
    let c2 = s2.position + s2.normal * s;
    let center = (c1 + c2) * 0.5;
    let r1 = (center - s1.position).norm();
    let r2 = (center - s2.position).norm();
    let radius = 0.5 * (r1 + r2);
    if !(radius > 0.0) {
        return Err(GeomError::DegenerateSample);
    }
    if (r1 - r2).abs() > SPHERE_RADIUS_TOL * radius {
        return Err(GeomError::InconsistentSample);
    }
    Sphere::new(center, radius)
}

pub fn fit_cylinder_min(s1: &OrientedPoint, s2: &OrientedPoint) -> Result<Cylinder, GeomError> {
    let cross = s1.normal.cross(&s2.normal);
    if cross.norm() <= MIN_NORMAL_CROSS {
        return Err(GeomError::DegenerateSample);
    }
    let axis = cross.normalize();
    let flatten = |v: &Vec3| v - axis * axis.dot(v);
    let q1 = flatten(&s1.position);
    let q2 = flatten(&s2.position);
    let m1 = flatten(&s1.normal);
    let m2 = flatten(&s2.normal);
    let (t, _) = closest_line_params(&q1, &m1, &q2, &m2, MIN_NORMAL_CROSS).ok_or(GeomError::DegenerateSample)?;
    let axis_point = q1 + m1 * t;
    let radius = (q1 - axis_point).norm();
    if !(radius > 0.0) {
        return Err(GeomError::DegenerateSample);
    }
    Cylinder::new(axis_point, axis, radius)
}

/// Cone from three oriented points: the apex is the common point of the
/// three tangent planes and the axis is the normal of the plane through the
/// unit apex-to-sample directions.
pub fn fit_cone_min(s1: &OrientedPoint, s2: &OrientedPoint, s3: &OrientedPoint) -> Result<Cone, GeomError> {
    let samples = [s1, s2, s3];
    let normals = Matrix3::from_rows(&[
        s1.normal.transpose(),
        s2.normal.transpose(),
        s3.normal.transpose(),
    ]);
    let sv = normals.singular_values();
    let (smax, smin) = (sv.max(), sv.min());
    if !(smax > 0.0) || smin / smax < CONE_MIN_RCOND {
        return Err(GeomError::DegenerateSample);
    }
    let rhs = Vec3::new(
        s1.normal.dot(&s1.position),
        s2.normal.dot(&s2.position),
        s3.normal.dot(&s3.position),
    );
    let apex = normals.lu().solve(&rhs).ok_or(GeomError::DegenerateSample)?;

    let mut dirs = [Vec3::zeros(); 3];
    for (d, s) in dirs.iter_mut().zip(samples) {
        let w = s.position - apex;
        let len = w.norm();
        if len <= 1e-12 {
            return Err(GeomError::DegenerateSample);
        }
        *d = w / len;
    }
    let n = (dirs[1] - dirs[0]).cross(&(dirs[2] - dirs[0]));
    let len = n.norm();
    if len <= 1e-12 {
        return Err(GeomError::DegenerateSample);
    }
    let mut axis = n / len;
    if axis.dot(&dirs[0]) < 0.0 {
        axis = -axis;
    }
    let mut angles = [0.0; 3];
    for (a, d) in angles.iter_mut().zip(&dirs) {
        let c = axis.dot(d);
        if c <= 0.0 {
            return Err(GeomError::InconsistentSample);
        }
        *a = c.min(1.0).acos();
    }
    let half_angle = angles.iter().sum::<f64>() / 3.0;
    if angles.iter().any(|a| (a - half_angle).abs() > CONE_ANGLE_TOL) {
        return Err(GeomError::InconsistentSample);
    }
    Cone::new(apex, axis, half_angle).map_err(|_| GeomError::InconsistentSample)
}

/// Dispatches to the minimal fit of `class`, using the first
/// [`PrimitiveClass::min_sample_size`] samples.
pub fn fit_minimal(class: PrimitiveClass, samples: &[OrientedPoint]) -> Result<PrimitiveModel, GeomError> {
    if samples.len() < class.min_sample_size() {
        return Err(GeomError::DegenerateSample);
    }
    Ok(match class {
        PrimitiveClass::Plane => {
            fit_plane_min(&samples[0].position, &samples[1].position, &samples[2].position)?.into()
        }
        PrimitiveClass::Sphere => fit_sphere_min(&samples[0], &samples[1])?.into(),
        PrimitiveClass::Cylinder => fit_cylinder_min(&samples[0], &samples[1])?.into(),
        PrimitiveClass::Cone => fit_cone_min(&samples[0], &samples[1], &samples[2])?.into(),
    })
}

#[cfg(test)]
mod tests {
    use std::f64::consts::FRAC_PI_4;

    use approx::assert_abs_diff_eq;
    use rand::Rng;

    use super::*;
    use crate::rng::rng_from_seed;

    fn op(p: [f64; 3], n: [f64; 3]) -> OrientedPoint {
        OrientedPoint::new(Vec3::from(p), Vec3::from(n)).unwrap()
    }

    #[test]
    fn plane_examples() {
        let pl = fit_plane_min(&Vec3::zeros(), &Vec3::x(), &Vec3::y()).unwrap();
        assert_abs_diff_eq!(pl.normal, Vec3::z());
        assert_abs_diff_eq!(pl.offset, 0.0);
        let pl = fit_plane_min(&Vec3::new(0.0, 0.0, 1.0), &Vec3::new(1.0, 0.0, 1.0), &Vec3::new(0.0, 1.0, 1.0))
            .unwrap();
        assert_abs_diff_eq!(pl.normal, Vec3::z());
        assert_abs_diff_eq!(pl.offset, 1.0);
        assert_eq!(
            fit_plane_min(&Vec3::zeros(), &Vec3::x(), &(Vec3::x() * 2.0)),
            Err(GeomError::DegenerateSample)
        );
    }

    #[test]
    fn plane_from_random_points_on_x_plus_y_plus_z_eq_1() {
        let mut rng = rng_from_seed(3);
        let n = Vec3::new(1.0, 1.0, 1.0).normalize();
        for _ in 0..100 {
            let mut pts = [Vec3::zeros(); 3];
            for p in &mut pts {
                let (x, y): (f64, f64) = (rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0));
                *p = Vec3::new(x, y, 1.0 - x - y);
            }
            let pl = fit_plane_min(&pts[0], &pts[1], &pts[2]).unwrap();
            let (nn, d) = if pl.normal.dot(&n) < 0.0 { (-pl.normal, -pl.offset) } else { (pl.normal, pl.offset) };
            assert_abs_diff_eq!(nn, n, epsilon = 1e-9);
            assert_abs_diff_eq!(d, 1.0 / 3f64.sqrt(), epsilon = 1e-9);
        }
    }

    #[test]
    fn sphere_examples() {
        let s = fit_sphere_min(&op([1.0, 0.0, 0.0], [1.0, 0.0, 0.0]), &op([0.0, 1.0, 0.0], [0.0, 1.0, 0.0])).unwrap();
        assert_abs_diff_eq!(s.center, Vec3::zeros(), epsilon = 1e-15);
        assert_abs_diff_eq!(s.radius, 1.0, epsilon = 1e-15);
        let err = fit_sphere_min(&op([0.0, 0.0, 2.0], [0.0, 0.0, 1.0]), &op([0.0, 0.0, -2.0], [0.0, 0.0, -1.0]));
        assert_eq!(err, Err(GeomError::DegenerateSample));
    }

    #[test]
    fn sphere_rejects_inconsistent_radii() {
        // normal lines cross at the origin but the points sit at radii 1 and 2
        let r = fit_sphere_min(&op([1.0, 0.0, 0.0], [1.0, 0.0, 0.0]), &op([0.0, 2.0, 0.0], [0.0, 1.0, 0.0]));
        assert_eq!(r, Err(GeomError::InconsistentSample));
    }

    #[test]
    fn cylinder_examples() {
        let c = fit_cylinder_min(&op([1.0, 0.0, 0.0], [1.0, 0.0, 0.0]), &op([0.0, 1.0, 5.0], [0.0, 1.0, 0.0])).unwrap();
        assert_abs_diff_eq!(c.axis_dir, Vec3::z(), epsilon = 1e-15);
        assert_abs_diff_eq!(c.axis_point, Vec3::zeros(), epsilon = 1e-15);
        assert_abs_diff_eq!(c.radius, 1.0, epsilon = 1e-15);
        let err = fit_cylinder_min(&op([1.0, 0.0, 0.0], [1.0, 0.0, 0.0]), &op([1.0, 0.0, 3.0], [1.0, 0.0, 0.0]));
        assert_eq!(err, Err(GeomError::DegenerateSample));
    }

    #[test]
    fn cone_three_azimuths() {
        let h = 1.0;
        let samples: Vec<OrientedPoint> = [0.0f64, 120.0, 240.0]
            .iter()
            .map(|deg| {
                let a = deg.to_radians();
                let p = Vec3::new(a.cos() * h, a.sin() * h, h);
                let n = Vec3::new(a.cos(), a.sin(), -1.0);
                OrientedPoint::new(p, n).unwrap()
            })
            .collect();
        let c = fit_cone_min(&samples[0], &samples[1], &samples[2]).unwrap();
        assert_abs_diff_eq!(c.apex, Vec3::zeros(), epsilon = 1e-9);
        assert_abs_diff_eq!(c.axis_dir, Vec3::z(), epsilon = 1e-9);
        assert_abs_diff_eq!(c.half_angle, FRAC_PI_4, epsilon = 1e-9);
    }

    #[test]
    fn cone_from_plane_samples_is_degenerate() {
        let s = [
            op([0.0, 0.0, 0.0], [0.0, 0.0, 1.0]),
            op([1.0, 0.0, 0.0], [0.0, 0.0, 1.0]),
            op([0.0, 1.0, 0.0], [0.0, 0.0, 1.0]),
        ];
        assert_eq!(fit_cone_min(&s[0], &s[1], &s[2]), Err(GeomError::DegenerateSample));
    }
}
