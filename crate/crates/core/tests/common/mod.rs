#![allow(dead_code)]

use primfit::geom::{Cone, Cylinder, Plane, Sphere};
use primfit::range_image::{compute_boundaries, make_bags_labels, LabelMap, LabelScheme, RangeImage, DEFAULT_WINDOW};
use primfit::rng::rng_from_seed;
use primfit::scene::{look_at, render_from, ScannerConfig, SceneDescription, Shape};
use primfit::seg::ProbabilityMaps;
use primfit::Vec3;
use rand::Rng;

pub fn scan(scene: &SceneDescription, eye: Vec3, target: Vec3, sigma: f64, seed: u64) -> (RangeImage, LabelMap) {
    let cfg = ScannerConfig { noise_sigma: sigma, ..Default::default() };
    render_from(scene, &look_at(&eye, &target), &cfg, seed)
}

/// One-hot maps of the ground truth under `scheme`.
pub fn perfect_maps(labels: &LabelMap, scheme: LabelScheme) -> ProbabilityMaps {
    let bags = make_bags_labels(labels, &compute_boundaries(labels, DEFAULT_WINDOW), scheme);
    ProbabilityMaps::one_hot(&bags)
}

pub fn floor(half: f64) -> Shape {
    Shape::Rect { plane: Plane::new(Vec3::z(), 0.0).unwrap(), center: Vec3::zeros(), u_axis: Vec3::x(), half_u: half, half_v: half }
}

pub fn upright_cylinder(x: f64, y: f64, r: f64, h: f64) -> Shape {
    Shape::Cylinder { model: Cylinder::new(Vec3::new(x, y, 0.0), Vec3::z(), r).unwrap(), t_min: -0.5, t_max: h }
}

/// Floor, back wall, sphere, cylinder and cone.
pub fn five_instance_scene() -> SceneDescription {
    let mut s = SceneDescription::empty();
    s.push(floor(3.0));
    s.push(Shape::Rect {
        plane: Plane::new(Vec3::x(), -1.5).unwrap(),
        center: Vec3::new(-1.5, 0.0, 1.0),
        u_axis: Vec3::y(),
        half_u: 3.0,
        half_v: 1.0,
    });
    s.push(Shape::Sphere(Sphere::new(Vec3::new(0.0, -0.9, 0.35), 0.35).unwrap()));
    s.push(upright_cylinder(0.0, 0.0, 0.25, 1.0));
    let apex = Vec3::new(0.2, 0.9, 1.1);
    s.push(Shape::Cone { model: Cone::new(apex, -Vec3::z(), 0.4).unwrap(), h_min: 0.2, h_max: 1.1 });
    s
}

/// A floor pierced by one random primitive, plus a camera looking at the
/// intersection.
pub fn intersecting_pair(seed: u64) -> (SceneDescription, Vec3, Vec3) {
    let mut rng = rng_from_seed(seed);
    let mut s = SceneDescription::empty();
    s.push(floor(3.0));
    let x = rng.random_range(-0.2..0.2);
    let y = rng.random_range(-0.2..0.2);
    let shape = match seed % 4 {
        0 => Shape::Sphere(Sphere::new(Vec3::new(x, y, rng.random_range(0.1..0.3)), rng.random_range(0.35..0.5)).unwrap()),
        1 => upright_cylinder(x, y, rng.random_range(0.2..0.35), rng.random_range(0.8..1.2)),
        2 => {
            let apex = Vec3::new(x, y, rng.random_range(0.9..1.3));
            Shape::Cone { model: Cone::new(apex, -Vec3::z(), rng.random_range(0.3..0.6)).unwrap(), h_min: 0.1, h_max: apex.z + 0.2 }
        }
        _ => {
            // a tilted wall meeting the floor
            let n = Vec3::new(1.0, 0.0, rng.random_range(-0.4..0.4)).normalize();
            let c = Vec3::new(x - 0.5, y, 0.6);
            Shape::Rect { plane: Plane::from_point_normal(c, n).unwrap(), center: c, u_axis: Vec3::y(), half_u: 1.2, half_v: 0.9 }
        }
    };
    s.push(shape);
    let ang: f64 = rng.random_range(-0.6..0.6);
    let dist = rng.random_range(2.0..2.8);
    let eye = Vec3::new(dist * ang.cos(), dist * ang.sin(), rng.random_range(1.0..1.6));
    (s, eye, Vec3::new(x, y, 0.3))
}

use primfit::geom::{canonical_direction, tangent_basis, OrientedPoint, PrimitiveClass, PrimitiveModel};

pub fn random_unit(rng: &mut impl Rng) -> Vec3 {
    loop {
        let v = Vec3::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        let n = v.norm();
        if n > 0.1 && n <= 1.0 {
            return v / n;
        }
    }
}

fn random_point(rng: &mut impl Rng, half: f64) -> Vec3 {
    Vec3::new(rng.random_range(-half..half), rng.random_range(-half..half), rng.random_range(-half..half))
}

pub fn random_model(rng: &mut impl Rng, class: PrimitiveClass) -> PrimitiveModel {
    match class {
        PrimitiveClass::Plane => Plane::new(random_unit(rng), rng.random_range(-3.0..3.0)).unwrap().into(),
        PrimitiveClass::Sphere => Sphere::new(random_point(rng, 3.0), rng.random_range(0.1..2.0)).unwrap().into(),
        PrimitiveClass::Cylinder => {
            Cylinder::new(random_point(rng, 3.0), random_unit(rng), rng.random_range(0.05..1.0)).unwrap().into()
        }
        PrimitiveClass::Cone => {
            let angle = rng.random_range(10f64.to_radians()..70f64.to_radians());
            Cone::new(random_point(rng, 3.0), random_unit(rng), angle).unwrap().into()
        }
    }
}

/// Exact oriented point on `model` at parameters `(a, b)`: plane in-plane
/// coordinates, sphere/cylinder/cone azimuth `a` with polar angle, axial
/// offset or apex height `b`.
pub fn surface_point(model: &PrimitiveModel, a: f64, b: f64) -> OrientedPoint {
    match model {
        PrimitiveModel::Plane(m) => {
            let (u, v) = tangent_basis(&m.normal);
            OrientedPoint { position: m.normal * m.offset + u * a + v * b, normal: m.normal }
        }
        PrimitiveModel::Sphere(m) => {
            let (u, v) = tangent_basis(&Vec3::z());
            let d = (u * a.cos() + v * a.sin()) * b.sin() + Vec3::z() * b.cos();
            OrientedPoint { position: m.center + d * m.radius, normal: d }
        }
        PrimitiveModel::Cylinder(m) => {
            let (u, v) = tangent_basis(&m.axis_dir);
            let d = u * a.cos() + v * a.sin();
            OrientedPoint { position: m.axis_point + m.axis_dir * b + d * m.radius, normal: d }
        }
        PrimitiveModel::Cone(m) => {
            let (u, v) = tangent_basis(&m.axis_dir);
            let d = u * a.cos() + v * a.sin();
            let (sin, cos) = m.half_angle.sin_cos();
            let position = m.apex + m.axis_dir * b + d * (b * sin / cos);
            OrientedPoint { position, normal: d * cos - m.axis_dir * sin }
        }
    }
}

pub fn random_surface_point(rng: &mut impl Rng, model: &PrimitiveModel) -> OrientedPoint {
    let a = rng.random_range(0.0..std::f64::consts::TAU);
    match model {
        PrimitiveModel::Plane(_) => surface_point(model, rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0)),
        PrimitiveModel::Sphere(_) => surface_point(model, a, rng.random_range(0.05..3.09)),
        PrimitiveModel::Cylinder(_) => surface_point(model, a, rng.random_range(-2.0..2.0)),
        PrimitiveModel::Cone(_) => surface_point(model, a, rng.random_range(0.1..2.0)),
    }
}

fn angle_gap(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(std::f64::consts::TAU);
    d.min(std::f64::consts::TAU - d)
}

/// A minimal sample avoiding the documented degeneracies: non-collinear
/// plane points, normals at least 20° from parallel for spheres and
/// cylinders, cone azimuths at least 40° apart.
pub fn minimal_sample(rng: &mut impl Rng, model: &PrimitiveModel) -> Vec<OrientedPoint> {
    let k = model.class().min_sample_size();
    loop {
        let s: Vec<OrientedPoint> = match model {
            PrimitiveModel::Cone(_) => {
                let az: Vec<f64> = (0..3).map(|_| rng.random_range(0.0..std::f64::consts::TAU)).collect();
                let ok = (0..3).all(|i| (i + 1..3).all(|j| angle_gap(az[i], az[j]) >= 40f64.to_radians()));
                if !ok {
                    continue;
                }
                az.iter().map(|&a| surface_point(model, a, rng.random_range(0.2..2.0))).collect()
            }
            _ => (0..k).map(|_| random_surface_point(rng, model)).collect(),
        };
        let good = match model {
            PrimitiveModel::Plane(_) => (s[1].position - s[0].position).cross(&(s[2].position - s[0].position)).norm() > 0.1,
            PrimitiveModel::Sphere(_) | PrimitiveModel::Cylinder(_) => {
                let ang = s[0].normal.dot(&s[1].normal).clamp(-1.0, 1.0).acos();
                ang > 20f64.to_radians() && ang < 160f64.to_radians()
            }
            PrimitiveModel::Cone(_) => true,
        };
        if good {
            return s;
        }
    }
}

/// Parameters with the plane's sign ambiguity removed.
pub fn canonical_params(m: &PrimitiveModel) -> Vec<f64> {
    match m {
        PrimitiveModel::Plane(p) => {
            let n = canonical_direction(p.normal);
            let d = if n == p.normal { p.offset } else { -p.offset };
            vec![n.x, n.y, n.z, d]
        }
        _ => m.params(),
    }
}

pub fn max_param_diff(a: &PrimitiveModel, b: &PrimitiveModel) -> f64 {
    canonical_params(a).iter().zip(canonical_params(b)).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// Reference boundary mask by explicit neighbourhood enumeration.
pub fn boundary_brute_force(labels: &LabelMap, window: usize) -> Vec<bool> {
    use primfit::range_image::SemanticClass;
    let (w, h) = (labels.width as i64, labels.height as i64);
    let r = (window / 2) as i64;
    let mut out = vec![false; labels.len()];
    for i in 0..labels.len() {
        if labels.class[i] == SemanticClass::Invalid {
            continue;
        }
        let (u, v) = (i as i64 % w, i as i64 / w);
        let mut seen = std::collections::HashSet::new();
        let mut invalid = false;
        for dy in -r..=r {
            for dx in -r..=r {
                let (x, y) = (u + dx, v + dy);
                if x < 0 || y < 0 || x >= w || y >= h {
                    continue;
                }
                let j = (y * w + x) as usize;
                invalid |= labels.class[j] == SemanticClass::Invalid;
                seen.insert(labels.instance[j]);
            }
        }
        out[i] = invalid || seen.len() > 1;
    }
    out
}

/// Random small label map with up to `ids` instances and some invalid pixels.
pub fn random_label_map(rng: &mut impl Rng, w: usize, h: usize, ids: u32) -> LabelMap {
    use primfit::geom::PrimitiveClass;
    use primfit::range_image::SemanticClass;
    let mut lm = LabelMap::invalid(w, h);
    let classes: Vec<SemanticClass> = (0..=ids)
        .map(|_| match rng.random_range(0..5) {
            4 => SemanticClass::Other,
            c => SemanticClass::Primitive(PrimitiveClass::ALL[c]),
        })
        .collect();
    // blocky regions so boundaries are not everywhere
    let block = rng.random_range(1..5);
    let (bw, bh) = (w.div_ceil(block), h.div_ceil(block));
    let grid: Vec<u32> = (0..bw * bh).map(|_| rng.random_range(0..=ids)).collect();
    for v in 0..h {
        for u in 0..w {
            let id = grid[(v / block) * bw + u / block];
            if id > 0 {
                lm.class[v * w + u] = classes[id as usize];
                lm.instance[v * w + u] = id;
            }
        }
    }
    lm
}
