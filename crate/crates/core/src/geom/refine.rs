//! Gauss-Newton refinement of a primitive against its inlier positions.
//!
//! Each class is updated through a minimal local parameterisation around the
//! current estimate, so there is no gauge freedom in the normal equations:
//!
//! | class    | parameters                                          |
//! |----------|-----------------------------------------------------|
//! | plane    | 2 tangent rotations of the normal, offset           |
//! | sphere   | centre, radius                                      |
//! | cylinder | 2 axis rotations, 2 in-plane axis offsets, radius   |
//! | cone     | apex, 2 axis rotations, half angle                  |

use nalgebra::{DMatrix, DVector};

use crate::Vec3;

use super::primitives::{tangent_basis, tiebreak_perpendicular};
use super::{Cone, Cylinder, Plane, PrimitiveModel, Sphere};

const MAX_ITERATIONS: usize = 20;
const STEP_TOL: f64 = 1e-8;
const MAX_HALVINGS: usize = 12;
const RANK_RCOND: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RefitStatus {
    Converged,
    /// The iteration budget ran out; the seed was returned.
    NotConverged,
    /// The normal equations were singular (e.g. too few points); the seed
    /// was returned.
    RankDeficient,
}

#[derive(Debug, Clone, Copy)]
pub struct RefitOutcome {
    pub model: PrimitiveModel,
    pub status: RefitStatus,
    pub iterations: usize,
    pub initial_cost: f64,
    pub final_cost: f64,
}

impl RefitOutcome {
    pub fn failed(&self) -> bool {
        self.status != RefitStatus::Converged
    }
}

pub fn sum_squared_distance(model: &PrimitiveModel, points: &[Vec3]) -> f64 {
    points.iter().map(|p| model.distance(p).powi(2)).sum()
}

fn param_count(model: &PrimitiveModel) -> usize {
    match model {
        PrimitiveModel::Plane(_) => 3,
        PrimitiveModel::Sphere(_) => 4,
        PrimitiveModel::Cylinder(_) => 5,
        PrimitiveModel::Cone(_) => 6,
    }
}

/// Residual and Jacobian row of one point at the current estimate.
fn residual_row(model: &PrimitiveModel, p: &Vec3, row: &mut [f64]) -> f64 {
    match model {
        PrimitiveModel::Plane(m) => {
            let (t1, t2) = tangent_basis(&m.normal);
            row[0] = t1.dot(p);
            row[1] = t2.dot(p);
            row[2] = -1.0;
            m.signed_distance(p)
        }
        PrimitiveModel::Sphere(m) => {
            let w = p - m.center;
            let r = w.norm();
            let dir = if r > 1e-12 { w / r } else { Vec3::x() };
            row[0] = -dir.x;
            row[1] = -dir.y;
            row[2] = -dir.z;
            row[3] = -1.0;
            r - m.radius
        }
        PrimitiveModel::Cylinder(m) => {
            let a = m.axis_dir;
            let (t1, t2) = tangent_basis(&a);
            let w = p - m.axis_point;
            let h = w.dot(&a);
            let radial = w - a * h;
            let rho = radial.norm();
            let rhat = if rho > 1e-12 { radial / rho } else { tiebreak_perpendicular(&a) };
            row[0] = -h * rhat.dot(&t1);
            row[1] = -h * rhat.dot(&t2);
            row[2] = -rhat.dot(&t1);
            row[3] = -rhat.dot(&t2);
            row[4] = -1.0;
            rho - m.radius
        }
        PrimitiveModel::Cone(m) => {
            let a = m.axis_dir;
            let (t1, t2) = tangent_basis(&a);
            let (sin, cos) = m.half_angle.sin_cos();
            let w = p - m.apex;
            let h = w.dot(&a);
            let radial = w - a * h;
            let rho = radial.norm();
            let rhat = if rho > 1e-12 { radial / rho } else { tiebreak_perpendicular(&a) };
            let d_apex = a * sin - rhat * cos;
            row[0] = d_apex.x;
            row[1] = d_apex.y;
            row[2] = d_apex.z;
            let lever = -(h * cos + rho * sin);
            row[3] = lever * rhat.dot(&t1);
            row[4] = lever * rhat.dot(&t2);
            row[5] = -rho * sin - h * cos;
            rho * cos - h * sin
        }
    }
}

fn rotate_dir(d: &Vec3, alpha: f64, beta: f64) -> Vec3 {
    let (t1, t2) = tangent_basis(d);
    (d + t1 * alpha + t2 * beta).normalize()
}

fn apply_step(model: &PrimitiveModel, step: &DVector<f64>) -> Option<PrimitiveModel> {
    let s = |i: usize| step[i];
    let out: PrimitiveModel = match model {
        PrimitiveModel::Plane(m) => {
            Plane::new(rotate_dir(&m.normal, s(0), s(1)), m.offset + s(2)).ok()?.into()
        }
        PrimitiveModel::Sphere(m) => {
            Sphere::new(m.center + Vec3::new(s(0), s(1), s(2)), m.radius + s(3)).ok()?.into()
        }
        PrimitiveModel::Cylinder(m) => {
            let (t1, t2) = tangent_basis(&m.axis_dir);
            let dir = rotate_dir(&m.axis_dir, s(0), s(1));
            let point = m.axis_point + t1 * s(2) + t2 * s(3);
            Cylinder::new(point, dir, m.radius + s(4)).ok()?.into()
        }
        PrimitiveModel::Cone(m) => Cone::new(
            m.apex + Vec3::new(s(0), s(1), s(2)),
            rotate_dir(&m.axis_dir, s(3), s(4)),
            m.half_angle + s(5),
        )
        .ok()?
        .into(),
    };
    Some(out)
}

/// Minimises the sum of squared point-to-surface distances starting from
/// `seed`. The returned model never has a larger cost than the seed; on
/// failure the seed itself is returned with a non-converged status.
pub fn refit_least_squares(seed: &PrimitiveModel, points: &[Vec3]) -> RefitOutcome {
    let initial_cost = sum_squared_distance(seed, points);
    let fail = |status, iterations| RefitOutcome {
        model: *seed,
        status,
        iterations,
        initial_cost,
        final_cost: initial_cost,
    };
    let k = param_count(seed);
    if points.len() < k {
        return fail(RefitStatus::RankDeficient, 0);
    }

    let mut current = *seed;
    let mut cost = initial_cost;
    let mut row = vec![0.0; k];
    for iter in 0..MAX_ITERATIONS {
        let mut jtj = DMatrix::<f64>::zeros(k, k);
        let mut jtr = DVector::<f64>::zeros(k);
        for p in points {
            let r = residual_row(&current, p, &mut row);
            for i in 0..k {
                jtr[i] += row[i] * r;
                for j in i..k {
                    jtj[(i, j)] += row[i] * row[j];
                }
            }
        }
        for i in 0..k {
            for j in 0..i {
                jtj[(i, j)] = jtj[(j, i)];
            }
        }
        let eig = jtj.clone().symmetric_eigenvalues();
        let (emax, emin) = (eig.max(), eig.min());
        if !(emax > 0.0) || emin <= RANK_RCOND * emax {
            return fail(RefitStatus::RankDeficient, iter);
        }
        let Some(chol) = jtj.cholesky() else {
            return fail(RefitStatus::RankDeficient, iter);
        };
        let delta = chol.solve(&(-jtr));

        let mut scale = 1.0;
        let mut accepted = None;
        for _ in 0..MAX_HALVINGS {
            let step = &delta * scale;
            if let Some(candidate) = apply_step(&current, &step) {
                let c = sum_squared_distance(&candidate, points);
                if c <= cost {
                    accepted = Some((candidate, c, step.norm()));
                    break;
                }
            }
            scale *= 0.5;
        }
        match accepted {
            Some((candidate, c, step_norm)) => {
                current = candidate;
                cost = c;
                if step_norm < STEP_TOL {
                    return RefitOutcome {
                        model: current,
                        status: RefitStatus::Converged,
                        iterations: iter + 1,
                        initial_cost,
                        final_cost: cost,
                    };
                }
            }
            // no descent along the Gauss-Newton direction: at a minimum
            None => {
                return RefitOutcome {
                    model: current,
                    status: RefitStatus::Converged,
                    iterations: iter + 1,
                    initial_cost,
                    final_cost: cost,
                }
            }
        }
    }
    fail(RefitStatus::NotConverged, MAX_ITERATIONS)
}
