use nalgebra::{Matrix3, SymmetricEigen};

use crate::Vec3;

use super::PointMap;

const MIN_NEIGHBORS: usize = 3;
/// Ratio of the middle to the largest covariance eigenvalue below which the
/// neighbourhood counts as collinear.
const MIN_RANK2_RATIO: f64 = 1e-10;

/// Per-pixel unit normals, `None` where no normal could be estimated.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalMap {
    pub width: usize,
    pub height: usize,
    pub normals: Vec<Option<Vec3>>,
}

impl NormalMap {
    pub fn valid_count(&self) -> usize {
        self.normals.iter().filter(|n| n.is_some()).count()
    }
}

/// PCA normals over a square `window` of valid neighbours (truncated at the
/// image border), oriented towards the camera so that `n · p < 0`.
///
/// # Panics
/// If `window` is even or smaller than 3.
pub fn estimate_normals(points: &PointMap, window: usize) -> NormalMap {
    assert!(window >= 3 && window % 2 == 1, "window must be odd and >= 3");
    let (w, h) = (points.width, points.height);
    let half = (window / 2) as isize;
    let mut normals = vec![None; w * h];
    let mut neighbors: Vec<Vec3> = Vec::with_capacity(window * window);
    for v in 0..h {
        for u in 0..w {
            let Some(center) = points.points[v * w + u] else { continue };
            neighbors.clear();
            for dv in -half..=half {
                let y = v as isize + dv;
                if y < 0 || y >= h as isize {
                    continue;
                }
                for du in -half..=half {
                    let x = u as isize + du;
                    if x < 0 || x >= w as isize {
                        continue;
                    }
                    if let Some(p) = points.points[y as usize * w + x as usize] {
                        neighbors.push(p);
                    }
                }
            }
            normals[v * w + u] = pca_normal(&neighbors).map(|n| if n.dot(&center) > 0.0 { -n } else { n });
        }
    }
    NormalMap { width: w, height: h, normals }
}

/// Eigenvector of the smallest covariance eigenvalue.
pub(crate) fn pca_normal(neighbors: &[Vec3]) -> Option<Vec3> {
    if neighbors.len() < MIN_NEIGHBORS {
        return None;
    }
    let n = neighbors.len() as f64;
    let mean = neighbors.iter().sum::<Vec3>() / n;
    let mut cov = Matrix3::zeros();
    for p in neighbors {
        let d = p - mean;
        cov += d * d.transpose();
    }
    cov /= n;
    let eig = SymmetricEigen::new(cov);
    let mut order = [0usize, 1, 2];
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let (lo, mid, hi) = (order[0], order[1], order[2]);
    let largest = eig.eigenvalues[hi];
    if !(largest > 0.0) || eig.eigenvalues[mid] <= MIN_RANK2_RATIO * largest {
        return None;
    }
    let normal = eig.eigenvectors.column(lo).into_owned();
    let len = normal.norm();
    (len > 0.0).then(|| normal / len)
}

#[cfg(test)]
mod tests {
    use approx::assert_abs_diff_eq;

    use super::*;

    #[test]
    fn frontal_plane_normals_face_camera() {
        let (w, h) = (9, 7);
        let points = (0..w * h)
            .map(|i| Some(Vec3::new((i % w) as f64 * 0.01 - 0.04, (i / w) as f64 * 0.01 - 0.03, 2.0)))
            .collect();
        let nm = estimate_normals(&PointMap { width: w, height: h, points }, 5);
        for n in &nm.normals {
            assert_abs_diff_eq!(n.unwrap(), -Vec3::z(), epsilon = 1e-6);
        }
    }

    #[test]
    fn isolated_pixel_is_invalid() {
        let (w, h) = (7, 7);
        let mut points = vec![None; w * h];
        points[3 * w + 3] = Some(Vec3::new(0.0, 0.0, 1.0));
        let nm = estimate_normals(&PointMap { width: w, height: h, points }, 5);
        assert_eq!(nm.valid_count(), 0);
    }

    #[test]
    fn collinear_neighbourhood_is_invalid() {
        let (w, h) = (5, 5);
        let mut points = vec![None; w * h];
        for u in 0..w {
            points[2 * w + u] = Some(Vec3::new(u as f64 * 0.01, 0.0, 1.0));
        }
        let nm = estimate_normals(&PointMap { width: w, height: h, points }, 5);
        assert_eq!(nm.valid_count(), 0);
    }
}
