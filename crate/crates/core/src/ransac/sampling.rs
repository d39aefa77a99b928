use std::collections::HashMap;

use rand::Rng as _;

use crate::rng::Rng;
use crate::Vec3;

/// Tries per follower before falling back to a uniform draw.
const LOCAL_TRIES: usize = 10;

type Cell = (i64, i64, i64);

/// Uniform voxel hash over the remaining points, used to draw followers
/// from a ball around the first sample point.
pub(crate) struct LocalSampler {
    radius: f64,
    cells: HashMap<Cell, Vec<u32>>,
}

impl LocalSampler {
    pub(crate) fn new(points: &[Vec3], remaining: &[u32], radius: f64) -> Self {
        let mut cells: HashMap<Cell, Vec<u32>> = HashMap::new();
        for &i in remaining {
            cells.entry(cell_of(&points[i as usize], radius)).or_default().push(i);
        }
        Self { radius, cells }
    }

    /// Draws `k` distinct point indices: the first uniformly from
    /// `remaining`, the others within `radius` of it when possible.
    pub(crate) fn draw(&self, rng: &mut Rng, points: &[Vec3], remaining: &[u32], k: usize, out: &mut Vec<u32>) {
        out.clear();
        if remaining.is_empty() {
            return;
        }
        let first = remaining[rng.random_range(0..remaining.len())];
        out.push(first);
        let centre = points[first as usize];
        let c = cell_of(&centre, self.radius);
        let near: Vec<&Vec<u32>> = (-1..=1)
            .flat_map(|dx| (-1..=1).flat_map(move |dy| (-1..=1).map(move |dz| (c.0 + dx, c.1 + dy, c.2 + dz))))
            .filter_map(|cell| self.cells.get(&cell))
            .collect();
        let total: usize = near.iter().map(|l| l.len()).sum();
        let r2 = self.radius * self.radius;
        while out.len() < k.min(remaining.len()) {
            let mut picked = None;
            for _ in 0..LOCAL_TRIES {
                // uniform over the points of the 27 surrounding cells
                let mut j = rng.random_range(0..total);
                let list = near.iter().find(|l| {
                    if j < l.len() {
                        true
                    } else {
                        j -= l.len();
                        false
                    }
                });
                let q = list.expect("index within total")[j];
                if !out.contains(&q) && (points[q as usize] - centre).norm_squared() <= r2 {
                    picked = Some(q);
                    break;
                }
            }
            let q = match picked {
                Some(q) => q,
                None => loop {
                    let q = remaining[rng.random_range(0..remaining.len())];
                    if !out.contains(&q) {
                        break q;
                    }
                },
            };
            out.push(q);
        }
    }
}

fn cell_of(p: &Vec3, size: f64) -> Cell {
    ((p.x / size).floor() as i64, (p.y / size).floor() as i64, (p.z / size).floor() as i64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::rng_from_seed;

    #[test]
    fn followers_stay_local_when_dense() {
        let pts: Vec<Vec3> = (0..100).flat_map(|i| (0..100).map(move |j| Vec3::new(i as f64 * 0.01, j as f64 * 0.01, 0.0))).collect();
        let rem: Vec<u32> = (0..pts.len() as u32).collect();
        let s = LocalSampler::new(&pts, &rem, 0.05);
        let mut rng = rng_from_seed(1);
        let mut out = Vec::new();
        let mut local = 0;
        for _ in 0..200 {
            s.draw(&mut rng, &pts, &rem, 3, &mut out);
            assert_eq!(out.len(), 3);
            assert!(out[0] != out[1] && out[1] != out[2] && out[0] != out[2]);
            for &q in &out[1..] {
                local += ((pts[q as usize] - pts[out[0] as usize]).norm() <= 0.05 + 1e-12) as usize;
            }
        }
        // uniform fallback is rare on a dense grid
        assert!(local >= 390, "{local}");
    }

    #[test]
    fn isolated_point_falls_back_to_uniform() {
        let pts = vec![Vec3::zeros(), Vec3::new(5.0, 0.0, 0.0), Vec3::new(9.0, 0.0, 0.0)];
        let rem = vec![0, 1, 2];
        let s = LocalSampler::new(&pts, &rem, 0.1);
        let mut out = Vec::new();
        s.draw(&mut rng_from_seed(3), &pts, &rem, 3, &mut out);
        let mut sorted = out.clone();
        sorted.sort();
        assert_eq!(sorted, vec![0, 1, 2]);
    }
}
