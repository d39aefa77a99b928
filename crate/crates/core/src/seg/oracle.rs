use rand::Rng as _;

use crate::range_image::{BagsCell, BagsLabel, BagsLabelMap};
use crate::rng::rng_from_seed;

use super::maps::ProbabilityMaps;

/// Knobs that degrade ground truth into imperfect probability maps.
#[derive(Debug, Clone, PartialEq)]
pub struct CorruptionConfig {
    /// Probability that a labelled pixel switches to a different, uniformly
    /// chosen label.
    pub flip_rate: f64,
    /// Standard deviation in pixels of the Gaussian smoothing; 0 disables it.
    pub blur_radius: f64,
    /// Grows (positive) or shrinks (negative) the boundary class by this many
    /// pixels before anything else.
    pub boundary_erode_dilate: i32,
    /// Sharpening (< 1) or softening (> 1) through `Y ↦ Y^(1/T)`.
    pub temperature: f64,
    /// Renormalise every pixel to a unit sum.
    pub multinomial: bool,
    pub seed: u64,
}

impl Default for CorruptionConfig {
    fn default() -> Self {
        Self { flip_rate: 0.0, blur_radius: 0.0, boundary_erode_dilate: 0, temperature: 1.0, multinomial: true, seed: 0 }
    }
}

impl CorruptionConfig {
    pub fn validate(&self) -> Result<(), String> {
        if !(0.0..=1.0).contains(&self.flip_rate) {
            return Err(format!("flip_rate {} outside [0, 1]", self.flip_rate));
        }
        if !(self.blur_radius >= 0.0 && self.blur_radius.is_finite()) {
            return Err("blur_radius must be a finite non-negative number".into());
        }
        if !(self.temperature > 0.0 && self.temperature.is_finite()) {
            return Err("temperature must be positive".into());
        }
        Ok(())
    }
}

/// Probability maps derived from ground truth. Steps, in order: boundary
/// grow/shrink, label flips, one-hot encoding, Gaussian smoothing over
/// observed pixels, temperature, renormalisation.
///
/// # Panics
/// On an invalid `corruption` (see [`CorruptionConfig::validate`]).
pub fn oracle_probability_maps(gt: &BagsLabelMap, corruption: &CorruptionConfig) -> ProbabilityMaps {
    corruption.validate().expect("valid corruption config");
    let mut labels = gt.clone();
    if corruption.boundary_erode_dilate != 0 {
        if let Some(b) = gt.scheme.index_of(BagsLabel::Boundary) {
            labels = reshape_boundary(&labels, b as u8, corruption.boundary_erode_dilate);
        }
    }
    let k = gt.scheme.num_classes();
    if corruption.flip_rate > 0.0 && k > 1 {
        let mut rng = rng_from_seed(corruption.seed);
        for cell in labels.cells.iter_mut() {
            if let BagsCell::Label(l) = cell {
                if rng.random_bool(corruption.flip_rate) {
                    let other = rng.random_range(0..k as u8 - 1);
                    *l = if other >= *l { other + 1 } else { other };
                }
            }
        }
    }
    let mut maps = ProbabilityMaps::one_hot(&labels);
    maps.multinomial = corruption.multinomial;
    if corruption.blur_radius > 0.0 {
        let observed: Vec<bool> = labels.cells.iter().map(|c| *c != BagsCell::Invalid).collect();
        for plane in maps.planes.iter_mut() {
            *plane = gaussian_blur(plane, &observed, gt.width, gt.height, corruption.blur_radius);
        }
    }
    if corruption.temperature != 1.0 {
        let e = 1.0 / corruption.temperature;
        for y in maps.planes.iter_mut().flatten() {
            *y = (*y as f64).powf(e) as f32;
        }
    }
    if corruption.multinomial {
        for i in 0..maps.len() {
            let sum: f64 = maps.pixel(i).map(f64::from).sum();
            if sum > 0.0 {
                for p in maps.planes.iter_mut() {
                    p[i] = (p[i] as f64 / sum) as f32;
                }
            }
        }
    }
    maps
}

/// Dilation marks every labelled pixel within `r` (Chebyshev) of a boundary
/// pixel as boundary. Erosion hands boundary pixels within `r` of a
/// non-boundary label to the most frequent such label in that window.
fn reshape_boundary(gt: &BagsLabelMap, boundary: u8, r: i32) -> BagsLabelMap {
    let (w, h) = (gt.width as i64, gt.height as i64);
    let rad = r.unsigned_abs() as i64;
    let mut out = gt.clone();
    let k = gt.scheme.num_classes();
    for y in 0..h {
        for x in 0..w {
            let i = (y * w + x) as usize;
            let BagsCell::Label(own) = gt.cells[i] else { continue };
            if r > 0 && own == boundary {
                continue;
            }
            if r < 0 && own != boundary {
                continue;
            }
            let mut votes = vec![0usize; k];
            let mut near_boundary = false;
            for yy in (y - rad).max(0)..=(y + rad).min(h - 1) {
                for xx in (x - rad).max(0)..=(x + rad).min(w - 1) {
                    if let BagsCell::Label(l) = gt.cells[(yy * w + xx) as usize] {
                        if l == boundary {
                            near_boundary = true;
                        } else {
                            votes[l as usize] += 1;
                        }
                    }
                }
            }
            if r > 0 && near_boundary {
                out.cells[i] = BagsCell::Label(boundary);
            }
            if r < 0 {
                // ties go to the lowest index
                let (best, n) = votes.iter().enumerate().fold((0, 0), |acc, (l, &n)| if n > acc.1 { (l, n) } else { acc });
                if n > 0 {
                    out.cells[i] = BagsCell::Label(best as u8);
                }
            }
        }
    }
    out
}

/// Separable Gaussian smoothing that averages over observed pixels only.
fn gaussian_blur(plane: &[f32], observed: &[bool], w: usize, h: usize, sigma: f64) -> Vec<f32> {
    let rad = (3.0 * sigma).ceil() as i64;
    let kernel: Vec<f64> = (-rad..=rad).map(|d| (-(d * d) as f64 / (2.0 * sigma * sigma)).exp()).collect();
    let mask: Vec<f64> = observed.iter().map(|&o| o as u8 as f64).collect();
    let values: Vec<f64> = plane.iter().zip(&mask).map(|(&v, m)| v as f64 * m).collect();
    let pass = |src: &[f64], horizontal: bool| -> Vec<f64> {
        let mut dst = vec![0.0; src.len()];
        for y in 0..h as i64 {
            for x in 0..w as i64 {
                let mut acc = 0.0;
                for (j, kv) in kernel.iter().enumerate() {
                    let d = j as i64 - rad;
                    let (xx, yy) = if horizontal { (x + d, y) } else { (x, y + d) };
                    if xx >= 0 && yy >= 0 && xx < w as i64 && yy < h as i64 {
                        acc += kv * src[(yy * w as i64 + xx) as usize];
                    }
                }
                dst[(y * w as i64 + x) as usize] = acc;
            }
        }
        dst
    };
    let num = pass(&pass(&values, true), false);
    let den = pass(&pass(&mask, true), false);
    (0..plane.len())
        .map(|i| if observed[i] && den[i] > 0.0 { (num[i] / den[i]).clamp(0.0, 1.0) as f32 } else { 0.0 })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::range_image::LabelScheme;

    fn striped(w: usize, h: usize, scheme: LabelScheme) -> BagsLabelMap {
        let k = scheme.num_classes();
        let cells = (0..w * h).map(|i| BagsCell::Label(((i % w) * k / w) as u8)).collect();
        BagsLabelMap { scheme, width: w, height: h, cells }
    }

    #[test]
    fn zero_corruption_is_one_hot() {
        let gt = striped(12, 4, LabelScheme::K6);
        let maps = oracle_probability_maps(&gt, &CorruptionConfig::default());
        assert_eq!(maps, ProbabilityMaps::one_hot(&gt));
    }

    #[test]
    fn blur_keeps_unit_sums_and_skips_invalid() {
        let mut gt = striped(20, 10, LabelScheme::K5Boundary);
        gt.cells[0] = BagsCell::Invalid;
        let c = CorruptionConfig { blur_radius: 1.5, ..Default::default() };
        let maps = oracle_probability_maps(&gt, &c);
        maps.validate().unwrap();
        assert!(!maps.is_observed(0));
        assert!(maps.planes[0][1] < 1.0);
    }

    #[test]
    fn boundary_dilation_and_erosion() {
        let scheme = LabelScheme::K5Boundary;
        let mut gt = BagsLabelMap { scheme, width: 9, height: 1, cells: vec![BagsCell::Label(0); 9] };
        gt.cells[4] = BagsCell::Label(4);
        let grown = reshape_boundary(&gt, 4, 2);
        let n = grown.cells.iter().filter(|c| **c == BagsCell::Label(4)).count();
        assert_eq!(n, 5);
        let shrunk = reshape_boundary(&grown, 4, -1);
        let n = shrunk.cells.iter().filter(|c| **c == BagsCell::Label(4)).count();
        assert_eq!(n, 3);
    }
}
