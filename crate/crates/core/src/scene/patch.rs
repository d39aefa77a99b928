//! Bicubic Bézier height-field patches, the freeform "other" surfaces.
//!
//! The 4×4 control grid is evenly spaced over a `size_u × size_v` rectangle
//! and displaced only along the patch normal, so the surface is
//!
//! ```text
//! S(s, t) = origin + s·size_u·u + t·size_v·v + H(s, t)·n,   s, t ∈ [0, 1]
//! ```
//!
//! with `H` the Bernstein blend of the control heights. Rays are intersected
//! by subdividing the parameter interval where the ray crosses the convex
//! hull slab, bracketing the first sign change of `z(τ) − H(s(τ), t(τ))` and
//! refining with safeguarded Newton steps.

use crate::Vec3;

const MARCH_STEPS: usize = 96;
const REFINE_ITERS: usize = 60;

#[derive(Debug, Clone, PartialEq)]
pub struct BezierPatch {
    pub origin: Vec3,
    /// Unit in-plane axes; the patch normal is `u × v`.
    pub u_axis: Vec3,
    pub v_axis: Vec3,
    pub size_u: f64,
    pub size_v: f64,
    /// Control heights, `heights[i][j]` at `s = i/3, t = j/3`.
    pub heights: [[f64; 4]; 4],
}

fn bernstein(x: f64) -> [f64; 4] {
    let y = 1.0 - x;
    [y * y * y, 3.0 * x * y * y, 3.0 * x * x * y, x * x * x]
}

fn bernstein_deriv(x: f64) -> [f64; 4] {
    let y = 1.0 - x;
    [-3.0 * y * y, 3.0 * y * y - 6.0 * x * y, 6.0 * x * y - 3.0 * x * x, 3.0 * x * x]
}

impl BezierPatch {
    pub fn normal(&self) -> Vec3 {
        self.u_axis.cross(&self.v_axis)
    }

    pub fn height(&self, s: f64, t: f64) -> f64 {
        let (bs, bt) = (bernstein(s), bernstein(t));
        let mut h = 0.0;
        for i in 0..4 {
            for j in 0..4 {
                h += bs[i] * bt[j] * self.heights[i][j];
            }
        }
        h
    }

    fn height_grad(&self, s: f64, t: f64) -> (f64, f64) {
        let (bs, bt) = (bernstein(s), bernstein(t));
        let (ds, dt) = (bernstein_deriv(s), bernstein_deriv(t));
        let (mut gs, mut gt) = (0.0, 0.0);
        for i in 0..4 {
            for j in 0..4 {
                gs += ds[i] * bt[j] * self.heights[i][j];
                gt += bs[i] * dt[j] * self.heights[i][j];
            }
        }
        (gs, gt)
    }

    pub fn point(&self, s: f64, t: f64) -> Vec3 {
        self.origin + self.u_axis * (s * self.size_u) + self.v_axis * (t * self.size_v) + self.normal() * self.height(s, t)
    }

    pub fn height_range(&self) -> (f64, f64) {
        let flat = self.heights.iter().flatten();
        let lo = flat.clone().copied().fold(f64::INFINITY, f64::min);
        let hi = flat.copied().fold(f64::NEG_INFINITY, f64::max);
        (lo, hi)
    }

    /// Corners of the convex-hull box.
    pub fn hull_corners(&self) -> [Vec3; 8] {
        let (lo, hi) = self.height_range();
        let n = self.normal();
        let mut out = [Vec3::zeros(); 8];
        let mut k = 0;
        for s in [0.0, 1.0] {
            for t in [0.0, 1.0] {
                for z in [lo, hi] {
                    out[k] = self.origin + self.u_axis * (s * self.size_u) + self.v_axis * (t * self.size_v) + n * z;
                    k += 1;
                }
            }
        }
        out
    }

    /// Nearest ray parameter `t > t_min` where the unit-direction ray hits
    /// the patch.
    pub fn intersect(&self, origin: &Vec3, dir: &Vec3, t_min: f64) -> Option<f64> {
        let n = self.normal();
        let rel = origin - self.origin;
        // local coordinates along the ray: x(τ) = x0 + τ·dx etc.
        let (x0, dx) = (rel.dot(&self.u_axis) / self.size_u, dir.dot(&self.u_axis) / self.size_u);
        let (y0, dy) = (rel.dot(&self.v_axis) / self.size_v, dir.dot(&self.v_axis) / self.size_v);
        let (z0, dz) = (rel.dot(&n), dir.dot(&n));
        let (hlo, hhi) = self.height_range();

        let mut lo = t_min;
        let mut hi = f64::INFINITY;
        for (a, da, min, max) in [(x0, dx, 0.0, 1.0), (y0, dy, 0.0, 1.0), (z0, dz, hlo, hhi)] {
            if da.abs() < 1e-15 {
                if a < min || a > max {
                    return None;
                }
                continue;
            }
            let (t0, t1) = ((min - a) / da, (max - a) / da);
            lo = lo.max(t0.min(t1));
            hi = hi.min(t0.max(t1));
        }
        if !(hi >= lo) || !hi.is_finite() {
            return None;
        }

        let f = |tau: f64| {
            let s = (x0 + tau * dx).clamp(0.0, 1.0);
            let t = (y0 + tau * dy).clamp(0.0, 1.0);
            z0 + tau * dz - self.height(s, t)
        };
        let step = (hi - lo) / MARCH_STEPS as f64;
        let mut a = lo;
        let mut fa = f(a);
        if fa == 0.0 && a > t_min {
            return Some(a);
        }
        for k in 1..=MARCH_STEPS {
            let b = if k == MARCH_STEPS { hi } else { lo + step * k as f64 };
            let fb = f(b);
            if fa == 0.0 || fa.signum() != fb.signum() {
                return Some(self.refine_root(a, b, fa, &f, x0, dx, y0, dy, dz));
            }
            a = b;
            fa = fb;
        }
        None
    }

    #[allow(clippy::too_many_arguments)]
    fn refine_root(
        &self,
        mut a: f64,
        mut b: f64,
        mut fa: f64,
        f: &impl Fn(f64) -> f64,
        x0: f64,
        dx: f64,
        y0: f64,
        dy: f64,
        dz: f64,
    ) -> f64 {
        let mut x = 0.5 * (a + b);
        for _ in 0..REFINE_ITERS {
            let fx = f(x);
            if fx == 0.0 {
                return x;
            }
            if fx.signum() == fa.signum() {
                a = x;
                fa = fx;
            } else {
                b = x;
            }
            let (s, t) = ((x0 + x * dx).clamp(0.0, 1.0), (y0 + x * dy).clamp(0.0, 1.0));
            let (gs, gt) = self.height_grad(s, t);
            let deriv = dz - gs * dx - gt * dy;
            let newton = x - fx / deriv;
            x = if deriv != 0.0 && newton > a && newton < b { newton } else { 0.5 * (a + b) };
            if (b - a).abs() < 1e-13 {
                break;
            }
        }
        x
    }
}
