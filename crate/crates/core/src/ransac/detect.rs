use rand::seq::SliceRandom;

use super::components::ComponentScratch;
use super::sampling::LocalSampler;
use super::{is_inlier, Candidate, PointSet, RansacParams};
use crate::geom::{fit_minimal, refit_least_squares, OrientedPoint, PrimitiveClass, PrimitiveModel};
use crate::rng::{rng_from_seed, Rng};

/// Points scored before the rest of the subset, for early rejection.
const PREFIX: usize = 2048;
const SUBSET_MIN: usize = 4096;
const SUBSET_MAX: usize = 16384;
/// Candidates fully scored when one is about to be accepted.
const FINALISTS: usize = 3;
/// Pool size above which the weakest candidates are dropped.
const POOL_CAP: usize = 256;
/// Refit and re-expand cycles for an accepted candidate.
const REFIT_ROUNDS: usize = 4;

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct DetectionStats {
    /// Minimal samples drawn in total.
    pub samples: usize,
    /// Candidates that survived the sample check and entered the pool.
    pub pooled: usize,
    /// Accepted candidates that fell below `min_support` after expansion
    /// and component filtering.
    pub rejected_after_expansion: usize,
    /// Whether the run stopped on `max_candidates_per_round`.
    pub hit_sample_cap: bool,
}

/// Detects primitives of the allowed classes in `set`.
///
/// Returned candidates have disjoint inlier sets, each of at least
/// `min_support` points, in extraction order.
///
/// # Panics
/// On invalid parameters.
pub fn detect_primitives(set: &PointSet, allowed: &[PrimitiveClass], params: &RansacParams) -> Vec<Candidate> {
    detect_with_stats(set, allowed, params).0
}

pub fn detect_with_stats(
    set: &PointSet,
    allowed: &[PrimitiveClass],
    params: &RansacParams,
) -> (Vec<Candidate>, DetectionStats) {
    if let Err(e) = params.validate() {
        panic!("invalid RANSAC parameters: {e}");
    }
    let mut classes: Vec<PrimitiveClass> = allowed.to_vec();
    classes.sort();
    classes.dedup();
    let mut d = Detector::new(set, classes, params);
    d.run();
    (d.found, d.stats)
}

struct PoolEntry {
    model: PrimitiveModel,
    /// Alive subset points that are inliers at `angle_score`.
    hits: Vec<u32>,
    order: u64,
}

struct Detector<'a> {
    set: &'a PointSet,
    classes: Vec<PrimitiveClass>,
    p: &'a RansacParams,
    cos_score: f64,
    cos_expand: f64,
    radius: f64,
    rng: Rng,
    alive: Vec<bool>,
    remaining: Vec<u32>,
    subset: Vec<u32>,
    subset_target: usize,
    pool: Vec<PoolEntry>,
    next_order: u64,
    /// (points alive, samples drawn) per epoch since the last extraction.
    epochs: Vec<(usize, usize)>,
    since_extraction: usize,
    sampler: LocalSampler,
    components: Option<ComponentScratch>,
    found: Vec<Candidate>,
    stats: DetectionStats,
}

impl<'a> Detector<'a> {
    fn new(set: &'a PointSet, classes: Vec<PrimitiveClass>, p: &'a RansacParams) -> Self {
        let remaining: Vec<u32> = (0..set.len() as u32)
            .filter(|&i| {
                let (q, n) = (&set.points[i as usize], &set.normals[i as usize]);
                q.iter().all(|c| c.is_finite()) && n.iter().all(|c| c.is_finite()) && n.norm() > 0.5
            })
            .collect();
        let mut alive = vec![false; set.len()];
        remaining.iter().for_each(|&i| alive[i as usize] = true);
        let radius = (p.sample_radius_fraction * set.reference_diameter()).max(1e-9);
        let sampler = LocalSampler::new(&set.points, &remaining, radius);
        Self {
            set,
            classes,
            p,
            cos_score: p.angle_score.cos(),
            cos_expand: p.angle_expand.cos(),
            radius,
            rng: rng_from_seed(p.seed),
            alive,
            subset: Vec::new(),
            subset_target: 0,
            epochs: vec![(remaining.len(), 0)],
            remaining,
            pool: Vec::new(),
            next_order: 0,
            since_extraction: 0,
            sampler,
            components: set.grid.as_ref().map(ComponentScratch::new),
            found: Vec::new(),
            stats: DetectionStats::default(),
        }
    }

    fn run(&mut self) {
        if self.classes.is_empty() {
            return;
        }
        self.resample_subset();
        let k_max = self.classes.iter().map(|c| c.min_sample_size()).max().unwrap_or(3);
        let k_min = self.classes.iter().map(|c| c.min_sample_size()).min().unwrap_or(3);
        let mut sample = Vec::with_capacity(k_max);
        loop {
            if self.remaining.len() < self.p.min_support {
                return;
            }
            if self.since_extraction >= self.p.max_candidates_per_round {
                self.stats.hit_sample_cap = true;
                // last chance for the best candidate so far
                if self.best_estimate().is_some_and(|(e, _)| e >= self.p.min_support as f64) && self.try_accept() {
                    continue;
                }
                return;
            }
            self.sampler.draw(&mut self.rng, &self.set.points, &self.remaining, k_max, &mut sample);
            self.stats.samples += 1;
            self.since_extraction += 1;
            self.epochs.last_mut().expect("epoch").1 += 1;
            if sample.len() == k_max {
                self.generate(&sample);
            }
            match self.best_estimate() {
                Some((est, k)) if est >= self.p.min_support as f64 => {
                    if self.miss_probability(est, k) <= self.p.p_outlook {
                        self.try_accept();
                    }
                }
                _ => {
                    if self.miss_probability(self.p.min_support as f64, k_min) <= self.p.p_outlook {
                        return;
                    }
                }
            }
        }
    }

    fn generate(&mut self, sample: &[u32]) {
        let oriented: Vec<OrientedPoint> = sample
            .iter()
            .map(|&i| OrientedPoint { position: self.set.points[i as usize], normal: self.set.normals[i as usize] })
            .collect();
        let n = self.remaining.len() as f64;
        let prefix = PREFIX.min(self.subset.len());
        for ci in 0..self.classes.len() {
            let class = self.classes[ci];
            let Ok(model) = fit_minimal(class, &oriented) else { continue };
            let k = class.min_sample_size();
            if !sample[..k].iter().all(|&i| self.inlier(&model, i, self.cos_score)) {
                continue;
            }
            // prefix count with a generous upper confidence bound
            let mut hits = Vec::new();
            for &i in &self.subset[..prefix] {
                if self.inlier(&model, i, self.cos_score) {
                    hits.push(i);
                }
            }
            let c = hits.len() as f64;
            let upper = (c + 3.0 * c.sqrt() + 3.0) * n / prefix.max(1) as f64;
            if upper < self.p.min_support as f64 / 2.0 {
                continue;
            }
            for &i in &self.subset[prefix..] {
                if self.inlier(&model, i, self.cos_score) {
                    hits.push(i);
                }
            }
            if self.estimate(hits.len()) < self.p.min_support as f64 / 2.0 {
                continue;
            }
            self.pool.push(PoolEntry { model, hits, order: self.next_order });
            self.next_order += 1;
            self.stats.pooled += 1;
        }
        if self.pool.len() > POOL_CAP {
            self.sort_pool();
            self.pool.truncate(POOL_CAP / 2);
        }
    }

    #[inline]
    fn inlier(&self, model: &PrimitiveModel, i: u32, cos: f64) -> bool {
        is_inlier(model, self.set, i as usize, self.p.inlier_dist, cos)
    }

    fn estimate(&self, subset_hits: usize) -> f64 {
        if self.subset.is_empty() {
            return 0.0;
        }
        subset_hits as f64 * self.remaining.len() as f64 / self.subset.len() as f64
    }

    /// Best first: subset count, class priority, insertion order.
    fn sort_pool(&mut self) {
        self.pool.sort_by(|a, b| {
            b.hits.len().cmp(&a.hits.len()).then(a.model.class().cmp(&b.model.class())).then(a.order.cmp(&b.order))
        });
    }

    /// Estimated size and minimal sample size of the best pool entry.
    fn best_estimate(&self) -> Option<(f64, usize)> {
        self.pool
            .iter()
            .min_by(|a, b| {
                b.hits.len().cmp(&a.hits.len()).then(a.model.class().cmp(&b.model.class())).then(a.order.cmp(&b.order))
            })
            .map(|e| (self.estimate(e.hits.len()), e.model.class().min_sample_size()))
    }

    /// Probability that every minimal sample of size `k` drawn since the
    /// last extraction missed a shape of `size` points.
    fn miss_probability(&self, size: f64, k: usize) -> f64 {
        let mut log_p = 0.0;
        for &(n, s) in &self.epochs {
            let frac = (size / n as f64).min(1.0).powi(k as i32);
            if frac >= 1.0 && s > 0 {
                return 0.0;
            }
            log_p += s as f64 * (-frac).ln_1p();
        }
        log_p.exp()
    }

    /// Full scoring, expansion, component filter and refit of the best pool
    /// entries. Returns whether a primitive was extracted.
    fn try_accept(&mut self) -> bool {
        self.sort_pool();
        let finalists = self.pool.len().min(FINALISTS);
        let mut best: Option<(usize, usize)> = None;
        for f in 0..finalists {
            let model = self.pool[f].model;
            let count = self.remaining.iter().filter(|&&i| self.inlier(&model, i, self.cos_score)).count();
            if best.is_none_or(|(_, c)| count > c) {
                best = Some((f, count));
            }
        }
        let Some((idx, _)) = best else { return false };
        let seed_model = self.pool[idx].model;
        let mut model = seed_model;
        let mut inliers = self.connected(self.expand(&model));
        for _ in 0..if self.p.refit { REFIT_ROUNDS } else { 0 } {
            if inliers.len() < self.p.min_support {
                break;
            }
            let pts: Vec<_> = inliers.iter().map(|&i| self.set.points[i as usize]).collect();
            let out = refit_least_squares(&model, &pts);
            if out.model == model || !out.model.is_valid() || out.model.class() != model.class() {
                break;
            }
            let again = self.connected(self.expand(&out.model));
            if again.len() < inliers.len() {
                break;
            }
            model = out.model;
            inliers = again;
        }
        if inliers.len() < self.p.min_support {
            self.pool.remove(idx);
            self.stats.rejected_after_expansion += 1;
            return false;
        }
        self.extract(Candidate { model, score: inliers.len(), inliers });
        true
    }

    fn expand(&self, model: &PrimitiveModel) -> Vec<u32> {
        self.remaining.iter().copied().filter(|&i| self.inlier(model, i, self.cos_expand)).collect()
    }

    fn connected(&mut self, members: Vec<u32>) -> Vec<u32> {
        match (&mut self.components, &self.set.grid) {
            (Some(scratch), Some(grid)) => scratch.largest(grid, &members),
            _ => members,
        }
    }

    fn extract(&mut self, c: Candidate) {
        for &i in &c.inliers {
            self.alive[i as usize] = false;
        }
        let alive = &self.alive;
        self.remaining.retain(|&i| alive[i as usize]);
        self.subset.retain(|&i| alive[i as usize]);
        for e in &mut self.pool {
            e.hits.retain(|&i| alive[i as usize]);
        }
        self.found.push(c);
        self.epochs = vec![(self.remaining.len(), 0)];
        self.since_extraction = 0;
        self.sampler = LocalSampler::new(&self.set.points, &self.remaining, self.radius);
        if self.subset.len() < self.subset_target / 2 {
            self.resample_subset();
        }
        let half = self.p.min_support as f64 / 2.0;
        let keep: Vec<bool> = self.pool.iter().map(|e| self.estimate(e.hits.len()) >= half).collect();
        let mut it = keep.iter();
        self.pool.retain(|_| *it.next().expect("flag"));
    }

    /// Draws a fresh random subset of the remaining points and rescores the
    /// pool on it.
    fn resample_subset(&mut self) {
        let n = self.remaining.len();
        self.subset_target = n.min((n / 8).clamp(SUBSET_MIN, SUBSET_MAX));
        let mut s = self.remaining.clone();
        s.shuffle(&mut self.rng);
        s.truncate(self.subset_target);
        self.subset = s;
        for idx in 0..self.pool.len() {
            let model = self.pool[idx].model;
            let hits: Vec<u32> = self.subset.iter().copied().filter(|&i| self.inlier(&model, i, self.cos_score)).collect();
            self.pool[idx].hits = hits;
        }
    }
}
