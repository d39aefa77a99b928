use std::collections::{BTreeMap, HashMap, HashSet};

use super::report::{ClassCounts, DetectionReport};
use super::EvalError;
use crate::geom::{PrimitiveClass, PrimitiveModel};
use crate::range_image::{LabelMap, RangeImage};
use crate::ransac::Candidate;
use crate::scene::SceneDescription;
use crate::Vec3;

/// Which points of a true instance the fitting error is measured on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FitErrorSource {
    /// The noisy scanned points.
    #[default]
    Observed,
    /// Noise-free points: each pixel ray re-intersected with the true shape.
    Clean,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalOptions {
    /// A prediction matches an instance only above this IoT.
    pub iot_threshold: f64,
    pub max_matches_per_instance: usize,
    /// Visible primitive instances smaller than this are not counted as
    /// true instances.
    pub min_instance_pixels: usize,
    pub fit_error_source: FitErrorSource,
}

impl Default for EvalOptions {
    fn default() -> Self {
        Self { iot_threshold: 0.3, max_matches_per_instance: 3, min_instance_pixels: 1, fit_error_source: FitErrorSource::Observed }
    }
}

/// A prediction paired with the true instance it explains.
#[derive(Debug, Clone, PartialEq)]
pub struct Match {
    /// Index into the prediction list.
    pub prediction: usize,
    pub instance: u32,
    pub class: PrimitiveClass,
    pub iot: f64,
    /// Metres.
    pub fit_error: f64,
    /// Smallest fitting error among the matches of this instance.
    pub best: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScanEvaluation {
    pub matches: Vec<Match>,
    pub report: DetectionReport,
}

/// Fraction of `instance` covered by the prediction's inliers.
pub fn iot(prediction: &Candidate, instance: &[u32]) -> Result<f64, EvalError> {
    let truth: HashSet<u32> = instance.iter().copied().collect();
    if truth.is_empty() {
        return Err(EvalError::EmptyInstance);
    }
    let mut seen = HashSet::new();
    let hits = prediction.inliers.iter().filter(|i| truth.contains(i) && seen.insert(**i)).count();
    Ok(hits as f64 / truth.len() as f64)
}

/// Mean distance from `points` to `model`.
pub fn fitting_error(points: &[Vec3], model: &PrimitiveModel) -> Result<f64, EvalError> {
    if points.is_empty() {
        return Err(EvalError::EmptyInstance);
    }
    Ok(points.iter().map(|p| model.distance(p)).sum::<f64>() / points.len() as f64)
}

/// World points of an instance's pixels, observed or re-traced without noise.
pub fn instance_points(img: &RangeImage, scene: &SceneDescription, id: u32, pixels: &[u32], source: FitErrorSource) -> Vec<Vec3> {
    let shape = scene.instance(id).map(|i| &i.shape);
    let origin = img.camera_pose.translation.vector;
    pixels
        .iter()
        .filter_map(|&px| {
            let p = img.world_point(px as usize)?;
            if source == FitErrorSource::Observed {
                return Some(p);
            }
            let (u, v) = ((px as usize % img.width) as f64, (px as usize / img.width) as f64);
            let dir = (img.camera_pose.rotation * img.intrinsics.ray(u, v)).normalize();
            Some(shape.and_then(|s| s.intersect(&origin, &dir, 0.0)).map_or(p, |t| origin + dir * t))
        })
        .collect()
}

struct Truth {
    class: PrimitiveClass,
    size: usize,
    points: Vec<Vec3>,
}

/// Matches predictions of one scan against its ground truth and counts.
///
/// A prediction goes to the same-class instance of highest IoT above the
/// threshold (ties: smaller fitting error, then lower id). An instance keeps
/// at most `max_matches_per_instance` matches, preferring higher IoT.
pub fn match_detections(
    preds: &[Candidate],
    img: &RangeImage,
    labels: &LabelMap,
    scene: &SceneDescription,
    opts: &EvalOptions,
) -> Result<ScanEvaluation, EvalError> {
    if labels.width != img.width || labels.height != img.height {
        return Err(EvalError::SizeMismatch);
    }
    let mut truths: BTreeMap<u32, Truth> = BTreeMap::new();
    for (id, pixels) in labels.instance_pixels() {
        let Some(class) = labels.class[pixels[0] as usize].primitive() else { continue };
        if pixels.len() < opts.min_instance_pixels.max(1) {
            continue;
        }
        let points = instance_points(img, scene, id, &pixels, opts.fit_error_source);
        truths.insert(id, Truth { class, size: pixels.len(), points });
    }

    let mut proposed: Vec<Match> = Vec::new();
    for (j, pred) in preds.iter().enumerate() {
        let class = pred.model.class();
        let mut tally: HashMap<u32, usize> = HashMap::new();
        let mut seen = HashSet::new();
        for &px in &pred.inliers {
            let Some(&id) = labels.instance.get(px as usize) else { return Err(EvalError::SizeMismatch) };
            if id > 0 && seen.insert(px) {
                *tally.entry(id).or_default() += 1;
            }
        }
        let mut best: Option<Match> = None;
        let mut ids: Vec<_> = tally.into_iter().collect();
        ids.sort_unstable();
        for (id, hits) in ids {
            let Some(t) = truths.get(&id) else { continue };
            let value = hits as f64 / t.size as f64;
            if t.class != class || value <= opts.iot_threshold {
                continue;
            }
            let err = fitting_error(&t.points, &pred.model).unwrap_or(f64::INFINITY);
            let better = best.as_ref().is_none_or(|b| value > b.iot || (value == b.iot && err < b.fit_error));
            if better {
                best = Some(Match { prediction: j, instance: id, class, iot: value, fit_error: err, best: false });
            }
        }
        proposed.extend(best);
    }

    // cap per instance, then pick each instance's best match
    let mut by_instance: BTreeMap<u32, Vec<Match>> = BTreeMap::new();
    for m in proposed {
        by_instance.entry(m.instance).or_default().push(m);
    }
    let mut matches = Vec::new();
    for (_, mut ms) in by_instance {
        ms.sort_by(|a, b| b.iot.total_cmp(&a.iot).then(a.fit_error.total_cmp(&b.fit_error)).then(a.prediction.cmp(&b.prediction)));
        ms.truncate(opts.max_matches_per_instance);
        let b = (0..ms.len())
            .min_by(|&x, &y| ms[x].fit_error.total_cmp(&ms[y].fit_error).then(ms[x].prediction.cmp(&ms[y].prediction)))
            .expect("non-empty group");
        ms[b].best = true;
        matches.extend(ms);
    }
    matches.sort_by_key(|m| m.prediction);

    let mut report = DetectionReport::default();
    for p in preds {
        report.class_mut(p.model.class()).n_p += 1;
    }
    for t in truths.values() {
        report.class_mut(t.class).n_t += 1;
    }
    for m in &matches {
        let c: &mut ClassCounts = report.class_mut(m.class);
        c.n_p2t += 1;
        c.add_matched_error(m.fit_error);
        if m.best {
            c.n_t2p += 1;
            c.add_best_error(m.fit_error);
        }
    }
    Ok(ScanEvaluation { matches, report })
}
