use thiserror::Error;

use crate::range_image::{BagsCell, BagsLabelMap, LabelScheme};

use super::maps::{ProbabilityMaps, Segmentation};

/// Clamp applied to probabilities inside the logarithms of the loss.
pub const LOSS_EPS: f64 = 1e-7;

#[derive(Debug, Error, PartialEq)]
pub enum SegError {
    #[error("label scheme mismatch: {left} vs {right}")]
    SchemeMismatch { left: LabelScheme, right: LabelScheme },
    #[error("image size mismatch: {left:?} vs {right:?}")]
    SizeMismatch { left: (usize, usize), right: (usize, usize) },
    #[error("invalid loss weights: {0}")]
    InvalidWeights(String),
}

fn check(scheme: LabelScheme, size: (usize, usize), gt: &BagsLabelMap) -> Result<(), SegError> {
    if scheme != gt.scheme {
        return Err(SegError::SchemeMismatch { left: scheme, right: gt.scheme });
    }
    if size != (gt.width, gt.height) {
        return Err(SegError::SizeMismatch { left: size, right: (gt.width, gt.height) });
    }
    Ok(())
}

/// Scores of one class; `None` where the defining ratio has a zero
/// denominator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassMetrics {
    pub precision: Option<f64>,
    pub recall: Option<f64>,
    pub iou: Option<f64>,
    pub f1: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SegmentationMetrics {
    pub scheme: LabelScheme,
    /// `confusion[gt][pred]`, over labelled ground-truth pixels with a
    /// prediction.
    pub confusion: Vec<Vec<u64>>,
    /// Labelled ground-truth pixels without any prediction.
    pub unpredicted: u64,
    pub per_class: Vec<ClassMetrics>,
    /// Unweighted mean over the classes where each score is defined.
    pub average: ClassMetrics,
    /// Correct pixels over all labelled ground-truth pixels.
    pub accuracy: f64,
}

fn ratio(num: u64, den: u64) -> Option<f64> {
    (den > 0).then(|| num as f64 / den as f64)
}

fn mean(values: impl Iterator<Item = Option<f64>>) -> Option<f64> {
    let v: Vec<f64> = values.flatten().collect();
    (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64)
}

/// Precision, recall, IoU and F1 per class from the confusion matrix, and
/// pixel accuracy. Ignore and invalid ground-truth pixels are skipped; an
/// unpredicted labelled pixel counts as a miss.
pub fn segmentation_metrics(pred: &Segmentation, gt: &BagsLabelMap) -> Result<SegmentationMetrics, SegError> {
    check(pred.scheme, (pred.width, pred.height), gt)?;
    let k = gt.scheme.num_classes();
    let mut confusion = vec![vec![0u64; k]; k];
    let mut unpredicted = 0;
    let mut fn_extra = vec![0u64; k];
    for (cell, p) in gt.cells.iter().zip(&pred.assignment) {
        let BagsCell::Label(g) = cell else { continue };
        match p {
            Some(p) => confusion[*g as usize][*p as usize] += 1,
            None => {
                unpredicted += 1;
                fn_extra[*g as usize] += 1;
            }
        }
    }
    let per_class: Vec<ClassMetrics> = (0..k)
        .map(|c| {
            let tp = confusion[c][c];
            let gt_total: u64 = confusion[c].iter().sum::<u64>() + fn_extra[c];
            let pred_total: u64 = confusion.iter().map(|row| row[c]).sum();
            let fp = pred_total - tp;
            let fneg = gt_total - tp;
            ClassMetrics {
                precision: ratio(tp, pred_total),
                recall: ratio(tp, gt_total),
                iou: ratio(tp, tp + fp + fneg),
                f1: ratio(2 * tp, 2 * tp + fp + fneg),
            }
        })
        .collect();
    let average = ClassMetrics {
        precision: mean(per_class.iter().map(|m| m.precision)),
        recall: mean(per_class.iter().map(|m| m.recall)),
        iou: mean(per_class.iter().map(|m| m.iou)),
        f1: mean(per_class.iter().map(|m| m.f1)),
    };
    let correct: u64 = (0..k).map(|c| confusion[c][c]).sum();
    let total: u64 = confusion.iter().flatten().sum::<u64>() + unpredicted;
    Ok(SegmentationMetrics {
        scheme: gt.scheme,
        confusion,
        unpredicted,
        per_class,
        average,
        accuracy: ratio(correct, total).unwrap_or(0.0),
    })
}

/// Class weights `β_k ∝ 1 / n_k`, scaled so that they sum to `K`.
#[derive(Debug, Clone, PartialEq)]
pub struct LossWeights {
    pub beta: Vec<f64>,
}

impl LossWeights {
    pub fn uniform(k: usize) -> Self {
        Self { beta: vec![1.0; k] }
    }

    pub fn from_counts(counts: &[u64]) -> Result<Self, SegError> {
        if counts.is_empty() {
            return Err(SegError::InvalidWeights("no classes".into()));
        }
        if let Some(k) = counts.iter().position(|&n| n == 0) {
            return Err(SegError::InvalidWeights(format!("class {k} has no pixels")));
        }
        let inv: Vec<f64> = counts.iter().map(|&n| 1.0 / n as f64).collect();
        let s: f64 = inv.iter().sum();
        Ok(Self { beta: inv.iter().map(|b| b * counts.len() as f64 / s).collect() })
    }

    /// Weights from the label histogram of a set of training maps.
    pub fn from_training_set<'a>(maps: impl IntoIterator<Item = &'a BagsLabelMap>) -> Result<Self, SegError> {
        let mut counts: Vec<u64> = Vec::new();
        for m in maps {
            let (h, _) = m.histogram();
            if counts.is_empty() {
                counts = vec![0; h.len()];
            } else if counts.len() != h.len() {
                return Err(SegError::InvalidWeights("training maps mix label schemes".into()));
            }
            counts.iter_mut().zip(h).for_each(|(c, n)| *c += n as u64);
        }
        Self::from_counts(&counts)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LossReport {
    /// `Σ_k β_k L_k`.
    pub total: f64,
    /// Unweighted per-class binary cross-entropy sums `L_k`.
    pub per_class: Vec<f64>,
}

/// Weighted multi-binomial cross-entropy
/// `L = Σ_k β_k Σ_p −[Ȳ_k(p) log Y_k(p) + (1 − Ȳ_k(p)) log(1 − Y_k(p))]`
/// over labelled pixels, with `Y` clamped to `[ε, 1 − ε]`.
pub fn multi_binomial_loss(maps: &ProbabilityMaps, gt: &BagsLabelMap, w: &LossWeights) -> Result<LossReport, SegError> {
    check(maps.scheme, (maps.width, maps.height), gt)?;
    let k = maps.num_classes();
    if w.beta.len() != k {
        return Err(SegError::InvalidWeights(format!("{} weights for {k} classes", w.beta.len())));
    }
    if w.beta.iter().any(|b| !(*b > 0.0)) {
        return Err(SegError::InvalidWeights("weights must be positive".into()));
    }
    let mut per_class = vec![0.0; k];
    for (i, cell) in gt.cells.iter().enumerate() {
        let BagsCell::Label(g) = cell else { continue };
        for (c, acc) in per_class.iter_mut().enumerate() {
            let y = (maps.planes[c][i] as f64).clamp(LOSS_EPS, 1.0 - LOSS_EPS);
            *acc -= if c == *g as usize { y.ln() } else { (1.0 - y).ln() };
        }
    }
    let total = per_class.iter().zip(&w.beta).map(|(l, b)| l * b).sum();
    Ok(LossReport { total, per_class })
}

#[cfg(test)]
mod tests {
    use approx::assert_relative_eq;

    use super::*;
    use crate::seg::argmax_segmentation;

    #[test]
    fn single_pixel_two_class_loss() {
        // K4 has four classes; put the mass on the first two
        let gt = BagsLabelMap { scheme: LabelScheme::K4, width: 1, height: 1, cells: vec![BagsCell::Label(1)] };
        let mut maps = ProbabilityMaps::zeros(LabelScheme::K4, 1, 1, true);
        maps.planes[0][0] = 0.5;
        maps.planes[1][0] = 0.5;
        let r = multi_binomial_loss(&maps, &gt, &LossWeights::uniform(4)).unwrap();
        let two_ln2 = 2.0 * std::f64::consts::LN_2;
        assert_relative_eq!(r.per_class[0] + r.per_class[1], two_ln2, max_relative = 1e-12);
        // the empty classes only pay the clamp
        assert!(r.per_class[2] < 1e-6 && r.per_class[3] < 1e-6);
    }

    #[test]
    fn weights_sum_to_k() {
        let w = LossWeights::from_counts(&[100, 10, 50, 40]).unwrap();
        assert_relative_eq!(w.beta.iter().sum::<f64>(), 4.0, max_relative = 1e-12);
        assert_relative_eq!(w.beta[1] / w.beta[0], 10.0, max_relative = 1e-12);
        assert!(LossWeights::from_counts(&[1, 0]).is_err());
    }

    #[test]
    fn swapped_halves_score_zero() {
        let cells: Vec<BagsCell> = (0..8).map(|i| BagsCell::Label((i / 4) as u8)).collect();
        let gt = BagsLabelMap { scheme: LabelScheme::K4, width: 8, height: 1, cells };
        let mut maps = ProbabilityMaps::zeros(LabelScheme::K4, 8, 1, true);
        for i in 0..8 {
            maps.planes[1 - i / 4][i] = 1.0;
        }
        let m = segmentation_metrics(&argmax_segmentation(&maps), &gt).unwrap();
        assert_eq!(m.accuracy, 0.0);
        assert_eq!(m.per_class[0].precision, Some(0.0));
        assert_eq!(m.per_class[1].precision, Some(0.0));
        assert_eq!(m.per_class[2].precision, None);
    }

    #[test]
    fn scheme_mismatch_is_an_error() {
        let gt = BagsLabelMap { scheme: LabelScheme::K6, width: 1, height: 1, cells: vec![BagsCell::Label(0)] };
        let maps = ProbabilityMaps::zeros(LabelScheme::K4, 1, 1, true);
        assert!(matches!(segmentation_metrics(&argmax_segmentation(&maps), &gt), Err(SegError::SchemeMismatch { .. })));
    }
}
