use super::{LabelMap, SemanticClass};

/// Instance-aware boundary mask: a valid pixel is on a boundary when its
/// square `window` (truncated at the image border) holds two different
/// instance ids or any invalid pixel. Invalid pixels are never boundary.
pub fn compute_boundaries(labels: &LabelMap, window: usize) -> Vec<bool> {
    let (w, h) = (labels.width, labels.height);
    let half = window / 2;
    let mut mask = vec![false; w * h];
    for v in 0..h {
        let (y0, y1) = (v.saturating_sub(half), (v + half).min(h - 1));
        for u in 0..w {
            let i = v * w + u;
            if labels.class[i] == SemanticClass::Invalid {
                continue;
            }
            let id = labels.instance[i];
            let (x0, x1) = (u.saturating_sub(half), (u + half).min(w - 1));
            'scan: for y in y0..=y1 {
                for x in x0..=x1 {
                    let j = y * w + x;
                    if labels.class[j] == SemanticClass::Invalid || labels.instance[j] != id {
                        mask[i] = true;
                        break 'scan;
                    }
                }
            }
        }
    }
    mask
}
