use crate::geom::PrimitiveClass;
use crate::range_image::{estimate_normals, BagsLabel, NormalMap, RangeImage, DEFAULT_WINDOW};
use crate::ransac::{detect_primitives, Candidate, PointSet, RansacParams};
use crate::rng::derive_seed;
use crate::seg::{argmax_segmentation, ProbabilityMaps};

/// PCA normals of a scan with the default window.
pub fn scan_normals(img: &RangeImage) -> NormalMap {
    estimate_normals(&img.unproject(), DEFAULT_WINDOW)
}

/// Per-class fitting on the arg-max split of `maps`. Inliers of the returned
/// candidates are pixel indices.
pub fn primitive_fitting(img: &RangeImage, maps: &ProbabilityMaps, params: &RansacParams) -> Vec<Candidate> {
    primitive_fitting_with_normals(img, &scan_normals(img), maps, params)
}

/// As [`primitive_fitting`] with precomputed normals.
///
/// Boundary and Other pixels never reach the detector. Class `k` runs with
/// a seed derived from `params.seed` and `k`.
///
/// # Panics
/// When the maps do not cover the image.
pub fn primitive_fitting_with_normals(
    img: &RangeImage,
    normals: &NormalMap,
    maps: &ProbabilityMaps,
    params: &RansacParams,
) -> Vec<Candidate> {
    assert!(maps.width == img.width && maps.height == img.height, "probability maps do not cover the image");
    let seg = argmax_segmentation(maps);
    let mut out = Vec::new();
    for (k, label) in maps.scheme.labels().into_iter().enumerate() {
        let BagsLabel::Primitive(class) = label else { continue };
        let set = PointSet::from_scan(img, normals, Some(&seg.sets[k]));
        let p = RansacParams { seed: derive_seed(params.seed, &[class.index() as u64]), ..params.clone() };
        out.extend(detect_primitives(&set, &[class], &p).into_iter().map(|c| to_pixels(&set, c)));
    }
    out
}

/// All-class detection on every valid pixel, without segmentation.
pub fn eransac_baseline(img: &RangeImage, params: &RansacParams) -> Vec<Candidate> {
    eransac_baseline_with_normals(img, &scan_normals(img), params)
}

pub fn eransac_baseline_with_normals(img: &RangeImage, normals: &NormalMap, params: &RansacParams) -> Vec<Candidate> {
    let set = PointSet::from_scan(img, normals, None);
    detect_primitives(&set, &PrimitiveClass::ALL, params).into_iter().map(|c| to_pixels(&set, c)).collect()
}

fn to_pixels(set: &PointSet, mut c: Candidate) -> Candidate {
    let grid = set.grid.as_ref().expect("scan point sets carry pixels");
    for i in c.inliers.iter_mut() {
        *i = grid.pixel[*i as usize];
    }
    c.inliers.sort_unstable();
    c
}
