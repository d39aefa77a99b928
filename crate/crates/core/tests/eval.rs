mod common;

use std::collections::HashSet;

use common::{five_instance_scene, intersecting_pair, perfect_maps, scan};
use primfit::eval::{
    aggregate_report, eransac_baseline, fitting_error, format_report_csv, iot, match_detections, parse_report_csv,
    primitive_fitting, ClassCounts, DetectionReport, EvalError, EvalOptions, FitErrorSource,
};
use primfit::geom::{Plane, PrimitiveClass, PrimitiveModel};
use primfit::range_image::{compute_boundaries, LabelScheme, DEFAULT_WINDOW};
use primfit::ransac::{largest_component, Candidate, PixelGrid, RansacParams};
use primfit::rng::rng_from_seed;
use primfit::scene::SceneDescription;
use primfit::seg::{oracle_probability_maps, CorruptionConfig};
use primfit::Vec3;
use proptest::prelude::*;
use rand::Rng;

fn plane_z0() -> PrimitiveModel {
    Plane::new(Vec3::z(), 0.0).unwrap().into()
}

fn cand(model: PrimitiveModel, mut inliers: Vec<u32>) -> Candidate {
    inliers.sort_unstable();
    Candidate { model, score: inliers.len(), inliers }
}

#[test]
fn iot_examples() {
    let inst: Vec<u32> = (0..1000).collect();
    assert_eq!(iot(&cand(plane_z0(), inst.clone()), &inst).unwrap(), 1.0);
    let part: Vec<u32> = (0..400).chain(5000..5100).collect();
    assert_eq!(iot(&cand(plane_z0(), part), &inst).unwrap(), 0.4);
    assert_eq!(iot(&cand(plane_z0(), vec![1]), &[]), Err(EvalError::EmptyInstance));
}

#[test]
fn fitting_error_examples() {
    let on: Vec<Vec3> = (0..50).map(|i| Vec3::new(i as f64, -(i as f64), 0.0)).collect();
    assert_eq!(fitting_error(&on, &plane_z0()).unwrap(), 0.0);
    let lifted: Vec<Vec3> = on.iter().map(|p| p + Vec3::new(0.0, 0.0, 0.02)).collect();
    assert!((fitting_error(&lifted, &plane_z0()).unwrap() - 0.02).abs() < 1e-15);
}

#[test]
fn aggregate_examples() {
    let empty = aggregate_report([&DetectionReport::default()]);
    let all = empty.all();
    assert!(all.no_predictions());
    assert_eq!(all.pap(), 0.0);
    assert_eq!(all.par(), 0.0);

    let mut r = DetectionReport::default();
    *r.class_mut(PrimitiveClass::Plane) = ClassCounts { n_p2t: 3, n_p: 6, n_t2p: 2, n_t: 5, ..Default::default() };
    *r.class_mut(PrimitiveClass::Cone) = ClassCounts { n_p2t: 2, n_p: 4, n_t2p: 2, n_t: 3, ..Default::default() };
    let all = aggregate_report([&r]).all();
    assert_eq!((all.n_p2t, all.n_p, all.n_t2p, all.n_t), (5, 10, 4, 8));
    assert_eq!(all.pap(), 0.5);
    assert_eq!(all.par(), 0.5);
}

#[test]
fn csv_round_trip() {
    let mut a = DetectionReport::default();
    *a.class_mut(PrimitiveClass::Sphere) = ClassCounts { n_p: 4, n_t: 3, n_p2t: 2, n_t2p: 2, err_matched_pm: 123_456_789, err_best_pm: 12_345 };
    let mut b = DetectionReport::default();
    b.class_mut(PrimitiveClass::Plane).n_t = 7;
    let text = format_report_csv(&[("eransac", &a), ("pipeline", &b)]);
    let back = parse_report_csv(&text).unwrap();
    assert_eq!(back, vec![("eransac".to_string(), a), ("pipeline".to_string(), b)]);
    assert!(parse_report_csv("nonsense\n").is_err());
}

/// A single plane seen head on, noise free.
fn plane_scan() -> (SceneDescription, primfit::range_image::RangeImage, primfit::range_image::LabelMap) {
    let mut scene = SceneDescription::empty();
    scene.push(common::floor(20.0));
    let (img, labels) = scan(&scene, Vec3::new(0.0, 0.0, 2.0), Vec3::new(0.01, 0.0, 0.0), 0.0, 1);
    (scene, img, labels)
}

#[test]
fn single_plane_scene_matches_rules() {
    let (scene, img, labels) = plane_scan();
    let inst: Vec<u32> = (0..img.len() as u32).filter(|&i| labels.instance[i as usize] == 1).collect();
    assert_eq!(inst.len(), img.len());
    let opts = EvalOptions::default();

    // one perfect prediction
    let ev = match_detections(&[cand(plane_z0(), inst.clone())], &img, &labels, &scene, &opts).unwrap();
    let all = ev.report.all();
    assert_eq!((all.n_p, all.n_t, all.n_p2t, all.n_t2p), (1, 1, 1, 1));
    // depth is stored as f32
    assert!(ev.matches[0].fit_error < 1e-6);

    // split into two predictions with IoT 0.4 and 0.35; the second fits better
    let n = inst.len();
    let a = cand(Plane::new(Vec3::z(), 0.01).unwrap().into(), inst[..n * 40 / 100].to_vec());
    let b = cand(Plane::new(Vec3::z(), 0.004).unwrap().into(), inst[n * 40 / 100..n * 75 / 100].to_vec());
    let ev = match_detections(&[a, b], &img, &labels, &scene, &opts).unwrap();
    let all = ev.report.all();
    assert_eq!((all.n_p2t, all.n_t2p), (2, 1));
    let best: Vec<_> = ev.matches.iter().filter(|m| m.best).collect();
    assert_eq!(best.len(), 1);
    assert_eq!(best[0].prediction, 1);
    assert!((best[0].fit_error - 0.004).abs() < 1e-6);

    // a wrong class never matches
    let sphere: PrimitiveModel = primfit::geom::Sphere::new(Vec3::zeros(), 1.0).unwrap().into();
    let ev = match_detections(&[cand(sphere, inst.clone())], &img, &labels, &scene, &opts).unwrap();
    assert_eq!(ev.report.all().n_p2t, 0);

    // at most three matches per instance
    let quarters: Vec<Candidate> = (0..4).map(|q| cand(plane_z0(), inst[q * n / 4..((q + 1) * n / 4 + n / 10).min(n)].to_vec())).collect();
    let ev = match_detections(&quarters, &img, &labels, &scene, &opts).unwrap();
    assert_eq!(ev.report.all().n_p2t, 3);
}

#[test]
fn perfect_maps_on_a_single_plane() {
    let (_, img, labels) = plane_scan();
    let found = primitive_fitting(&img, &perfect_maps(&labels, LabelScheme::K6), &RansacParams::default());
    assert_eq!(found.len(), 1);
    assert_eq!(found[0].model.class(), PrimitiveClass::Plane);
    let found = eransac_baseline(&img, &RansacParams::default());
    assert_eq!(found.len(), 1);
    assert_eq!(found[0].model.class(), PrimitiveClass::Plane);
}

#[test]
fn boundary_removal_avoids_ghosts_on_plane_and_cylinder() {
    let mut scene = SceneDescription::empty();
    scene.push(common::floor(3.0));
    scene.push(common::upright_cylinder(0.0, 0.0, 0.3, 1.2));
    // eye below the rim so the inside of the tube stays hidden
    let (img, labels) = scan(&scene, Vec3::new(2.2, 0.8, 1.1), Vec3::new(0.0, 0.0, 0.4), 0.005, 3);
    let found = primitive_fitting(&img, &perfect_maps(&labels, LabelScheme::K6), &RansacParams::default());
    let classes: Vec<_> = found.iter().map(|c| c.model.class()).collect();
    assert_eq!(classes, vec![PrimitiveClass::Plane, PrimitiveClass::Cylinder]);
    let ev = match_detections(&found, &img, &labels, &scene, &EvalOptions::default()).unwrap();
    assert_eq!(ev.report.all().n_t2p, 2);

    // the baseline only has to run and be counted
    let base = eransac_baseline(&img, &RansacParams::default());
    let ev = match_detections(&base, &img, &labels, &scene, &EvalOptions::default()).unwrap();
    assert_eq!(ev.report.all().n_p, base.len());
}

#[test]
fn flipped_maps_keep_recall_on_five_instances() {
    let scene = five_instance_scene();
    let (img, labels) = scan(&scene, Vec3::new(2.8, 0.3, 1.6), Vec3::new(0.0, 0.0, 0.5), 0.005, 4);
    let mut report = DetectionReport::default();
    for seed in 0..3 {
        let bags = primfit::range_image::make_bags_labels(&labels, &compute_boundaries(&labels, DEFAULT_WINDOW), LabelScheme::K6);
        let maps = oracle_probability_maps(&bags, &CorruptionConfig { flip_rate: 0.1, seed, ..Default::default() });
        let found = primitive_fitting(&img, &maps, &RansacParams { seed, ..Default::default() });
        report.merge(&match_detections(&found, &img, &labels, &scene, &EvalOptions::default()).unwrap().report);
    }
    let all = report.all();
    assert_eq!(all.n_t, 15);
    assert!(all.par() >= 0.8, "PAR {}", all.par());
}

#[test]
fn matching_invariants_on_intersecting_pairs() {
    for seed in 0..6 {
        let (scene, eye, target) = intersecting_pair(seed);
        let (img, labels) = scan(&scene, eye, target, 0.005, seed);
        let preds = eransac_baseline(&img, &RansacParams { seed, ..Default::default() });
        let ev = match_detections(&preds, &img, &labels, &scene, &EvalOptions::default()).unwrap();
        for m in &ev.matches {
            assert!(m.iot > 0.3);
            assert_eq!(m.class, preds[m.prediction].model.class());
            let inst_class = labels.class[labels.instance.iter().position(|&i| i == m.instance).unwrap()];
            assert_eq!(inst_class.primitive(), Some(m.class));
        }
        let preds_matched: HashSet<usize> = ev.matches.iter().map(|m| m.prediction).collect();
        assert_eq!(preds_matched.len(), ev.matches.len());
        for c in ev.report.per_class.iter().chain([&ev.report.all()]) {
            assert!(c.n_t2p <= c.n_t.min(c.n_p2t));
            assert!(c.n_p2t <= 3 * c.n_t);
            assert!(c.n_p2t <= c.n_p);
        }
    }
}

#[test]
fn perfect_noise_free_maps_match_every_well_visible_instance() {
    let params = RansacParams::default();
    for seed in 0..8 {
        let (scene, eye, target) = if seed < 4 {
            intersecting_pair(seed)
        } else {
            (five_instance_scene(), Vec3::new(2.8, (seed as f64 - 5.5) * 0.6, 1.5), Vec3::new(0.0, 0.0, 0.5))
        };
        let (img, labels) = scan(&scene, eye, target, 0.0, seed);
        let boundary = compute_boundaries(&labels, DEFAULT_WINDOW);
        let found = primitive_fitting(&img, &perfect_maps(&labels, LabelScheme::K6), &params);
        let ev = match_detections(&found, &img, &labels, &scene, &EvalOptions::default()).unwrap();
        let grid = PixelGrid { width: img.width, height: img.height, pixel: (0..img.len() as u32).collect() };
        for (id, pixels) in labels.instance_pixels() {
            if labels.class[pixels[0] as usize].primitive().is_none() {
                continue;
            }
            let interior: Vec<u32> = pixels.iter().copied().filter(|&p| !boundary[p as usize]).collect();
            // fully visible: interior is one connected piece with enough support
            let comp = largest_component(&grid, &interior);
            if comp.len() < params.min_support || comp.len() != interior.len() {
                continue;
            }
            assert!(ev.matches.iter().any(|m| m.instance == id && m.best), "scene {seed}: instance {id} unmatched");
        }
    }
}

#[test]
fn clean_fitting_error_is_below_observed_for_the_truth() {
    let scene = five_instance_scene();
    let (img, labels) = scan(&scene, Vec3::new(2.8, 0.3, 1.6), Vec3::new(0.0, 0.0, 0.5), 0.005, 9);
    let truth: Vec<Candidate> = labels
        .instance_pixels()
        .into_iter()
        .filter_map(|(id, px)| scene.instance(id).and_then(|i| i.shape.model()).map(|m| cand(m, px)))
        .collect();
    let observed = match_detections(&truth, &img, &labels, &scene, &EvalOptions::default()).unwrap();
    let clean_opts = EvalOptions { fit_error_source: FitErrorSource::Clean, ..Default::default() };
    let clean = match_detections(&truth, &img, &labels, &scene, &clean_opts).unwrap();
    assert_eq!(observed.report.all().n_t2p, 5);
    for m in &clean.matches {
        assert!(m.fit_error < 1e-6, "{m:?}");
    }
    // observed points scatter by roughly the noise level
    let e = observed.report.all().mean_error_best_cm().unwrap();
    assert!(e > 0.1 && e < 0.8, "{e}");
}

fn random_report(rng: &mut impl Rng) -> DetectionReport {
    let mut r = DetectionReport::default();
    for c in r.per_class.iter_mut() {
        c.n_t = rng.random_range(0..20);
        c.n_p = rng.random_range(0..20);
        c.n_p2t = rng.random_range(0..=c.n_p);
        c.n_t2p = rng.random_range(0..=c.n_t.min(c.n_p2t));
        c.add_matched_error(rng.random_range(0.0..0.05) * c.n_p2t as f64);
        c.add_best_error(rng.random_range(0.0..0.05) * c.n_t2p as f64);
    }
    r
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn iot_matches_brute_force(a in prop::collection::vec(0u32..200, 0..150), b in prop::collection::vec(0u32..200, 1..150)) {
        let inst: Vec<u32> = b.clone();
        let truth: HashSet<u32> = inst.iter().copied().collect();
        let pred: HashSet<u32> = a.iter().copied().collect();
        let expected = pred.intersection(&truth).count() as f64 / truth.len() as f64;
        let mut inl: Vec<u32> = pred.into_iter().collect();
        inl.sort_unstable();
        prop_assert_eq!(iot(&cand(plane_z0(), inl), &inst).unwrap(), expected);
    }

    #[test]
    fn fitting_error_matches_loop(seed in any::<u64>(), n in 1usize..200) {
        let mut rng = rng_from_seed(seed);
        let model: PrimitiveModel = primfit::geom::Sphere::new(Vec3::new(0.1, 0.2, 0.3), 0.7).unwrap().into();
        let pts: Vec<Vec3> = (0..n).map(|_| Vec3::new(rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0))).collect();
        let mut sum = 0.0;
        for p in &pts {
            sum += ((p - Vec3::new(0.1, 0.2, 0.3)).norm() - 0.7).abs();
        }
        let got = fitting_error(&pts, &model).unwrap();
        prop_assert!((got - sum / n as f64).abs() <= 1e-12 * (1.0 + got));
    }

    #[test]
    fn aggregation_is_permutation_invariant_and_sums_classes(seed in any::<u64>(), k in 1usize..12) {
        let mut rng = rng_from_seed(seed);
        let scans: Vec<DetectionReport> = (0..k).map(|_| random_report(&mut rng)).collect();
        let a = aggregate_report(&scans);
        let mut shuffled = scans.clone();
        shuffled.reverse();
        shuffled.rotate_left(seed as usize % k);
        prop_assert_eq!(aggregate_report(&shuffled), a);
        // ALL column equals the recount over classes and scans
        let all = a.all();
        let n_p: usize = scans.iter().flat_map(|s| s.per_class.iter()).map(|c| c.n_p).sum();
        let n_t2p: usize = scans.iter().flat_map(|s| s.per_class.iter()).map(|c| c.n_t2p).sum();
        let err: u128 = scans.iter().flat_map(|s| s.per_class.iter()).map(|c| c.err_best_pm).sum();
        prop_assert_eq!((all.n_p, all.n_t2p, all.err_best_pm), (n_p, n_t2p, err));
        prop_assert!((0.0..=1.0).contains(&all.pap()) && (0.0..=1.0).contains(&all.par()));
    }
}
