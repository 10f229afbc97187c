mod oracles;

use baybayin_core::dataset::{
    augment, parse_label_file, warp, write_label_file, Annotation, AugmentSpec, BBox, CenterAffine,
    MIN_KEPT_AREA_FRACTION,
};
use baybayin_core::detection::iou;
use baybayin_core::imgproc::{LetterboxTransform, Raster};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn unit_box() -> impl Strategy<Value = BBox> {
    any::<u64>().prop_map(|s| oracles::random_box(&mut ChaCha8Rng::seed_from_u64(s)))
}

fn in_unit_square(b: &BBox) -> bool {
    let (x0, y0, x1, y1) = b.corners();
    x0 >= 0.0 && y0 >= 0.0 && x1 <= 1.0 && y1 <= 1.0 && x0 < x1 && y0 < y1
}

#[test]
fn iou_equals_rasterized_overlap() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for _ in 0..300 {
        let a = oracles::random_grid_box(&mut rng, 64);
        let b = oracles::random_grid_box(&mut rng, 64);
        let want = oracles::raster_iou(&a, &b, 64);
        assert!((iou(&a, &b) - want).abs() < 1e-12, "{a:?} {b:?}");
    }
}

proptest! {
    #[test]
    fn iou_is_symmetric_and_bounded(a in unit_box(), b in unit_box()) {
        let v = iou(&a, &b);
        prop_assert!((0.0..=1.0).contains(&v));
        prop_assert_eq!(v, iou(&b, &a));
        prop_assert_eq!(iou(&a, &a), 1.0);
    }

    #[test]
    fn letterbox_round_trip(b in unit_box(), w in 1u32..3000, h in 1u32..3000, target in 32u32..1280) {
        let t = LetterboxTransform::new(w, h, target).unwrap();
        let canvas = t.to_canvas(&b);
        prop_assert!(in_unit_square(&canvas));
        let back = t.from_canvas(&canvas).unwrap();
        for (x, y) in back.to_array().iter().zip(b.to_array()) {
            prop_assert!((x - y).abs() <= 1e-9);
        }
        prop_assert_eq!(t.total_pad_x() + t.resized_width, target);
        prop_assert_eq!(t.total_pad_y() + t.resized_height, target);
        prop_assert!(t.resized_width == target || t.resized_height == target);
    }

    #[test]
    fn rotation_box_is_clipped_corner_hull(b in unit_box(), deg in -180.0f64..180.0, w in 16u32..400, h in 16u32..400) {
        let affine = CenterAffine::rotation_shear(deg, 0.0, 0.0);
        let got = affine.transform_box(&b, w, h);
        // sample the rotated perimeter densely, corners included
        let (x0, y0, x1, y1) = b.corners();
        let (rad_s, rad_c) = deg.to_radians().sin_cos();
        let (wf, hf) = (w as f64, h as f64);
        let mut lo = (f64::MAX, f64::MAX);
        let mut hi = (f64::MIN, f64::MIN);
        let n = 64;
        for k in 0..=n {
            let s = k as f64 / n as f64;
            for (x, y) in [
                (x0 + s * (x1 - x0), y0),
                (x0 + s * (x1 - x0), y1),
                (x0, y0 + s * (y1 - y0)),
                (x1, y0 + s * (y1 - y0)),
            ] {
                let (px, py) = (x * wf - wf / 2.0, y * hf - hf / 2.0);
                // counter-clockwise on screen: y axis points down
                let (rx, ry) = (rad_c * px + rad_s * py, -rad_s * px + rad_c * py);
                let (ux, uy) = ((rx + wf / 2.0) / wf, (ry + hf / 2.0) / hf);
                lo = (lo.0.min(ux), lo.1.min(uy));
                hi = (hi.0.max(ux), hi.1.max(uy));
            }
        }
        let clip = |v: f64| v.clamp(0.0, 1.0);
        let (cx0, cy0, cx1, cy1) = (clip(lo.0), clip(lo.1), clip(hi.0), clip(hi.1));
        let area = (cx1 - cx0).max(0.0) * (cy1 - cy0).max(0.0);
        match got {
            Some(r) => {
                let (a, bb, c, d) = r.corners();
                for (x, y) in [(a, cx0), (bb, cy0), (c, cx1), (d, cy1)] {
                    prop_assert!((x - y).abs() < 1e-9, "{:?} vs {:?}", r.corners(), (cx0, cy0, cx1, cy1));
                }
            }
            None => prop_assert!(area < MIN_KEPT_AREA_FRACTION * b.area() + 1e-9),
        }
    }

    #[test]
    fn labels_round_trip(boxes in prop::collection::vec((0u32..59, unit_box()), 0..20)) {
        let anns: Vec<Annotation> = boxes.into_iter().map(|(c, b)| Annotation::new(c, b)).collect();
        let text = write_label_file(&anns);
        let back = parse_label_file(&text, 59).unwrap();
        prop_assert_eq!(back.len(), anns.len());
        for (a, b) in anns.iter().zip(&back) {
            prop_assert_eq!(a.class_id, b.class_id);
            for (x, y) in a.bbox.to_array().iter().zip(b.bbox.to_array()) {
                prop_assert!((x - y).abs() <= 5e-7 + 1e-12);
            }
        }
        prop_assert_eq!(write_label_file(&back), text);
    }
}

fn random_spec(rng: &mut impl Rng) -> AugmentSpec {
    let r = rng.random_range(0.0..180.0);
    let s = rng.random_range(0.0..45.0);
    AugmentSpec {
        rotation_deg: [-r, r],
        shear_deg: [-s, s],
        occlusion_count: [0, rng.random_range(0..3)],
        noise_sigma: rng.random_range(0.0..10.0),
        seed: rng.random(),
        ..AugmentSpec::default()
    }
}

fn random_image(rng: &mut impl Rng) -> (Raster, Vec<Annotation>) {
    let (w, h) = (rng.random_range(8..40), rng.random_range(8..40));
    let channels = if rng.random_bool(0.5) { 1 } else { 3 };
    let data = (0..w * h * channels as u32).map(|_| rng.random()).collect();
    let img = Raster::new(w, h, channels, data).unwrap();
    let anns = (0..rng.random_range(0..6))
        .map(|_| Annotation::new(rng.random_range(0..59), oracles::random_box(rng)))
        .collect();
    (img, anns)
}

#[test]
fn augmented_boxes_stay_in_unit_square() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for _ in 0..300 {
        let (img, anns) = random_image(&mut rng);
        let spec = random_spec(&mut rng);
        let (out, boxes) = augment(&img, &anns, &spec).unwrap();
        assert_eq!((out.width(), out.height(), out.channels()), (img.width(), img.height(), img.channels()));
        assert!(boxes.len() <= anns.len());
        assert!(boxes.iter().all(|a| in_unit_square(&a.bbox)));
    }
}

#[test]
fn augmentation_is_reproducible() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..50 {
        let (img, anns) = random_image(&mut rng);
        let spec = random_spec(&mut rng);
        let a = augment(&img, &anns, &spec).unwrap();
        let b = augment(&img, &anns, &spec).unwrap();
        assert_eq!(a.0.data(), b.0.data());
        assert_eq!(a.1, b.1);
    }
}

#[test]
fn quarter_turn_swaps_width_and_height() {
    let img = Raster::filled(64, 64, 1, 0).unwrap();
    let affine = CenterAffine::rotation_shear(90.0, 0.0, 0.0);
    for (cx, cy, w, h) in [(0.5, 0.5, 0.25, 0.5), (0.375, 0.625, 0.125, 0.25), (0.25, 0.75, 0.5, 0.0625)] {
        let ann = Annotation::new(0, BBox::new(cx, cy, w, h).unwrap());
        let (_, out) = warp(&img, &[ann], &affine).unwrap();
        assert_eq!(out[0].bbox.w(), h);
        assert_eq!(out[0].bbox.h(), w);
    }
}
