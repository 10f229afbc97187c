mod oracles;

use baybayin_core::detection::{filter_confidence, iou, nms, Detection, PostProcess};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn matches_greedy_oracle_on_random_sets() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..2000 {
        let dets = oracles::random_detections(&mut rng, 10, 3);
        let thr = [0.0, 0.3, 0.45, 0.5, 0.7, 1.0][rng.random_range(0..6)];
        let aware = rng.random_bool(0.5);
        assert_eq!(nms(&dets, thr, aware), oracles::nms(&dets, thr, aware));
    }
}

fn seeds() -> impl Strategy<Value = (u64, f64, bool)> {
    (any::<u64>(), 0.0f64..=1.0, any::<bool>())
}

proptest! {
    #[test]
    fn kept_boxes_never_overlap_beyond_threshold((seed, thr, aware) in seeds()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let dets = oracles::random_detections(&mut rng, 10, 3);
        let kept = nms(&dets, thr, aware);
        for (i, a) in kept.iter().enumerate() {
            for b in &kept[i + 1..] {
                if !aware || a.class_id == b.class_id {
                    prop_assert!(iou(&a.bbox, &b.bbox) <= thr);
                }
            }
        }
        prop_assert!(kept.len() <= dets.len());
        prop_assert_eq!(nms(&kept, thr, aware), kept);
    }

    #[test]
    fn input_order_is_irrelevant((seed, thr, aware) in seeds()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let dets = oracles::random_detections(&mut rng, 10, 3);
        let mut rev = dets.clone();
        rev.reverse();
        let a = nms(&dets, thr, aware);
        let b = nms(&rev, thr, aware);
        // identical (confidence, class) pairs may swap places; compare as multisets
        let key = |d: &Detection| (d.confidence.to_bits(), d.class_id, d.bbox.to_array().map(f64::to_bits));
        let mut ka: Vec<_> = a.iter().map(key).collect();
        let mut kb: Vec<_> = b.iter().map(key).collect();
        ka.sort();
        kb.sort();
        if ka != kb {
            // only legal when two equal-rank boxes compete
            let mut ranks: Vec<_> = dets.iter().map(|d| (d.confidence.to_bits(), d.class_id)).collect();
            ranks.sort();
            ranks.dedup();
            prop_assert!(ranks.len() < dets.len());
        }
    }

    #[test]
    fn confidence_filter_is_inclusive(seed in any::<u64>(), thr in 0.0f64..=1.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let dets = oracles::random_detections(&mut rng, 10, 3);
        let kept = filter_confidence(&dets, thr);
        prop_assert_eq!(kept.len(), dets.iter().filter(|d| d.confidence >= thr).count());
        let post = PostProcess { conf_threshold: thr, nms_iou: 0.45, class_aware: true };
        prop_assert_eq!(post.apply(&dets), oracles::nms(&kept, 0.45, true));
    }
}
