//! Reference implementations used as test oracles. They favour the most
//! literal reading of each definition over speed.
#![allow(dead_code)]

use std::collections::BTreeSet;

use num::{BigInt, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use baybayin_core::dataset::{Annotation, BBox};
use baybayin_core::detection::{iou, Detection};
use baybayin_core::eval::EvalImage;
use baybayin_core::imgproc::Raster;
use baybayin_core::script::AmbiguitySet;

/// Otsu by exhaustive search over all 256 thresholds. The between-class
/// variance `w0 * w1 * (mu0 - mu1)^2` equals
/// `(N * s0 - n0 * S)^2 / (N^2 * n0 * n1)`; the constant `N^2` is dropped and
/// fractions are compared exactly by cross-multiplication in big integers.
/// Lowest maximizer wins.
pub fn otsu(hist: &[u64; 256]) -> Option<u8> {
    if hist.iter().filter(|&&c| c > 0).count() < 2 {
        return None;
    }
    let total = BigInt::from(hist.iter().sum::<u64>());
    let sum = BigInt::from(hist.iter().enumerate().map(|(v, &c)| v as u64 * c).sum::<u64>());
    let (mut n0, mut s0) = (BigInt::zero(), BigInt::zero());
    // best score as (numerator, denominator), starting from 0/1
    let mut best = (BigInt::zero(), BigInt::from(1), 0u8);
    for (t, &c) in hist.iter().enumerate() {
        n0 += c;
        s0 += BigInt::from(t as u64 * c);
        let n1 = &total - &n0;
        if n0.is_zero() || n1.is_zero() {
            continue;
        }
        let d = &total * &s0 - &n0 * &sum;
        let num = &d * &d;
        let den = &n0 * &n1;
        if &num * &best.1 > &best.0 * &den {
            best = (num, den, t as u8);
        }
    }
    Some(best.2)
}

/// Ranking key: higher confidence first, then lower class id, then index.
fn ranked(dets: &[Detection]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..dets.len()).collect();
    idx.sort_by(|&a, &b| {
        dets[b]
            .confidence
            .partial_cmp(&dets[a].confidence)
            .unwrap()
            .then(dets[a].class_id.cmp(&dets[b].class_id))
            .then(a.cmp(&b))
    });
    idx
}

/// Textbook greedy NMS: repeatedly take the best remaining box and delete
/// everything it overlaps by more than the threshold.
pub fn nms(dets: &[Detection], thr: f64, class_aware: bool) -> Vec<Detection> {
    let mut remaining = ranked(dets);
    let mut kept = Vec::new();
    while !remaining.is_empty() {
        let best = remaining.remove(0);
        let b = dets[best];
        kept.push(b);
        remaining.retain(|&i| {
            let d = dets[i];
            let same = !class_aware || d.class_id == b.class_id;
            !(same && iou(&b.bbox, &d.bbox) > thr)
        });
    }
    kept
}

/// Greedy class-aware matching; returns TP count among `dets`.
fn count_tp(dets: &[Detection], gts: &[Annotation], thr: f64) -> u64 {
    let mut used = vec![false; gts.len()];
    let mut tp = 0;
    for i in ranked(dets) {
        let d = dets[i];
        let mut best: Option<(f64, usize)> = None;
        for (g, gt) in gts.iter().enumerate() {
            if used[g] || gt.class_id != d.class_id {
                continue;
            }
            let v = iou(&d.bbox, &gt.bbox);
            if v < thr {
                continue;
            }
            match best {
                Some((bv, _)) if bv >= v => {}
                _ => best = Some((v, g)),
            }
        }
        if let Some((_, g)) = best {
            used[g] = true;
            tp += 1;
        }
    }
    tp
}

/// AP of one class by enumerating every confidence cut-point: at each cut,
/// detections below it are discarded and matching is redone from scratch.
/// `None` when the class has no ground truth.
pub fn class_ap(images: &[EvalImage], class_id: u32, thr: f64) -> Option<f64> {
    let num_gt: u64 = images
        .iter()
        .flat_map(|i| &i.ground_truth)
        .filter(|g| g.class_id == class_id)
        .count() as u64;
    if num_gt == 0 {
        return None;
    }
    let cuts: BTreeSet<u64> = images
        .iter()
        .flat_map(|i| &i.detections)
        .filter(|d| d.class_id == class_id)
        .map(|d| d.confidence.to_bits())
        .collect();
    // (tp, n) at every cut
    let mut points = Vec::new();
    for bits in cuts {
        let cut = f64::from_bits(bits);
        let (mut tp, mut n) = (0u64, 0u64);
        for img in images {
            let dets: Vec<Detection> = img
                .detections
                .iter()
                .filter(|d| d.class_id == class_id && d.confidence >= cut)
                .copied()
                .collect();
            let gts: Vec<Annotation> = img
                .ground_truth
                .iter()
                .filter(|g| g.class_id == class_id)
                .copied()
                .collect();
            tp += count_tp(&dets, &gts, thr);
            n += dets.len() as u64;
        }
        points.push((tp, n));
    }
    let mut sum = 0.0;
    for r in 0..=100u64 {
        let p = points
            .iter()
            .filter(|(tp, _)| tp * 100 >= r * num_gt)
            .map(|&(tp, n)| tp as f64 / n as f64)
            .fold(0.0, f64::max);
        sum += p;
    }
    Some(sum / 101.0)
}

/// Mean over thresholds of the mean AP over classes with ground truth.
pub fn mean_ap(images: &[EvalImage], thresholds: &[f64]) -> Option<f64> {
    let classes: BTreeSet<u32> = images
        .iter()
        .flat_map(|i| &i.ground_truth)
        .map(|g| g.class_id)
        .collect();
    if classes.is_empty() {
        return None;
    }
    let mut total = 0.0;
    for &t in thresholds {
        let aps: Vec<f64> = classes.iter().map(|&c| class_ap(images, c, t).unwrap()).collect();
        total += aps.iter().sum::<f64>() / aps.len() as f64;
    }
    Some(total / thresholds.len() as f64)
}

/// Full-matrix Levenshtein distance.
pub fn levenshtein(a: &str, b: &str) -> usize {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    let mut m = vec![vec![0usize; b.len() + 1]; a.len() + 1];
    for (i, row) in m.iter_mut().enumerate() {
        row[0] = i;
    }
    for j in 0..=b.len() {
        m[0][j] = j;
    }
    for i in 1..=a.len() {
        for j in 1..=b.len() {
            let cost = usize::from(a[i - 1] != b[j - 1]);
            m[i][j] = (m[i - 1][j] + 1).min(m[i][j - 1] + 1).min(m[i - 1][j - 1] + cost);
        }
    }
    m[a.len()][b.len()]
}

/// Every reading of `word`, by recursive substitution.
pub fn expand(word: &str, amb: &AmbiguitySet) -> BTreeSet<String> {
    let chars: Vec<char> = word.chars().collect();
    let mut out = BTreeSet::new();
    fn go(chars: &[char], amb: &AmbiguitySet, prefix: &mut String, out: &mut BTreeSet<String>) {
        match chars.split_first() {
            None => {
                out.insert(prefix.clone());
            }
            Some((&c, rest)) => {
                let opts: Vec<char> = amb.group_of(c).map(|g| g.to_vec()).unwrap_or(vec![c]);
                for o in opts {
                    prefix.push(o);
                    go(rest, amb, prefix, out);
                    prefix.pop();
                }
            }
        }
    }
    go(&chars, amb, &mut String::new(), &mut out);
    out
}

/// Lexicon choice by explicit enumeration of candidates.
pub fn disambiguate<'a>(word: &str, lexicon: &'a [String], amb: &AmbiguitySet) -> (&'a str, usize) {
    let cands = expand(word, amb);
    lexicon
        .iter()
        .map(|w| {
            let d = cands.iter().map(|c| levenshtein(c, w)).min().unwrap();
            (d, levenshtein(word, w), w.as_str())
        })
        .min()
        .map(|(d, _, w)| (w, d))
        .unwrap()
}

/// IoU by counting cells of a `grid`-per-unit raster; exact for boxes whose
/// edges sit on grid lines.
pub fn raster_iou(a: &BBox, b: &BBox, grid: u32) -> f64 {
    let cells = |bx: &BBox| {
        let (x0, y0, x1, y1) = bx.corners();
        let g = grid as f64;
        (
            (x0 * g).round() as i64,
            (y0 * g).round() as i64,
            (x1 * g).round() as i64,
            (y1 * g).round() as i64,
        )
    };
    let (ax0, ay0, ax1, ay1) = cells(a);
    let (bx0, by0, bx1, by1) = cells(b);
    let (mut inter, mut uni) = (0u64, 0u64);
    for y in 0..grid as i64 {
        for x in 0..grid as i64 {
            let ia = x >= ax0 && x < ax1 && y >= ay0 && y < ay1;
            let ib = x >= bx0 && x < bx1 && y >= by0 && y < by1;
            inter += u64::from(ia && ib);
            uni += u64::from(ia || ib);
        }
    }
    if uni == 0 {
        0.0
    } else {
        inter as f64 / uni as f64
    }
}

/// ROF energy written out directly: forward differences, zero gradient at the
/// far edge, intensities scaled to [0, 1].
pub fn rof_objective(f: &Raster, u: &Raster, weight: f64) -> f64 {
    let (w, h) = (u.width() as usize, u.height() as usize);
    let fv = |r: &Raster, x: usize, y: usize| r.data()[y * w + x] as f64 / 255.0;
    let mut fid = 0.0;
    let mut tv = 0.0;
    for y in 0..h {
        for x in 0..w {
            let d = fv(u, x, y) - fv(f, x, y);
            fid += d * d;
            let gx = if x + 1 < w { fv(u, x + 1, y) - fv(u, x, y) } else { 0.0 };
            let gy = if y + 1 < h { fv(u, x, y + 1) - fv(u, x, y) } else { 0.0 };
            tv += (gx * gx + gy * gy).sqrt();
        }
    }
    0.5 * fid + weight * tv
}

pub fn noisy_raster(seed: u64) -> Raster {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (w, h) = (rng.random_range(4..48), rng.random_range(4..48));
    let noise = Normal::new(0.0, rng.random_range(1.0..60.0)).unwrap();
    let split = rng.random_range(0..w as usize);
    let data = (0..(w * h) as usize)
        .map(|i| {
            let base: f64 = if i % (w as usize) < split { 40.0 } else { 200.0 };
            (base + noise.sample(&mut rng)).round().clamp(0.0, 255.0) as u8
        })
        .collect();
    Raster::new(w, h, 1, data).unwrap()
}

// ---- random instance generators ----

pub fn random_box(rng: &mut impl Rng) -> BBox {
    let w = rng.random_range(0.02..0.5);
    let h = rng.random_range(0.02..0.5);
    let cx = rng.random_range(w / 2.0..=1.0 - w / 2.0);
    let cy = rng.random_range(h / 2.0..=1.0 - h / 2.0);
    BBox::new(cx, cy, w, h).unwrap()
}

/// Box on a `grid` lattice.
pub fn random_grid_box(rng: &mut impl Rng, grid: u32) -> BBox {
    let g = grid as f64;
    let x0 = rng.random_range(0..grid - 1);
    let x1 = rng.random_range(x0 + 1..=grid);
    let y0 = rng.random_range(0..grid - 1);
    let y1 = rng.random_range(y0 + 1..=grid);
    BBox::from_corners(x0 as f64 / g, y0 as f64 / g, x1 as f64 / g, y1 as f64 / g).unwrap()
}

/// Perturbs a box so it overlaps the original by a random amount.
pub fn jitter(rng: &mut impl Rng, b: &BBox) -> BBox {
    let (x0, y0, x1, y1) = b.corners();
    let s = rng.random_range(0.0..0.6);
    let dx = (x1 - x0) * s * rng.random_range(-1.0..1.0);
    let dy = (y1 - y0) * s * rng.random_range(-1.0..1.0);
    BBox::from_corners(x0 + dx, y0 + dy, x1 + dx, y1 + dy).unwrap_or(*b)
}

/// Confidence from a small palette so ties are common.
pub fn random_confidence(rng: &mut impl Rng) -> f64 {
    if rng.random_bool(0.3) {
        [0.3, 0.5, 0.7, 0.9][rng.random_range(0..4)]
    } else {
        (rng.random_range(1..=100) as f64) / 100.0
    }
}

pub fn random_detections(rng: &mut impl Rng, max: usize, classes: u32) -> Vec<Detection> {
    let n = rng.random_range(0..=max);
    let mut out: Vec<Detection> = Vec::with_capacity(n);
    for _ in 0..n {
        let bbox = if !out.is_empty() && rng.random_bool(0.5) {
            let base = out[rng.random_range(0..out.len())].bbox;
            jitter(rng, &base)
        } else {
            random_box(rng)
        };
        out.push(Detection::new(bbox, rng.random_range(0..classes), random_confidence(rng)).unwrap());
    }
    out
}

/// Up to `max_images` images with at most `max_boxes` boxes in total. Some
/// detections are jittered copies of ground truth, others are noise.
pub fn random_eval_set(rng: &mut impl Rng, max_images: usize, max_boxes: usize, classes: u32) -> Vec<EvalImage> {
    let n_images = rng.random_range(1..=max_images);
    let mut budget = max_boxes;
    let mut out = Vec::new();
    for _ in 0..n_images {
        let n_gt = rng.random_range(0..=budget.min(5));
        budget -= n_gt;
        let ground_truth: Vec<Annotation> = (0..n_gt)
            .map(|_| Annotation::new(rng.random_range(0..classes), random_box(rng)))
            .collect();
        let n_det = rng.random_range(0..=budget.min(6));
        budget -= n_det;
        let detections = (0..n_det)
            .map(|_| {
                let (bbox, class_id) = if !ground_truth.is_empty() && rng.random_bool(0.7) {
                    let g = ground_truth[rng.random_range(0..ground_truth.len())];
                    let c = if rng.random_bool(0.85) { g.class_id } else { rng.random_range(0..classes) };
                    (jitter(rng, &g.bbox), c)
                } else {
                    (random_box(rng), rng.random_range(0..classes))
                };
                Detection::new(bbox, class_id, random_confidence(rng)).unwrap()
            })
            .collect();
        out.push(EvalImage { detections, ground_truth });
    }
    out
}
