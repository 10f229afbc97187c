//! Detection metrics: greedy matching, precision/recall/F1, 101-point
//! interpolated AP, mAP over IoU thresholds and the confusion matrix.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::dataset::Annotation;
use crate::detection::{confidence_order, iou, Detection, EVAL_CONF_THRESHOLD};
use crate::error::{Error, Result};
use crate::script::ClassInventory;

/// IoU thresholds 0.50, 0.55, ..., 0.95.
pub const COCO_IOU_THRESHOLDS: [f64; 10] = [0.50, 0.55, 0.60, 0.65, 0.70, 0.75, 0.80, 0.85, 0.90, 0.95];
pub const CONFUSION_IOU: f64 = 0.45;
pub const RECALL_POINTS: usize = 101;

/// Detections and ground truth for one image.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct EvalImage {
    pub detections: Vec<Detection>,
    pub ground_truth: Vec<Annotation>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DetMatch {
    pub gt: Option<usize>,
    pub iou: f64,
}

/// Matching of one image's detections against its ground truth.
/// `matches` is indexed like the input detections.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MatchResult {
    pub matches: Vec<DetMatch>,
    pub gt_matched: Vec<bool>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct MatchCounts {
    pub tp: u64,
    pub fp: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
}

impl std::ops::Add for MatchCounts {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self {
            tp: self.tp + o.tp,
            fp: self.fp + o.fp,
            fn_: self.fn_ + o.fn_,
        }
    }
}

impl MatchResult {
    pub fn counts(&self) -> MatchCounts {
        let tp = self.matches.iter().filter(|m| m.gt.is_some()).count() as u64;
        MatchCounts {
            tp,
            fp: self.matches.len() as u64 - tp,
            fn_: self.gt_matched.iter().filter(|m| !**m).count() as u64,
        }
    }
}

/// Greedy matching in confidence order. Each detection takes the unmatched
/// GT (of its class when `class_aware`) with the highest IoU at or above
/// `iou_threshold`; equal IoUs go to the lower GT index.
pub fn match_detections(
    dets: &[Detection],
    gts: &[Annotation],
    iou_threshold: f64,
    class_aware: bool,
) -> MatchResult {
    let mut matches = vec![DetMatch { gt: None, iou: 0.0 }; dets.len()];
    let mut gt_matched = vec![false; gts.len()];
    for i in confidence_order(dets) {
        let d = &dets[i];
        let mut best: Option<(usize, f64)> = None;
        for (g, gt) in gts.iter().enumerate() {
            if gt_matched[g] || (class_aware && gt.class_id != d.class_id) {
                continue;
            }
            let v = iou(&d.bbox, &gt.bbox);
            if v >= iou_threshold && best.is_none_or(|(_, b)| v > b) {
                best = Some((g, v));
            }
        }
        if let Some((g, v)) = best {
            gt_matched[g] = true;
            matches[i] = DetMatch { gt: Some(g), iou: v };
        }
    }
    MatchResult { matches, gt_matched }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Prf {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

fn ratio(num: u64, den: u64) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

/// Harmonic mean of precision and recall; 0 when both are 0.
pub fn f1_score(precision: f64, recall: f64) -> f64 {
    if precision + recall <= 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    }
}

pub fn precision_recall_f1(counts: MatchCounts) -> Prf {
    let precision = ratio(counts.tp, counts.tp + counts.fp);
    let recall = ratio(counts.tp, counts.tp + counts.fn_);
    Prf {
        precision,
        recall,
        f1: f1_score(precision, recall),
    }
}

/// Per-class (confidence, is-TP) records and GT counts at one IoU threshold.
fn class_records(images: &[EvalImage], iou_threshold: f64) -> BTreeMap<u32, (Vec<(f64, bool)>, u64)> {
    let mut out: BTreeMap<u32, (Vec<(f64, bool)>, u64)> = BTreeMap::new();
    for img in images {
        let m = match_detections(&img.detections, &img.ground_truth, iou_threshold, true);
        for (d, dm) in img.detections.iter().zip(&m.matches) {
            out.entry(d.class_id).or_default().0.push((d.confidence, dm.gt.is_some()));
        }
        for g in &img.ground_truth {
            out.entry(g.class_id).or_default().1 += 1;
        }
    }
    out
}

/// 101-point interpolated AP of ranked records against `num_gt` objects.
///
/// Detections sharing a confidence enter the curve together, so the result
/// does not depend on input order.
fn interpolated_ap(records: &mut [(f64, bool)], num_gt: u64) -> f64 {
    records.sort_by(|a, b| b.0.total_cmp(&a.0));
    // (tp, detections) at the end of each confidence group
    let mut points: Vec<(u64, u64)> = Vec::new();
    let (mut tp, mut n) = (0u64, 0u64);
    for (k, &(conf, is_tp)) in records.iter().enumerate() {
        tp += u64::from(is_tp);
        n += 1;
        if records.get(k + 1).is_none_or(|next| next.0 != conf) {
            points.push((tp, n));
        }
    }
    let mut best_after = vec![0.0f64; points.len() + 1];
    for k in (0..points.len()).rev() {
        best_after[k] = best_after[k + 1].max(ratio(points[k].0, points[k].1));
    }
    let mut sum = 0.0;
    let mut k = 0;
    for r in 0..RECALL_POINTS as u64 {
        // recall tp/num_gt >= r/100, compared exactly
        while k < points.len() && points[k].0 * 100 < r * num_gt {
            k += 1;
        }
        sum += best_after[k];
    }
    sum / RECALL_POINTS as f64
}

/// AP per class at one IoU threshold. Classes without ground truth are absent.
pub fn average_precision(images: &[EvalImage], iou_threshold: f64) -> BTreeMap<u32, f64> {
    class_records(images, iou_threshold)
        .into_iter()
        .filter(|(_, (_, n))| *n > 0)
        .map(|(c, (mut recs, n))| (c, interpolated_ap(&mut recs, n)))
        .collect()
}

/// Arithmetic mean kept within the range of its inputs, so averaging equal
/// values returns that value exactly.
fn bounded_mean(values: &[f64]) -> f64 {
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    (values.iter().sum::<f64>() / values.len() as f64).clamp(lo, hi)
}

fn class_mean(ap: &BTreeMap<u32, f64>) -> f64 {
    bounded_mean(&ap.values().copied().collect::<Vec<_>>())
}

/// Mean over `thresholds` of the class-mean AP.
pub fn mean_ap(images: &[EvalImage], thresholds: &[f64]) -> Result<f64> {
    if thresholds.is_empty() {
        return Err(Error::invalid("no IoU thresholds given"));
    }
    let mut means = Vec::with_capacity(thresholds.len());
    for &t in thresholds {
        let ap = average_precision(images, t);
        if ap.is_empty() {
            return Err(Error::invalid("no ground truth to evaluate against"));
        }
        means.push(class_mean(&ap));
    }
    Ok(bounded_mean(&means))
}

/// Rows are ground-truth classes, columns predicted classes; index
/// `num_classes` is background.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub num_classes: usize,
    pub counts: Vec<Vec<u64>>,
}

impl ConfusionMatrix {
    pub fn new(num_classes: usize) -> Self {
        Self {
            num_classes,
            counts: vec![vec![0; num_classes + 1]; num_classes + 1],
        }
    }

    pub fn background(&self) -> usize {
        self.num_classes
    }

    pub fn get(&self, gt: usize, pred: usize) -> u64 {
        self.counts[gt][pred]
    }

    pub fn row_sum(&self, gt: usize) -> u64 {
        self.counts[gt].iter().sum()
    }

    pub fn is_diagonal(&self) -> bool {
        self.counts
            .iter()
            .enumerate()
            .all(|(r, row)| row.iter().enumerate().all(|(c, &v)| r == c || v == 0))
    }
}

fn check_class(class_id: u32, num_classes: usize) -> Result<usize> {
    if (class_id as usize) < num_classes {
        Ok(class_id as usize)
    } else {
        Err(Error::UnknownClass(class_id))
    }
}

/// Class-agnostic matching of detections with `confidence >= conf_threshold`.
pub fn confusion_matrix(
    images: &[EvalImage],
    num_classes: usize,
    iou_threshold: f64,
    conf_threshold: f64,
) -> Result<ConfusionMatrix> {
    let mut cm = ConfusionMatrix::new(num_classes);
    let bg = cm.background();
    for img in images {
        let dets: Vec<Detection> = img
            .detections
            .iter()
            .filter(|d| d.confidence >= conf_threshold)
            .copied()
            .collect();
        let m = match_detections(&dets, &img.ground_truth, iou_threshold, false);
        for (d, dm) in dets.iter().zip(&m.matches) {
            let pred = check_class(d.class_id, num_classes)?;
            let gt = match dm.gt {
                Some(g) => check_class(img.ground_truth[g].class_id, num_classes)?,
                None => bg,
            };
            cm.counts[gt][pred] += 1;
        }
        for (g, matched) in img.ground_truth.iter().zip(&m.gt_matched) {
            if !matched {
                cm.counts[check_class(g.class_id, num_classes)?][bg] += 1;
            }
        }
    }
    Ok(cm)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvalConfig {
    /// IoU for point metrics, the PR sweep and mAP@50.
    pub iou_threshold: f64,
    /// Confidence cut for the point metrics.
    pub conf_threshold: f64,
    pub confusion_iou: f64,
    pub confusion_conf: f64,
}

impl Default for EvalConfig {
    fn default() -> Self {
        Self {
            iou_threshold: 0.5,
            conf_threshold: EVAL_CONF_THRESHOLD,
            confusion_iou: CONFUSION_IOU,
            confusion_conf: EVAL_CONF_THRESHOLD,
        }
    }
}

impl EvalConfig {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("iou_threshold", self.iou_threshold),
            ("conf_threshold", self.conf_threshold),
            ("confusion_iou", self.confusion_iou),
            ("confusion_conf", self.confusion_conf),
        ] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::config(format!("{name} must lie in [0, 1], got {v}")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub confidence: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassAp {
    pub class_id: u32,
    pub name: Option<String>,
    pub gt_count: u64,
    pub ap50: f64,
    pub ap50_95: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub images: usize,
    pub iou_threshold: f64,
    pub conf_threshold: f64,
    pub counts: MatchCounts,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    /// Highest-F1 point of the confidence sweep.
    pub best_f1: SweepPoint,
    pub pr_curve: Vec<SweepPoint>,
    pub map50: f64,
    pub map50_95: f64,
    pub per_class: Vec<ClassAp>,
    pub confusion: ConfusionMatrix,
}

/// Precision/recall at every distinct detection confidence, highest first.
pub fn pr_sweep(images: &[EvalImage], iou_threshold: f64) -> Vec<SweepPoint> {
    let mut recs: Vec<(f64, bool)> = Vec::new();
    let mut num_gt = 0u64;
    for img in images {
        let m = match_detections(&img.detections, &img.ground_truth, iou_threshold, true);
        recs.extend(img.detections.iter().zip(&m.matches).map(|(d, dm)| (d.confidence, dm.gt.is_some())));
        num_gt += img.ground_truth.len() as u64;
    }
    recs.sort_by(|a, b| b.0.total_cmp(&a.0));
    let mut out = Vec::new();
    let (mut tp, mut n) = (0u64, 0u64);
    for (k, &(conf, is_tp)) in recs.iter().enumerate() {
        tp += u64::from(is_tp);
        n += 1;
        if recs.get(k + 1).is_none_or(|next| next.0 != conf) {
            let p = precision_recall_f1(MatchCounts { tp, fp: n - tp, fn_: num_gt - tp });
            out.push(SweepPoint {
                confidence: conf,
                precision: p.precision,
                recall: p.recall,
                f1: p.f1,
            });
        }
    }
    out
}

/// Full metric suite over a set of images.
pub fn evaluate(
    images: &[EvalImage],
    num_classes: usize,
    inventory: Option<&ClassInventory>,
    config: &EvalConfig,
) -> Result<EvalReport> {
    config.validate()?;
    let counts = images
        .iter()
        .map(|img| {
            let dets: Vec<Detection> = img
                .detections
                .iter()
                .filter(|d| d.confidence >= config.conf_threshold)
                .copied()
                .collect();
            match_detections(&dets, &img.ground_truth, config.iou_threshold, true).counts()
        })
        .fold(MatchCounts::default(), |a, b| a + b);
    let prf = precision_recall_f1(counts);

    let pr_curve = pr_sweep(images, config.iou_threshold);
    let best_f1 = pr_curve
        .iter()
        .copied()
        .fold(None::<SweepPoint>, |best, p| match best {
            Some(b) if b.f1 >= p.f1 => Some(b),
            _ => Some(p),
        })
        .unwrap_or(SweepPoint {
            confidence: 1.0,
            precision: 0.0,
            recall: 0.0,
            f1: 0.0,
        });

    let ap50 = average_precision(images, 0.5);
    if ap50.is_empty() {
        return Err(Error::invalid("no ground truth to evaluate against"));
    }
    let mut per_threshold: BTreeMap<u32, Vec<f64>> = BTreeMap::new();
    let mut means = Vec::with_capacity(COCO_IOU_THRESHOLDS.len());
    for &t in &COCO_IOU_THRESHOLDS {
        let ap = average_precision(images, t);
        means.push(class_mean(&ap));
        for (c, v) in ap {
            per_threshold.entry(c).or_default().push(v);
        }
    }
    let map50_95 = bounded_mean(&means);
    let map50 = class_mean(&ap50);

    let mut gt_counts: BTreeMap<u32, u64> = BTreeMap::new();
    for g in images.iter().flat_map(|i| &i.ground_truth) {
        *gt_counts.entry(g.class_id).or_default() += 1;
    }
    let per_class = ap50
        .iter()
        .map(|(&c, &ap)| ClassAp {
            class_id: c,
            name: inventory.and_then(|inv| inv.get(c).ok()).map(|g| g.latin.clone()),
            gt_count: gt_counts[&c],
            ap50: ap,
            ap50_95: bounded_mean(&per_threshold[&c]),
        })
        .collect();

    let confusion = confusion_matrix(images, num_classes, config.confusion_iou, config.confusion_conf)?;
    Ok(EvalReport {
        images: images.len(),
        iou_threshold: config.iou_threshold,
        conf_threshold: config.conf_threshold,
        counts,
        precision: prf.precision,
        recall: prf.recall,
        f1: prf.f1,
        best_f1,
        pr_curve,
        map50,
        map50_95,
        per_class,
        confusion,
    })
}

impl EvalReport {
    /// Human-readable summary table.
    pub fn to_table(&self) -> String {
        let mut s = String::new();
        writeln!(s, "images      {}", self.images).unwrap();
        writeln!(
            s,
            "TP/FP/FN    {}/{}/{}  (conf >= {}, IoU >= {})",
            self.counts.tp, self.counts.fp, self.counts.fn_, self.conf_threshold, self.iou_threshold
        )
        .unwrap();
        writeln!(s, "precision   {:.4}", self.precision).unwrap();
        writeln!(s, "recall      {:.4}", self.recall).unwrap();
        writeln!(s, "F1          {:.4}", self.f1).unwrap();
        writeln!(
            s,
            "best F1     {:.4}  at conf {:.3} (P {:.4}, R {:.4})",
            self.best_f1.f1, self.best_f1.confidence, self.best_f1.precision, self.best_f1.recall
        )
        .unwrap();
        writeln!(s, "mAP@50      {:.4}", self.map50).unwrap();
        writeln!(s, "mAP@50-95   {:.4}", self.map50_95).unwrap();
        writeln!(s).unwrap();
        writeln!(s, "{:<8} {:<8} {:>6} {:>8} {:>10}", "class", "name", "gt", "AP50", "AP50-95").unwrap();
        for c in &self.per_class {
            writeln!(
                s,
                "{:<8} {:<8} {:>6} {:>8.4} {:>10.4}",
                c.class_id,
                c.name.as_deref().unwrap_or("-"),
                c.gt_count,
                c.ap50,
                c.ap50_95
            )
            .unwrap();
        }
        s
    }
}
