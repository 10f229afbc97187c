//! Detection geometry and post-processing.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::dataset::BBox;
use crate::error::{Error, Result};

/// Confidence cut for evaluation sweeps.
pub const EVAL_CONF_THRESHOLD: f64 = 0.25;
/// Confidence cut for user-facing predictions.
pub const PREDICT_CONF_THRESHOLD: f64 = 0.6;
pub const DEFAULT_NMS_IOU: f64 = 0.45;
/// Two boxes share a text line when their vertical overlap reaches this
/// fraction of the smaller height.
pub const LINE_OVERLAP_FRACTION: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Detection {
    pub bbox: BBox,
    pub class_id: u32,
    pub confidence: f64,
}

impl Detection {
    pub fn new(bbox: BBox, class_id: u32, confidence: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&confidence) {
            return Err(Error::validation(
                "confidence",
                format!("{confidence} is outside [0, 1]"),
            ));
        }
        Ok(Self {
            bbox,
            class_id,
            confidence,
        })
    }
}

/// Filtering and suppression settings applied to raw detector output.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PostProcess {
    pub conf_threshold: f64,
    pub nms_iou: f64,
    pub class_aware: bool,
}

impl Default for PostProcess {
    fn default() -> Self {
        Self {
            conf_threshold: PREDICT_CONF_THRESHOLD,
            nms_iou: DEFAULT_NMS_IOU,
            class_aware: true,
        }
    }
}

impl PostProcess {
    pub fn for_eval() -> Self {
        Self {
            conf_threshold: EVAL_CONF_THRESHOLD,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.conf_threshold) {
            return Err(Error::config("conf threshold must lie in [0, 1]"));
        }
        if !(0.0..=1.0).contains(&self.nms_iou) {
            return Err(Error::config("nms iou threshold must lie in [0, 1]"));
        }
        Ok(())
    }

    pub fn apply(&self, dets: &[Detection]) -> Vec<Detection> {
        nms(
            &filter_confidence(dets, self.conf_threshold),
            self.nms_iou,
            self.class_aware,
        )
    }
}

pub fn iou(a: &BBox, b: &BBox) -> f64 {
    let (ax0, ay0, ax1, ay1) = a.corners();
    let (bx0, by0, bx1, by1) = b.corners();
    let iw = (ax1.min(bx1) - ax0.max(bx0)).max(0.0);
    let ih = (ay1.min(by1) - ay0.max(by0)).max(0.0);
    let inter = iw * ih;
    if inter <= 0.0 {
        return 0.0;
    }
    let union = (ax1 - ax0) * (ay1 - ay0) + (bx1 - bx0) * (by1 - by0) - inter;
    (inter / union).clamp(0.0, 1.0)
}

/// Keeps detections with `confidence >= threshold`, preserving order.
pub fn filter_confidence(dets: &[Detection], threshold: f64) -> Vec<Detection> {
    dets.iter()
        .filter(|d| d.confidence >= threshold)
        .copied()
        .collect()
}

/// Ranking used by NMS and matching: confidence descending, then lower class
/// id, then input position.
pub fn confidence_order(dets: &[Detection]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..dets.len()).collect();
    order.sort_by(|&a, &b| rank_cmp(&dets[a], &dets[b]).then(a.cmp(&b)));
    order
}

fn rank_cmp(a: &Detection, b: &Detection) -> Ordering {
    b.confidence
        .total_cmp(&a.confidence)
        .then(a.class_id.cmp(&b.class_id))
}

/// Greedy non-maximum suppression. A box is suppressed when its IoU with an
/// already kept box exceeds `iou_threshold` (and, when `class_aware`, the
/// classes match). Output is in confidence order.
pub fn nms(dets: &[Detection], iou_threshold: f64, class_aware: bool) -> Vec<Detection> {
    let mut kept: Vec<Detection> = Vec::new();
    for i in confidence_order(dets) {
        let d = dets[i];
        let suppressed = kept.iter().any(|k| {
            (!class_aware || k.class_id == d.class_id) && iou(&k.bbox, &d.bbox) > iou_threshold
        });
        if !suppressed {
            kept.push(d);
        }
    }
    kept
}

/// Detection indices grouped into lines (top to bottom), each left to right.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReadingOrder {
    pub lines: Vec<Vec<usize>>,
}

impl ReadingOrder {
    pub fn is_empty(&self) -> bool {
        self.lines.is_empty()
    }

    pub fn flatten(&self) -> impl Iterator<Item = usize> + '_ {
        self.lines.iter().flatten().copied()
    }
}

/// Groups boxes into text lines and orders them for reading.
///
/// Two boxes are linked when their vertical overlap is at least half the
/// smaller height; lines are the connected components of that relation,
/// ordered by mean center-y, and each line is ordered by center-x.
pub fn assemble_reading_order(dets: &[Detection]) -> ReadingOrder {
    let n = dets.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], mut i: usize) -> usize {
        while parent[i] != i {
            parent[i] = parent[parent[i]];
            i = parent[i];
        }
        i
    }

    for i in 0..n {
        for j in i + 1..n {
            let (_, ai0, _, ai1) = dets[i].bbox.corners();
            let (_, aj0, _, aj1) = dets[j].bbox.corners();
            let overlap = ai1.min(aj1) - ai0.max(aj0);
            let smaller = dets[i].bbox.h().min(dets[j].bbox.h());
            if overlap >= LINE_OVERLAP_FRACTION * smaller {
                let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
                if ri != rj {
                    parent[ri.max(rj)] = ri.min(rj);
                }
            }
        }
    }

    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut root_slot: Vec<Option<usize>> = vec![None; n];
    for i in 0..n {
        let r = find(&mut parent, i);
        match root_slot[r] {
            Some(g) => groups[g].push(i),
            None => {
                root_slot[r] = Some(groups.len());
                groups.push(vec![i]);
            }
        }
    }

    for line in &mut groups {
        line.sort_by(|&a, &b| {
            dets[a]
                .bbox
                .cx()
                .total_cmp(&dets[b].bbox.cx())
                .then(a.cmp(&b))
        });
    }
    let mean_cy = |line: &Vec<usize>| {
        line.iter().map(|&i| dets[i].bbox.cy()).sum::<f64>() / line.len() as f64
    };
    groups.sort_by(|a, b| mean_cy(a).total_cmp(&mean_cy(b)).then(a[0].cmp(&b[0])));
    ReadingOrder { lines: groups }
}
