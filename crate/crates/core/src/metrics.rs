//! Weakly-supervised localization metrics.
//!
//! * GT-known Loc: the box predicted for the ground-truth class overlaps a
//!   ground-truth box by more than the IoU threshold.
//! * Top-1 Loc: additionally, the top-1 predicted class is correct.
//! * Temporal mAP@θ: per-class average precision of scored intervals, with
//!   greedy one-to-one matching at IoU > θ, averaged over classes that have
//!   ground truth.
//!
//! AP is the non-interpolated all-point sum `Σ_TP precision@rank / n_gt`.

use std::cmp::Ordering;
use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{BBox, Interval};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvalConfig {
    pub iou_threshold: f64,
    /// Require `IoU > θ`; otherwise `IoU >= θ`.
    pub strict: bool,
}

impl Default for EvalConfig {
    fn default() -> Self {
        Self {
            iou_threshold: 0.5,
            strict: true,
        }
    }
}

impl EvalConfig {
    pub fn new(iou_threshold: f64, strict: bool) -> Result<Self> {
        if !(iou_threshold > 0.0 && iou_threshold < 1.0) {
            return Err(Error::config(format!(
                "IoU threshold must be in (0, 1), got {iou_threshold}"
            )));
        }
        Ok(Self {
            iou_threshold,
            strict,
        })
    }

    #[inline]
    pub fn passes(&self, iou: f64) -> bool {
        if self.strict {
            iou > self.iou_threshold
        } else {
            iou >= self.iou_threshold
        }
    }
}

/// Everything needed to score one image.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalRecord {
    pub image_id: String,
    pub gt_class: i64,
    pub gt_boxes: Vec<BBox>,
    /// `None` when no prediction exists for the image.
    pub pred_class: Option<i64>,
    /// `None` when localization produced no box (e.g. a degenerate CAM).
    pub box_for_pred_class: Option<BBox>,
    pub box_for_gt_class: Option<BBox>,
}

fn best_iou(pred: Option<&BBox>, gt: &[BBox]) -> f64 {
    match pred {
        Some(p) => gt.iter().map(|g| p.iou(g)).fold(0.0, f64::max),
        None => 0.0,
    }
}

fn check_records(records: &[EvalRecord]) -> Result<()> {
    if records.is_empty() {
        return Err(Error::EmptyRecords);
    }
    if let Some(r) = records.iter().find(|r| r.gt_boxes.is_empty()) {
        return Err(Error::Parse(format!("image {:?} has no ground-truth boxes", r.image_id)));
    }
    Ok(())
}

pub fn gt_known_correct(record: &EvalRecord, cfg: &EvalConfig) -> bool {
    cfg.passes(best_iou(record.box_for_gt_class.as_ref(), &record.gt_boxes))
}

pub fn top1_correct(record: &EvalRecord, cfg: &EvalConfig) -> bool {
    record.pred_class == Some(record.gt_class)
        && cfg.passes(best_iou(record.box_for_pred_class.as_ref(), &record.gt_boxes))
}

pub fn gt_known_loc(records: &[EvalRecord], cfg: &EvalConfig) -> Result<f64> {
    check_records(records)?;
    let hits = records.iter().filter(|r| gt_known_correct(r, cfg)).count();
    Ok(hits as f64 / records.len() as f64)
}

pub fn top1_loc(records: &[EvalRecord], cfg: &EvalConfig) -> Result<f64> {
    check_records(records)?;
    let hits = records.iter().filter(|r| top1_correct(r, cfg)).count();
    Ok(hits as f64 / records.len() as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TemporalPrediction {
    pub video_id: String,
    pub interval: Interval,
    pub score: f64,
}

/// Ground-truth instances per video for one class.
pub type VideoTruth = BTreeMap<String, Vec<Interval>>;

#[derive(Debug, Clone, Default, PartialEq)]
pub struct TemporalEvalSet {
    pub ground_truth: BTreeMap<i64, VideoTruth>,
    pub predictions: BTreeMap<i64, Vec<TemporalPrediction>>,
}

impl TemporalEvalSet {
    pub fn add_truth(&mut self, class: i64, video_id: &str, interval: Interval) {
        self.ground_truth
            .entry(class)
            .or_default()
            .entry(video_id.to_string())
            .or_default()
            .push(interval);
    }

    pub fn add_prediction(&mut self, class: i64, prediction: TemporalPrediction) {
        self.predictions.entry(class).or_default().push(prediction);
    }
}

/// Score descending, then earlier start, then video id.
pub fn ranking_order(a: &TemporalPrediction, b: &TemporalPrediction) -> Ordering {
    b.score
        .total_cmp(&a.score)
        .then(a.interval.t0().cmp(&b.interval.t0()))
        .then_with(|| a.video_id.cmp(&b.video_id))
}

/// TP/FP flag for each prediction, in ranked order.
pub fn match_predictions(
    predictions: &[TemporalPrediction],
    ground_truth: &VideoTruth,
    cfg: &EvalConfig,
) -> Vec<bool> {
    let mut ranked: Vec<&TemporalPrediction> = predictions.iter().collect();
    ranked.sort_by(|a, b| ranking_order(a, b));

    let mut used: BTreeMap<&str, Vec<bool>> = ground_truth
        .iter()
        .map(|(v, gts)| (v.as_str(), vec![false; gts.len()]))
        .collect();

    ranked
        .into_iter()
        .map(|p| {
            let (Some(gts), Some(taken)) = (
                ground_truth.get(&p.video_id),
                used.get_mut(p.video_id.as_str()),
            ) else {
                return false;
            };
            let mut best: Option<(usize, f64)> = None;
            for (j, gt) in gts.iter().enumerate() {
                if taken[j] {
                    continue;
                }
                let iou = p.interval.iou(gt);
                if cfg.passes(iou) && best.map_or(true, |(_, b)| iou > b) {
                    best = Some((j, iou));
                }
            }
            match best {
                Some((j, _)) => {
                    taken[j] = true;
                    true
                }
                None => false,
            }
        })
        .collect()
}

/// All-point AP for one class. Zero when there is ground truth but nothing
/// matches; `None` when the class has no ground truth.
pub fn average_precision(
    predictions: &[TemporalPrediction],
    ground_truth: &VideoTruth,
    cfg: &EvalConfig,
) -> Option<f64> {
    let n_gt: usize = ground_truth.values().map(Vec::len).sum();
    if n_gt == 0 {
        return None;
    }
    let mut tp = 0usize;
    let mut sum = 0.0f64;
    for (rank, hit) in match_predictions(predictions, ground_truth, cfg).into_iter().enumerate() {
        if hit {
            tp += 1;
            sum += tp as f64 / (rank + 1) as f64;
        }
    }
    Some(sum / n_gt as f64)
}

/// Per-class AP plus their unweighted mean.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MeanApReport {
    pub iou_threshold: f64,
    /// `None` when no class has ground truth.
    pub map: Option<f64>,
    pub per_class: BTreeMap<i64, f64>,
}

pub fn mean_ap_report(set: &TemporalEvalSet, cfg: &EvalConfig) -> MeanApReport {
    let empty = Vec::new();
    let per_class: BTreeMap<i64, f64> = set
        .ground_truth
        .iter()
        .filter_map(|(class, truth)| {
            let preds = set.predictions.get(class).unwrap_or(&empty);
            average_precision(preds, truth, cfg).map(|ap| (*class, ap))
        })
        .collect();
    let map = if per_class.is_empty() {
        None
    } else {
        Some(per_class.values().sum::<f64>() / per_class.len() as f64)
    };
    MeanApReport {
        iou_threshold: cfg.iou_threshold,
        map,
        per_class,
    }
}

pub fn mean_ap(set: &TemporalEvalSet, cfg: &EvalConfig) -> Option<f64> {
    mean_ap_report(set, cfg).map
}

/// The IoU thresholds used for temporal evaluation.
pub const TEMPORAL_THRESHOLDS: [f64; 5] = [0.1, 0.2, 0.3, 0.4, 0.5];
