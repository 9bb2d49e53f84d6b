//! JSON-lines inputs for evaluation.
//!
//! Image ground truth, one object per line:
//! `{"image_id": "a", "gt_class": 3, "gt_boxes": [[x0, y0, x1, y1], ...]}`
//!
//! Image predictions:
//! `{"image_id": "a", "pred_class": 3, "box_pred_class": [..], "box_gt_class": [..]}`
//! where either box may be `null` when localization failed.
//!
//! Temporal ground truth and predictions:
//! `{"video_id": "v", "class": 2, "interval": [t0, t1]}` and the same with a
//! `"score"` field.
//!
//! Blank lines are ignored. Boxes and intervals are validated on parse.

use std::collections::{BTreeMap, BTreeSet};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{BBox, Interval};
use crate::metrics::{EvalRecord, TemporalEvalSet, TemporalPrediction};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ImageTruthLine {
    pub image_id: String,
    pub gt_class: i64,
    pub gt_boxes: Vec<BBox>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ImagePredictionLine {
    pub image_id: String,
    pub pred_class: i64,
    #[serde(default)]
    pub box_pred_class: Option<BBox>,
    #[serde(default)]
    pub box_gt_class: Option<BBox>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TemporalTruthLine {
    pub video_id: String,
    pub class: i64,
    pub interval: Interval,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TemporalPredictionLine {
    pub video_id: String,
    pub class: i64,
    pub interval: Interval,
    pub score: f64,
}

fn parse_lines<T: DeserializeOwned>(text: &str, what: &str) -> Result<Vec<T>> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            serde_json::from_str(l).map_err(|e| Error::Parse(format!("{what} line {}: {e}", i + 1)))
        })
        .collect()
}

pub fn parse_image_truth(text: &str) -> Result<Vec<ImageTruthLine>> {
    let lines: Vec<ImageTruthLine> = parse_lines(text, "ground truth")?;
    if let Some(l) = lines.iter().find(|l| l.gt_boxes.is_empty()) {
        return Err(Error::Parse(format!("image {:?} has no ground-truth boxes", l.image_id)));
    }
    Ok(lines)
}

pub fn parse_image_predictions(text: &str) -> Result<Vec<ImagePredictionLine>> {
    parse_lines(text, "prediction")
}

pub fn parse_temporal_truth(text: &str) -> Result<Vec<TemporalTruthLine>> {
    parse_lines(text, "ground truth")
}

pub fn parse_temporal_predictions(text: &str) -> Result<Vec<TemporalPredictionLine>> {
    let lines: Vec<TemporalPredictionLine> = parse_lines(text, "prediction")?;
    if let Some(l) = lines.iter().find(|l| !l.score.is_finite()) {
        return Err(Error::Parse(format!("non-finite score in video {:?}", l.video_id)));
    }
    Ok(lines)
}

/// Pair ground truth with predictions by `image_id`, in ground-truth order.
/// An image without a prediction becomes a miss; duplicate ids and
/// predictions for unknown images are errors.
pub fn join_image_records(
    truth: Vec<ImageTruthLine>,
    predictions: Vec<ImagePredictionLine>,
) -> Result<Vec<EvalRecord>> {
    let mut seen = BTreeSet::new();
    for t in &truth {
        if !seen.insert(t.image_id.as_str()) {
            return Err(Error::Parse(format!("duplicate ground truth for image {:?}", t.image_id)));
        }
    }
    let mut by_id: BTreeMap<String, ImagePredictionLine> = BTreeMap::new();
    for p in predictions {
        if !seen.contains(p.image_id.as_str()) {
            return Err(Error::Parse(format!("prediction for unknown image {:?}", p.image_id)));
        }
        let id = p.image_id.clone();
        if by_id.insert(id.clone(), p).is_some() {
            return Err(Error::Parse(format!("duplicate prediction for image {id:?}")));
        }
    }
    Ok(truth
        .into_iter()
        .map(|t| {
            let pred = by_id.remove(&t.image_id);
            EvalRecord {
                pred_class: pred.as_ref().map(|p| p.pred_class),
                box_for_pred_class: pred.as_ref().and_then(|p| p.box_pred_class),
                box_for_gt_class: pred.as_ref().and_then(|p| p.box_gt_class),
                image_id: t.image_id,
                gt_class: t.gt_class,
                gt_boxes: t.gt_boxes,
            }
        })
        .collect())
}

pub fn build_temporal_set(
    truth: Vec<TemporalTruthLine>,
    predictions: Vec<TemporalPredictionLine>,
) -> TemporalEvalSet {
    let mut set = TemporalEvalSet::default();
    for t in truth {
        set.add_truth(t.class, &t.video_id, t.interval);
    }
    for p in predictions {
        set.add_prediction(
            p.class,
            TemporalPrediction {
                video_id: p.video_id,
                interval: p.interval,
                score: p.score,
            },
        );
    }
    set
}
