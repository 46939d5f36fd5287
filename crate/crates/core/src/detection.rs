//! Box-regression coding, detection sets, score filtering and greedy NMS.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{iou, BBox};

/// `ln(1000 / 16)`, the usual cap on log-space size deltas before `exp`.
pub const DEFAULT_MAX_LOG_SCALE: f64 = 4.135_166_556_742_356;

/// Regression target of a box relative to an anchor: centre offsets in units
/// of the anchor size and log size ratios.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoxDelta {
    pub dx: f64,
    pub dy: f64,
    pub dw: f64,
    pub dh: f64,
}

impl BoxDelta {
    pub const ZERO: BoxDelta = BoxDelta {
        dx: 0.0,
        dy: 0.0,
        dw: 0.0,
        dh: 0.0,
    };

    pub fn is_finite(&self) -> bool {
        self.dx.is_finite() && self.dy.is_finite() && self.dw.is_finite() && self.dh.is_finite()
    }
}

pub fn encode(b: &BBox, anchor: &BBox) -> BoxDelta {
    let (cx, cy) = b.center();
    let (ax, ay) = anchor.center();
    BoxDelta {
        dx: (cx - ax) / anchor.w,
        dy: (cy - ay) / anchor.h,
        dw: libm::log(b.w / anchor.w),
        dh: libm::log(b.h / anchor.h),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecodeOptions {
    /// Intersect the result with `[0, w] x [0, h]`.
    pub clip_to: Option<(f64, f64)>,
    pub max_log_scale: f64,
}

impl Default for DecodeOptions {
    fn default() -> Self {
        Self {
            clip_to: None,
            max_log_scale: DEFAULT_MAX_LOG_SCALE,
        }
    }
}

impl DecodeOptions {
    pub fn clipped(w: f64, h: f64) -> Self {
        Self {
            clip_to: Some((w, h)),
            ..Self::default()
        }
    }
}

pub fn decode(delta: &BoxDelta, anchor: &BBox, opts: &DecodeOptions) -> Result<BBox> {
    if !delta.is_finite() {
        return Err(Error::InvalidArgument("non-finite box delta".into()));
    }
    let (ax, ay) = anchor.center();
    let cx = ax + delta.dx * anchor.w;
    let cy = ay + delta.dy * anchor.h;
    let w = anchor.w * libm::exp(delta.dw.min(opts.max_log_scale));
    let h = anchor.h * libm::exp(delta.dh.min(opts.max_log_scale));
    let b = BBox::from_center(cx, cy, w, h);
    match opts.clip_to {
        Some((iw, ih)) => b.clip(iw, ih).ok_or(Error::DegenerateDecoded),
        None => Ok(b),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Detection {
    pub image_id: u64,
    pub label_id: u32,
    pub bbox: BBox,
    pub score: f64,
}

impl Detection {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.score) {
            return Err(Error::InvalidDetection(alloc::format!(
                "score {} outside [0, 1] on image {}",
                self.score,
                self.image_id
            )));
        }
        if !self.bbox.is_valid() {
            return Err(Error::InvalidDetection(alloc::format!(
                "degenerate box {:?} on image {}",
                self.bbox,
                self.image_id
            )));
        }
        Ok(())
    }
}

/// Detections of one detector grouped by image, each group in input order.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct DetectionSet {
    pub provenance: String,
    by_image: BTreeMap<u64, Vec<Detection>>,
}

impl DetectionSet {
    pub fn new(provenance: impl Into<String>, detections: Vec<Detection>) -> Result<Self> {
        let mut by_image: BTreeMap<u64, Vec<Detection>> = BTreeMap::new();
        for d in detections {
            d.validate()?;
            by_image.entry(d.image_id).or_default().push(d);
        }
        Ok(Self {
            provenance: provenance.into(),
            by_image,
        })
    }

    pub fn len(&self) -> usize {
        self.by_image.values().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn image_ids(&self) -> impl Iterator<Item = u64> + '_ {
        self.by_image.keys().copied()
    }

    pub fn for_image(&self, image_id: u64) -> &[Detection] {
        self.by_image.get(&image_id).map(Vec::as_slice).unwrap_or(&[])
    }

    /// All detections, images ascending, input order within an image.
    pub fn iter(&self) -> impl Iterator<Item = &Detection> + '_ {
        self.by_image.values().flatten()
    }

    fn map_groups(&self, mut f: impl FnMut(&[Detection]) -> Vec<Detection>) -> Self {
        Self {
            provenance: self.provenance.clone(),
            by_image: self.by_image.iter().map(|(&id, dets)| (id, f(dets))).collect(),
        }
    }
}

/// Indices sorted by score descending; equal scores keep input order.
fn score_order(dets: &[Detection]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..dets.len()).collect();
    order.sort_by(|&a, &b| dets[b].score.total_cmp(&dets[a].score));
    order
}

/// Greedy NMS for detections of one image and one label. A box is suppressed
/// when its IoU with an already kept box is strictly above `iou_thresh`.
pub fn nms(dets: &[Detection], iou_thresh: f64) -> Vec<Detection> {
    let mut kept: Vec<&Detection> = Vec::new();
    for i in score_order(dets) {
        let d = &dets[i];
        if kept.iter().all(|k| iou(&k.bbox, &d.bbox) <= iou_thresh) {
            kept.push(d);
        }
    }
    kept.into_iter().cloned().collect()
}

/// Class-wise NMS on every image. Output per image is score-descending.
pub fn batched_nms(set: &DetectionSet, iou_thresh: f64) -> DetectionSet {
    set.map_groups(|dets| {
        let mut by_label: BTreeMap<u32, Vec<Detection>> = BTreeMap::new();
        for d in dets {
            by_label.entry(d.label_id).or_default().push(d.clone());
        }
        let survivors: Vec<Detection> = by_label.values().flat_map(|g| nms(g, iou_thresh)).collect();
        let order = score_order(&survivors);
        order.into_iter().map(|i| survivors[i].clone()).collect()
    })
}

/// Drop detections scoring below `score_thresh`, then keep the
/// `max_per_image` best of each image across labels.
pub fn filter_detections(set: &DetectionSet, score_thresh: f64, max_per_image: usize) -> DetectionSet {
    set.map_groups(|dets| {
        score_order(dets)
            .into_iter()
            .filter(|&i| dets[i].score >= score_thresh)
            .take(max_per_image)
            .map(|i| dets[i].clone())
            .collect()
    })
}

/// Test-time defaults: score 0.05, 100 detections per image.
pub const DEFAULT_SCORE_THRESH: f64 = 0.05;
pub const DEFAULT_MAX_PER_IMAGE: usize = 100;
