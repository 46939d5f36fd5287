//! COCO-style box evaluation.
//!
//! Detections are matched to ground truth per (image, label) greedily in
//! score order, separately for every IoU threshold and area range. Matches are
//! pooled over images into one precision/recall curve per (label, threshold,
//! area), which is reduced to 101-point interpolated AP and to max recall.
//!
//! Area-restricted slices follow COCO: ground truth outside the range or
//! marked crowd is ignored, detections matched to ignored ground truth are
//! ignored, and unmatched detections outside the range are ignored. A slice
//! without any counted ground truth has no AP (`None`) and is left out of
//! every mean.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::fmt::Write;

use serde::{Deserialize, Serialize};

use crate::dataset::{GroundTruthInstance, LayoutDataset, Split};
use crate::detection::{Detection, DetectionSet};
use crate::error::{Error, Result};
use crate::geometry::{AreaBucket, AreaRange, BBox};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalConfig {
    pub iou_thresholds: Vec<f64>,
    pub recall_points: Vec<f64>,
    pub area_ranges: Vec<AreaRange>,
    /// Per image and label, highest scores first.
    pub max_detections: usize,
}

impl Default for EvalConfig {
    /// IoU 0.50:0.05:0.95, recall 0:0.01:1, all/small/medium/large, 100 detections.
    fn default() -> Self {
        Self {
            iou_thresholds: (0..10).map(|i| f64::from(50 + 5 * i) / 100.0).collect(),
            recall_points: (0..=100).map(|i| f64::from(i) / 100.0).collect(),
            area_ranges: AreaRange::coco(),
            max_detections: 100,
        }
    }
}

impl EvalConfig {
    pub fn validate(&self) -> Result<()> {
        let t = &self.iou_thresholds;
        if t.is_empty() || t.iter().any(|&x| !(x > 0.0 && x <= 1.0)) {
            return Err(Error::InvalidEvalConfig("IoU thresholds must lie in (0, 1]"));
        }
        if t.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidEvalConfig("IoU thresholds must be strictly increasing"));
        }
        let r = &self.recall_points;
        if r.len() < 2 || r[0] != 0.0 || r[r.len() - 1] != 1.0 {
            return Err(Error::InvalidEvalConfig("recall points must span [0, 1]"));
        }
        if r.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidEvalConfig("recall points must be strictly increasing"));
        }
        if self.area_ranges.is_empty() {
            return Err(Error::InvalidEvalConfig("no area ranges"));
        }
        if self.max_detections == 0 {
            return Err(Error::InvalidEvalConfig("max_detections must be positive"));
        }
        Ok(())
    }

    fn threshold_index(&self, t: f64) -> Option<usize> {
        self.iou_thresholds.iter().position(|&x| (x - t).abs() < 1e-9)
    }

    fn area_index(&self, bucket: AreaBucket) -> Option<usize> {
        self.area_ranges.iter().position(|r| r.bucket == bucket)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DetOutcome {
    /// Matched the ground truth at this index.
    TruePositive(usize),
    FalsePositive,
    /// Matched an ignored ground truth, or unmatched outside the area range.
    Ignored,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EvalMatch {
    /// One outcome per detection, in input order.
    pub outcomes: Vec<DetOutcome>,
    /// Matching detection index per ground truth.
    pub gt_matched: Vec<Option<usize>>,
    /// Ground truths that count toward recall in this slice.
    pub counted_gt: usize,
}

/// Overlap used for matching: crowd regions are measured against the detection's own area.
fn match_iou(det: &BBox, gt: &GroundTruthInstance) -> f64 {
    let inter = det.intersection_area(&gt.bbox);
    if inter <= 0.0 {
        return 0.0;
    }
    let union = if gt.iscrowd {
        det.corner_area()
    } else {
        det.corner_area() + gt.bbox.corner_area() - inter
    };
    inter / union
}

/// Match one (image, label) cell over the whole area range.
pub fn match_for_eval(gts: &[GroundTruthInstance], dets: &[Detection], iou_thresh: f64) -> EvalMatch {
    match_in_range(gts, dets, iou_thresh, &AreaRange::ALL)
}

/// Match one (image, label) cell, applying COCO ignore rules for `range`.
pub fn match_in_range(
    gts: &[GroundTruthInstance],
    dets: &[Detection],
    iou_thresh: f64,
    range: &AreaRange,
) -> EvalMatch {
    let ious: Vec<f64> = dets
        .iter()
        .flat_map(|d| gts.iter().map(move |g| match_iou(&d.bbox, g)))
        .collect();
    let order = score_order(dets);
    match_cell(gts, dets, &order, &ious, iou_thresh, range)
}

fn score_order(dets: &[Detection]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..dets.len()).collect();
    order.sort_by(|&a, &b| dets[b].score.total_cmp(&dets[a].score));
    order
}

/// `ious` is row-major `dets x gts`; `order` lists the detections to match.
fn match_cell(
    gts: &[GroundTruthInstance],
    dets: &[Detection],
    order: &[usize],
    ious: &[f64],
    iou_thresh: f64,
    range: &AreaRange,
) -> EvalMatch {
    let ng = gts.len();
    let ignored: Vec<bool> = gts
        .iter()
        .map(|g| g.iscrowd || !range.contains(g.bbox.area()))
        .collect();
    // counted ground truth first, stable
    let mut gt_order: Vec<usize> = (0..ng).collect();
    gt_order.sort_by_key(|&g| ignored[g]);

    let mut gt_matched: Vec<Option<usize>> = vec![None; ng];
    let mut outcomes = vec![DetOutcome::Ignored; dets.len()];
    for &d in order {
        let mut best_iou = iou_thresh.min(1.0 - 1e-10);
        let mut best: Option<usize> = None;
        for &g in &gt_order {
            if gt_matched[g].is_some() && !gts[g].iscrowd {
                continue;
            }
            if let Some(b) = best {
                if !ignored[b] && ignored[g] {
                    break;
                }
            }
            let v = ious[d * ng + g];
            if v < best_iou {
                continue;
            }
            best_iou = v;
            best = Some(g);
        }
        outcomes[d] = match best {
            Some(g) => {
                gt_matched[g] = Some(d);
                if ignored[g] {
                    DetOutcome::Ignored
                } else {
                    DetOutcome::TruePositive(g)
                }
            }
            None if range.contains(dets[d].bbox.area()) => DetOutcome::FalsePositive,
            None => DetOutcome::Ignored,
        };
    }
    EvalMatch {
        outcomes,
        gt_matched,
        counted_gt: ignored.iter().filter(|&&i| !i).count(),
    }
}

/// Counted detections of one (label, threshold, area) slice pooled over
/// images, sorted by score descending.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PrCurve {
    pub scores: Vec<f64>,
    pub is_tp: Vec<bool>,
    pub n_gt: usize,
}

impl PrCurve {
    /// Sort pooled entries by score; equal scores keep pooling order.
    pub fn from_entries(mut entries: Vec<(f64, bool)>, n_gt: usize) -> Self {
        entries.sort_by(|a, b| b.0.total_cmp(&a.0));
        Self {
            scores: entries.iter().map(|e| e.0).collect(),
            is_tp: entries.iter().map(|e| e.1).collect(),
            n_gt,
        }
    }

    /// `(recall, precision)` after each detection.
    pub fn points(&self) -> Vec<(f64, f64)> {
        let mut tp = 0usize;
        let mut fp = 0usize;
        self.is_tp
            .iter()
            .map(|&hit| {
                if hit {
                    tp += 1;
                } else {
                    fp += 1;
                }
                (tp as f64 / self.n_gt as f64, tp as f64 / (tp + fp) as f64)
            })
            .collect()
    }

    /// Precision at each recall point: the best precision at any recall at or above it.
    pub fn interpolated(&self, recall_points: &[f64]) -> Vec<f64> {
        let pts = self.points();
        let mut envelope: Vec<f64> = pts.iter().map(|p| p.1).collect();
        for i in (1..envelope.len()).rev() {
            if envelope[i] > envelope[i - 1] {
                envelope[i - 1] = envelope[i];
            }
        }
        recall_points
            .iter()
            .map(|&r| {
                let idx = pts.partition_point(|p| p.0 < r);
                envelope.get(idx).copied().unwrap_or(0.0)
            })
            .collect()
    }

    /// Recall with every detection accepted; `None` without ground truth.
    pub fn max_recall(&self) -> Option<f64> {
        if self.n_gt == 0 {
            return None;
        }
        let tp = self.is_tp.iter().filter(|&&t| t).count();
        Some(tp as f64 / self.n_gt as f64)
    }
}

/// Mean interpolated precision over `recall_points`; `None` without ground truth.
pub fn average_precision(curve: &PrCurve, recall_points: &[f64]) -> Option<f64> {
    if curve.n_gt == 0 {
        return None;
    }
    let q = curve.interpolated(recall_points);
    Some(q.iter().sum::<f64>() / q.len() as f64)
}

/// Headline numbers, as percentages.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    #[serde(rename = "mAP")]
    pub map: Option<f64>,
    #[serde(rename = "AP50")]
    pub ap50: Option<f64>,
    #[serde(rename = "AP75")]
    pub ap75: Option<f64>,
    #[serde(rename = "APs")]
    pub aps: Option<f64>,
    #[serde(rename = "APm")]
    pub apm: Option<f64>,
    #[serde(rename = "APl")]
    pub apl: Option<f64>,
    #[serde(rename = "AR")]
    pub ar: Option<f64>,
}

impl Metrics {
    /// `(name, value)` in table column order.
    pub fn columns(&self) -> [(&'static str, Option<f64>); 7] {
        [
            ("mAP", self.map),
            ("AP50", self.ap50),
            ("AP75", self.ap75),
            ("APs", self.aps),
            ("APm", self.apm),
            ("APl", self.apl),
            ("AR", self.ar),
        ]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassMetrics {
    pub label: String,
    pub n_gt: usize,
    pub n_dets: usize,
    #[serde(flatten)]
    pub metrics: Metrics,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub detector: String,
    pub backbone: String,
    pub dataset: String,
    pub labels: Vec<String>,
    pub metrics: Metrics,
    pub per_class: Vec<ClassMetrics>,
    pub n_gt: usize,
    pub n_dets: usize,
    pub config: EvalConfig,
}

impl EvalReport {
    pub fn class(&self, label: &str) -> Option<&ClassMetrics> {
        self.per_class.iter().find(|c| c.label == label)
    }
}

type ScoredHits = Vec<(f64, bool)>;

/// Raw per-slice results, fractions in `[0, 1]`, indexed
/// `[label][threshold][area]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub labels: Vec<String>,
    pub config: EvalConfig,
    pub ap: Vec<Vec<Vec<Option<f64>>>>,
    pub recall: Vec<Vec<Vec<Option<f64>>>>,
    pub curves: Vec<Vec<Vec<PrCurve>>>,
    pub n_gt: Vec<usize>,
    pub n_dets: Vec<usize>,
}

fn mean(values: impl Iterator<Item = Option<f64>>) -> Option<f64> {
    let (sum, n) = values.flatten().fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    (n > 0).then(|| sum / n as f64)
}

impl Evaluation {
    fn slice_mean(
        &self,
        table: &[Vec<Vec<Option<f64>>>],
        labels: core::ops::Range<usize>,
        threshold: Option<usize>,
        area: Option<usize>,
    ) -> Option<f64> {
        let area = area?;
        let t_range = match threshold {
            Some(t) => t..t + 1,
            None => 0..self.config.iou_thresholds.len(),
        };
        mean(labels.flat_map(|k| {
            let t_range = t_range.clone();
            t_range.map(move |t| table[k][t][area])
        }))
    }

    fn metrics_for(&self, labels: core::ops::Range<usize>) -> Metrics {
        let cfg = &self.config;
        let all = cfg.area_index(AreaBucket::All);
        let pct = |v: Option<f64>| v.map(|x| x * 100.0);
        let ap = |t, a| pct(self.slice_mean(&self.ap, labels.clone(), t, a));
        Metrics {
            map: ap(None, all),
            ap50: cfg.threshold_index(0.5).and_then(|t| ap(Some(t), all)),
            ap75: cfg.threshold_index(0.75).and_then(|t| ap(Some(t), all)),
            aps: ap(None, cfg.area_index(AreaBucket::Small)),
            apm: ap(None, cfg.area_index(AreaBucket::Medium)),
            apl: ap(None, cfg.area_index(AreaBucket::Large)),
            ar: pct(self.slice_mean(&self.recall, labels, None, all)),
        }
    }

    pub fn report(&self, detector: &str, backbone: &str, dataset: &str) -> EvalReport {
        let per_class = self
            .labels
            .iter()
            .enumerate()
            .map(|(k, label)| ClassMetrics {
                label: label.clone(),
                n_gt: self.n_gt[k],
                n_dets: self.n_dets[k],
                metrics: self.metrics_for(k..k + 1),
            })
            .collect();
        EvalReport {
            detector: detector.to_string(),
            backbone: backbone.to_string(),
            dataset: dataset.to_string(),
            labels: self.labels.clone(),
            metrics: self.metrics_for(0..self.labels.len()),
            per_class,
            n_gt: self.n_gt.iter().sum(),
            n_dets: self.n_dets.iter().sum(),
            config: self.config.clone(),
        }
    }
}

/// Images the evaluator scores: the test split when one is attached,
/// otherwise every image.
pub fn evaluation_images(ds: &LayoutDataset) -> Vec<u64> {
    if ds.splits().is_empty() {
        ds.images().iter().map(|i| i.id).collect()
    } else {
        ds.image_ids(Split::Test)
    }
}

pub fn evaluate(ds: &LayoutDataset, dets: &DetectionSet, cfg: &EvalConfig) -> Result<EvalReport> {
    Ok(evaluate_raw(ds, dets, cfg)?.report(&dets.provenance, "", ""))
}

pub fn evaluate_raw(ds: &LayoutDataset, dets: &DetectionSet, cfg: &EvalConfig) -> Result<Evaluation> {
    cfg.validate()?;
    let schema = ds.schema();
    let images = evaluation_images(ds);
    let image_set: BTreeSet<u64> = images.iter().copied().collect();

    let unknown_images: Vec<u64> = dets.image_ids().filter(|id| !image_set.contains(id)).collect();
    if !unknown_images.is_empty() {
        return Err(Error::UnknownImages(unknown_images));
    }
    let unknown_labels: BTreeSet<u32> = dets
        .iter()
        .map(|d| d.label_id)
        .filter(|&l| !schema.contains_id(l))
        .collect();
    if !unknown_labels.is_empty() {
        return Err(Error::UnknownLabels(unknown_labels.into_iter().collect()));
    }

    let mut gts_by_cell: BTreeMap<(u64, u32), Vec<GroundTruthInstance>> = BTreeMap::new();
    for a in ds.instances() {
        if image_set.contains(&a.image_id) {
            gts_by_cell.entry((a.image_id, a.label_id)).or_default().push(a.clone());
        }
    }
    let mut dets_by_cell: BTreeMap<(u64, u32), Vec<Detection>> = BTreeMap::new();
    for d in dets.iter() {
        dets_by_cell
            .entry((d.image_id, d.label_id))
            .or_default()
            .push(d.clone());
    }

    let n_labels = schema.len();
    let n_t = cfg.iou_thresholds.len();
    let n_a = cfg.area_ranges.len();
    // [label][threshold][area] -> (score, true positive)
    let mut entries: Vec<Vec<Vec<ScoredHits>>> = vec![vec![vec![Vec::new(); n_a]; n_t]; n_labels];
    let mut counted: Vec<Vec<Vec<usize>>> = vec![vec![vec![0; n_a]; n_t]; n_labels];
    let mut n_gt = vec![0usize; n_labels];
    let mut n_dets = vec![0usize; n_labels];

    let empty_gts: Vec<GroundTruthInstance> = Vec::new();
    let empty_dets: Vec<Detection> = Vec::new();
    for &image_id in &images {
        for (label_id, _) in schema.iter() {
            let key = (image_id, label_id);
            let gts = gts_by_cell.get(&key).unwrap_or(&empty_gts);
            let cell_dets = dets_by_cell.get(&key).unwrap_or(&empty_dets);
            if gts.is_empty() && cell_dets.is_empty() {
                continue;
            }
            let k = label_id as usize - 1;
            n_gt[k] += gts.iter().filter(|g| !g.iscrowd).count();

            let mut order = score_order(cell_dets);
            order.truncate(cfg.max_detections);
            n_dets[k] += order.len();
            let ng = gts.len();
            let mut ious = vec![0.0; cell_dets.len() * ng];
            for &d in &order {
                for (g, gt) in gts.iter().enumerate() {
                    ious[d * ng + g] = match_iou(&cell_dets[d].bbox, gt);
                }
            }

            for (t, &thr) in cfg.iou_thresholds.iter().enumerate() {
                for (a, range) in cfg.area_ranges.iter().enumerate() {
                    let m = match_cell(gts, cell_dets, &order, &ious, thr, range);
                    counted[k][t][a] += m.counted_gt;
                    let slot = &mut entries[k][t][a];
                    for &d in &order {
                        match m.outcomes[d] {
                            DetOutcome::TruePositive(_) => slot.push((cell_dets[d].score, true)),
                            DetOutcome::FalsePositive => slot.push((cell_dets[d].score, false)),
                            DetOutcome::Ignored => {}
                        }
                    }
                }
            }
        }
    }

    let mut ap = vec![vec![vec![None; n_a]; n_t]; n_labels];
    let mut recall = vec![vec![vec![None; n_a]; n_t]; n_labels];
    let mut curves = vec![vec![vec![PrCurve::default(); n_a]; n_t]; n_labels];
    for k in 0..n_labels {
        for t in 0..n_t {
            for a in 0..n_a {
                let curve = PrCurve::from_entries(core::mem::take(&mut entries[k][t][a]), counted[k][t][a]);
                ap[k][t][a] = average_precision(&curve, &cfg.recall_points);
                recall[k][t][a] = curve.max_recall();
                curves[k][t][a] = curve;
            }
        }
    }

    Ok(Evaluation {
        labels: schema.names().to_vec(),
        config: cfg.clone(),
        ap,
        recall,
        curves,
        n_gt,
        n_dets,
    })
}

/// AP50 per label (rows) and run (columns), percentages.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabelComparison {
    pub labels: Vec<String>,
    pub runs: Vec<String>,
    pub ap50: Vec<Vec<Option<f64>>>,
}

pub fn per_label_report(reports: &[(&str, &EvalReport)]) -> Result<LabelComparison> {
    let (_, first) = reports
        .first()
        .ok_or(Error::EmptyInput("per_label_report needs at least one report"))?;
    for (name, r) in reports {
        if r.labels != first.labels {
            return Err(Error::SchemaMismatch(alloc::format!(
                "run {name:?} has labels {:?}, expected {:?}",
                r.labels,
                first.labels
            )));
        }
    }
    let ap50 = first
        .labels
        .iter()
        .map(|label| {
            reports
                .iter()
                .map(|(_, r)| r.class(label).and_then(|c| c.metrics.ap50))
                .collect()
        })
        .collect();
    Ok(LabelComparison {
        labels: first.labels.clone(),
        runs: reports.iter().map(|(n, _)| n.to_string()).collect(),
        ap50,
    })
}

impl LabelComparison {
    /// `label,<run>...` with two-decimal cells and `-` for N/A.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("label");
        for run in &self.runs {
            out.push(',');
            out.push_str(&crate::report::csv_field(run));
        }
        out.push('\n');
        for (label, row) in self.labels.iter().zip(&self.ap50) {
            out.push_str(&crate::report::csv_field(label));
            for v in row {
                out.push(',');
                let _ = match v {
                    Some(x) => write!(out, "{x:.2}"),
                    None => write!(out, "-"),
                };
            }
            out.push('\n');
        }
        out
    }
}
