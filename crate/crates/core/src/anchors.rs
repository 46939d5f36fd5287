//! Anchor design: 1-D K-means over box aspect ratios, selection of a small
//! ratio set from the clusters, dense anchor grids, RPN-style anchor/GT
//! matching and anchor recall.

use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dataset::{GroundTruthInstance, LayoutDataset, PAGE_HEIGHT, PAGE_WIDTH};
use crate::error::{Error, Result};
use crate::geometry::{iou, BBox};

/// Two selected ratios closer than this are treated as the same ratio.
pub const RATIO_DEDUP_TOL: f64 = 0.05;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatioClustering {
    pub k: usize,
    pub seed: u64,
    /// Ascending.
    pub centroids: Vec<f64>,
    /// Members per centroid, same order as `centroids`.
    pub counts: Vec<usize>,
    /// Cluster index (into `centroids`) for every input value, in input order.
    pub assignments: Vec<usize>,
    pub inertia: f64,
    /// Inertia after the initial assignment and after every accepted iteration.
    pub inertia_history: Vec<f64>,
    pub iterations: usize,
}

/// Cluster the aspect ratios of every instance in `ds`.
pub fn fit_ratio_kmeans(ds: &LayoutDataset, k: usize, seed: u64, max_iter: usize) -> Result<RatioClustering> {
    let ratios: Vec<f64> = ds.instances().iter().map(|a| a.bbox.aspect_ratio()).collect();
    fit_kmeans_1d(&ratios, k, seed, max_iter)
}

/// Lloyd's algorithm on scalars with k-means++ seeding.
pub fn fit_kmeans_1d(values: &[f64], k: usize, seed: u64, max_iter: usize) -> Result<RatioClustering> {
    if k < 1 {
        return Err(Error::InvalidClusterCount);
    }
    if values.len() < k {
        return Err(Error::TooFewInstances {
            needed: k,
            got: values.len(),
        });
    }
    let init = kmeans_pp_seed(values, k, seed);
    let mut fit = lloyd(values, init, max_iter);
    fit.seed = seed;
    Ok(fit)
}

/// Run Lloyd iterations from explicit starting centroids.
pub fn refine_kmeans_1d(values: &[f64], init: &[f64], max_iter: usize) -> Result<RatioClustering> {
    if init.is_empty() {
        return Err(Error::InvalidClusterCount);
    }
    if values.len() < init.len() {
        return Err(Error::TooFewInstances {
            needed: init.len(),
            got: values.len(),
        });
    }
    Ok(lloyd(values, init.to_vec(), max_iter))
}

fn kmeans_pp_seed(values: &[f64], k: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut centroids = Vec::with_capacity(k);
    centroids.push(values[rng.random_range(0..values.len())]);
    let mut d2: Vec<f64> = values.iter().map(|v| sq(v - centroids[0])).collect();
    while centroids.len() < k {
        let total: f64 = d2.iter().sum();
        let pick = if total > 0.0 {
            let target = rng.random::<f64>() * total;
            let mut acc = 0.0;
            let mut chosen = values.len() - 1;
            for (i, &d) in d2.iter().enumerate() {
                acc += d;
                if acc > target && d > 0.0 {
                    chosen = i;
                    break;
                }
            }
            chosen
        } else {
            rng.random_range(0..values.len())
        };
        let c = values[pick];
        centroids.push(c);
        for (d, v) in d2.iter_mut().zip(values) {
            *d = d.min(sq(v - c));
        }
    }
    centroids
}

#[inline]
fn sq(x: f64) -> f64 {
    x * x
}

/// Nearest centroid, lowest index on ties.
fn assign(values: &[f64], centroids: &[f64], out: &mut [usize]) {
    for (slot, v) in out.iter_mut().zip(values) {
        let mut best = 0;
        let mut best_d = sq(v - centroids[0]);
        for (j, c) in centroids.iter().enumerate().skip(1) {
            let d = sq(v - c);
            if d < best_d {
                best = j;
                best_d = d;
            }
        }
        *slot = best;
    }
}

fn inertia(values: &[f64], centroids: &[f64], assignments: &[usize]) -> f64 {
    values.iter().zip(assignments).map(|(v, &a)| sq(v - centroids[a])).sum()
}

/// Cluster means (running form, exact for constant clusters); an empty
/// cluster keeps its previous centroid.
fn update(values: &[f64], assignments: &[usize], previous: &[f64]) -> Vec<f64> {
    let mut means = previous.to_vec();
    let mut counts = vec![0usize; previous.len()];
    for (v, &a) in values.iter().zip(assignments) {
        counts[a] += 1;
        if counts[a] == 1 {
            means[a] = *v;
        } else {
            means[a] += (v - means[a]) / counts[a] as f64;
        }
    }
    means
}

fn lloyd(values: &[f64], init: Vec<f64>, max_iter: usize) -> RatioClustering {
    let k = init.len();
    let mut centroids = init;
    let mut assignments = vec![0usize; values.len()];
    assign(values, &centroids, &mut assignments);
    let mut current = inertia(values, &centroids, &assignments);
    let mut history = vec![current];
    let mut iterations = 0;

    let mut next = vec![0usize; values.len()];
    while iterations < max_iter {
        let moved = update(values, &assignments, &centroids);
        assign(values, &moved, &mut next);
        let candidate = inertia(values, &moved, &next);
        // rounding in the mean can leave a converged state a hair worse; stop there
        if candidate > current {
            break;
        }
        iterations += 1;
        let changed = next != assignments;
        core::mem::swap(&mut assignments, &mut next);
        centroids = moved;
        current = candidate;
        history.push(current);
        if !changed {
            break;
        }
    }

    // present centroids in ascending order, ties by original index
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| centroids[a].total_cmp(&centroids[b]).then(a.cmp(&b)));
    let mut rank = vec![0usize; k];
    for (r, &j) in order.iter().enumerate() {
        rank[j] = r;
    }
    let sorted: Vec<f64> = order.iter().map(|&j| centroids[j]).collect();
    let assignments: Vec<usize> = assignments.iter().map(|&a| rank[a]).collect();
    let mut counts = vec![0usize; k];
    for &a in &assignments {
        counts[a] += 1;
    }

    RatioClustering {
        k,
        seed: 0,
        centroids: sorted,
        counts,
        assignments,
        inertia: current,
        inertia_history: history,
        iterations,
    }
}

/// Pick `n` ratios from the most populous clusters.
///
/// Clusters are visited by member count (descending, ties by smaller
/// centroid). A centroid within [`RATIO_DEDUP_TOL`] of an already selected
/// one is skipped; if that leaves fewer than `n`, skipped centroids are taken
/// back in the same population order. The result is ascending.
pub fn select_anchor_ratios(clustering: &RatioClustering, n: usize) -> Result<Vec<f64>> {
    let k = clustering.centroids.len();
    if n > k {
        return Err(Error::TooManyRatios { n, k });
    }
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| {
        clustering.counts[b]
            .cmp(&clustering.counts[a])
            .then(clustering.centroids[a].total_cmp(&clustering.centroids[b]))
    });

    let mut chosen: Vec<f64> = Vec::with_capacity(n);
    let mut skipped = Vec::new();
    for &j in &order {
        if chosen.len() == n {
            break;
        }
        let c = clustering.centroids[j];
        if chosen.iter().any(|s| (s - c).abs() <= RATIO_DEDUP_TOL) {
            skipped.push(c);
        } else {
            chosen.push(c);
        }
    }
    for c in skipped {
        if chosen.len() == n {
            break;
        }
        chosen.push(c);
    }
    chosen.sort_by(f64::total_cmp);
    Ok(chosen)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnchorConfig {
    /// Anchor side lengths in pixels, strictly increasing.
    pub scales: Vec<f64>,
    /// Width over height.
    pub aspect_ratios: Vec<f64>,
    pub stride: f64,
    pub image_w: u32,
    pub image_h: u32,
}

impl Default for AnchorConfig {
    /// Five scales 32..512 and eight ratios evenly spaced over [0.2, 2.8] on a
    /// stride-16 grid over a 612 x 729 page.
    fn default() -> Self {
        let ratios = (0..8).map(|i| 0.2 + 2.6 * f64::from(i) / 7.0).collect();
        Self {
            scales: vec![32.0, 64.0, 128.0, 256.0, 512.0],
            aspect_ratios: ratios,
            stride: 16.0,
            image_w: PAGE_WIDTH,
            image_h: PAGE_HEIGHT,
        }
    }
}

impl AnchorConfig {
    /// Default scales with the common `[0.5, 1.0, 2.0]` ratios.
    pub fn baseline() -> Self {
        Self {
            aspect_ratios: vec![0.5, 1.0, 2.0],
            ..Self::default()
        }
    }

    pub fn with_ratios(&self, ratios: Vec<f64>) -> Self {
        Self {
            aspect_ratios: ratios,
            ..self.clone()
        }
    }

    pub fn grid_size(&self) -> (usize, usize) {
        let cols = libm::floor(f64::from(self.image_w) / self.stride) as usize;
        let rows = libm::floor(f64::from(self.image_h) / self.stride) as usize;
        (cols, rows)
    }

    pub fn validate(&self) -> Result<()> {
        if self.scales.is_empty() {
            return Err(Error::InvalidAnchorConfig("no scales"));
        }
        if self.aspect_ratios.is_empty() {
            return Err(Error::InvalidAnchorConfig("no aspect ratios"));
        }
        if !self.scales.iter().all(|s| s.is_finite() && *s > 0.0) {
            return Err(Error::InvalidAnchorConfig("scales must be positive"));
        }
        if self.scales.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidAnchorConfig("scales must be strictly increasing"));
        }
        if !self.aspect_ratios.iter().all(|r| r.is_finite() && *r > 0.0) {
            return Err(Error::InvalidAnchorConfig("aspect ratios must be positive"));
        }
        if !(self.stride.is_finite() && self.stride > 0.0) {
            return Err(Error::InvalidAnchorConfig("stride must be positive"));
        }
        let (cols, rows) = self.grid_size();
        if cols == 0 || rows == 0 {
            return Err(Error::InvalidAnchorConfig("stride leaves no grid point"));
        }
        Ok(())
    }

    /// `(w, h)` of the anchor with side `scale` and ratio `ratio`.
    pub fn anchor_shape(scale: f64, ratio: f64) -> (f64, f64) {
        let r = libm::sqrt(ratio);
        (scale * r, scale / r)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnchorMeta {
    pub scale_idx: usize,
    pub ratio_idx: usize,
    pub col: usize,
    pub row: usize,
    /// Anchor extends past the image rectangle. Anchors are never clipped.
    pub out_of_bounds: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnchorSet {
    pub anchors: Vec<BBox>,
    pub meta: Vec<AnchorMeta>,
    pub cols: usize,
    pub rows: usize,
}

impl AnchorSet {
    pub fn len(&self) -> usize {
        self.anchors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.anchors.is_empty()
    }
}

/// One anchor per (scale, ratio) centred on every cell of a `stride` grid.
/// Order: row, column, scale, ratio.
pub fn generate_anchors(cfg: &AnchorConfig) -> Result<AnchorSet> {
    cfg.validate()?;
    let (cols, rows) = cfg.grid_size();
    let shapes: Vec<(usize, usize, f64, f64)> = cfg
        .scales
        .iter()
        .enumerate()
        .flat_map(|(si, &s)| {
            cfg.aspect_ratios.iter().enumerate().map(move |(ri, &r)| {
                let (w, h) = AnchorConfig::anchor_shape(s, r);
                (si, ri, w, h)
            })
        })
        .collect();
    let (iw, ih) = (f64::from(cfg.image_w), f64::from(cfg.image_h));
    let n = cols * rows * shapes.len();
    let mut anchors = Vec::with_capacity(n);
    let mut meta = Vec::with_capacity(n);
    for row in 0..rows {
        let cy = (row as f64 + 0.5) * cfg.stride;
        for col in 0..cols {
            let cx = (col as f64 + 0.5) * cfg.stride;
            for &(scale_idx, ratio_idx, w, h) in &shapes {
                let b = BBox::from_center(cx, cy, w, h);
                meta.push(AnchorMeta {
                    scale_idx,
                    ratio_idx,
                    col,
                    row,
                    out_of_bounds: !b.within(iw, ih),
                });
                anchors.push(b);
            }
        }
    }
    Ok(AnchorSet {
        anchors,
        meta,
        cols,
        rows,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum AnchorLabel {
    Positive(usize),
    Negative,
    Ignore,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MatchResult {
    pub labels: Vec<AnchorLabel>,
    /// Per ground truth: anchor with the highest IoU, `None` if every IoU is 0.
    pub best_anchor: Vec<Option<usize>>,
    pub best_iou: Vec<f64>,
}

impl MatchResult {
    pub fn positives(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.labels.iter().enumerate().filter_map(|(i, l)| match l {
            AnchorLabel::Positive(g) => Some((i, *g)),
            _ => None,
        })
    }
}

/// Default RPN thresholds.
pub const RPN_POSITIVE_IOU: f64 = 0.7;
pub const RPN_NEGATIVE_IOU: f64 = 0.3;

/// RPN label assignment: positive at IoU >= `pos_thresh` or when the anchor is
/// some ground truth's best anchor, negative below `neg_thresh`, otherwise
/// ignored.
pub fn match_anchors(
    anchors: &AnchorSet,
    gts: &[GroundTruthInstance],
    pos_thresh: f64,
    neg_thresh: f64,
) -> Result<MatchResult> {
    if pos_thresh < neg_thresh {
        return Err(Error::ThresholdOrder {
            pos: pos_thresh,
            neg: neg_thresh,
        });
    }
    let n = anchors.len();
    let mut anchor_best = vec![0.0f64; n];
    let mut anchor_gt = vec![usize::MAX; n];
    let mut best_iou = vec![0.0f64; gts.len()];
    let mut best_anchor: Vec<Option<usize>> = vec![None; gts.len()];

    for (i, a) in anchors.anchors.iter().enumerate() {
        for (g, gt) in gts.iter().enumerate() {
            let v = iou(a, &gt.bbox);
            if anchor_gt[i] == usize::MAX || v > anchor_best[i] {
                anchor_best[i] = v;
                anchor_gt[i] = g;
            }
            if v > best_iou[g] {
                best_iou[g] = v;
                best_anchor[g] = Some(i);
            }
        }
    }

    let mut labels: Vec<AnchorLabel> = (0..n)
        .map(|i| {
            if !gts.is_empty() && anchor_best[i] >= pos_thresh {
                AnchorLabel::Positive(anchor_gt[i])
            } else if anchor_best[i] < neg_thresh {
                AnchorLabel::Negative
            } else {
                AnchorLabel::Ignore
            }
        })
        .collect();
    for (g, best) in best_anchor.iter().enumerate() {
        if let Some(i) = *best {
            labels[i] = AnchorLabel::Positive(g);
        }
    }

    Ok(MatchResult {
        labels,
        best_anchor,
        best_iou,
    })
}

/// Best IoU between `gt` and any anchor `cfg` generates.
///
/// For a fixed anchor shape the overlap along each axis only shrinks as the
/// centre offset grows, so the best position per shape is the grid centre
/// nearest to the ground-truth centre. Neighbouring cells are also checked
/// to absorb rounding.
pub fn best_anchor_iou(cfg: &AnchorConfig, gt: &BBox) -> f64 {
    let (cols, rows) = cfg.grid_size();
    if cols == 0 || rows == 0 {
        return 0.0;
    }
    let (gx, gy) = gt.center();
    let near = |c: f64, n: usize| -> (usize, usize) {
        let i = libm::round(c / cfg.stride - 0.5);
        let i = if i < 0.0 { 0 } else { (i as usize).min(n - 1) };
        (i.saturating_sub(1), (i + 1).min(n - 1))
    };
    let (c0, c1) = near(gx, cols);
    let (r0, r1) = near(gy, rows);
    let mut best = 0.0f64;
    for &s in &cfg.scales {
        for &r in &cfg.aspect_ratios {
            let (w, h) = AnchorConfig::anchor_shape(s, r);
            for row in r0..=r1 {
                let cy = (row as f64 + 0.5) * cfg.stride;
                for col in c0..=c1 {
                    let cx = (col as f64 + 0.5) * cfg.stride;
                    best = best.max(iou(&BBox::from_center(cx, cy, w, h), gt));
                }
            }
        }
    }
    best
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabelRecall {
    pub label_id: u32,
    pub name: String,
    pub instances: usize,
    pub covered: usize,
    /// `None` when the label has no instances.
    pub recall: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnchorRecall {
    pub iou_thresh: f64,
    pub labels: Vec<LabelRecall>,
    pub instances: usize,
    pub covered: usize,
    pub overall: Option<f64>,
}

/// Fraction of ground truths per label whose best anchor reaches `iou_thresh`.
pub fn anchor_recall(ds: &LayoutDataset, cfg: &AnchorConfig, iou_thresh: f64) -> Result<AnchorRecall> {
    cfg.validate()?;
    let schema = ds.schema();
    let mut totals = vec![0usize; schema.len()];
    let mut covered = vec![0usize; schema.len()];
    for a in ds.instances() {
        let slot = a.label_id as usize - 1;
        totals[slot] += 1;
        if best_anchor_iou(cfg, &a.bbox) >= iou_thresh {
            covered[slot] += 1;
        }
    }
    let ratio = |c: usize, t: usize| (t > 0).then(|| c as f64 / t as f64);
    let labels = schema
        .iter()
        .map(|(label_id, name)| {
            let i = label_id as usize - 1;
            LabelRecall {
                label_id,
                name: name.to_string(),
                instances: totals[i],
                covered: covered[i],
                recall: ratio(covered[i], totals[i]),
            }
        })
        .collect();
    let all: usize = totals.iter().sum();
    let hit: usize = covered.iter().sum();
    Ok(AnchorRecall {
        iou_thresh,
        labels,
        instances: all,
        covered: hit,
        overall: ratio(hit, all),
    })
}
