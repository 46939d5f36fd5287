//! Brute-force reference implementations, written without the library's
//! matching or curve code.
//!
//! Evaluation: every (label, IoU threshold, area range) slice is matched
//! image by image in score order in two phases: the best overlapping counted
//! ground truth, else the best overlapping ignored one. The metric is then
//! taken from an exhaustive sweep over every score cutoff.

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rect {
    pub x1: f64,
    pub y1: f64,
    pub x2: f64,
    pub y2: f64,
    /// `w * h` as given, which is what area buckets look at.
    pub area: f64,
}

impl Rect {
    pub fn xywh(x: f64, y: f64, w: f64, h: f64) -> Self {
        Rect {
            x1: x,
            y1: y,
            x2: x + w,
            y2: y + h,
            area: w * h,
        }
    }

    fn corner_area(&self) -> f64 {
        (self.x2 - self.x1) * (self.y2 - self.y1)
    }

    fn inter(&self, o: &Rect) -> f64 {
        let iw = self.x2.min(o.x2) - self.x1.max(o.x1);
        let ih = self.y2.min(o.y2) - self.y1.max(o.y1);
        if iw > 0.0 && ih > 0.0 {
            iw * ih
        } else {
            0.0
        }
    }
}

pub fn iou(a: &Rect, b: &Rect) -> f64 {
    let i = a.inter(b);
    if i == 0.0 {
        return 0.0;
    }
    i / (a.corner_area() + b.corner_area() - i)
}

/// Crowd regions are scored by the share of the detection they cover.
fn overlap(det: &Rect, gt: &Rect, crowd: bool) -> f64 {
    if crowd {
        let i = det.inter(gt);
        if i == 0.0 {
            0.0
        } else {
            i / det.corner_area()
        }
    } else {
        iou(det, gt)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct Gt {
    pub image: u64,
    pub label: usize,
    pub rect: Rect,
    pub crowd: bool,
}

#[derive(Debug, Clone, Copy)]
pub struct Det {
    pub image: u64,
    pub label: usize,
    pub rect: Rect,
    pub score: f64,
}

#[derive(Debug, Clone)]
pub struct Problem {
    pub images: Vec<u64>,
    pub n_labels: usize,
    pub gts: Vec<Gt>,
    pub dets: Vec<Det>,
    pub max_dets: usize,
}

/// Fractions in `[0, 1]`; `None` where nothing is counted.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Scores {
    pub map: Option<f64>,
    pub ap50: Option<f64>,
    pub ap75: Option<f64>,
    pub aps: Option<f64>,
    pub apm: Option<f64>,
    pub apl: Option<f64>,
    pub ar: Option<f64>,
}

impl Scores {
    pub fn as_array(&self) -> [Option<f64>; 7] {
        [self.map, self.ap50, self.ap75, self.aps, self.apm, self.apl, self.ar]
    }
}

#[derive(Debug, Clone)]
pub struct Outcome {
    pub overall: Scores,
    pub per_label: Vec<Scores>,
}

pub const THRESHOLDS: [f64; 10] = [0.5, 0.55, 0.6, 0.65, 0.7, 0.75, 0.8, 0.85, 0.9, 0.95];
const AREAS: [(f64, f64); 4] = [
    (0.0, f64::INFINITY),
    (0.0, 1024.0),
    (1024.0, 9216.0),
    (9216.0, f64::INFINITY),
];

struct Slice {
    /// `(score, true positive)` of every counted detection.
    hits: Vec<(f64, bool)>,
    counted_gt: usize,
}

fn slice(p: &Problem, label: usize, thr: f64, (lo, hi): (f64, f64)) -> Slice {
    let in_range = |a: f64| a >= lo && a < hi;
    let floor = thr.min(1.0 - 1e-10);
    let mut hits = Vec::new();
    let mut counted_gt = 0;
    for &img in &p.images {
        let gts: Vec<&Gt> = p.gts.iter().filter(|g| g.image == img && g.label == label).collect();
        let mut dets: Vec<&Det> = p.dets.iter().filter(|d| d.image == img && d.label == label).collect();
        dets.sort_by(|a, b| b.score.partial_cmp(&a.score).unwrap());
        dets.truncate(p.max_dets);

        let ignored: Vec<bool> = gts.iter().map(|g| g.crowd || !in_range(g.rect.area)).collect();
        counted_gt += ignored.iter().filter(|&&i| !i).count();
        let mut taken = vec![false; gts.len()];

        for d in dets {
            let best_among = |want_ignored: bool, taken: &[bool]| {
                let mut best: Option<(usize, f64)> = None;
                for (g, gt) in gts.iter().enumerate() {
                    if ignored[g] != want_ignored || (taken[g] && !gt.crowd) {
                        continue;
                    }
                    let v = overlap(&d.rect, &gt.rect, gt.crowd);
                    if v >= floor && best.is_none_or(|(_, b)| v >= b) {
                        best = Some((g, v));
                    }
                }
                best
            };
            if let Some((g, _)) = best_among(false, &taken) {
                taken[g] = true;
                hits.push((d.score, true));
            } else if let Some((g, _)) = best_among(true, &taken) {
                taken[g] = true;
            } else if in_range(d.rect.area) {
                hits.push((d.score, false));
            }
        }
    }
    Slice { hits, counted_gt }
}

/// Average precision from every score cutoff: at each recall level, the best
/// precision of any cutoff that reaches it.
fn sweep(s: &Slice) -> (Option<f64>, Option<f64>) {
    if s.counted_gt == 0 {
        return (None, None);
    }
    let n = s.counted_gt as f64;
    let mut cutoffs: Vec<f64> = s.hits.iter().map(|h| h.0).collect();
    cutoffs.sort_by(|a, b| b.partial_cmp(a).unwrap());
    cutoffs.dedup();
    let pr: Vec<(f64, f64)> = cutoffs
        .iter()
        .map(|&c| {
            let tp = s.hits.iter().filter(|h| h.0 >= c && h.1).count() as f64;
            let all = s.hits.iter().filter(|h| h.0 >= c).count() as f64;
            (tp / n, tp / all)
        })
        .collect();
    let ap = (0..=100)
        .map(|i| {
            let r = f64::from(i) / 100.0;
            pr.iter().filter(|p| p.0 >= r).map(|p| p.1).fold(0.0, f64::max)
        })
        .sum::<f64>()
        / 101.0;
    let recall = s.hits.iter().filter(|h| h.1).count() as f64 / n;
    (Some(ap), Some(recall))
}

type ApRecall = (Option<f64>, Option<f64>);

fn mean(v: impl Iterator<Item = Option<f64>>) -> Option<f64> {
    let xs: Vec<f64> = v.flatten().collect();
    (!xs.is_empty()).then(|| xs.iter().sum::<f64>() / xs.len() as f64)
}

pub fn evaluate(p: &Problem) -> Outcome {
    // table[label][threshold][area] = (ap, recall)
    let table: Vec<Vec<Vec<ApRecall>>> = (0..p.n_labels)
        .map(|k| {
            THRESHOLDS
                .iter()
                .map(|&t| AREAS.iter().map(|&a| sweep(&slice(p, k, t, a))).collect())
                .collect()
        })
        .collect();
    let table = &table;
    let scores = |labels: &[usize]| {
        let ap = |ts: &[usize], a: usize| mean(labels.iter().flat_map(|&k| ts.iter().map(move |&t| table[k][t][a].0)));
        let all_t: Vec<usize> = (0..THRESHOLDS.len()).collect();
        Scores {
            map: ap(&all_t, 0),
            ap50: ap(&[0], 0),
            ap75: ap(&[5], 0),
            aps: ap(&all_t, 1),
            apm: ap(&all_t, 2),
            apl: ap(&all_t, 3),
            ar: mean(
                labels
                    .iter()
                    .flat_map(|&k| all_t.iter().map(move |&t| table[k][t][0].1)),
            ),
        }
    };
    let all: Vec<usize> = (0..p.n_labels).collect();
    Outcome {
        overall: scores(&all),
        per_label: (0..p.n_labels).map(|k| scores(&[k])).collect(),
    }
}

/// Reference greedy NMS: repeatedly keep the best remaining box (lowest index
/// among equal scores) and discard everything overlapping it above `thr`.
/// Returns kept indices in keep order.
pub fn nms(boxes: &[Rect], scores: &[f64], thr: f64) -> Vec<usize> {
    let mut alive: Vec<usize> = (0..boxes.len()).collect();
    let mut kept = Vec::new();
    while !alive.is_empty() {
        let mut best = alive[0];
        for &i in &alive {
            if scores[i] > scores[best] || (scores[i] == scores[best] && i < best) {
                best = i;
            }
        }
        kept.push(best);
        alive.retain(|&i| i != best && iou(&boxes[i], &boxes[best]) <= thr);
    }
    kept
}
