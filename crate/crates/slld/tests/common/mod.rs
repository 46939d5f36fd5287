#![allow(dead_code)]

pub mod oracle;
pub mod synth;

use std::path::Path;
use std::process::{Command, Output};

use rand::Rng;

use oracle::{Det, Gt, Problem, Rect};
use slld::core::dataset::{GroundTruthInstance, ImageRecord, LabelSchema, LayoutDataset};
use slld::core::detection::{Detection, DetectionSet};
use slld::core::eval::{EvalReport, Metrics};
use slld::core::BBox;

pub const PAGE: f64 = 1000.0;

fn random_rect(rng: &mut impl Rng) -> Rect {
    // spans all three area buckets
    let w = rng.random_range(4.0..220.0);
    let h = rng.random_range(4.0..220.0);
    let x = rng.random_range(0.0..PAGE - w);
    let y = rng.random_range(0.0..PAGE - h);
    Rect::xywh(x, y, w, h)
}

fn jitter(rng: &mut impl Rng, r: &Rect) -> Rect {
    let w = r.x2 - r.x1;
    let h = r.y2 - r.y1;
    let nw = (w * rng.random_range(0.7..1.3)).min(PAGE - 1.0);
    let nh = (h * rng.random_range(0.7..1.3)).min(PAGE - 1.0);
    let x = (r.x1 + w * rng.random_range(-0.2..0.2)).clamp(0.0, PAGE - nw);
    let y = (r.y1 + h * rng.random_range(-0.2..0.2)).clamp(0.0, PAGE - nh);
    Rect::xywh(x, y, nw, nh)
}

/// Up to 5 images, 3 labels and 20 boxes per image on each side; scores are
/// distinct. About half the detections are perturbed copies of ground truth.
pub fn random_problem(rng: &mut impl Rng) -> Problem {
    let n_images = rng.random_range(1..=5u64);
    let n_labels = rng.random_range(1..=3usize);
    let mut gts = Vec::new();
    let mut dets = Vec::new();
    for image in 1..=n_images {
        let n_gt = rng.random_range(0..=20);
        let start = gts.len();
        for _ in 0..n_gt {
            gts.push(Gt {
                image,
                label: rng.random_range(0..n_labels),
                rect: random_rect(rng),
                crowd: rng.random_bool(0.08),
            });
        }
        let n_det = rng.random_range(0..=20);
        for _ in 0..n_det {
            let (label, rect) = if n_gt > 0 && rng.random_bool(0.55) {
                let g = gts[start + rng.random_range(0..n_gt)];
                let label = if rng.random_bool(0.9) {
                    g.label
                } else {
                    rng.random_range(0..n_labels)
                };
                (label, jitter(rng, &g.rect))
            } else {
                (rng.random_range(0..n_labels), random_rect(rng))
            };
            dets.push(Det {
                image,
                label,
                rect,
                score: 0.0,
            });
        }
    }
    // distinct scores in (0, 1]
    let n = dets.len();
    let mut ranks: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        ranks.swap(i, rng.random_range(0..=i));
    }
    for (d, r) in dets.iter_mut().zip(ranks) {
        d.score = (r as f64 + rng.random_range(0.1..0.9)) / n as f64;
    }
    Problem {
        images: (1..=n_images).collect(),
        n_labels,
        gts,
        dets,
        max_dets: 100,
    }
}

fn to_bbox(r: &Rect) -> BBox {
    BBox::new(r.x1, r.y1, r.x2 - r.x1, r.y2 - r.y1)
}

pub fn to_library(p: &Problem) -> (LayoutDataset, DetectionSet) {
    let schema = LabelSchema::new((0..p.n_labels).map(|k| format!("c{k}"))).unwrap();
    let images = p
        .images
        .iter()
        .map(|&id| ImageRecord {
            id,
            file_name: format!("p{id}.png"),
            width: PAGE as u32,
            height: PAGE as u32,
            source_corpus: String::new(),
        })
        .collect();
    let instances = p
        .gts
        .iter()
        .enumerate()
        .map(|(i, g)| GroundTruthInstance {
            id: i as u64 + 1,
            image_id: g.image,
            label_id: g.label as u32 + 1,
            bbox: to_bbox(&g.rect),
            iscrowd: g.crowd,
        })
        .collect();
    let ds = LayoutDataset::new(schema, images, instances).unwrap();
    let dets = p
        .dets
        .iter()
        .map(|d| Detection {
            image_id: d.image,
            label_id: d.label as u32 + 1,
            bbox: to_bbox(&d.rect),
            score: d.score,
        })
        .collect();
    (ds, DetectionSet::new("random", dets).unwrap())
}

pub fn from_library(ds: &LayoutDataset, dets: &DetectionSet) -> Problem {
    let rect = |b: &BBox| Rect::xywh(b.x, b.y, b.w, b.h);
    Problem {
        images: ds.images().iter().map(|i| i.id).collect(),
        n_labels: ds.schema().len(),
        gts: ds
            .instances()
            .iter()
            .map(|g| Gt {
                image: g.image_id,
                label: g.label_id as usize - 1,
                rect: rect(&g.bbox),
                crowd: g.iscrowd,
            })
            .collect(),
        dets: dets
            .iter()
            .map(|d| Det {
                image: d.image_id,
                label: d.label_id as usize - 1,
                rect: rect(&d.bbox),
                score: d.score,
            })
            .collect(),
        max_dets: 100,
    }
}

fn metric_array(m: &Metrics) -> [Option<f64>; 7] {
    [m.map, m.ap50, m.ap75, m.aps, m.apm, m.apl, m.ar].map(|v| v.map(|x| x / 100.0))
}

/// Largest deviation between a report and the oracle, `None` if they
/// disagree on which slices are N/A.
pub fn max_deviation(report: &EvalReport, expected: &oracle::Outcome) -> Option<f64> {
    let mut pairs = vec![(metric_array(&report.metrics), expected.overall.as_array())];
    for (c, s) in report.per_class.iter().zip(&expected.per_label) {
        pairs.push((metric_array(&c.metrics), s.as_array()));
    }
    let mut worst: f64 = 0.0;
    for (got, want) in pairs {
        for (g, w) in got.iter().zip(want) {
            match (g, w) {
                (Some(g), Some(w)) => worst = worst.max((g - w).abs()),
                (None, None) => {}
                _ => return None,
            }
        }
    }
    Some(worst)
}

pub fn slld_bin() -> &'static str {
    env!("CARGO_BIN_EXE_slld")
}

pub fn run_slld(args: &[&str], cwd: &Path) -> Output {
    Command::new(slld_bin())
        .args(args)
        .current_dir(cwd)
        .env_remove("SLLD_LOG")
        .output()
        .expect("spawn slld")
}
