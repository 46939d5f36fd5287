//! Deterministic generator for the committed fixture corpora.
//!
//! Three corpora shaped like the sources of a merged layout dataset: a
//! SOTO-like one (822 pages, 183 documents, split captions), an ICDAR-like
//! one (615 pages at twice the page size) and a GROTOAP-like one (113
//! three-page documents with running headers). Plus a small hand-made pair
//! of ground truth and detections for golden evaluation tests.

use std::collections::BTreeMap;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, LogNormal};

use slld::core::dataset::{
    split, GroundTruthInstance, ImageRecord, LabelSchema, LayoutDataset, PAGE_HEIGHT, PAGE_WIDTH,
};
use slld::core::BBox;
use slld::io;

/// Modal aspect ratio, log-space spread and area range per label at page
/// size 612 x 729.
fn shape(label: &str) -> (f64, f64, (f64, f64)) {
    match label {
        "title" => (3.4, 0.10, (6_000.0, 20_000.0)),
        "authors" => (3.0, 0.12, (3_000.0, 10_000.0)),
        "address" => (2.2, 0.15, (3_000.0, 12_000.0)),
        "abstract" => (1.7, 0.15, (30_000.0, 80_000.0)),
        "keyword" => (3.2, 0.10, (2_000.0, 8_000.0)),
        "body" => (0.9, 0.45, (20_000.0, 120_000.0)),
        "figure" => (1.2, 0.30, (15_000.0, 90_000.0)),
        "table" => (1.5, 0.30, (15_000.0, 90_000.0)),
        "caption" | "figure_caption" | "table_caption" => (2.8, 0.04, (2_000.0, 9_000.0)),
        "reference" => (0.22, 0.08, (20_000.0, 60_000.0)),
        "header" => (3.8, 0.05, (1_000.0, 3_000.0)),
        other => panic!("no shape for {other}"),
    }
}

/// Labels that only occur on the first page of a document.
fn front_matter(label: &str) -> bool {
    matches!(label, "title" | "authors" | "address" | "abstract" | "keyword")
}

fn round1(v: f64) -> f64 {
    (v * 10.0).round() / 10.0
}

fn sample_box(rng: &mut ChaCha8Rng, label: &str, page: (u32, u32)) -> BBox {
    let (mode, spread, (a_lo, a_hi)) = shape(label);
    let ratio = LogNormal::new(mode.ln(), spread).unwrap();
    let s = f64::from(page.0) / f64::from(PAGE_WIDTH);
    let (pw, ph) = (f64::from(page.0), f64::from(page.1));
    loop {
        let r = ratio.sample(rng).clamp(0.1, 4.0);
        let a = rng.random_range(a_lo..a_hi) * s * s;
        let w = round1((a * r).sqrt());
        let h = round1((a / r).sqrt());
        if w < pw - 2.0 && h < ph - 2.0 {
            let x = round1(rng.random_range(1.0..pw - w - 1.0));
            let y = round1(rng.random_range(1.0..ph - h - 1.0));
            return BBox::new(x, y, w, h);
        }
    }
}

struct CorpusSpec<'a> {
    tag: &'a str,
    labels: &'a [&'a str],
    counts: &'a [(&'a str, usize)],
    pages_per_doc: Vec<u32>,
    page: (u32, u32),
    seed: u64,
}

fn build(spec: &CorpusSpec<'_>) -> LayoutDataset {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let schema = LabelSchema::new(spec.labels.iter().copied()).unwrap();
    let mut images = Vec::new();
    let mut first_pages = Vec::new();
    for (doc, &n) in spec.pages_per_doc.iter().enumerate() {
        for p in 1..=n {
            let id = images.len() as u64 + 1;
            if p == 1 {
                first_pages.push(id);
            }
            images.push(ImageRecord {
                id,
                file_name: format!("{}_d{:03}_p{p}.png", spec.tag, doc + 1),
                width: spec.page.0,
                height: spec.page.1,
                source_corpus: spec.tag.to_string(),
            });
        }
    }
    let mut instances = Vec::new();
    for &(label, count) in spec.counts {
        let label_id = schema.id_of(label).unwrap();
        for _ in 0..count {
            let image_id = if front_matter(label) {
                first_pages[rng.random_range(0..first_pages.len())]
            } else {
                rng.random_range(1..=images.len() as u64)
            };
            instances.push(GroundTruthInstance {
                id: instances.len() as u64 + 1,
                image_id,
                label_id,
                bbox: sample_box(&mut rng, label, spec.page),
                iscrowd: false,
            });
        }
    }
    instances.sort_by_key(|a| (a.image_id, a.id));
    LayoutDataset::new(schema, images, instances).unwrap()
}

/// `total` pages over `docs` documents, the first documents one page longer.
fn spread(total: u32, docs: u32) -> Vec<u32> {
    (0..docs).map(|d| total / docs + u32::from(d < total % docs)).collect()
}

pub const SOTO_LABELS: [&str; 10] = [
    "title",
    "authors",
    "address",
    "abstract",
    "body",
    "figure",
    "table",
    "figure_caption",
    "table_caption",
    "reference",
];

pub const SOTO_COUNTS: [(&str, usize); 10] = [
    ("title", 100),
    ("authors", 110),
    ("address", 105),
    ("abstract", 102),
    ("body", 1275),
    ("figure", 300),
    ("table", 200),
    ("figure_caption", 260),
    ("table_caption", 190),
    ("reference", 400),
];

pub fn soto() -> LayoutDataset {
    build(&CorpusSpec {
        tag: "soto",
        labels: &SOTO_LABELS,
        counts: &SOTO_COUNTS,
        pages_per_doc: spread(822, 183),
        page: (PAGE_WIDTH, PAGE_HEIGHT),
        seed: 101,
    })
}

pub fn icdar() -> LayoutDataset {
    build(&CorpusSpec {
        tag: "icdar2013",
        labels: &["title", "authors", "body", "table", "caption", "reference"],
        counts: &[
            ("title", 40),
            ("authors", 40),
            ("body", 700),
            ("table", 150),
            ("caption", 150),
            ("reference", 120),
        ],
        pages_per_doc: spread(615, 67),
        page: (2 * PAGE_WIDTH, 2 * PAGE_HEIGHT),
        seed: 202,
    })
}

pub fn grotoap() -> LayoutDataset {
    build(&CorpusSpec {
        tag: "grotoap",
        labels: &[
            "title",
            "authors",
            "address",
            "abstract",
            "keyword",
            "body",
            "figure",
            "table",
            "caption",
            "reference",
            "header",
        ],
        counts: &[
            ("title", 113),
            ("authors", 113),
            ("address", 90),
            ("abstract", 110),
            ("keyword", 80),
            ("body", 900),
            ("figure", 120),
            ("table", 90),
            ("caption", 200),
            ("reference", 150),
            ("header", 339),
        ],
        pages_per_doc: vec![3; 113],
        page: (PAGE_WIDTH, PAGE_HEIGHT),
        seed: 303,
    })
}

pub fn soto_remap() -> BTreeMap<String, String> {
    SOTO_LABELS
        .iter()
        .map(|&l| {
            let to = if l.ends_with("_caption") { "caption" } else { l };
            (l.to_string(), to.to_string())
        })
        .collect()
}

pub fn grotoap_remap() -> BTreeMap<String, String> {
    grotoap()
        .schema()
        .names()
        .iter()
        .map(|l| {
            let to = if l == "header" { io::DROP } else { l.as_str() };
            (l.clone(), to.to_string())
        })
        .collect()
}

/// SOTO corpus remapped onto the 10-label schema.
pub fn d1() -> LayoutDataset {
    let remap = io::parse_remap(&io::to_json(&soto_remap()), "soto_remap").unwrap();
    slld::core::dataset::remap_labels(&soto(), &remap, &LabelSchema::canonical()).unwrap()
}

pub const D1_TEST_FRACTION: f64 = 222.0 / 822.0;
pub const D2_TEST_FRACTION: f64 = 325.0 / 1550.0;
pub const SPLIT_SEED: u64 = 2020;

/// Three pages, labels `title` and `body`, with a crowd region and a small
/// box so that every area bucket is exercised.
pub fn golden_gt() -> LayoutDataset {
    let schema = LabelSchema::new(["title", "body"]).unwrap();
    let images = (1..=3)
        .map(|id| ImageRecord {
            id,
            file_name: format!("golden_p{id}.png"),
            width: PAGE_WIDTH,
            height: PAGE_HEIGHT,
            source_corpus: "golden".into(),
        })
        .collect();
    let b = |id, image_id, label_id, x, y, w, h, iscrowd| GroundTruthInstance {
        id,
        image_id,
        label_id,
        bbox: BBox::new(x, y, w, h),
        iscrowd,
    };
    let instances = vec![
        b(1, 1, 1, 100.0, 40.0, 400.0, 50.0, false),
        b(2, 1, 2, 50.0, 120.0, 250.0, 300.0, false),
        b(3, 1, 2, 320.0, 120.0, 250.0, 300.0, false),
        b(4, 2, 1, 120.0, 60.0, 28.0, 20.0, false),
        b(5, 2, 2, 60.0, 200.0, 480.0, 120.0, false),
        b(6, 3, 2, 40.0, 40.0, 500.0, 200.0, false),
        b(7, 3, 2, 40.0, 300.0, 500.0, 400.0, true),
    ];
    LayoutDataset::new(schema, images, instances).unwrap()
}

/// Twelve detections against [`golden_gt`] as `(image, label, box, score)`.
pub fn golden_detections() -> Vec<(u64, u32, [f64; 4], f64)> {
    vec![
        (1, 1, [104.0, 42.0, 396.0, 50.0], 0.95),
        (1, 1, [90.0, 30.0, 300.0, 40.0], 0.40),
        (1, 2, [55.0, 118.0, 250.0, 290.0], 0.90),
        (1, 2, [330.0, 160.0, 240.0, 200.0], 0.60),
        (1, 2, [50.0, 450.0, 200.0, 200.0], 0.35),
        (2, 1, [121.0, 61.0, 27.0, 19.0], 0.85),
        (2, 2, [60.0, 210.0, 470.0, 110.0], 0.80),
        (2, 2, [300.0, 500.0, 120.0, 100.0], 0.20),
        (3, 2, [45.0, 45.0, 490.0, 190.0], 0.75),
        (3, 2, [60.0, 320.0, 200.0, 150.0], 0.70),
        (3, 2, [300.0, 400.0, 200.0, 200.0], 0.55),
        (3, 1, [40.0, 20.0, 300.0, 20.0], 0.10),
    ]
}

pub fn golden_detections_json() -> String {
    #[derive(serde::Serialize)]
    struct Row {
        image_id: u64,
        category_id: u32,
        bbox: [f64; 4],
        score: f64,
    }
    let rows: Vec<Row> = golden_detections()
        .into_iter()
        .map(|(image_id, category_id, bbox, score)| Row {
            image_id,
            category_id,
            bbox,
            score,
        })
        .collect();
    io::to_json(&rows)
}

/// `(file name, contents)` of every generated fixture.
pub fn fixture_files() -> Vec<(&'static str, String)> {
    let d1 = d1();
    let d1_split = split(&d1, D1_TEST_FRACTION, SPLIT_SEED).unwrap();
    vec![
        ("soto_raw.json", io::coco_json_compact(&soto())),
        ("soto_remap.json", io::to_json(&soto_remap())),
        ("icdar_raw.json", io::coco_json_compact(&icdar())),
        ("grotoap_raw.json", io::coco_json_compact(&grotoap())),
        ("grotoap_remap.json", io::to_json(&grotoap_remap())),
        ("d1.json", io::coco_json_compact(&d1)),
        ("d1_split.json", io::split_json(&d1_split)),
        ("golden_gt.json", io::coco_json(&golden_gt())),
        ("golden_dets.json", golden_detections_json()),
    ]
}

pub fn fixtures_dir() -> &'static Path {
    Path::new(concat!(env!("CARGO_MANIFEST_DIR"), "/tests/fixtures"))
}

pub fn fixture(name: &str) -> std::path::PathBuf {
    fixtures_dir().join(name)
}
