//! On-disk formats: COCO-style annotation and result files, split and remap
//! files, and plain JSON/text output.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Deserializer, Serialize};

use slld_core::dataset::{GroundTruthInstance, ImageRecord, LabelRemap, LabelSchema, LayoutDataset, Split};
use slld_core::detection::{Detection, DetectionSet};
use slld_core::BBox;

use crate::error::{Error, Result};

#[derive(Debug, Serialize, Deserialize)]
struct CocoFile {
    images: Vec<CocoImage>,
    annotations: Vec<CocoAnnotation>,
    categories: Vec<CocoCategory>,
}

#[derive(Debug, Serialize, Deserialize)]
struct CocoImage {
    id: u64,
    file_name: String,
    width: u32,
    height: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    source_corpus: Option<String>,
}

#[derive(Debug, Serialize, Deserialize)]
struct CocoAnnotation {
    id: u64,
    image_id: u64,
    category_id: u32,
    bbox: [f64; 4],
    #[serde(default, deserialize_with = "flag")]
    iscrowd: u8,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    area: Option<f64>,
}

#[derive(Debug, Serialize, Deserialize)]
struct CocoCategory {
    id: u32,
    name: String,
}

#[derive(Debug, Serialize, Deserialize)]
struct CocoResult {
    image_id: u64,
    category_id: u32,
    bbox: [f64; 4],
    score: f64,
}

/// `iscrowd` as written by different tools: `0`/`1` or `false`/`true`.
fn flag<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<u8, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Flag {
        Int(u8),
        Bool(bool),
    }
    Ok(match Flag::deserialize(d)? {
        Flag::Int(v) => u8::from(v != 0),
        Flag::Bool(b) => u8::from(b),
    })
}

fn to_bbox(b: [f64; 4]) -> BBox {
    BBox::new(b[0], b[1], b[2], b[3])
}

fn from_bbox(b: &BBox) -> [f64; 4] {
    [b.x, b.y, b.w, b.h]
}

/// A loaded annotation file together with the mapping from the file's
/// category ids to schema label ids, needed to read result files that use
/// the same ids.
#[derive(Debug, Clone, PartialEq)]
pub struct CocoDataset {
    pub dataset: LayoutDataset,
    pub category_ids: BTreeMap<u32, u32>,
}

pub fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn parse_json<T: DeserializeOwned>(text: &str, origin: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|source| Error::Json {
        origin: origin.to_string(),
        source,
    })
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    parse_json(&read_text(path)?, &path.display().to_string())
}

/// Pretty JSON with a trailing newline.
pub fn to_json<T: Serialize + ?Sized>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("in-memory values serialize");
    s.push('\n');
    s
}

pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    write_text(path, &to_json(value))
}

/// Parse a COCO-style annotation file.
///
/// With a schema, categories are matched to it by name and any name the
/// schema lacks is an error. Without one, the schema is the file's
/// categories in ascending id order.
pub fn parse_coco(text: &str, origin: &str, schema: Option<&LabelSchema>) -> Result<CocoDataset> {
    let file: CocoFile = parse_json(text, origin)?;

    let mut categories = file.categories;
    categories.sort_by_key(|c| c.id);
    if let Some(w) = categories.windows(2).find(|w| w[0].id == w[1].id) {
        return Err(Error::Core(slld_core::Error::DuplicateId {
            kind: "category",
            id: u64::from(w[0].id),
        }));
    }
    let schema = match schema {
        Some(s) => s.clone(),
        None => LabelSchema::new(categories.iter().map(|c| c.name.clone()))?,
    };
    let mut category_ids = BTreeMap::new();
    let mut unmapped = Vec::new();
    for c in &categories {
        match schema.id_of(&c.name) {
            Some(id) => {
                category_ids.insert(c.id, id);
            }
            None => unmapped.push(c.name.clone()),
        }
    }
    if !unmapped.is_empty() {
        return Err(Error::Core(slld_core::Error::UnmappedCategories(unmapped)));
    }

    let images = file
        .images
        .into_iter()
        .map(|i| ImageRecord {
            id: i.id,
            file_name: i.file_name,
            width: i.width,
            height: i.height,
            source_corpus: i.source_corpus.unwrap_or_default(),
        })
        .collect();
    let instances = file
        .annotations
        .into_iter()
        .map(|a| {
            let label_id = *category_ids.get(&a.category_id).ok_or(slld_core::Error::UnknownLabel {
                ann_id: a.id,
                label_id: a.category_id,
            })?;
            Ok(GroundTruthInstance {
                id: a.id,
                image_id: a.image_id,
                label_id,
                bbox: to_bbox(a.bbox),
                iscrowd: a.iscrowd != 0,
            })
        })
        .collect::<Result<Vec<_>, slld_core::Error>>()?;

    Ok(CocoDataset {
        dataset: LayoutDataset::new(schema, images, instances)?,
        category_ids,
    })
}

pub fn read_coco(path: &Path, schema: Option<&LabelSchema>) -> Result<CocoDataset> {
    parse_coco(&read_text(path)?, &path.display().to_string(), schema)
}

/// COCO JSON for `ds`; category ids are the schema label ids. Splits are
/// not part of the file, see [`split_json`].
pub fn coco_json(ds: &LayoutDataset) -> String {
    to_json(&coco_file(ds))
}

/// Single-line form of [`coco_json`].
pub fn coco_json_compact(ds: &LayoutDataset) -> String {
    let mut s = serde_json::to_string(&coco_file(ds)).expect("in-memory values serialize");
    s.push('\n');
    s
}

fn coco_file(ds: &LayoutDataset) -> CocoFile {
    CocoFile {
        images: ds
            .images()
            .iter()
            .map(|i| CocoImage {
                id: i.id,
                file_name: i.file_name.clone(),
                width: i.width,
                height: i.height,
                source_corpus: (!i.source_corpus.is_empty()).then(|| i.source_corpus.clone()),
            })
            .collect(),
        annotations: ds
            .instances()
            .iter()
            .map(|a| CocoAnnotation {
                id: a.id,
                image_id: a.image_id,
                category_id: a.label_id,
                bbox: from_bbox(&a.bbox),
                iscrowd: u8::from(a.iscrowd),
                area: Some(a.bbox.area()),
            })
            .collect(),
        categories: ds
            .schema()
            .iter()
            .map(|(id, name)| CocoCategory {
                id,
                name: name.to_string(),
            })
            .collect(),
    }
}

pub fn write_coco(path: &Path, ds: &LayoutDataset) -> Result<()> {
    write_text(path, &coco_json(ds))
}

/// Split file: image id to `"train"` or `"test"`.
pub fn split_json(ds: &LayoutDataset) -> String {
    to_json(ds.splits())
}

pub fn read_split(path: &Path) -> Result<BTreeMap<u64, Split>> {
    read_json(path)
}

/// Remap file: source label name to target label name, or `"DROP"`.
pub const DROP: &str = "DROP";

pub fn parse_remap(text: &str, origin: &str) -> Result<LabelRemap> {
    let raw: BTreeMap<String, String> = parse_json(text, origin)?;
    Ok(raw.into_iter().fold(LabelRemap::new(), |r, (from, to)| {
        if to == DROP {
            r.drop_label(from)
        } else {
            r.map(from, to)
        }
    }))
}

pub fn read_remap(path: &Path) -> Result<LabelRemap> {
    parse_remap(&read_text(path)?, &path.display().to_string())
}

/// Parse a COCO results array. `category_ids` maps the file's category ids
/// to schema label ids (see [`CocoDataset::category_ids`]).
pub fn parse_detections(
    text: &str,
    origin: &str,
    provenance: &str,
    category_ids: &BTreeMap<u32, u32>,
) -> Result<DetectionSet> {
    let raw: Vec<CocoResult> = parse_json(text, origin)?;
    let unknown: BTreeSet<u32> = raw
        .iter()
        .map(|r| r.category_id)
        .filter(|c| !category_ids.contains_key(c))
        .collect();
    if !unknown.is_empty() {
        return Err(Error::Core(slld_core::Error::UnknownLabels(
            unknown.into_iter().collect(),
        )));
    }
    let dets = raw
        .into_iter()
        .map(|r| Detection {
            image_id: r.image_id,
            label_id: category_ids[&r.category_id],
            bbox: to_bbox(r.bbox),
            score: r.score,
        })
        .collect();
    Ok(DetectionSet::new(provenance, dets)?)
}

pub fn read_detections(path: &Path, provenance: &str, category_ids: &BTreeMap<u32, u32>) -> Result<DetectionSet> {
    parse_detections(&read_text(path)?, &path.display().to_string(), provenance, category_ids)
}

/// COCO results array with schema label ids as category ids.
pub fn detections_json(set: &DetectionSet) -> String {
    let raw: Vec<CocoResult> = set
        .iter()
        .map(|d| CocoResult {
            image_id: d.image_id,
            category_id: d.label_id,
            bbox: from_bbox(&d.bbox),
            score: d.score,
        })
        .collect();
    to_json(&raw)
}
