//! Layout datasets: label schemas, validated ingestion, label remapping,
//! multi-corpus merging, instance statistics, splits and page rescaling.
//!
//! Datasets are immutable values. Every operation returns a new dataset;
//! none of them touch the filesystem.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::BBox;

/// The ten-label layout schema, in id order starting from 1.
pub const CANONICAL_LABELS: [&str; 10] = [
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
];

/// Page size every synthesis image is rendered to.
pub const PAGE_WIDTH: u32 = 612;
pub const PAGE_HEIGHT: u32 = 729;

/// Ordered label names; the label id of a name is its 1-based position.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabelSchema {
    names: Vec<String>,
}

impl LabelSchema {
    pub fn new<I, S>(names: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let names: Vec<String> = names.into_iter().map(Into::into).collect();
        let mut seen = BTreeSet::new();
        for n in &names {
            if n.is_empty() {
                return Err(Error::InvalidSchema("empty label name".into()));
            }
            if !seen.insert(n.as_str()) {
                return Err(Error::InvalidSchema(alloc::format!("duplicate label {n:?}")));
            }
        }
        Ok(Self { names })
    }

    pub fn canonical() -> Self {
        Self {
            names: CANONICAL_LABELS.iter().map(|s| s.to_string()).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn id_of(&self, name: &str) -> Option<u32> {
        self.names.iter().position(|n| n == name).map(|p| p as u32 + 1)
    }

    pub fn name_of(&self, id: u32) -> Option<&str> {
        let idx = (id as usize).checked_sub(1)?;
        self.names.get(idx).map(String::as_str)
    }

    pub fn contains_id(&self, id: u32) -> bool {
        id >= 1 && (id as usize) <= self.names.len()
    }

    /// `(label_id, name)` pairs in id order.
    pub fn iter(&self) -> impl Iterator<Item = (u32, &str)> + '_ {
        self.names.iter().enumerate().map(|(i, n)| (i as u32 + 1, n.as_str()))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ImageRecord {
    pub id: u64,
    pub file_name: String,
    pub width: u32,
    pub height: u32,
    pub source_corpus: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruthInstance {
    pub id: u64,
    pub image_id: u64,
    pub label_id: u32,
    pub bbox: BBox,
    pub iscrowd: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Test,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LayoutDataset {
    schema: LabelSchema,
    images: Vec<ImageRecord>,
    instances: Vec<GroundTruthInstance>,
    splits: BTreeMap<u64, Split>,
}

impl LayoutDataset {
    /// Validates ids and references, clamps boxes to their image and rejects
    /// boxes that are degenerate before or after clamping.
    pub fn new(schema: LabelSchema, images: Vec<ImageRecord>, instances: Vec<GroundTruthInstance>) -> Result<Self> {
        let mut sizes = BTreeMap::new();
        for img in &images {
            if img.width == 0 || img.height == 0 {
                return Err(Error::InvalidImage { image_id: img.id });
            }
            if sizes.insert(img.id, (img.width, img.height)).is_some() {
                return Err(Error::DuplicateId {
                    kind: "image",
                    id: img.id,
                });
            }
        }

        let mut ann_ids = BTreeSet::new();
        let mut clamped = Vec::with_capacity(instances.len());
        for mut inst in instances {
            if !ann_ids.insert(inst.id) {
                return Err(Error::DuplicateId {
                    kind: "annotation",
                    id: inst.id,
                });
            }
            let &(w, h) = sizes.get(&inst.image_id).ok_or(Error::DanglingImage {
                ann_id: inst.id,
                image_id: inst.image_id,
            })?;
            if !schema.contains_id(inst.label_id) {
                return Err(Error::UnknownLabel {
                    ann_id: inst.id,
                    label_id: inst.label_id,
                });
            }
            if !inst.bbox.is_valid() {
                return Err(Error::DegenerateBox { ann_id: inst.id });
            }
            inst.bbox = inst
                .bbox
                .clip(f64::from(w), f64::from(h))
                .ok_or(Error::DegenerateBox { ann_id: inst.id })?;
            clamped.push(inst);
        }

        Ok(Self {
            schema,
            images,
            instances: clamped,
            splits: BTreeMap::new(),
        })
    }

    pub fn empty(schema: LabelSchema) -> Self {
        Self {
            schema,
            images: Vec::new(),
            instances: Vec::new(),
            splits: BTreeMap::new(),
        }
    }

    /// Attach a split assignment. Every key must name an image of this dataset.
    pub fn with_splits(mut self, splits: BTreeMap<u64, Split>) -> Result<Self> {
        let known: BTreeSet<u64> = self.images.iter().map(|i| i.id).collect();
        let missing: Vec<u64> = splits.keys().copied().filter(|id| !known.contains(id)).collect();
        if !missing.is_empty() {
            return Err(Error::UnknownImages(missing));
        }
        self.splits = splits;
        Ok(self)
    }

    pub fn schema(&self) -> &LabelSchema {
        &self.schema
    }

    pub fn images(&self) -> &[ImageRecord] {
        &self.images
    }

    pub fn instances(&self) -> &[GroundTruthInstance] {
        &self.instances
    }

    pub fn splits(&self) -> &BTreeMap<u64, Split> {
        &self.splits
    }

    pub fn image(&self, id: u64) -> Option<&ImageRecord> {
        self.images.iter().find(|i| i.id == id)
    }

    pub fn image_ids(&self, which: Split) -> Vec<u64> {
        self.images
            .iter()
            .filter(|i| self.splits.get(&i.id) == Some(&which))
            .map(|i| i.id)
            .collect()
    }

    /// Restrict to one side of the split. Images without an assignment are dropped.
    pub fn subset(&self, which: Split) -> Self {
        self.retain_images(|img| self.splits.get(&img.id) == Some(&which))
    }

    fn retain_images(&self, mut keep: impl FnMut(&ImageRecord) -> bool) -> Self {
        let images: Vec<ImageRecord> = self.images.iter().filter(|i| keep(i)).cloned().collect();
        let ids: BTreeSet<u64> = images.iter().map(|i| i.id).collect();
        Self {
            schema: self.schema.clone(),
            instances: self
                .instances
                .iter()
                .filter(|a| ids.contains(&a.image_id))
                .cloned()
                .collect(),
            splits: self
                .splits
                .iter()
                .filter(|(id, _)| ids.contains(id))
                .map(|(&id, &s)| (id, s))
                .collect(),
            images,
        }
    }

    /// Keep only the first page of each document, where the page index is the
    /// `_p<N>` suffix of the file stem. Files without the suffix are kept.
    pub fn first_pages_only(&self) -> Self {
        let mut first: BTreeMap<(&str, &str), u32> = BTreeMap::new();
        for img in &self.images {
            if let Some((doc, page)) = page_index(&img.file_name) {
                let e = first.entry((img.source_corpus.as_str(), doc)).or_insert(page);
                *e = (*e).min(page);
            }
        }
        self.retain_images(|img| match page_index(&img.file_name) {
            Some((doc, page)) => first.get(&(img.source_corpus.as_str(), doc)) == Some(&page),
            None => true,
        })
    }
}

/// Split `"doc12_p3.png"` into `("doc12", 3)`.
pub fn page_index(file_name: &str) -> Option<(&str, u32)> {
    let base = file_name.rsplit(['/', '\\']).next().unwrap_or(file_name);
    let stem = match base.rfind('.') {
        Some(dot) if dot > 0 => &base[..dot],
        _ => base,
    };
    let at = stem.rfind("_p")?;
    let digits = &stem[at + 2..];
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    Some((&stem[..at], digits.parse().ok()?))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum RemapTarget {
    Label(String),
    Drop,
}

/// Source label name to target label name, or drop.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabelRemap {
    map: BTreeMap<String, RemapTarget>,
}

impl LabelRemap {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn identity(schema: &LabelSchema) -> Self {
        let mut r = Self::new();
        for name in schema.names() {
            r = r.map(name, name);
        }
        r
    }

    pub fn map(mut self, from: impl Into<String>, to: impl Into<String>) -> Self {
        self.map.insert(from.into(), RemapTarget::Label(to.into()));
        self
    }

    pub fn drop_label(mut self, from: impl Into<String>) -> Self {
        self.map.insert(from.into(), RemapTarget::Drop);
        self
    }

    pub fn get(&self, from: &str) -> Option<&RemapTarget> {
        self.map.get(from)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &RemapTarget)> + '_ {
        self.map.iter().map(|(k, v)| (k.as_str(), v))
    }
}

pub fn remap_labels(ds: &LayoutDataset, remap: &LabelRemap, target: &LabelSchema) -> Result<LayoutDataset> {
    let uncovered: Vec<String> = ds
        .schema
        .names()
        .iter()
        .filter(|n| remap.get(n).is_none())
        .cloned()
        .collect();
    if !uncovered.is_empty() {
        return Err(Error::PartialRemap(uncovered));
    }

    let mut lookup: BTreeMap<u32, Option<u32>> = BTreeMap::new();
    let mut unknown = Vec::new();
    for (id, name) in ds.schema.iter() {
        let dst = match remap.get(name) {
            Some(RemapTarget::Label(to)) => match target.id_of(to) {
                Some(t) => Some(t),
                None => {
                    unknown.push(to.clone());
                    None
                }
            },
            _ => None,
        };
        lookup.insert(id, dst);
    }
    if !unknown.is_empty() {
        unknown.sort();
        unknown.dedup();
        return Err(Error::UnknownRemapTarget(unknown));
    }

    let instances = ds
        .instances
        .iter()
        .filter_map(|a| lookup[&a.label_id].map(|label_id| GroundTruthInstance { label_id, ..a.clone() }))
        .collect();
    Ok(LayoutDataset {
        schema: target.clone(),
        images: ds.images.clone(),
        instances,
        splits: ds.splits.clone(),
    })
}

/// Concatenate parts under `target`, re-issuing image and annotation ids from 1
/// in part order. Source corpus tags and split assignments are carried over.
pub fn merge_datasets(parts: &[LayoutDataset], target: &LabelSchema) -> Result<LayoutDataset> {
    for (i, p) in parts.iter().enumerate() {
        if &p.schema != target {
            return Err(Error::SchemaMismatch(alloc::format!(
                "part {i} has labels {:?}, expected {:?}",
                p.schema.names(),
                target.names()
            )));
        }
    }

    let mut images = Vec::new();
    let mut instances = Vec::new();
    let mut splits = BTreeMap::new();
    let mut next_image = 1u64;
    let mut next_ann = 1u64;
    for part in parts {
        let mut ids = BTreeMap::new();
        for img in &part.images {
            ids.insert(img.id, next_image);
            if let Some(&s) = part.splits.get(&img.id) {
                splits.insert(next_image, s);
            }
            images.push(ImageRecord {
                id: next_image,
                ..img.clone()
            });
            next_image += 1;
        }
        for a in &part.instances {
            instances.push(GroundTruthInstance {
                id: next_ann,
                image_id: ids[&a.image_id],
                ..a.clone()
            });
            next_ann += 1;
        }
    }
    Ok(LayoutDataset {
        schema: target.clone(),
        images,
        instances,
        splits,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabelCount {
    pub label_id: u32,
    pub name: String,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InstanceStats {
    pub labels: Vec<LabelCount>,
    pub total: usize,
}

impl InstanceStats {
    pub fn count(&self, name: &str) -> Option<usize> {
        self.labels.iter().find(|l| l.name == name).map(|l| l.count)
    }

    /// Largest over smallest count among labels that have instances.
    pub fn imbalance_ratio(&self) -> Option<f64> {
        let mut nonzero = self.labels.iter().map(|l| l.count).filter(|&c| c > 0);
        let first = nonzero.next()?;
        let (lo, hi) = nonzero.fold((first, first), |(lo, hi), c| (lo.min(c), hi.max(c)));
        Some(hi as f64 / lo as f64)
    }
}

pub fn instance_stats(ds: &LayoutDataset) -> InstanceStats {
    let mut counts = alloc::vec![0usize; ds.schema.len()];
    for a in &ds.instances {
        counts[a.label_id as usize - 1] += 1;
    }
    InstanceStats {
        labels: ds
            .schema
            .iter()
            .zip(counts)
            .map(|((label_id, name), count)| LabelCount {
                label_id,
                name: name.to_string(),
                count,
            })
            .collect(),
        total: ds.instances.len(),
    }
}

/// Random split by image. `round(test_fraction * |images|)` images go to test.
pub fn split(ds: &LayoutDataset, test_fraction: f64, seed: u64) -> Result<LayoutDataset> {
    if !(test_fraction > 0.0 && test_fraction < 1.0) {
        return Err(Error::FractionOutOfRange(test_fraction));
    }
    let n = ds.images.len();
    let n_test = libm::round(test_fraction * n as f64) as usize;
    let mut order: Vec<usize> = (0..n).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    order.shuffle(&mut rng);

    let mut splits = BTreeMap::new();
    for (rank, &idx) in order.iter().enumerate() {
        let s = if rank < n_test { Split::Test } else { Split::Train };
        splits.insert(ds.images[idx].id, s);
    }
    Ok(LayoutDataset { splits, ..ds.clone() })
}

/// Resize every page to `target_w x target_h` and scale its boxes per axis.
pub fn rescale_dataset(ds: &LayoutDataset, target_w: u32, target_h: u32) -> Result<LayoutDataset> {
    if target_w == 0 || target_h == 0 {
        return Err(Error::InvalidArgument("rescale target must be positive".into()));
    }
    let mut factors = BTreeMap::new();
    let images = ds
        .images
        .iter()
        .map(|img| {
            factors.insert(
                img.id,
                (
                    f64::from(target_w) / f64::from(img.width),
                    f64::from(target_h) / f64::from(img.height),
                ),
            );
            ImageRecord {
                width: target_w,
                height: target_h,
                ..img.clone()
            }
        })
        .collect();
    let (tw, th) = (f64::from(target_w), f64::from(target_h));
    let instances = ds
        .instances
        .iter()
        .map(|a| {
            let (sx, sy) = factors[&a.image_id];
            let scaled = a.bbox.scale(sx, sy);
            // scaling can leave a border box a few ulps outside the page
            let bbox = scaled.clip(tw, th).unwrap_or(scaled);
            GroundTruthInstance { bbox, ..a.clone() }
        })
        .collect();
    Ok(LayoutDataset {
        schema: ds.schema.clone(),
        images,
        instances,
        splits: ds.splits.clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::format;
    use alloc::vec;

    fn img(id: u64, name: &str, corpus: &str) -> ImageRecord {
        ImageRecord {
            id,
            file_name: name.into(),
            width: 612,
            height: 729,
            source_corpus: corpus.into(),
        }
    }

    fn ann(id: u64, image_id: u64, label_id: u32, bbox: BBox) -> GroundTruthInstance {
        GroundTruthInstance {
            id,
            image_id,
            label_id,
            bbox,
            iscrowd: false,
        }
    }

    fn soto_schema() -> LabelSchema {
        LabelSchema::new(["title", "body", "table_caption", "figure_caption", "header"]).unwrap()
    }

    fn soto_fixture() -> LayoutDataset {
        let images = vec![img(10, "a_p1.png", "soto"), img(11, "a_p2.png", "soto")];
        let b = BBox::new(10.0, 10.0, 100.0, 40.0);
        let labels = [1, 2, 2, 3, 4, 4, 5, 5, 5];
        let instances = labels
            .iter()
            .enumerate()
            .map(|(i, &l)| ann(100 + i as u64, 10 + (i as u64 % 2), l, b))
            .collect();
        LayoutDataset::new(soto_schema(), images, instances).unwrap()
    }

    #[test]
    fn canonical_schema_shape() {
        let s = LabelSchema::canonical();
        assert_eq!(s.len(), 10);
        assert_eq!(s.id_of("title"), Some(1));
        assert_eq!(s.id_of("reference"), Some(10));
        assert_eq!(s.name_of(9), Some("caption"));
        assert_eq!(s.id_of("figure_caption"), None);
        assert!(LabelSchema::new(["a", "a"]).is_err());
    }

    #[test]
    fn ingestion_clamps_and_rejects() {
        let s = LabelSchema::canonical();
        let ds = LayoutDataset::new(
            s.clone(),
            vec![img(1, "x.png", "t")],
            vec![ann(1, 1, 1, BBox::new(-3.0, 700.0, 50.0, 40.0))],
        )
        .unwrap();
        assert_eq!(ds.instances()[0].bbox, BBox::new(0.0, 700.0, 47.0, 29.0));

        let outside = LayoutDataset::new(
            s.clone(),
            vec![img(1, "x.png", "t")],
            vec![ann(7, 1, 1, BBox::new(700.0, 0.0, 50.0, 40.0))],
        );
        assert_eq!(outside.unwrap_err(), Error::DegenerateBox { ann_id: 7 });

        let zero = LayoutDataset::new(
            s.clone(),
            vec![img(1, "x.png", "t")],
            vec![ann(8, 1, 1, BBox::new(0.0, 0.0, 0.0, 40.0))],
        );
        assert_eq!(zero.unwrap_err(), Error::DegenerateBox { ann_id: 8 });

        let dangling = LayoutDataset::new(
            s.clone(),
            vec![img(1, "x.png", "t")],
            vec![ann(9, 2, 1, BBox::new(0.0, 0.0, 4.0, 4.0))],
        );
        assert!(matches!(dangling, Err(Error::DanglingImage { ann_id: 9, image_id: 2 })));

        let bad_label = LayoutDataset::new(
            s,
            vec![img(1, "x.png", "t")],
            vec![ann(9, 1, 11, BBox::new(0.0, 0.0, 4.0, 4.0))],
        );
        assert!(matches!(bad_label, Err(Error::UnknownLabel { label_id: 11, .. })));
    }

    #[test]
    fn caption_merge_sums_source_captions() {
        let ds = soto_fixture();
        let target = LabelSchema::canonical();
        let remap = LabelRemap::new()
            .map("title", "title")
            .map("body", "body")
            .map("table_caption", "caption")
            .map("figure_caption", "caption")
            .map("header", "body");
        let out = remap_labels(&ds, &remap, &target).unwrap();
        let stats = instance_stats(&out);
        assert_eq!(stats.count("caption"), Some(3));
        assert_eq!(stats.total, ds.instances().len());
        assert_eq!(out.images(), ds.images());
    }

    #[test]
    fn drop_removes_exactly_the_dropped_label() {
        let ds = soto_fixture();
        let target = LabelSchema::new(["title", "body", "caption"]).unwrap();
        let remap = LabelRemap::new()
            .map("title", "title")
            .map("body", "body")
            .map("table_caption", "caption")
            .map("figure_caption", "caption")
            .drop_label("header");
        let out = remap_labels(&ds, &remap, &target).unwrap();
        assert_eq!(out.instances().len(), ds.instances().len() - 3);
        assert_eq!(out.images().len(), ds.images().len());
    }

    #[test]
    fn identity_remap_is_noop() {
        let ds = soto_fixture();
        let out = remap_labels(&ds, &LabelRemap::identity(ds.schema()), ds.schema()).unwrap();
        assert_eq!(out, ds);
    }

    #[test]
    fn partial_remap_lists_uncovered() {
        let ds = soto_fixture();
        let remap = LabelRemap::new().map("title", "title").map("body", "body");
        let err = remap_labels(&ds, &remap, &LabelSchema::canonical()).unwrap_err();
        assert_eq!(
            err,
            Error::PartialRemap(vec!["table_caption".into(), "figure_caption".into(), "header".into()])
        );
        let bad = LabelRemap::identity(ds.schema());
        assert!(matches!(
            remap_labels(&ds, &bad, &LabelSchema::canonical()),
            Err(Error::UnknownRemapTarget(_))
        ));
    }

    #[test]
    fn merge_conserves_and_reissues() {
        let s = LabelSchema::canonical();
        let b = BBox::new(1.0, 1.0, 10.0, 10.0);
        let a = LayoutDataset::new(
            s.clone(),
            vec![img(5, "page.png", "soto"), img(6, "q.png", "soto")],
            vec![ann(1, 5, 1, b), ann(2, 6, 6, b)],
        )
        .unwrap();
        let c = LayoutDataset::new(s.clone(), vec![img(5, "page.png", "grotoap")], vec![ann(1, 5, 5, b)]).unwrap();
        let m = merge_datasets(&[a.clone(), c.clone()], &s).unwrap();
        assert_eq!(m.images().len(), 3);
        assert_eq!(m.instances().len(), 3);
        let ids: Vec<u64> = m.images().iter().map(|i| i.id).collect();
        assert_eq!(ids, vec![1, 2, 3]);
        let dup: Vec<&str> = m
            .images()
            .iter()
            .filter(|i| i.file_name == "page.png")
            .map(|i| i.source_corpus.as_str())
            .collect();
        assert_eq!(dup, vec!["soto", "grotoap"]);
        assert_eq!(m.instances()[2].image_id, 3);

        let single = merge_datasets(core::slice::from_ref(&a), &s).unwrap();
        assert_eq!(single.instances().len(), a.instances().len());
        assert_eq!(single.images()[0].file_name, a.images()[0].file_name);

        let err = merge_datasets(&[soto_fixture()], &s);
        assert!(matches!(err, Err(Error::SchemaMismatch(_))));
    }

    #[test]
    fn stats_zero_filled_and_imbalance() {
        let empty = LayoutDataset::empty(LabelSchema::canonical());
        let st = instance_stats(&empty);
        assert_eq!(st.labels.len(), 10);
        assert!(st.labels.iter().all(|l| l.count == 0));
        assert_eq!(st.imbalance_ratio(), None);

        let st = instance_stats(&soto_fixture());
        assert_eq!(st.labels.iter().map(|l| l.count).sum::<usize>(), st.total);
        assert_eq!(st.imbalance_ratio(), Some(3.0));
    }

    #[test]
    fn split_partitions_deterministically() {
        let s = LabelSchema::canonical();
        let images = (1..=40).map(|i| img(i, &format!("d{i}.png"), "t")).collect();
        let ds = LayoutDataset::new(s, images, vec![]).unwrap();
        let a = split(&ds, 0.25, 7).unwrap();
        let b = split(&ds, 0.25, 7).unwrap();
        assert_eq!(a.splits(), b.splits());
        assert_eq!(a.image_ids(Split::Test).len(), 10);
        assert_eq!(a.image_ids(Split::Train).len(), 30);
        assert_eq!(a.splits().len(), 40);
        assert_ne!(split(&ds, 0.25, 8).unwrap().splits(), a.splits());
        assert_eq!(split(&ds, 0.0, 1).unwrap_err(), Error::FractionOutOfRange(0.0));
        assert!(split(&ds, 1.0, 1).is_err());
    }

    #[test]
    fn split_keeps_instances_with_their_image() {
        let ds = split(&soto_fixture(), 0.5, 3).unwrap();
        let test = ds.subset(Split::Test);
        let train = ds.subset(Split::Train);
        assert_eq!(test.images().len() + train.images().len(), 2);
        assert_eq!(test.instances().len() + train.instances().len(), 9);
        for a in test.instances() {
            assert!(test.image(a.image_id).is_some());
        }
    }

    #[test]
    fn rescale_halves_coordinates() {
        let s = LabelSchema::canonical();
        let mut big = img(1, "x.png", "t");
        big.width = 1224;
        big.height = 1458;
        let ds = LayoutDataset::new(
            s,
            vec![big],
            vec![
                ann(1, 1, 1, BBox::new(100.0, 200.0, 50.0, 80.0)),
                ann(2, 1, 1, BBox::new(1124.0, 1358.0, 100.0, 100.0)),
            ],
        )
        .unwrap();
        let out = rescale_dataset(&ds, 612, 729).unwrap();
        assert_eq!(out.images()[0].width, 612);
        assert_eq!(out.instances()[0].bbox, BBox::new(50.0, 100.0, 25.0, 40.0));
        assert!(out.instances()[1].bbox.within(612.0, 729.0));
        assert_eq!(rescale_dataset(&out, 612, 729).unwrap(), out);
    }

    #[test]
    fn page_suffix_parsing() {
        assert_eq!(page_index("doc12_p3.png"), Some(("doc12", 3)));
        assert_eq!(page_index("dir/paper_x_p10.jpg"), Some(("paper_x", 10)));
        assert_eq!(page_index("paper.png"), None);
        assert_eq!(page_index("paper_pX.png"), None);
    }

    #[test]
    fn first_page_filter() {
        let s = LabelSchema::canonical();
        let b = BBox::new(1.0, 1.0, 5.0, 5.0);
        let ds = LayoutDataset::new(
            s,
            vec![
                img(1, "d1_p2.png", "g"),
                img(2, "d1_p1.png", "g"),
                img(3, "d2_p1.png", "g"),
                img(4, "loose.png", "g"),
            ],
            vec![ann(1, 1, 1, b), ann(2, 2, 1, b), ann(3, 3, 1, b)],
        )
        .unwrap();
        let out = ds.first_pages_only();
        let names: Vec<&str> = out.images().iter().map(|i| i.file_name.as_str()).collect();
        assert_eq!(names, vec!["d1_p1.png", "d2_p1.png", "loose.png"]);
        assert_eq!(out.instances().len(), 2);
    }
}
