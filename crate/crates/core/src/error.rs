use alloc::string::String;
use alloc::vec::Vec;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("degenerate box for annotation {ann_id}")]
    DegenerateBox { ann_id: u64 },

    #[error("decoded box has zero area after clipping")]
    DegenerateDecoded,

    #[error("categories not in schema: {0:?}")]
    UnmappedCategories(Vec<String>),

    #[error("schema mismatch: {0}")]
    SchemaMismatch(String),

    #[error("invalid label schema: {0}")]
    InvalidSchema(String),

    #[error("remap does not cover source labels: {0:?}")]
    PartialRemap(Vec<String>),

    #[error("remap targets not in destination schema: {0:?}")]
    UnknownRemapTarget(Vec<String>),

    #[error("duplicate {kind} id {id}")]
    DuplicateId { kind: &'static str, id: u64 },

    #[error("annotation {ann_id} references missing image {image_id}")]
    DanglingImage { ann_id: u64, image_id: u64 },

    #[error("annotation {ann_id} has label id {label_id} outside the schema")]
    UnknownLabel { ann_id: u64, label_id: u32 },

    #[error("image {image_id} has non-positive size")]
    InvalidImage { image_id: u64 },

    #[error("test fraction {0} outside (0, 1)")]
    FractionOutOfRange(f64),

    #[error("need at least {needed} instances, got {got}")]
    TooFewInstances { needed: usize, got: usize },

    #[error("cluster count must be at least 1")]
    InvalidClusterCount,

    #[error("cannot select {n} ratios from {k} clusters")]
    TooManyRatios { n: usize, k: usize },

    #[error("invalid anchor config: {0}")]
    InvalidAnchorConfig(&'static str),

    #[error("positive threshold {pos} is below negative threshold {neg}")]
    ThresholdOrder { pos: f64, neg: f64 },

    #[error("invalid detection: {0}")]
    InvalidDetection(String),

    #[error("detections reference images outside the evaluation set: {0:?}")]
    UnknownImages(Vec<u64>),

    #[error("detections reference labels outside the schema: {0:?}")]
    UnknownLabels(Vec<u32>),

    #[error("invalid eval config: {0}")]
    InvalidEvalConfig(&'static str),

    #[error("ragged grid: category count {expected}, series {series} has {got} values")]
    RaggedGrid {
        expected: usize,
        series: String,
        got: usize,
    },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}
