//! Optional TOML run configuration. Each section mirrors the flags of one
//! subcommand; a flag given on the command line wins over the file.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use slld_core::report::ChartStyle;

use crate::error::{Error, Result};
use crate::io::read_text;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FileConfig {
    pub global: GlobalSection,
    pub merge: MergeSection,
    pub stats: StatsSection,
    pub anchors: AnchorsSection,
    pub anchor_recall: AnchorRecallSection,
    pub evaluate: EvaluateSection,
    pub report: ReportSection,
    pub chart: Option<ChartStyle>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GlobalSection {
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub log_level: Option<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MergeSection {
    pub inputs: Vec<String>,
    pub labels: Option<Vec<String>>,
    pub page_size: Option<String>,
    pub split_fraction: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StatsSection {
    pub datasets: Vec<PathBuf>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnchorsSection {
    pub dataset: Option<PathBuf>,
    pub k: Option<usize>,
    pub n_ratios: Option<usize>,
    pub max_iter: Option<usize>,
    pub bins: Option<usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnchorRecallSection {
    pub dataset: Option<PathBuf>,
    pub anchor_configs: Vec<PathBuf>,
    pub baseline: Option<bool>,
    pub iou: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvaluateSection {
    pub dataset: Option<PathBuf>,
    pub split: Option<PathBuf>,
    pub detections: Option<PathBuf>,
    pub compare: Vec<PathBuf>,
    pub detector: Option<String>,
    pub backbone: Option<String>,
    pub dataset_name: Option<String>,
    pub score_thresh: Option<f64>,
    pub max_per_image: Option<usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ReportSection {
    pub reports: Vec<PathBuf>,
}

impl FileConfig {
    pub fn parse(text: &str, path: &Path) -> Result<Self> {
        toml::from_str(text).map_err(|source| Error::Config {
            path: path.to_path_buf(),
            source,
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&read_text(path)?, path)
    }
}

/// The flag value if given, else the file value.
pub fn pick<T>(flag: Option<T>, file: Option<T>) -> Option<T> {
    flag.or(file)
}

/// Flag values if any were given, else the file values.
pub fn pick_list<T: Clone>(flag: &[T], file: &[T]) -> Vec<T> {
    if flag.is_empty() {
        file.to_vec()
    } else {
        flag.to_vec()
    }
}
