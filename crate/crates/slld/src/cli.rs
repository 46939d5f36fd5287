//! Subcommands. Every command reads its inputs, writes its outputs under the
//! output directory together with `run_config.json` (the effective
//! parameters), and prints a short table on standard output.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use log::info;
use serde::Serialize;

use slld_core::anchors::{anchor_recall, fit_ratio_kmeans, select_anchor_ratios, AnchorConfig, AnchorRecall};
use slld_core::dataset::{
    instance_stats, merge_datasets, remap_labels, rescale_dataset, split, InstanceStats, LabelRemap, LabelSchema,
    LayoutDataset,
};
use slld_core::detection::{filter_detections, DEFAULT_MAX_PER_IMAGE, DEFAULT_SCORE_THRESH};
use slld_core::eval::{evaluate_raw, per_label_report, EvalConfig, EvalReport};
use slld_core::report::{
    render_grouped_bars, render_histogram, render_metric_table, BarTable, ChartKind, ChartSpec, ChartStyle,
};

use crate::config::{pick, pick_list, FileConfig};
use crate::error::{Error, Result};
use crate::io;

#[derive(Debug, Parser)]
#[command(
    name = "slld",
    version,
    about = "Dataset, anchor and evaluation tooling for document layout detection"
)]
pub struct Cli {
    /// TOML file with one section per subcommand; flags override it.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Seed for every random choice.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// error, warn, info, debug or trace; falls back to SLLD_LOG.
    #[arg(long, global = true)]
    pub log_level: Option<String>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Remap and merge annotation files into one dataset.
    Merge(MergeArgs),
    /// Per-label instance counts.
    Stats(StatsArgs),
    /// Cluster box aspect ratios and derive an anchor configuration.
    Anchors(AnchorsArgs),
    /// Fraction of ground truths reachable by some anchor.
    AnchorRecall(AnchorRecallArgs),
    /// Score detections against ground truth.
    Evaluate(EvaluateArgs),
    /// Metric table from evaluation reports.
    Report(ReportArgs),
}

#[derive(Debug, Args)]
pub struct MergeArgs {
    /// `PATH[,remap=FILE][,corpus=TAG][,first-page-only]`, repeatable.
    #[arg(long = "input")]
    pub inputs: Vec<String>,
    /// Target label names, comma separated; default is the 10-label schema.
    #[arg(long, value_delimiter = ',')]
    pub labels: Vec<String>,
    /// Rescale every page to `WxH` before merging, e.g. `612x729`.
    #[arg(long)]
    pub page_size: Option<String>,
    /// Also write a random train/test split with this test fraction.
    #[arg(long)]
    pub split_fraction: Option<f64>,
}

#[derive(Debug, Args)]
pub struct StatsArgs {
    /// Annotation file, repeatable; each becomes one chart series.
    #[arg(long = "dataset")]
    pub datasets: Vec<PathBuf>,
}

#[derive(Debug, Args)]
pub struct AnchorsArgs {
    #[arg(long)]
    pub dataset: Option<PathBuf>,
    /// Number of clusters [default: 50].
    #[arg(long)]
    pub k: Option<usize>,
    /// Number of ratios to keep [default: 8].
    #[arg(long)]
    pub n_ratios: Option<usize>,
    /// [default: 300]
    #[arg(long)]
    pub max_iter: Option<usize>,
    /// Histogram bins [default: 40].
    #[arg(long)]
    pub bins: Option<usize>,
}

#[derive(Debug, Args)]
pub struct AnchorRecallArgs {
    #[arg(long)]
    pub dataset: Option<PathBuf>,
    /// Anchor configuration JSON, repeatable.
    #[arg(long = "anchor-config")]
    pub anchor_configs: Vec<PathBuf>,
    /// Also score the `[0.5, 1, 2]` baseline.
    #[arg(long)]
    pub baseline: bool,
    /// [default: 0.5]
    #[arg(long)]
    pub iou: Option<f64>,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    #[arg(long)]
    pub dataset: Option<PathBuf>,
    /// Split file; only its test images are scored.
    #[arg(long)]
    pub split: Option<PathBuf>,
    /// COCO results file.
    #[arg(long)]
    pub detections: Option<PathBuf>,
    /// Further results files to compare per label, repeatable.
    #[arg(long)]
    pub compare: Vec<PathBuf>,
    /// Row name in tables [default: detections file stem].
    #[arg(long)]
    pub detector: Option<String>,
    #[arg(long)]
    pub backbone: Option<String>,
    /// Data set column of the metric table.
    #[arg(long)]
    pub dataset_name: Option<String>,
    /// [default: 0.05]
    #[arg(long)]
    pub score_thresh: Option<f64>,
    /// [default: 100]
    #[arg(long)]
    pub max_per_image: Option<usize>,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    /// Evaluation report JSON, repeatable; one table row each.
    #[arg(long = "report")]
    pub reports: Vec<PathBuf>,
}

/// Global settings after merging flags and file.
#[derive(Debug, Clone, Serialize)]
pub struct Globals {
    pub seed: u64,
    pub out: PathBuf,
    pub chart: ChartStyle,
}

impl Globals {
    fn path(&self, name: &str) -> PathBuf {
        self.out.join(name)
    }

    fn spec(&self, kind: ChartKind, title: &str, x: &str, y: &str) -> ChartSpec {
        ChartSpec::new(kind, title, x, y).with_style(self.chart.clone())
    }
}

pub const DEFAULT_OUT: &str = "out";

/// Effective log level: flag, then file, then `SLLD_LOG`.
pub fn log_level(cli: &Cli, file: &FileConfig) -> Option<String> {
    pick(cli.log_level.clone(), file.global.log_level.clone()).or_else(|| std::env::var("SLLD_LOG").ok())
}

pub fn load_file_config(cli: &Cli) -> Result<FileConfig> {
    match &cli.config {
        Some(p) => FileConfig::load(p),
        None => Ok(FileConfig::default()),
    }
}

pub fn run(cli: &Cli, file: &FileConfig) -> Result<()> {
    let globals = Globals {
        seed: pick(cli.seed, file.global.seed).unwrap_or(0),
        out: pick(cli.out.clone(), file.global.out.clone()).unwrap_or_else(|| PathBuf::from(DEFAULT_OUT)),
        chart: file.chart.clone().unwrap_or_default(),
    };
    let mut stdout = String::new();
    match &cli.command {
        Command::Merge(a) => cmd_merge(a, file, &globals, &mut stdout)?,
        Command::Stats(a) => cmd_stats(a, file, &globals, &mut stdout)?,
        Command::Anchors(a) => cmd_anchors(a, file, &globals, &mut stdout)?,
        Command::AnchorRecall(a) => cmd_anchor_recall(a, file, &globals, &mut stdout)?,
        Command::Evaluate(a) => cmd_evaluate(a, file, &globals, &mut stdout)?,
        Command::Report(a) => cmd_report(a, file, &globals, &mut stdout)?,
    }
    print!("{stdout}");
    Ok(())
}

#[derive(Serialize)]
struct RunRecord<'a, T: Serialize> {
    command: &'a str,
    #[serde(flatten)]
    globals: &'a Globals,
    params: &'a T,
}

fn echo_config<T: Serialize>(g: &Globals, command: &str, params: &T) -> Result<()> {
    io::write_json(
        &g.path("run_config.json"),
        &RunRecord {
            command,
            globals: g,
            params,
        },
    )
}

fn require(path: Option<PathBuf>, flag: &str) -> Result<PathBuf> {
    path.ok_or_else(|| Error::Usage(format!("--{flag} is required")))
}

fn stem(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string())
}

/// One `--input` of `merge`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MergeInput {
    pub path: PathBuf,
    pub remap: Option<PathBuf>,
    pub corpus: Option<String>,
    pub first_page_only: bool,
}

impl MergeInput {
    pub fn parse(spec: &str) -> Result<Self> {
        let mut parts = spec.split(',');
        let path = parts
            .next()
            .filter(|p| !p.is_empty())
            .ok_or_else(|| Error::Usage(format!("empty input spec {spec:?}")))?;
        let mut input = MergeInput {
            path: PathBuf::from(path),
            remap: None,
            corpus: None,
            first_page_only: false,
        };
        for opt in parts {
            match opt.split_once('=') {
                Some(("remap", v)) => input.remap = Some(PathBuf::from(v)),
                Some(("corpus", v)) => input.corpus = Some(v.to_string()),
                None if opt == "first-page-only" => input.first_page_only = true,
                _ => return Err(Error::Usage(format!("unknown input option {opt:?} in {spec:?}"))),
            }
        }
        Ok(input)
    }
}

fn parse_page_size(s: &str) -> Result<(u32, u32)> {
    s.split_once('x')
        .and_then(|(w, h)| Some((w.parse().ok()?, h.parse().ok()?)))
        .ok_or_else(|| Error::Usage(format!("page size {s:?} is not WxH")))
}

fn with_corpus(ds: &LayoutDataset, tag: &str) -> Result<LayoutDataset> {
    let images = ds
        .images()
        .iter()
        .cloned()
        .map(|mut i| {
            i.source_corpus = tag.to_string();
            i
        })
        .collect();
    Ok(LayoutDataset::new(
        ds.schema().clone(),
        images,
        ds.instances().to_vec(),
    )?)
}

/// Load, filter, rescale and remap one merge input.
pub fn prepare_part(input: &MergeInput, target: &LabelSchema, page_size: Option<(u32, u32)>) -> Result<LayoutDataset> {
    let mut ds = io::read_coco(&input.path, None)?.dataset;
    if let Some(tag) = &input.corpus {
        ds = with_corpus(&ds, tag)?;
    }
    if input.first_page_only {
        ds = ds.first_pages_only();
    }
    if let Some((w, h)) = page_size {
        ds = rescale_dataset(&ds, w, h)?;
    }
    let remap = match &input.remap {
        Some(p) => io::read_remap(p)?,
        None => LabelRemap::identity(ds.schema()),
    };
    info!(
        "{}: {} images, {} instances",
        input.path.display(),
        ds.images().len(),
        ds.instances().len()
    );
    Ok(remap_labels(&ds, &remap, target)?)
}

fn count_table(names: &[String], columns: &[(String, &InstanceStats)]) -> String {
    let width = names
        .iter()
        .map(String::len)
        .chain(["label".len(), "imbalance".len()])
        .max()
        .unwrap_or(5);
    let mut s = format!("{:<width$}", "label");
    for (name, _) in columns {
        let _ = write!(s, "  {name:>10}");
    }
    s.push('\n');
    for (i, label) in names.iter().enumerate() {
        let _ = write!(s, "{label:<width$}");
        for (_, st) in columns {
            let _ = write!(s, "  {:>10}", st.labels[i].count);
        }
        s.push('\n');
    }
    let _ = write!(s, "{:<width$}", "total");
    for (_, st) in columns {
        let _ = write!(s, "  {:>10}", st.total);
    }
    s.push('\n');
    let _ = write!(s, "{:<width$}", "imbalance");
    for (_, st) in columns {
        match st.imbalance_ratio() {
            Some(r) => {
                let _ = write!(s, "  {r:>10.2}");
            }
            None => {
                let _ = write!(s, "  {:>10}", "N/A");
            }
        }
    }
    s.push('\n');
    s
}

#[derive(Serialize)]
struct StatsRecord<'a> {
    name: &'a str,
    #[serde(flatten)]
    stats: &'a InstanceStats,
    imbalance_ratio: Option<f64>,
}

fn cmd_merge(a: &MergeArgs, file: &FileConfig, g: &Globals, stdout: &mut String) -> Result<()> {
    let specs = pick_list(&a.inputs, &file.merge.inputs);
    if specs.is_empty() {
        return Err(Error::Usage("merge needs at least one --input".into()));
    }
    let inputs = specs.iter().map(|s| MergeInput::parse(s)).collect::<Result<Vec<_>>>()?;
    let labels = if a.labels.is_empty() {
        file.merge.labels.clone()
    } else {
        Some(a.labels.clone())
    };
    let target = match &labels {
        Some(names) => LabelSchema::new(names.iter().cloned())?,
        None => LabelSchema::canonical(),
    };
    let page_size_text = pick(a.page_size.clone(), file.merge.page_size.clone());
    let page_size = page_size_text.as_deref().map(parse_page_size).transpose()?;
    let split_fraction = pick(a.split_fraction, file.merge.split_fraction);

    let parts = inputs
        .iter()
        .map(|i| prepare_part(i, &target, page_size))
        .collect::<Result<Vec<_>>>()?;
    let mut merged = merge_datasets(&parts, &target)?;
    if let Some(f) = split_fraction {
        merged = split(&merged, f, g.seed)?;
        io::write_text(&g.path("split.json"), &io::split_json(&merged))?;
    }
    io::write_coco(&g.path("merged.json"), &merged)?;
    let stats = instance_stats(&merged);
    io::write_json(
        &g.path("stats.json"),
        &StatsRecord {
            name: "merged",
            stats: &stats,
            imbalance_ratio: stats.imbalance_ratio(),
        },
    )?;

    #[derive(Serialize)]
    struct Params<'a> {
        inputs: &'a [MergeInput],
        labels: &'a [String],
        page_size: Option<(u32, u32)>,
        split_fraction: Option<f64>,
    }
    echo_config(
        g,
        "merge",
        &Params {
            inputs: &inputs,
            labels: target.names(),
            page_size,
            split_fraction,
        },
    )?;

    let _ = writeln!(stdout, "images: {}", merged.images().len());
    stdout.push_str(&count_table(target.names(), &[("merged".into(), &stats)]));
    Ok(())
}

fn cmd_stats(a: &StatsArgs, file: &FileConfig, g: &Globals, stdout: &mut String) -> Result<()> {
    let paths = pick_list(&a.datasets, &file.stats.datasets);
    if paths.is_empty() {
        return Err(Error::Usage("stats needs at least one --dataset".into()));
    }
    let mut named = Vec::new();
    for p in &paths {
        let ds = io::read_coco(p, None)?.dataset;
        named.push((stem(p), instance_stats(&ds), ds.schema().clone()));
    }
    let schema = named[0].2.clone();
    if let Some((name, _, s)) = named.iter().find(|(_, _, s)| *s != schema) {
        return Err(Error::Core(slld_core::Error::SchemaMismatch(format!(
            "{name} has labels {:?}, expected {:?}",
            s.names(),
            schema.names()
        ))));
    }

    let records: Vec<StatsRecord<'_>> = named
        .iter()
        .map(|(name, st, _)| StatsRecord {
            name,
            stats: st,
            imbalance_ratio: st.imbalance_ratio(),
        })
        .collect();
    io::write_json(&g.path("stats.json"), &records)?;

    let table = BarTable {
        categories: schema.names().to_vec(),
        series: named
            .iter()
            .map(|(name, st, _)| (name.clone(), st.labels.iter().map(|l| Some(l.count as f64)).collect()))
            .collect(),
    };
    let spec = g.spec(ChartKind::GroupedBars, "Instances by label", "label", "instances");
    io::write_text(&g.path("instances.svg"), &render_grouped_bars(&table, &spec)?)?;

    #[derive(Serialize)]
    struct Params<'a> {
        datasets: &'a [PathBuf],
    }
    echo_config(g, "stats", &Params { datasets: &paths })?;

    let columns: Vec<(String, &InstanceStats)> = named.iter().map(|(n, st, _)| (n.clone(), st)).collect();
    stdout.push_str(&count_table(schema.names(), &columns));
    Ok(())
}

pub const DEFAULT_CLUSTERS: usize = 50;
pub const DEFAULT_RATIOS: usize = 8;
pub const DEFAULT_MAX_ITER: usize = 300;
pub const DEFAULT_BINS: usize = 40;

/// What `anchors` writes to `clustering.json`.
#[derive(Debug, Clone, PartialEq, Serialize, serde::Deserialize)]
pub struct ClusteringReport {
    pub k: usize,
    pub seed: u64,
    pub max_iter: usize,
    pub iterations: usize,
    pub instances: usize,
    pub inertia: f64,
    pub inertia_history: Vec<f64>,
    pub centroids: Vec<f64>,
    pub counts: Vec<usize>,
    pub selected_ratios: Vec<f64>,
}

fn cmd_anchors(a: &AnchorsArgs, file: &FileConfig, g: &Globals, stdout: &mut String) -> Result<()> {
    let s = &file.anchors;
    let path = require(pick(a.dataset.clone(), s.dataset.clone()), "dataset")?;
    let k = pick(a.k, s.k).unwrap_or(DEFAULT_CLUSTERS);
    let n = pick(a.n_ratios, s.n_ratios).unwrap_or(DEFAULT_RATIOS);
    let max_iter = pick(a.max_iter, s.max_iter).unwrap_or(DEFAULT_MAX_ITER);
    let bins = pick(a.bins, s.bins).unwrap_or(DEFAULT_BINS);

    let ds = io::read_coco(&path, None)?.dataset;
    let fit = fit_ratio_kmeans(&ds, k, g.seed, max_iter)?;
    let ratios = select_anchor_ratios(&fit, n)?;
    info!(
        "k-means converged after {} iterations, inertia {}",
        fit.iterations, fit.inertia
    );

    let report = ClusteringReport {
        k,
        seed: g.seed,
        max_iter,
        iterations: fit.iterations,
        instances: fit.assignments.len(),
        inertia: fit.inertia,
        inertia_history: fit.inertia_history.clone(),
        centroids: fit.centroids.clone(),
        counts: fit.counts.clone(),
        selected_ratios: ratios.clone(),
    };
    io::write_json(&g.path("clustering.json"), &report)?;
    let anchor_cfg = AnchorConfig::default().with_ratios(ratios.clone());
    io::write_json(&g.path("anchor_config.json"), &anchor_cfg)?;

    let values: Vec<f64> = ds.instances().iter().map(|i| i.bbox.aspect_ratio()).collect();
    let spec = g.spec(
        ChartKind::Histogram,
        "Aspect ratio of labelled regions",
        "width / height",
        "instances",
    );
    io::write_text(&g.path("aspect_ratios.svg"), &render_histogram(&values, bins, &spec)?)?;

    #[derive(Serialize)]
    struct Params<'a> {
        dataset: &'a Path,
        k: usize,
        n_ratios: usize,
        max_iter: usize,
        bins: usize,
    }
    echo_config(
        g,
        "anchors",
        &Params {
            dataset: &path,
            k,
            n_ratios: n,
            max_iter,
            bins,
        },
    )?;

    let shown: Vec<String> = ratios.iter().map(|r| format!("{r:.4}")).collect();
    let _ = writeln!(stdout, "ratios: {}", shown.join(", "));
    Ok(())
}

/// `label,instances,<config>...` with 4-decimal recalls, `N/A` for labels
/// without instances, and a final `overall` row.
pub fn recall_csv(runs: &[(String, AnchorRecall)]) -> String {
    let mut s = String::from("label,instances");
    for (name, _) in runs {
        let _ = write!(s, ",{}", slld_core::report::csv_field(name));
    }
    s.push('\n');
    let fmt = |v: Option<f64>| v.map_or_else(|| "N/A".to_string(), |x| format!("{x:.4}"));
    let Some((_, first)) = runs.first() else {
        return s;
    };
    for (i, l) in first.labels.iter().enumerate() {
        let _ = write!(s, "{},{}", slld_core::report::csv_field(&l.name), l.instances);
        for (_, r) in runs {
            let _ = write!(s, ",{}", fmt(r.labels[i].recall));
        }
        s.push('\n');
    }
    let _ = write!(s, "overall,{}", first.instances);
    for (_, r) in runs {
        let _ = write!(s, ",{}", fmt(r.overall));
    }
    s.push('\n');
    s
}

fn cmd_anchor_recall(a: &AnchorRecallArgs, file: &FileConfig, g: &Globals, stdout: &mut String) -> Result<()> {
    let s = &file.anchor_recall;
    let path = require(pick(a.dataset.clone(), s.dataset.clone()), "dataset")?;
    let configs = pick_list(&a.anchor_configs, &s.anchor_configs);
    let baseline = a.baseline || s.baseline.unwrap_or(false);
    let iou = pick(a.iou, s.iou).unwrap_or(0.5);
    if configs.is_empty() && !baseline {
        return Err(Error::Usage("anchor-recall needs --anchor-config or --baseline".into()));
    }

    let ds = io::read_coco(&path, None)?.dataset;
    let mut named: Vec<(String, AnchorConfig)> = Vec::new();
    for p in &configs {
        named.push((stem(p), io::read_json(p)?));
    }
    if baseline {
        named.push(("baseline".into(), AnchorConfig::baseline()));
    }
    let runs = named
        .iter()
        .map(|(name, cfg)| Ok((name.clone(), anchor_recall(&ds, cfg, iou)?)))
        .collect::<Result<Vec<_>>>()?;
    let csv = recall_csv(&runs);
    io::write_text(&g.path("anchor_recall.csv"), &csv)?;

    #[derive(Serialize)]
    struct Params<'a> {
        dataset: &'a Path,
        anchor_configs: &'a [PathBuf],
        baseline: bool,
        iou: f64,
    }
    echo_config(
        g,
        "anchor-recall",
        &Params {
            dataset: &path,
            anchor_configs: &configs,
            baseline,
            iou,
        },
    )?;
    stdout.push_str(&csv);
    Ok(())
}

fn cmd_evaluate(a: &EvaluateArgs, file: &FileConfig, g: &Globals, stdout: &mut String) -> Result<()> {
    let s = &file.evaluate;
    let dataset = require(pick(a.dataset.clone(), s.dataset.clone()), "dataset")?;
    let split_path = pick(a.split.clone(), s.split.clone());
    let detections = require(pick(a.detections.clone(), s.detections.clone()), "detections")?;
    let compare = pick_list(&a.compare, &s.compare);
    let detector = pick(a.detector.clone(), s.detector.clone()).unwrap_or_else(|| stem(&detections));
    let backbone = pick(a.backbone.clone(), s.backbone.clone()).unwrap_or_default();
    let dataset_name = pick(a.dataset_name.clone(), s.dataset_name.clone()).unwrap_or_else(|| stem(&dataset));
    let score_thresh = pick(a.score_thresh, s.score_thresh).unwrap_or(DEFAULT_SCORE_THRESH);
    let max_per_image = pick(a.max_per_image, s.max_per_image).unwrap_or(DEFAULT_MAX_PER_IMAGE);

    let coco = io::read_coco(&dataset, None)?;
    let mut ds = coco.dataset;
    if let Some(p) = &split_path {
        ds = ds.with_splits(io::read_split(p)?)?;
    }
    let cfg = EvalConfig::default();

    let mut runs: Vec<(String, PathBuf)> = vec![(detector.clone(), detections.clone())];
    runs.extend(compare.iter().map(|p| (stem(p), p.clone())));
    let mut reports: Vec<(String, EvalReport)> = Vec::new();
    for (name, path) in &runs {
        let set = io::read_detections(path, name, &coco.category_ids)?;
        let set = filter_detections(&set, score_thresh, max_per_image);
        let report = evaluate_raw(&ds, &set, &cfg)?.report(name, &backbone, &dataset_name);
        info!("{name}: {} detections scored", report.n_dets);
        reports.push((name.clone(), report));
    }

    io::write_json(&g.path("report.json"), &reports[0].1)?;
    for (name, r) in &reports[1..] {
        io::write_json(&g.path(&format!("report_{name}.json")), r)?;
    }
    let rows: Vec<(&str, &EvalReport)> = reports.iter().map(|(n, r)| (n.as_str(), r)).collect();
    let table = render_metric_table(&rows);
    io::write_text(&g.path("metrics.csv"), &table.csv)?;
    io::write_text(&g.path("metrics.md"), &table.markdown)?;

    let per_label = per_label_report(&rows)?;
    io::write_text(&g.path("per_label_ap50.csv"), &per_label.to_csv())?;
    let bars = BarTable {
        categories: per_label.labels.clone(),
        series: per_label
            .runs
            .iter()
            .enumerate()
            .map(|(j, run)| (run.clone(), per_label.ap50.iter().map(|row| row[j]).collect()))
            .collect(),
    };
    let spec = g.spec(ChartKind::GroupedBars, "AP at IoU 0.5 by label", "label", "AP50 (%)");
    io::write_text(&g.path("per_label_ap50.svg"), &render_grouped_bars(&bars, &spec)?)?;

    #[derive(Serialize)]
    struct Params<'a> {
        dataset: &'a Path,
        split: Option<&'a Path>,
        detections: &'a Path,
        compare: &'a [PathBuf],
        detector: &'a str,
        backbone: &'a str,
        dataset_name: &'a str,
        score_thresh: f64,
        max_per_image: usize,
        eval: &'a EvalConfig,
    }
    echo_config(
        g,
        "evaluate",
        &Params {
            dataset: &dataset,
            split: split_path.as_deref(),
            detections: &detections,
            compare: &compare,
            detector: &detector,
            backbone: &backbone,
            dataset_name: &dataset_name,
            score_thresh,
            max_per_image,
            eval: &cfg,
        },
    )?;
    stdout.push_str(&table.markdown);
    Ok(())
}

fn cmd_report(a: &ReportArgs, file: &FileConfig, g: &Globals, stdout: &mut String) -> Result<()> {
    let paths = pick_list(&a.reports, &file.report.reports);
    if paths.is_empty() {
        return Err(Error::Usage("report needs at least one --report".into()));
    }
    let reports = paths
        .iter()
        .map(|p| io::read_json(p))
        .collect::<Result<Vec<EvalReport>>>()?;
    let rows: Vec<(&str, &EvalReport)> = reports.iter().map(|r| (r.detector.as_str(), r)).collect();
    let table = render_metric_table(&rows);
    io::write_text(&g.path("table.md"), &table.markdown)?;
    io::write_text(&g.path("table.csv"), &table.csv)?;

    #[derive(Serialize)]
    struct Params<'a> {
        reports: &'a [PathBuf],
    }
    echo_config(g, "report", &Params { reports: &paths })?;
    stdout.push_str(&table.markdown);
    Ok(())
}
