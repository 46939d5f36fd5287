//! Static SVG charts and metric tables.
//!
//! Layout is a pure function of the inputs and the [`ChartStyle`]: no font
//! metrics, no scripting, every number printed with a fixed precision, so the
//! same call always produces the same bytes.

use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::eval::EvalReport;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ChartStyle {
    pub width: f64,
    pub height: f64,
    pub margin_left: f64,
    pub margin_right: f64,
    pub margin_top: f64,
    pub margin_bottom: f64,
    pub font_size: f64,
    pub font_family: String,
    pub background: String,
    pub axis_color: String,
    pub palette: Vec<String>,
}

impl Default for ChartStyle {
    fn default() -> Self {
        Self {
            width: 720.0,
            height: 420.0,
            margin_left: 64.0,
            margin_right: 24.0,
            margin_top: 48.0,
            margin_bottom: 88.0,
            font_size: 12.0,
            font_family: "sans-serif".into(),
            background: "#ffffff".into(),
            axis_color: "#333333".into(),
            palette: ["#4e79a7", "#f28e2b", "#59a14f", "#e15759", "#76b7b2", "#edc948"]
                .iter()
                .map(|s| s.to_string())
                .collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ChartKind {
    Histogram,
    GroupedBars,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChartSpec {
    pub kind: ChartKind,
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub style: ChartStyle,
    pub output_path: Option<String>,
}

impl ChartSpec {
    pub fn new(kind: ChartKind, title: &str, x_label: &str, y_label: &str) -> Self {
        Self {
            kind,
            title: title.into(),
            x_label: x_label.into(),
            y_label: y_label.into(),
            style: ChartStyle::default(),
            output_path: None,
        }
    }

    pub fn with_style(mut self, style: ChartStyle) -> Self {
        self.style = style;
        self
    }
}

pub fn xml_escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            c => out.push(c),
        }
    }
    out
}

pub fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n', '\r']) {
        let mut out = String::from("\"");
        out.push_str(&s.replace('"', "\"\""));
        out.push('"');
        out
    } else {
        s.to_string()
    }
}

/// Equal-width bins over `[lo, hi]`; the last bin is closed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub lo: f64,
    pub hi: f64,
    pub counts: Vec<usize>,
}

impl Histogram {
    pub fn edges(&self) -> Vec<f64> {
        let n = self.counts.len();
        (0..=n)
            .map(|i| self.lo + (self.hi - self.lo) * i as f64 / n as f64)
            .collect()
    }
}

pub fn histogram(values: &[f64], bins: usize) -> Result<Histogram> {
    if values.is_empty() {
        return Err(Error::EmptyInput("histogram needs at least one value"));
    }
    if bins == 0 {
        return Err(Error::InvalidArgument("histogram needs at least one bin".into()));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument("histogram values must be finite".into()));
    }
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut counts = alloc::vec![0usize; bins];
    let span = hi - lo;
    for &v in values {
        let idx = if span > 0.0 {
            (libm::floor((v - lo) / span * bins as f64) as usize).min(bins - 1)
        } else {
            0
        };
        counts[idx] += 1;
    }
    Ok(Histogram { lo, hi, counts })
}

/// Smallest 1, 2 or 5 times a power of ten that is at least `v`.
fn nice_ceiling(v: f64) -> f64 {
    if v <= 0.0 {
        return 1.0;
    }
    let mag = libm::pow(10.0, libm::floor(libm::log10(v)));
    for m in [1.0, 2.0, 5.0, 10.0] {
        if m * mag >= v * (1.0 - 1e-12) {
            return m * mag;
        }
    }
    10.0 * mag
}

struct Frame<'a> {
    spec: &'a ChartSpec,
    out: String,
}

impl<'a> Frame<'a> {
    fn open(spec: &'a ChartSpec) -> Self {
        let s = &spec.style;
        let mut out = String::new();
        let _ = write!(
            out,
            "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n\
             <svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"{w:.0}\" height=\"{h:.0}\" viewBox=\"0 0 {w:.0} {h:.0}\" font-family=\"{font}\" font-size=\"{fs:.1}\">\n\
             <rect x=\"0\" y=\"0\" width=\"{w:.0}\" height=\"{h:.0}\" fill=\"{bg}\"/>\n\
             <text x=\"{tx:.2}\" y=\"{ty:.2}\" text-anchor=\"middle\" font-size=\"{tfs:.1}\">{title}</text>\n",
            w = s.width,
            h = s.height,
            font = xml_escape(&s.font_family),
            fs = s.font_size,
            bg = xml_escape(&s.background),
            tx = s.width / 2.0,
            ty = s.margin_top / 2.0 + s.font_size / 2.0,
            tfs = s.font_size * 1.3,
            title = xml_escape(&spec.title),
        );
        Self { spec, out }
    }

    fn plot_left(&self) -> f64 {
        self.spec.style.margin_left
    }

    fn plot_right(&self) -> f64 {
        self.spec.style.width - self.spec.style.margin_right
    }

    fn plot_top(&self) -> f64 {
        self.spec.style.margin_top
    }

    fn plot_bottom(&self) -> f64 {
        self.spec.style.height - self.spec.style.margin_bottom
    }

    fn y_of(&self, v: f64, y_max: f64) -> f64 {
        self.plot_bottom() - (self.plot_bottom() - self.plot_top()) * v / y_max
    }

    fn axes(&mut self, y_max: f64, integer_ticks: bool) {
        let s = &self.spec.style;
        let (l, r, t, b) = (self.plot_left(), self.plot_right(), self.plot_top(), self.plot_bottom());
        let axis = xml_escape(&s.axis_color);
        let _ = writeln!(
            self.out,
            "<g class=\"axes\" stroke=\"{axis}\" stroke-width=\"1\">\n\
             <line x1=\"{l:.2}\" y1=\"{b:.2}\" x2=\"{r:.2}\" y2=\"{b:.2}\"/>\n\
             <line x1=\"{l:.2}\" y1=\"{t:.2}\" x2=\"{l:.2}\" y2=\"{b:.2}\"/>\n</g>"
        );
        self.out.push_str("<g class=\"y-ticks\" text-anchor=\"end\">\n");
        for i in 0..=4 {
            let v = y_max * f64::from(i) / 4.0;
            let y = self.y_of(v, y_max);
            let label = if integer_ticks && v == libm::floor(v) {
                alloc::format!("{v:.0}")
            } else {
                alloc::format!("{v:.2}")
            };
            let _ = writeln!(
                self.out,
                "<line x1=\"{x1:.2}\" y1=\"{y:.2}\" x2=\"{l:.2}\" y2=\"{y:.2}\" stroke=\"{axis}\"/><text x=\"{tx:.2}\" y=\"{ty:.2}\">{label}</text>",
                x1 = l - 4.0,
                tx = l - 6.0,
                ty = y + s.font_size / 3.0,
            );
        }
        self.out.push_str("</g>\n");
        let _ = writeln!(
            self.out,
            "<text x=\"{x:.2}\" y=\"{y:.2}\" text-anchor=\"middle\">{label}</text>",
            x = (l + r) / 2.0,
            y = s.height - s.font_size,
            label = xml_escape(&self.spec.x_label),
        );
        let cy = (t + b) / 2.0;
        let _ = writeln!(
            self.out,
            "<text x=\"{x:.2}\" y=\"{cy:.2}\" text-anchor=\"middle\" transform=\"rotate(-90 {x:.2} {cy:.2})\">{label}</text>",
            x = s.font_size * 1.2,
            label = xml_escape(&self.spec.y_label),
        );
    }

    fn close(mut self) -> String {
        self.out.push_str("</svg>\n");
        self.out
    }
}

pub fn render_histogram(values: &[f64], bins: usize, spec: &ChartSpec) -> Result<String> {
    let hist = histogram(values, bins)?;
    Ok(render_histogram_of(&hist, spec))
}

pub fn render_histogram_of(hist: &Histogram, spec: &ChartSpec) -> String {
    let mut f = Frame::open(spec);
    let max = hist.counts.iter().copied().max().unwrap_or(0);
    let y_max = nice_ceiling(max as f64);
    f.axes(y_max, true);

    let (l, r) = (f.plot_left(), f.plot_right());
    let bw = (r - l) / hist.counts.len() as f64;
    let fill = xml_escape(spec.style.palette.first().map(String::as_str).unwrap_or("#4e79a7"));
    let _ = writeln!(f.out, "<g class=\"bars\" fill=\"{fill}\">");
    let edges = hist.edges();
    for (i, &c) in hist.counts.iter().enumerate() {
        let top = f.y_of(c as f64, y_max);
        let _ = writeln!(
            f.out,
            "<rect class=\"bin\" data-bin=\"{i}\" data-count=\"{c}\" data-lo=\"{lo:.4}\" data-hi=\"{hi:.4}\" x=\"{x:.2}\" y=\"{top:.2}\" width=\"{w:.2}\" height=\"{h:.2}\"/>",
            lo = edges[i],
            hi = edges[i + 1],
            x = l + bw * i as f64,
            w = bw,
            h = f.plot_bottom() - top,
        );
    }
    f.out.push_str("</g>\n");

    let ticks = hist.counts.len().min(8);
    let fs = spec.style.font_size;
    let _ = writeln!(
        f.out,
        "<g class=\"x-ticks\" text-anchor=\"middle\" data-lo=\"{:.4}\" data-hi=\"{:.4}\">",
        hist.lo, hist.hi
    );
    for i in 0..=ticks {
        let frac = i as f64 / ticks as f64;
        let v = hist.lo + (hist.hi - hist.lo) * frac;
        let _ = writeln!(
            f.out,
            "<text x=\"{x:.2}\" y=\"{y:.2}\">{v:.2}</text>",
            x = l + (r - l) * frac,
            y = f.plot_bottom() + fs * 1.5,
        );
    }
    f.out.push_str("</g>\n");
    f.close()
}

/// Category x series grid; `None` cells are not available.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BarTable {
    pub categories: Vec<String>,
    pub series: Vec<(String, Vec<Option<f64>>)>,
}

impl BarTable {
    pub fn validate(&self) -> Result<()> {
        if self.series.is_empty() {
            return Err(Error::EmptyInput("bar chart needs at least one series"));
        }
        for (name, values) in &self.series {
            if values.len() != self.categories.len() {
                return Err(Error::RaggedGrid {
                    expected: self.categories.len(),
                    series: name.clone(),
                    got: values.len(),
                });
            }
            if values.iter().flatten().any(|v| !v.is_finite() || *v < 0.0) {
                return Err(Error::InvalidArgument(alloc::format!(
                    "series {name:?} has negative or non-finite values"
                )));
            }
        }
        Ok(())
    }
}

pub fn render_grouped_bars(table: &BarTable, spec: &ChartSpec) -> Result<String> {
    table.validate()?;
    let max = table
        .series
        .iter()
        .flat_map(|(_, v)| v.iter().flatten().copied())
        .fold(0.0f64, f64::max);
    let y_max = nice_ceiling(max);
    let mut f = Frame::open(spec);
    f.axes(y_max, true);

    let style = &spec.style;
    let (l, r, b) = (f.plot_left(), f.plot_right(), f.plot_bottom());
    let n_cat = table.categories.len().max(1);
    let group_w = (r - l) / n_cat as f64;
    let bar_w = group_w * 0.8 / table.series.len() as f64;
    let fs = style.font_size;

    for (si, (name, values)) in table.series.iter().enumerate() {
        let color = style
            .palette
            .get(si % style.palette.len().max(1))
            .map(String::as_str)
            .unwrap_or("#4e79a7");
        let _ = writeln!(
            f.out,
            "<g class=\"series\" data-series=\"{}\" fill=\"{}\">",
            xml_escape(name),
            xml_escape(color)
        );
        for (ci, v) in values.iter().enumerate() {
            let x = l + group_w * ci as f64 + group_w * 0.1 + bar_w * si as f64;
            match v {
                Some(v) => {
                    let top = f.y_of(*v, y_max);
                    let _ = writeln!(
                        f.out,
                        "<rect class=\"bar\" data-category=\"{cat}\" data-value=\"{v:.4}\" x=\"{x:.2}\" y=\"{top:.2}\" width=\"{bar_w:.2}\" height=\"{h:.2}\"/>",
                        cat = xml_escape(&table.categories[ci]),
                        h = b - top,
                    );
                }
                None => {
                    let _ = writeln!(
                        f.out,
                        "<text class=\"na\" data-category=\"{cat}\" x=\"{cx:.2}\" y=\"{y:.2}\" text-anchor=\"middle\" font-size=\"{nfs:.1}\">n/a</text>",
                        cat = xml_escape(&table.categories[ci]),
                        cx = x + bar_w / 2.0,
                        y = b - 3.0,
                        nfs = fs * 0.7,
                    );
                }
            }
        }
        f.out.push_str("</g>\n");
    }

    f.out.push_str("<g class=\"x-ticks\" text-anchor=\"end\">\n");
    for (ci, cat) in table.categories.iter().enumerate() {
        let cx = l + group_w * (ci as f64 + 0.5);
        let y = b + fs * 1.2;
        let _ = writeln!(
            f.out,
            "<text x=\"{cx:.2}\" y=\"{y:.2}\" transform=\"rotate(-35 {cx:.2} {y:.2})\">{}</text>",
            xml_escape(cat)
        );
    }
    f.out.push_str("</g>\n");

    f.out.push_str("<g class=\"legend\">\n");
    for (si, (name, _)) in table.series.iter().enumerate() {
        let color = style
            .palette
            .get(si % style.palette.len().max(1))
            .map(String::as_str)
            .unwrap_or("#4e79a7");
        // fixed-width estimate of 0.6 em per character
        let x = r - 10.0 - (name.chars().count() as f64 * fs * 0.6) - fs * 1.5;
        let y = f.plot_top() + fs * 1.5 * si as f64;
        let _ = writeln!(
            f.out,
            "<rect x=\"{x:.2}\" y=\"{y:.2}\" width=\"{fs:.2}\" height=\"{fs:.2}\" fill=\"{c}\"/><text x=\"{tx:.2}\" y=\"{ty:.2}\">{n}</text>",
            c = xml_escape(color),
            tx = x + fs * 1.4,
            ty = y + fs * 0.9,
            n = xml_escape(name),
        );
    }
    f.out.push_str("</g>\n");
    Ok(f.close())
}

/// Table header, in order.
pub const METRIC_TABLE_COLUMNS: [&str; 10] = [
    "Detector", "Backbone", "Data Set", "mAP", "AP50", "AP75", "APs", "APm", "APl", "AR",
];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MetricTable {
    pub markdown: String,
    pub csv: String,
}

fn cell(v: Option<f64>) -> String {
    match v {
        Some(x) => alloc::format!("{x:.2}"),
        None => "-".to_string(),
    }
}

/// One row per `(detector name, report)`, N/A as `-`, two decimals.
pub fn render_metric_table(rows: &[(&str, &EvalReport)]) -> MetricTable {
    let cells: Vec<Vec<String>> = rows
        .iter()
        .map(|(name, r)| {
            let mut row = alloc::vec![name.to_string(), r.backbone.clone(), r.dataset.clone()];
            row.extend(r.metrics.columns().iter().map(|(_, v)| cell(*v)));
            row
        })
        .collect();

    let mut markdown = String::new();
    let _ = writeln!(markdown, "| {} |", METRIC_TABLE_COLUMNS.join(" | "));
    let align: Vec<&str> = METRIC_TABLE_COLUMNS
        .iter()
        .enumerate()
        .map(|(i, _)| if i < 3 { "---" } else { "---:" })
        .collect();
    let _ = writeln!(markdown, "| {} |", align.join(" | "));
    for row in &cells {
        let escaped: Vec<String> = row.iter().map(|c| c.replace('|', "\\|")).collect();
        let _ = writeln!(markdown, "| {} |", escaped.join(" | "));
    }

    let mut csv = METRIC_TABLE_COLUMNS.join(",");
    csv.push('\n');
    for row in &cells {
        let fields: Vec<String> = row.iter().map(|c| csv_field(c)).collect();
        csv.push_str(&fields.join(","));
        csv.push('\n');
    }
    MetricTable { markdown, csv }
}
