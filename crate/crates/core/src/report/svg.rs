//! Standalone SVG bar charts with byte-stable output.

use std::collections::BTreeSet;
use std::fmt::Write;
use std::path::Path;

use num_rational::Rational64;
use thiserror::Error;

use super::format_compact;
use crate::analyzer::AnalysisResult;
use crate::cost_model::{CostCategory, CostModel};
use crate::scalar::CostScalar;
use crate::store::Comparison;

#[derive(Debug, Error)]
pub enum ChartError {
    #[error("chart has no series")]
    NoSeries,

    #[error("series `{series}` has no values")]
    EmptySeries { series: String },

    #[error("value for `{label}` must be finite and nonnegative, found {value}")]
    InvalidValue { label: String, value: f64 },

    #[error("duplicate series label `{0}`")]
    DuplicateLabel(String),

    #[error("grouped series must all plot the same metrics in the same order")]
    MismatchedMetrics,

    #[error("chart size must be positive")]
    ZeroSize,

    #[error("{}: {source}", path.display())]
    Io {
        path: std::path::PathBuf,
        #[source]
        source: std::io::Error,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChartKind {
    /// One protocol, one bar per cost category.
    PerCategorySingle,
    /// Several protocols, one group each, one bar per metric.
    TotalsGrouped,
}

/// What a single-protocol chart plots per category.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChartMode {
    Counts,
    Costs,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub label: String,
    pub points: Vec<(String, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChartSpec {
    pub title: String,
    pub kind: ChartKind,
    pub series: Vec<Series>,
    pub width_px: u32,
    pub height_px: u32,
}

impl ChartSpec {
    /// Six bars, Th..Sd, holding either counts or `count × unit cost`.
    pub fn per_category(result: &AnalysisResult, mode: ChartMode, model: &CostModel) -> Self {
        let points = CostCategory::ALL
            .iter()
            .map(|&c| {
                let count = result.counts.get(c);
                let value = match mode {
                    ChartMode::Counts => count as f64,
                    ChartMode::Costs => {
                        (Rational64::from_count(count) * model.unit_cost(c).exact()).to_f64()
                    }
                };
                (model.display_symbol(c).to_string(), value)
            })
            .collect();
        let what = match mode {
            ChartMode::Counts => "operation counts",
            ChartMode::Costs => "cost per operation (ms)",
        };
        ChartSpec {
            title: format!("{}: {what}", result.protocol_name),
            kind: ChartKind::PerCategorySingle,
            series: vec![Series {
                label: result.protocol_name.clone(),
                points,
            }],
            width_px: 640,
            height_px: 400,
        }
    }

    /// One group per protocol: computation (ms, left axis) and communication (right axis).
    pub fn totals(cmp: &Comparison) -> Self {
        let series = cmp
            .rows
            .iter()
            .map(|r| Series {
                label: r.protocol_name.clone(),
                points: vec![
                    ("computation (ms)".to_string(), r.computation_ms),
                    ("communication".to_string(), r.communication as f64),
                ],
            })
            .collect::<Vec<_>>();
        let width = (160 + 110 * series.len() as u32).max(480);
        ChartSpec {
            title: "Computation and communication cost".to_string(),
            kind: ChartKind::TotalsGrouped,
            series,
            width_px: width,
            height_px: 420,
        }
    }

    fn validate(&self) -> Result<(), ChartError> {
        if self.series.is_empty() {
            return Err(ChartError::NoSeries);
        }
        if self.width_px == 0 || self.height_px == 0 {
            return Err(ChartError::ZeroSize);
        }
        let mut labels = BTreeSet::new();
        for s in &self.series {
            if !labels.insert(s.label.as_str()) {
                return Err(ChartError::DuplicateLabel(s.label.clone()));
            }
            if s.points.is_empty() {
                return Err(ChartError::EmptySeries {
                    series: s.label.clone(),
                });
            }
            for (label, value) in &s.points {
                if !value.is_finite() || *value < 0.0 {
                    return Err(ChartError::InvalidValue {
                        label: label.clone(),
                        value: *value,
                    });
                }
            }
        }
        if self.kind == ChartKind::TotalsGrouped {
            let metrics = |s: &Series| s.points.iter().map(|p| p.0.clone()).collect::<Vec<_>>();
            let first = metrics(&self.series[0]);
            if self.series.iter().any(|s| metrics(s) != first) {
                return Err(ChartError::MismatchedMetrics);
            }
        }
        Ok(())
    }
}

const PALETTE: [&str; 6] = [
    "#4e79a7", "#f28e2b", "#59a14f", "#e15759", "#76b7b2", "#edc948",
];
const MARGIN_LEFT: f64 = 70.0;
const MARGIN_RIGHT: f64 = 70.0;
const MARGIN_TOP: f64 = 56.0;
const MARGIN_BOTTOM: f64 = 64.0;
const TICKS: u32 = 4;
const LABEL_LINE_HEIGHT: f64 = 14.0;
/// Rough advance of one 12px sans-serif character.
const LABEL_CHAR_WIDTH: f64 = 7.0;

fn escape(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for c in text.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            _ => out.push(c),
        }
    }
    out
}

/// Axis top: the largest value, or 1 when everything is zero.
fn axis_max(values: impl Iterator<Item = f64>) -> f64 {
    let max = values.fold(0.0_f64, f64::max);
    if max > 0.0 {
        max
    } else {
        1.0
    }
}

struct Plot {
    left: f64,
    right: f64,
    top: f64,
    bottom: f64,
}

impl Plot {
    fn height(&self) -> f64 {
        self.bottom - self.top
    }

    fn width(&self) -> f64 {
        self.right - self.left
    }

    /// Bar height in px, rounded to 0.01 px.
    fn bar_height(&self, value: f64, max: f64) -> f64 {
        ((value / max) * self.height() * 100.0).round() / 100.0
    }
}

/// Renders the chart as a complete SVG 1.1 document.
pub fn render_svg(chart: &ChartSpec) -> Result<String, ChartError> {
    chart.validate()?;
    let (w, h) = (f64::from(chart.width_px), f64::from(chart.height_px));
    let mut plot = Plot {
        left: MARGIN_LEFT,
        right: w - MARGIN_RIGHT,
        top: MARGIN_TOP,
        bottom: h - MARGIN_BOTTOM,
    };
    if chart.kind == ChartKind::TotalsGrouped {
        let lines = group_label_lines(chart, &plot)
            .iter()
            .map(Vec::len)
            .max()
            .unwrap_or(1);
        plot.bottom -= LABEL_LINE_HEIGHT * (lines - 1) as f64;
    }

    let mut out = String::new();
    out.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    writeln!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"{}\" height=\"{}\" viewBox=\"0 0 {} {}\" font-family=\"sans-serif\">",
        chart.width_px, chart.height_px, chart.width_px, chart.height_px
    )
    .unwrap();
    writeln!(
        out,
        "<rect class=\"background\" x=\"0\" y=\"0\" width=\"{}\" height=\"{}\" fill=\"#ffffff\"/>",
        chart.width_px, chart.height_px
    )
    .unwrap();
    writeln!(
        out,
        "<text class=\"title\" x=\"{:.2}\" y=\"28.00\" text-anchor=\"middle\" font-size=\"16\">{}</text>",
        w / 2.0,
        escape(&chart.title)
    )
    .unwrap();

    match chart.kind {
        ChartKind::PerCategorySingle => single(&mut out, chart, &plot),
        ChartKind::TotalsGrouped => grouped(&mut out, chart, &plot),
    }
    out.push_str("</svg>\n");
    Ok(out)
}

pub fn write_svg(chart: &ChartSpec, path: &Path) -> Result<(), ChartError> {
    let text = render_svg(chart)?;
    std::fs::write(path, text).map_err(|source| ChartError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn axis(out: &mut String, plot: &Plot, x: f64, max: f64, anchor_right: bool) {
    writeln!(
        out,
        "<line class=\"axis\" x1=\"{x:.2}\" y1=\"{:.2}\" x2=\"{x:.2}\" y2=\"{:.2}\" stroke=\"#333333\"/>",
        plot.top, plot.bottom
    )
    .unwrap();
    let (dx, anchor) = if anchor_right {
        (6.0, "start")
    } else {
        (-6.0, "end")
    };
    for i in 0..=TICKS {
        let value = max * f64::from(i) / f64::from(TICKS);
        let y = plot.bottom - plot.height() * f64::from(i) / f64::from(TICKS);
        writeln!(
            out,
            "<text class=\"tick\" x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"{anchor}\" font-size=\"11\">{}</text>",
            x + dx,
            y + 4.0,
            format_compact(value)
        )
        .unwrap();
    }
}

fn baseline(out: &mut String, plot: &Plot) {
    writeln!(
        out,
        "<line class=\"axis\" x1=\"{:.2}\" y1=\"{:.2}\" x2=\"{:.2}\" y2=\"{:.2}\" stroke=\"#333333\"/>",
        plot.left, plot.bottom, plot.right, plot.bottom
    )
    .unwrap();
}

fn bar(out: &mut String, plot: &Plot, x: f64, width: f64, height: f64, fill: &str, value: f64) {
    let y = plot.bottom - height;
    writeln!(
        out,
        "<rect class=\"bar\" x=\"{x:.2}\" y=\"{y:.2}\" width=\"{width:.2}\" height=\"{height:.2}\" fill=\"{fill}\"/>"
    )
    .unwrap();
    writeln!(
        out,
        "<text class=\"value\" x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"middle\" font-size=\"11\">{}</text>",
        x + width / 2.0,
        y - 4.0,
        format_compact(value)
    )
    .unwrap();
}

fn single(out: &mut String, chart: &ChartSpec, plot: &Plot) {
    let points = &chart.series[0].points;
    let max = axis_max(points.iter().map(|p| p.1));
    axis(out, plot, plot.left, max, false);
    baseline(out, plot);

    let slot = plot.width() / points.len() as f64;
    let width = slot * 0.6;
    for (i, (label, value)) in points.iter().enumerate() {
        let x = plot.left + slot * i as f64 + (slot - width) / 2.0;
        bar(
            out,
            plot,
            x,
            width,
            plot.bar_height(*value, max),
            PALETTE[i % PALETTE.len()],
            *value,
        );
        writeln!(
            out,
            "<text class=\"label\" x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"middle\" font-size=\"12\">{}</text>",
            x + width / 2.0,
            plot.bottom + 18.0,
            escape(label)
        )
        .unwrap();
    }
}

/// Group labels broken at spaces so each line fits the group's slot.
fn group_label_lines(chart: &ChartSpec, plot: &Plot) -> Vec<Vec<String>> {
    let slot = plot.width() / chart.series.len() as f64;
    let max_chars = ((slot / LABEL_CHAR_WIDTH) as usize).max(4);
    chart
        .series
        .iter()
        .map(|s| wrap(&s.label, max_chars))
        .collect()
}

fn wrap(text: &str, max_chars: usize) -> Vec<String> {
    let mut lines: Vec<String> = Vec::new();
    for word in text.split_whitespace() {
        match lines.last_mut() {
            Some(line) if line.chars().count() + 1 + word.chars().count() <= max_chars => {
                line.push(' ');
                line.push_str(word);
            }
            _ => lines.push(word.to_string()),
        }
    }
    if lines.is_empty() {
        lines.push(String::new());
    }
    lines
}

fn multiline_label(out: &mut String, x: f64, y: f64, lines: &[String]) {
    if let [line] = lines {
        writeln!(
            out,
            "<text class=\"label\" x=\"{x:.2}\" y=\"{y:.2}\" text-anchor=\"middle\" font-size=\"12\">{}</text>",
            escape(line)
        )
        .unwrap();
        return;
    }
    write!(
        out,
        "<text class=\"label\" x=\"{x:.2}\" y=\"{y:.2}\" text-anchor=\"middle\" font-size=\"12\">"
    )
    .unwrap();
    for (i, line) in lines.iter().enumerate() {
        let dy = if i == 0 { 0.0 } else { LABEL_LINE_HEIGHT };
        write!(
            out,
            "<tspan x=\"{x:.2}\" dy=\"{dy:.2}\">{}</tspan>",
            escape(line)
        )
        .unwrap();
    }
    out.push_str("</text>\n");
}

fn grouped(out: &mut String, chart: &ChartSpec, plot: &Plot) {
    let metrics: Vec<&str> = chart.series[0]
        .points
        .iter()
        .map(|p| p.0.as_str())
        .collect();
    let maxima: Vec<f64> = (0..metrics.len())
        .map(|m| axis_max(chart.series.iter().map(|s| s.points[m].1)))
        .collect();

    // First metric on the left axis, second on the right; any further metric
    // keeps its own scale without a drawn axis.
    axis(out, plot, plot.left, maxima[0], false);
    if metrics.len() > 1 {
        axis(out, plot, plot.right, maxima[1], true);
    }
    baseline(out, plot);

    let labels = group_label_lines(chart, plot);
    let slot = plot.width() / chart.series.len() as f64;
    let group_width = slot * 0.7;
    let width = group_width / metrics.len() as f64;
    for (g, series) in chart.series.iter().enumerate() {
        let group_x = plot.left + slot * g as f64 + (slot - group_width) / 2.0;
        for (m, (_, value)) in series.points.iter().enumerate() {
            let x = group_x + width * m as f64;
            let height = plot.bar_height(*value, maxima[m]);
            bar(
                out,
                plot,
                x,
                width,
                height,
                PALETTE[m % PALETTE.len()],
                *value,
            );
        }
        multiline_label(
            out,
            group_x + group_width / 2.0,
            plot.bottom + 18.0,
            &labels[g],
        );
    }

    let extra = labels.iter().map(Vec::len).max().unwrap_or(1) - 1;
    for (m, metric) in metrics.iter().enumerate() {
        let x = plot.left + 150.0 * m as f64;
        let y = plot.bottom + 40.0 + LABEL_LINE_HEIGHT * extra as f64;
        writeln!(
            out,
            "<rect class=\"legend-swatch\" x=\"{x:.2}\" y=\"{y:.2}\" width=\"12.00\" height=\"12.00\" fill=\"{}\"/>",
            PALETTE[m % PALETTE.len()]
        )
        .unwrap();
        writeln!(
            out,
            "<text class=\"legend\" x=\"{:.2}\" y=\"{:.2}\" font-size=\"12\">{}</text>",
            x + 18.0,
            y + 10.0,
            escape(metric)
        )
        .unwrap();
    }
}
