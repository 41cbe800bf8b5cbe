//! Report files: accuracy-grid CSV, summary JSON, similarity-matrix CSV,
//! and standalone SVG charts rendered from the summaries.
//!
//! All emitters format deterministically, so identical inputs produce
//! byte-identical files.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::eval::{EvalReport, SummaryRow};
use crate::similarity::SimilarityMatrix;

pub const GRID_CSV_HEADER: &str = "probe_id,train_dataset,eval_dataset,accuracy,n,in_domain";
pub const RANKING_CSV_HEADER: &str = "feature_index,cv_accuracy";

/// Summary records plus the aggregation method, as stored on disk.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryFile {
    pub method: SummaryMethod,
    pub summaries: Vec<SummaryRow>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryMethod {
    pub quartiles: String,
}

impl Default for SummaryMethod {
    fn default() -> Self {
        SummaryMethod {
            quartiles: "linear interpolation, inclusive".to_string(),
        }
    }
}

fn csv_field(s: &str) -> String {
    if s.contains(',') || s.contains('"') || s.contains('\n') {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Write the probe x dataset accuracy grid as CSV.
pub fn write_grid_csv(report: &EvalReport, path: &Path) -> Result<()> {
    let mut out = String::from(GRID_CSV_HEADER);
    out.push('\n');
    for row in &report.rows {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            csv_field(&row.probe_id),
            csv_field(&row.train_dataset),
            csv_field(&row.eval_dataset),
            row.accuracy,
            row.n,
            row.in_domain
        ));
    }
    fs::write(path, out).map_err(|e| Error::storage(path, e))
}

/// Write the bootstrap summaries with method metadata as JSON.
pub fn write_summary_json(report: &EvalReport, path: &Path) -> Result<()> {
    let file = SummaryFile {
        method: SummaryMethod::default(),
        summaries: report.summaries.clone(),
    };
    let json = serde_json::to_string_pretty(&file).expect("summary serialization cannot fail");
    fs::write(path, json).map_err(|e| Error::storage(path, e))
}

/// Read a summary file written by [`write_summary_json`].
pub fn read_summary_json(path: &Path) -> Result<SummaryFile> {
    let json = fs::read_to_string(path).map_err(|e| Error::storage(path, e))?;
    serde_json::from_str(&json).map_err(|e| Error::Format(format!("bad summary file: {e}")))
}

/// Write a feature ranking as CSV.
pub fn write_ranking_csv(ranking: &[(usize, f64)], path: &Path) -> Result<()> {
    let mut out = String::from(RANKING_CSV_HEADER);
    out.push('\n');
    for &(idx, acc) in ranking {
        out.push_str(&format!("{idx},{acc}\n"));
    }
    fs::write(path, out).map_err(|e| Error::storage(path, e))
}

/// Read a ranking written by [`write_ranking_csv`].
pub fn read_ranking_csv(path: &Path) -> Result<Vec<(usize, f64)>> {
    let text = fs::read_to_string(path).map_err(|e| Error::storage(path, e))?;
    let mut lines = text.lines();
    match lines.next() {
        Some(header) if header == RANKING_CSV_HEADER => {}
        _ => return Err(Error::Format("missing ranking CSV header".to_string())),
    }
    lines
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, line)| {
            let mut parts = line.splitn(2, ',');
            let idx = parts
                .next()
                .and_then(|p| p.parse::<usize>().ok())
                .ok_or_else(|| Error::Format(format!("bad feature index on line {}", i + 2)))?;
            let acc = parts
                .next()
                .and_then(|p| p.parse::<f64>().ok())
                .ok_or_else(|| Error::Format(format!("bad accuracy on line {}", i + 2)))?;
            Ok((idx, acc))
        })
        .collect()
}

/// Write a labeled similarity matrix as CSV: header row of column labels,
/// one labeled row per row vector.
pub fn write_matrix_csv(matrix: &SimilarityMatrix, path: &Path) -> Result<()> {
    let mut out = String::new();
    for label in &matrix.col_labels {
        out.push(',');
        out.push_str(&csv_field(label));
    }
    out.push('\n');
    for (label, row) in matrix.row_labels.iter().zip(&matrix.values) {
        out.push_str(&csv_field(label));
        for v in row {
            out.push_str(&format!(",{v}"));
        }
        out.push('\n');
    }
    fs::write(path, out).map_err(|e| Error::storage(path, e))
}

/// Read a matrix written by [`write_matrix_csv`].
pub fn read_matrix_csv(path: &Path) -> Result<SimilarityMatrix> {
    let text = fs::read_to_string(path).map_err(|e| Error::storage(path, e))?;
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::Format("empty matrix CSV".to_string()))?;
    let col_labels: Vec<String> = header.split(',').skip(1).map(str::to_string).collect();
    let mut row_labels = Vec::new();
    let mut values = Vec::new();
    for (i, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let mut parts = line.split(',');
        row_labels.push(
            parts
                .next()
                .ok_or_else(|| Error::Format(format!("missing row label on line {}", i + 2)))?
                .to_string(),
        );
        let row = parts
            .map(|p| {
                p.parse::<f64>()
                    .map_err(|_| Error::Format(format!("bad value on line {}", i + 2)))
            })
            .collect::<Result<Vec<f64>>>()?;
        if row.len() != col_labels.len() {
            return Err(Error::Corruption(format!(
                "row {} has {} values for {} columns",
                i + 2,
                row.len(),
                col_labels.len()
            )));
        }
        values.push(row);
    }
    Ok(SimilarityMatrix {
        row_labels,
        col_labels,
        values,
    })
}

const CHART_WIDTH: f64 = 640.0;
const CHART_HEIGHT: f64 = 360.0;
const MARGIN_LEFT: f64 = 56.0;
const MARGIN_BOTTOM: f64 = 64.0;
const MARGIN_TOP: f64 = 24.0;
const MARGIN_RIGHT: f64 = 16.0;

fn fmt(v: f64) -> String {
    format!("{v:.2}")
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Render a median/quartile bar chart for one evaluation dataset: one bar
/// per probe group with whiskers from q1 to q3.
pub fn render_summary_svg(eval_dataset: &str, summaries: &[&SummaryRow]) -> String {
    let plot_w = CHART_WIDTH - MARGIN_LEFT - MARGIN_RIGHT;
    let plot_h = CHART_HEIGHT - MARGIN_TOP - MARGIN_BOTTOM;
    let y = |acc: f64| MARGIN_TOP + (1.0 - acc) * plot_h;

    let mut svg = String::new();
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{CHART_WIDTH}\" height=\"{CHART_HEIGHT}\" viewBox=\"0 0 {CHART_WIDTH} {CHART_HEIGHT}\">\n"
    ));
    svg.push_str(&format!(
        "  <text x=\"{}\" y=\"16\" font-family=\"sans-serif\" font-size=\"13\">accuracy on {}</text>\n",
        fmt(MARGIN_LEFT),
        xml_escape(eval_dataset)
    ));
    for tick in 0..=4 {
        let acc = tick as f64 * 0.25;
        let ty = y(acc);
        svg.push_str(&format!(
            "  <line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"#cccccc\" stroke-width=\"1\"/>\n",
            fmt(MARGIN_LEFT),
            fmt(ty),
            fmt(CHART_WIDTH - MARGIN_RIGHT),
            fmt(ty)
        ));
        svg.push_str(&format!(
            "  <text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"end\">{}</text>\n",
            fmt(MARGIN_LEFT - 6.0),
            fmt(ty + 4.0),
            fmt(acc)
        ));
    }

    let n = summaries.len().max(1) as f64;
    let slot = plot_w / n;
    let bar_w = (slot * 0.6).min(60.0);
    for (i, row) in summaries.iter().enumerate() {
        let cx = MARGIN_LEFT + slot * (i as f64 + 0.5);
        let x0 = cx - bar_w / 2.0;
        let median_y = y(row.median);
        svg.push_str(&format!(
            "  <rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"#4878a8\"/>\n",
            fmt(x0),
            fmt(median_y),
            fmt(bar_w),
            fmt(y(0.0) - median_y)
        ));
        svg.push_str(&format!(
            "  <line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"#222222\" stroke-width=\"2\"/>\n",
            fmt(cx),
            fmt(y(row.q1)),
            fmt(cx),
            fmt(y(row.q3))
        ));
        for q in [row.q1, row.q3] {
            svg.push_str(&format!(
                "  <line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"#222222\" stroke-width=\"2\"/>\n",
                fmt(cx - bar_w / 4.0),
                fmt(y(q)),
                fmt(cx + bar_w / 4.0),
                fmt(y(q))
            ));
        }
        svg.push_str(&format!(
            "  <text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"middle\">{}</text>\n",
            fmt(cx),
            fmt(CHART_HEIGHT - MARGIN_BOTTOM + 16.0),
            xml_escape(&row.probe_group)
        ));
    }
    svg.push_str(&format!(
        "  <line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"#000000\" stroke-width=\"1\"/>\n",
        fmt(MARGIN_LEFT),
        fmt(y(0.0)),
        fmt(CHART_WIDTH - MARGIN_RIGHT),
        fmt(y(0.0))
    ));
    svg.push_str("</svg>\n");
    svg
}

/// Write one summary chart per evaluation dataset into `out_dir`, named
/// `summary_<dataset>.svg`. Returns the written paths.
pub fn write_summary_charts(file: &SummaryFile, out_dir: &Path) -> Result<Vec<std::path::PathBuf>> {
    let mut datasets: Vec<&str> = file
        .summaries
        .iter()
        .map(|s| s.eval_dataset.as_str())
        .collect();
    datasets.sort_unstable();
    datasets.dedup();
    let mut written = Vec::with_capacity(datasets.len());
    for dataset in datasets {
        let rows: Vec<&SummaryRow> = file
            .summaries
            .iter()
            .filter(|s| s.eval_dataset == dataset)
            .collect();
        let svg = render_summary_svg(dataset, &rows);
        let safe: String = dataset
            .chars()
            .map(|c| if c.is_alphanumeric() { c } else { '_' })
            .collect();
        let path = out_dir.join(format!("summary_{safe}.svg"));
        fs::write(&path, svg).map_err(|e| Error::storage(&path, e))?;
        written.push(path);
    }
    Ok(written)
}

/// Diverging blue-white-red color for a similarity value in [-1, 1].
fn heat_color(v: f64) -> String {
    let v = v.clamp(-1.0, 1.0);
    let (r, g, b) = if v < 0.0 {
        let t = 1.0 + v; // 0 at -1, 1 at 0
        (
            33.0 + (255.0 - 33.0) * t,
            102.0 + (255.0 - 102.0) * t,
            172.0 + (255.0 - 172.0) * t,
        )
    } else {
        let t = 1.0 - v;
        (
            178.0 + (255.0 - 178.0) * t,
            24.0 + (255.0 - 24.0) * t,
            43.0 + (255.0 - 43.0) * t,
        )
    };
    format!("#{:02x}{:02x}{:02x}", r as u8, g as u8, b as u8)
}

/// Render a similarity matrix as a heatmap with row/column labels.
pub fn render_heatmap_svg(matrix: &SimilarityMatrix) -> String {
    let cell = 28.0;
    let label_w = 90.0;
    let label_h = 70.0;
    let w = label_w + cell * matrix.col_labels.len() as f64 + 8.0;
    let h = label_h + cell * matrix.row_labels.len() as f64 + 8.0;
    let mut svg = String::new();
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" viewBox=\"0 0 {w} {h}\">\n"
    ));
    for (j, label) in matrix.col_labels.iter().enumerate() {
        let x = label_w + cell * (j as f64 + 0.5);
        svg.push_str(&format!(
            "  <text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"10\" text-anchor=\"start\" transform=\"rotate(-60 {} {})\">{}</text>\n",
            fmt(x),
            fmt(label_h - 6.0),
            fmt(x),
            fmt(label_h - 6.0),
            xml_escape(label)
        ));
    }
    for (i, (label, row)) in matrix.row_labels.iter().zip(&matrix.values).enumerate() {
        let y0 = label_h + cell * i as f64;
        svg.push_str(&format!(
            "  <text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"10\" text-anchor=\"end\">{}</text>\n",
            fmt(label_w - 6.0),
            fmt(y0 + cell * 0.6),
            xml_escape(label)
        ));
        for (j, &v) in row.iter().enumerate() {
            svg.push_str(&format!(
                "  <rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"{}\"><title>{}</title></rect>\n",
                fmt(label_w + cell * j as f64),
                fmt(y0),
                fmt(cell - 1.0),
                fmt(cell - 1.0),
                heat_color(v),
                fmt(v)
            ));
        }
    }
    svg.push_str("</svg>\n");
    svg
}
