use std::fmt::Write as _;
use std::str::FromStr;

use super::baselines::{competitor_rows, MethodRow};
use super::{AggregateReport, MeanStd};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Csv,
    Markdown,
}

impl FromStr for ReportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(ReportFormat::Csv),
            "markdown" | "md" => Ok(ReportFormat::Markdown),
            _ => Err(Error::UnknownFormat(s.to_string())),
        }
    }
}

const THIS_ROW: &str = "This";
const MISSING: &str = "-";

fn cell(value: Option<(f64, f64)>) -> String {
    match value {
        Some((mean, stdev)) => format!("{mean:.3} ± {stdev:.3}"),
        None => MISSING.to_string(),
    }
}

fn ms(m: &MeanStd) -> Option<(f64, f64)> {
    Some((m.mean, m.stdev))
}

/// `(mean, stdev)` per column; `None` where a method has no value.
type Cells = Vec<Option<(f64, f64)>>;

#[derive(Clone, Copy, PartialEq, Eq)]
enum Metric {
    Ndcg,
    Precision,
    Map,
}

/// One row's `(mean, stdev)` cells for a metric, aligned with the report's
/// cutoffs (a single cell for MAP).
fn row_cells(report: &AggregateReport, row: Option<&MethodRow>, metric: Metric) -> Cells {
    match (row, metric) {
        (None, Metric::Ndcg) => report.ndcg.iter().map(ms).collect(),
        (None, Metric::Precision) => report.precision.iter().map(ms).collect(),
        (None, Metric::Map) => vec![ms(&report.map)],
        (Some(r), Metric::Ndcg) => report.cutoffs.iter().map(|&c| r.ndcg_at(c)).collect(),
        (Some(r), Metric::Precision) => report.cutoffs.iter().map(|&c| r.precision_at(c)).collect(),
        (Some(r), Metric::Map) => vec![Some(r.map)],
    }
}

fn rows(report: &AggregateReport) -> Vec<(&'static str, Option<&'static MethodRow>)> {
    let mut rows = vec![(THIS_ROW, None)];
    if let Some(collection) = report.collection {
        rows.extend(competitor_rows(collection).iter().map(|r| (r.method, Some(r))));
    }
    rows
}

/// Renders the report. CSV has one row per method and one column per
/// metric@cutoff; markdown lays out NDCG, precision and MAP tables with the
/// best mean per column in bold.
pub fn emit_report(report: &AggregateReport, format: ReportFormat) -> Result<String> {
    if report.folds.is_empty() {
        return Err(Error::EmptyReport);
    }
    match format {
        ReportFormat::Csv => emit_csv(report),
        ReportFormat::Markdown => Ok(emit_markdown(report)),
    }
}

fn emit_csv(report: &AggregateReport) -> Result<String> {
    let mut writer = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["method".to_string()];
    header.extend(report.cutoffs.iter().map(|c| format!("NDCG@{c}")));
    header.extend(report.cutoffs.iter().map(|c| format!("P@{c}")));
    header.push("MAP".to_string());
    writer.write_record(&header).map_err(|e| Error::Config(e.to_string()))?;

    for (name, row) in rows(report) {
        let mut fields = vec![name.to_string()];
        for metric in [Metric::Ndcg, Metric::Precision, Metric::Map] {
            fields.extend(row_cells(report, row, metric).into_iter().map(cell));
        }
        writer.write_record(&fields).map_err(|e| Error::Config(e.to_string()))?;
    }
    let bytes = writer.into_inner().map_err(|e| Error::Config(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Config(e.to_string()))
}

fn rounded(mean: f64) -> i64 {
    (mean * 1000.0).round() as i64
}

fn markdown_table(out: &mut String, title: &str, headings: &[String], body: &[(&str, Cells)]) {
    let _ = writeln!(out, "### {title}\n");
    let _ = writeln!(out, "| | {} |", headings.join(" | "));
    let _ = writeln!(out, "|---|{}", "---|".repeat(headings.len()));
    let best: Vec<Option<i64>> = (0..headings.len())
        .map(|col| body.iter().filter_map(|(_, cells)| cells[col].map(|c| rounded(c.0))).max())
        .collect();
    for (name, cells) in body {
        let rendered: Vec<String> = cells
            .iter()
            .zip(&best)
            .map(|(c, b)| match c {
                Some(v) if Some(rounded(v.0)) == *b => format!("**{}**", cell(*c)),
                _ => cell(*c),
            })
            .collect();
        let _ = writeln!(out, "| {name} | {} |", rendered.join(" | "));
    }
    out.push('\n');
}

fn emit_markdown(report: &AggregateReport) -> String {
    let mut out = String::new();
    let dataset = report.collection.map(|c| c.name()).unwrap_or("dataset");
    let _ = writeln!(
        out,
        "## {dataset}: {} model, mean ± stdev over {} folds\n",
        report.model_kind,
        report.folds.len()
    );

    let at: Vec<String> = report.cutoffs.iter().map(|c| format!("@{c}")).collect();
    let rows = rows(report);
    for (title, metric, headings) in [
        ("NDCG", Metric::Ndcg, at.clone()),
        ("Precision", Metric::Precision, at.clone()),
        ("MAP", Metric::Map, vec!["MAP".to_string()]),
    ] {
        let body: Vec<(&str, Cells)> =
            rows.iter().map(|(name, row)| (*name, row_cells(report, *row, metric))).collect();
        markdown_table(&mut out, title, &headings, &body);
    }

    let _ = writeln!(out, "### Folds\n");
    let _ = writeln!(out, "| fold | test queries | MAP | converged | iterations | final NLL |");
    let _ = writeln!(out, "|---|---|---|---|---|---|");
    for fold in &report.folds {
        let _ = writeln!(
            out,
            "| {} | {} | {:.3} | {} | {} | {} |",
            fold.fold_id, fold.test_queries, fold.average.average_precision, fold.converged, fold.iterations, fold.final_nll
        );
    }
    if !report.warnings.is_empty() {
        let _ = writeln!(out, "\nWarnings:\n");
        for w in &report.warnings {
            let _ = writeln!(out, "- {w}");
        }
    }
    out
}
