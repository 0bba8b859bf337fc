//! Comparison tables and per-company profiles in CSV, Markdown and JSON.

use std::fmt::Write as _;
use std::str::FromStr;

use serde::Serialize;

use crate::assessment::{Assessment, EvidenceItem};
use crate::exact;
use crate::rubric::{CriterionId, CriterionNode, Rubric};
use crate::scoring::AggregateReport;

pub const TOTAL_ROW: &str = "Total score";
pub const NO_QUOTES: &str = "No relevant quotes found";
pub const UNSCORED: &str = "—";
const CRITERIA_HEADER: &str = "Criteria (Weight)";

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Csv,
    Markdown,
    Structured,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Markdown => "md",
            Format::Structured => "json",
        }
    }

    /// Format implied by a file name's extension.
    pub fn from_path(path: &std::path::Path) -> Option<Format> {
        match path.extension()?.to_str()? {
            "csv" => Some(Format::Csv),
            "md" => Some(Format::Markdown),
            "json" => Some(Format::Structured),
            _ => None,
        }
    }
}

impl FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "csv" => Ok(Format::Csv),
            "markdown" | "md" => Ok(Format::Markdown),
            "structured" | "json" => Ok(Format::Structured),
            other => Err(format!("unknown format `{other}` (expected csv, markdown or structured)")),
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ReportError {
    #[error("report for `{name}` uses rubric `{found}`, expected `{expected}`")]
    MixedVersions { name: String, expected: String, found: String },
}

/// `2.1.1.1 Risk tolerance is defined (33%)`.
pub fn row_label(node: &CriterionNode) -> String {
    format!("{} {} ({}%)", node.id, node.title, weight_text(&node.weight))
}

fn weight_text(weight: &exact::Exact) -> String {
    exact::to_terminating_decimal(weight).unwrap_or_else(|| exact::to_fixed(weight, 2))
}

#[derive(Serialize)]
struct Table {
    columns: Vec<String>,
    rows: Vec<TableRow>,
}

#[derive(Serialize)]
struct TableRow {
    id: String,
    label: String,
    values: Vec<i64>,
}

fn build_table(
    rubric: &Rubric,
    reports: &[AggregateReport],
    best_in_class: Option<&AggregateReport>,
) -> Result<Table, ReportError> {
    for r in reports.iter().chain(best_in_class) {
        if r.rubric_version != rubric.version() {
            return Err(ReportError::MixedVersions {
                name: r.name().to_string(),
                expected: rubric.version().to_string(),
                found: r.rubric_version.clone(),
            });
        }
    }
    let mut cols: Vec<&AggregateReport> = reports.iter().collect();
    cols.sort_by(|a, b| b.total_exact.cmp(&a.total_exact).then_with(|| a.name().cmp(b.name())));
    cols.extend(best_in_class);

    let mut rows = vec![TableRow {
        id: "total".into(),
        label: TOTAL_ROW.into(),
        values: cols.iter().map(|r| r.total_display).collect(),
    }];
    for node in rubric.nodes() {
        rows.push(TableRow {
            id: node.id.to_string(),
            label: row_label(node),
            values: cols
                .iter()
                .map(|r| r.display(&node.id).expect("report covers every rubric node"))
                .collect(),
        });
    }
    Ok(Table {
        columns: cols.iter().map(|r| r.name().to_string()).collect(),
        rows,
    })
}

/// One row per rubric node plus the total row, one column per report,
/// sorted by total descending, with the best-in-class column last.
pub fn render_comparison(
    rubric: &Rubric,
    reports: &[AggregateReport],
    best_in_class: Option<&AggregateReport>,
    format: Format,
) -> Result<String, ReportError> {
    let table = build_table(rubric, reports, best_in_class)?;
    let mut out = String::new();
    match format {
        Format::Csv => {
            let header: Vec<String> = std::iter::once(CRITERIA_HEADER)
                .chain(table.columns.iter().map(String::as_str))
                .map(csv_quote)
                .collect();
            out.push_str(&header.join(","));
            out.push('\n');
            for row in &table.rows {
                out.push_str(&csv_quote(&row.label));
                for v in &row.values {
                    let _ = write!(out, ",{v}");
                }
                out.push('\n');
            }
        }
        Format::Markdown => {
            out.push('|');
            for h in std::iter::once(CRITERIA_HEADER).chain(table.columns.iter().map(String::as_str)) {
                let _ = write!(out, " {} |", md_cell(h));
            }
            out.push_str("\n|---|");
            for _ in &table.columns {
                out.push_str("---:|");
            }
            out.push('\n');
            for row in &table.rows {
                let label = if row.id == "total" {
                    format!("**{}**", row.label)
                } else {
                    md_cell(&row.label)
                };
                let _ = write!(out, "| {label} |");
                for v in &row.values {
                    let _ = write!(out, " {v} |");
                }
                out.push('\n');
            }
        }
        Format::Structured => {
            out = serde_json::to_string_pretty(&table).expect("table serializes");
            out.push('\n');
        }
    }
    Ok(out)
}

fn csv_quote(s: &str) -> String {
    format!("\"{}\"", s.replace('"', "\"\""))
}

fn md_cell(s: &str) -> String {
    s.replace('|', "\\|").replace('\n', " ")
}

#[derive(Serialize)]
struct ProfileNode<'a> {
    id: &'a CriterionId,
    title: &'a str,
    weight: String,
    display: Option<i64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    rationale: Option<&'a str>,
    #[serde(skip_serializing_if = "Option::is_none")]
    evidence: Option<&'a [EvidenceItem]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    improvements: Option<&'a str>,
}

/// Per-criterion write-up: score, rationale, quotes and improvement notes.
/// Leaves without an entry render as unscored.
pub fn render_profile(
    rubric: &Rubric,
    assessment: &Assessment,
    report: Option<&AggregateReport>,
    format: Format,
) -> String {
    let score_of = |node: &CriterionNode| -> Option<i64> {
        if node.is_leaf() {
            assessment.score(&node.id).map(i64::from)
        } else {
            report.and_then(|r| r.display(&node.id))
        }
    };
    let shown = |v: Option<i64>| v.map_or_else(|| UNSCORED.to_string(), |v| format!("{v}%"));
    let subject = &assessment.subject;
    let mut out = String::new();
    match format {
        Format::Markdown => {
            let _ = writeln!(out, "# {}: {} {}", subject.company, subject.framework_title, subject.framework_version);
            out.push('\n');
            let _ = writeln!(
                out,
                "Assessed {} against rubric {}. Total score: {}.",
                subject.assessment_date,
                assessment.rubric_version,
                shown(report.map(|r| r.total_display))
            );
            for node in rubric.nodes() {
                let level = "#".repeat((node.id.depth() + 1).min(6));
                let _ = writeln!(out, "\n{level} {} – {}", row_label(node), shown(score_of(node)));
                if !node.is_leaf() {
                    continue;
                }
                let Some(entry) = assessment.entries.get(&node.id) else {
                    continue;
                };
                if !entry.rationale.is_empty() {
                    let _ = writeln!(out, "\n{}", entry.rationale);
                }
                out.push_str("\nQuotes:\n");
                if entry.evidence.is_empty() {
                    let _ = writeln!(out, "\n{NO_QUOTES}");
                }
                for e in &entry.evidence {
                    let _ = write!(out, "\n> {} ({})", e.quote.replace('\n', "\n> "), e.location);
                    if let Some(note) = &e.note {
                        let _ = write!(out, "\n>\n> Note: {note}");
                    }
                    out.push('\n');
                }
                if let Some(imp) = &entry.improvements {
                    let _ = writeln!(out, "\nImprovements: {imp}");
                }
            }
        }
        Format::Csv => {
            out.push_str("\"id\",\"title\",\"weight\",\"score\",\"quotes\"\n");
            for node in rubric.nodes() {
                let quotes = assessment
                    .entries
                    .get(&node.id)
                    .map_or_else(String::new, |e| e.evidence.len().to_string());
                let score = score_of(node).map_or_else(|| UNSCORED.to_string(), |v| v.to_string());
                let _ = writeln!(
                    out,
                    "{},{},{},{},{}",
                    csv_quote(&node.id.to_string()),
                    csv_quote(&node.title),
                    weight_text(&node.weight),
                    score,
                    quotes
                );
            }
        }
        Format::Structured => {
            let nodes: Vec<ProfileNode> = rubric
                .nodes()
                .map(|node| {
                    let entry = assessment.entries.get(&node.id);
                    ProfileNode {
                        id: &node.id,
                        title: &node.title,
                        weight: weight_text(&node.weight),
                        display: score_of(node),
                        rationale: entry.map(|e| e.rationale.as_str()),
                        evidence: entry.map(|e| e.evidence.as_slice()),
                        improvements: entry.and_then(|e| e.improvements.as_deref()),
                    }
                })
                .collect();
            let doc = serde_json::json!({
                "subject": subject,
                "rubric_version": assessment.rubric_version,
                "total_display": report.map(|r| r.total_display),
                "nodes": nodes,
            });
            out = serde_json::to_string_pretty(&doc).expect("profile serializes");
            out.push('\n');
        }
    }
    out
}
