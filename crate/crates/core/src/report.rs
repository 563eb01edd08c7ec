//! Text renderers for metric tables, correlation tables and the dataset
//! manifest. Every rendering is a pure function of its inputs.

use std::fmt::Write;

use crate::ingest::{metrics_csv_header, DatasetManifest};
use crate::metrics::{EpisodeMetrics, MetricColumn};
use crate::stats::CorrelationReport;

/// Configuration lines embedded in every report.
pub type Echo = [(String, String)];

/// Three decimals, ties to even on the exact binary value. Negative zero
/// prints as `0.000`; non-finite values as `NA`.
pub fn fmt3(x: f64) -> String {
    if !x.is_finite() {
        return "NA".into();
    }
    let s = format!("{x:.3}");
    if s == "-0.000" {
        "0.000".into()
    } else {
        s
    }
}

fn fmt_value(column: MetricColumn, value: f64) -> String {
    if column.is_integer() {
        format!("{}", value as u64)
    } else {
        fmt3(value)
    }
}

/// One episode's row in a metric table.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricTableRow {
    pub ordinal: u32,
    pub review: Option<f64>,
    pub metrics: EpisodeMetrics,
}

impl MetricTableRow {
    fn cells(&self) -> Vec<String> {
        let mut cells = vec![
            self.ordinal.to_string(),
            self.review.map(fmt3).unwrap_or_else(|| "NA".into()),
        ];
        cells.extend(
            MetricColumn::CSV_ORDER
                .iter()
                .map(|&c| fmt_value(c, self.metrics.value(c))),
        );
        cells
    }
}

fn echo_comment_lines(out: &mut String, echo: &Echo) {
    for (k, v) in echo {
        writeln!(out, "# {k}: {v}").unwrap();
    }
}

pub fn render_metrics_csv(rows: &[MetricTableRow], echo: &Echo) -> String {
    let mut out = String::new();
    echo_comment_lines(&mut out, echo);
    writeln!(out, "{}", metrics_csv_header().join(",")).unwrap();
    for row in rows {
        writeln!(out, "{}", row.cells().join(",")).unwrap();
    }
    out
}

fn markdown_table(out: &mut String, header: &[&str], rows: impl Iterator<Item = Vec<String>>) {
    writeln!(out, "| {} |", header.join(" | ")).unwrap();
    writeln!(out, "|{}", "---|".repeat(header.len())).unwrap();
    for row in rows {
        writeln!(out, "| {} |", row.join(" | ")).unwrap();
    }
}

fn echo_markdown_lines(out: &mut String, echo: &Echo) {
    for (k, v) in echo {
        writeln!(out, "- {k}: {v}").unwrap();
    }
}

pub fn render_metrics_markdown(series: &str, rows: &[MetricTableRow], echo: &Echo) -> String {
    let mut out = format!("# Network metrics for {series}\n\n");
    markdown_table(
        &mut out,
        &metrics_csv_header(),
        rows.iter().map(MetricTableRow::cells),
    );
    out.push('\n');
    echo_markdown_lines(&mut out, echo);
    out
}

const STAR_RULE: &str = "** p < 0.01, * p < 0.05 (strict: p = 0.051 gets no star)";

fn correlation_cells(report: &CorrelationReport) -> (Vec<&'static str>, Vec<Vec<String>>) {
    let with_permutation = report.results.iter().any(|r| r.permutation_p.is_some());
    let mut header = vec!["Metric", "Correlation", "pValue", "Stars"];
    if with_permutation {
        header.push("PermutationP");
    }
    let rows = report
        .results
        .iter()
        .map(|r| {
            let mut cells = vec![
                r.metric_name.clone(),
                r.rho.map(fmt3).unwrap_or_else(|| "NA".into()),
                r.p_value.map(fmt3).unwrap_or_else(|| "NA".into()),
                r.significance.stars().to_owned(),
            ];
            if with_permutation {
                cells.push(r.permutation_p.map(fmt3).unwrap_or_else(|| "NA".into()));
            }
            cells
        })
        .collect();
    (header, rows)
}

fn correlation_footer(report: &CorrelationReport) -> Vec<(String, String)> {
    let excluded = if report.excluded.is_empty() {
        "none".to_owned()
    } else {
        report
            .excluded
            .iter()
            .map(|k| k.to_string())
            .collect::<Vec<_>>()
            .join("; ")
    };
    let mut footer = vec![
        ("n".to_owned(), report.n.to_string()),
        (
            "excluded (no rating)".to_owned(),
            format!("{} [{excluded}]", report.excluded.len()),
        ),
    ];
    footer.extend(report.echo.iter().cloned());
    footer.push(("stars".into(), STAR_RULE.into()));
    for r in &report.results {
        if let Some(note) = &r.note {
            footer.push((format!("flagged {}", r.metric_name), note.clone()));
        }
    }
    footer
}

pub fn render_correlations_csv(report: &CorrelationReport) -> String {
    let (header, rows) = correlation_cells(report);
    let mut out = String::new();
    writeln!(out, "{}", header.join(",")).unwrap();
    for row in rows {
        writeln!(out, "{}", row.join(",")).unwrap();
    }
    echo_comment_lines(&mut out, &correlation_footer(report));
    out
}

pub fn render_correlations_markdown(report: &CorrelationReport) -> String {
    let (header, rows) = correlation_cells(report);
    let mut out = format!(
        "# Spearman correlation of {} episode reviews\n\n",
        report.series
    );
    markdown_table(&mut out, &header, rows.into_iter());
    out.push('\n');
    echo_markdown_lines(&mut out, &correlation_footer(report));
    out
}

pub fn render_manifest(manifest: &DatasetManifest) -> String {
    let mut out = String::new();
    for e in &manifest.entries {
        writeln!(
            out,
            "{}: {} segments, {} nodes, {} edges ({})",
            e.key, e.segment_count, e.node_count, e.edge_count, e.source
        )
        .unwrap();
        for w in &e.warnings {
            writeln!(out, "  warning: {w}").unwrap();
        }
    }
    for w in &manifest.warnings {
        writeln!(out, "warning: {w}").unwrap();
    }
    writeln!(
        out,
        "{} episodes, {} warnings",
        manifest.entries.len(),
        manifest.warning_count()
    )
    .unwrap();
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::EpisodeKey;
    use crate::stats::{CorrelationResult, Significance};

    #[test]
    fn fmt3_rounds_half_to_even() {
        assert_eq!(fmt3(0.0625), "0.062");
        assert_eq!(fmt3(1.0625), "1.062");
        assert_eq!(fmt3(0.1875), "0.188");
        assert_eq!(fmt3(2.0), "2.000");
        assert_eq!(fmt3(-0.0001), "0.000");
        assert_eq!(fmt3(-0.49), "-0.490");
        assert_eq!(fmt3(f64::NAN), "NA");
    }

    fn row() -> MetricTableRow {
        let mut m = EpisodeMetrics::zeroed(EpisodeKey::new("got", 1, 9));
        m.active_nodes = 17;
        m.density = 0.554;
        m.degree_max = 8;
        m.eigen_max = 0.7041;
        MetricTableRow {
            ordinal: 9,
            review: Some(9.601),
            metrics: m,
        }
    }

    #[test]
    fn metrics_csv_layout() {
        let echo = vec![("efficiency".to_owned(), "component-mean".to_owned())];
        let csv = render_metrics_csv(&[row()], &echo);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "# efficiency: component-mean");
        assert_eq!(
            lines[1],
            "Episode,Review,Density,Efficiency,Transitivity,Strength_max,Strength_std,Degree_max,Degree_std,Harmonic_max,Harmonic_std,Eigen_max,Eigen_std,Active_Nodes"
        );
        assert_eq!(
            lines[2],
            "9,9.601,0.554,0.000,0.000,0.000,0.000,8,0.000,0.000,0.000,0.704,0.000,17"
        );
    }

    #[test]
    fn markdown_mirrors_csv() {
        let md = render_metrics_markdown("got", &[row()], &[]);
        assert!(md.contains("| Episode | Review | Density |"));
        assert!(md.contains("| 9 | 9.601 | 0.554 |"));
    }

    #[test]
    fn correlation_csv_has_footer() {
        let report = CorrelationReport {
            series: "bb".into(),
            n: 26,
            excluded: vec![EpisodeKey::new("bb", 2, 7)],
            results: vec![CorrelationResult {
                column: MetricColumn::Transitivity,
                metric_name: "Transitivity".into(),
                rho: Some(0.4481),
                p_value: Some(0.0217),
                permutation_p: None,
                n: 26,
                significance: Significance::One,
                note: None,
            }],
            echo: vec![("std".into(), "population".into())],
        };
        let csv = render_correlations_csv(&report);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "Metric,Correlation,pValue,Stars");
        assert_eq!(lines[1], "Transitivity,0.448,0.022,*");
        assert!(lines.contains(&"# n: 26"));
        assert!(lines.contains(&"# excluded (no rating): 1 [bb 2 7]"));
        assert!(lines.contains(&"# std: population"));
    }
}
