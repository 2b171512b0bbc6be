//! Table assembly and rendering.
//!
//! Six tables are built from the report's result blocks; each renders to
//! GitHub-flavored Markdown and RFC-4180 CSV, and serializes into the JSON
//! report under a stable key. A table is absent when its stage did not run.

use serde::Serialize;

use ipseries::breaks::{Breakpoint, ScTestResult, CLUSTER_GAP_MONTHS};
use ipseries::descriptives::SummaryStats;
use ipseries::integration::{Significance, TraceHypothesis};

use crate::pipeline::ReportResults;

/// One rendered table: a title, a header row, and string cells.
#[derive(Debug, Clone, Serialize)]
pub struct Table {
    /// File stem (`table1` … `table6`).
    pub name: &'static str,
    /// Caption line.
    pub title: String,
    /// Column names.
    pub header: Vec<String>,
    /// Body cells, row-major; every row has `header.len()` cells.
    pub rows: Vec<Vec<String>>,
}

/// All six tables under stable keys; a table is `None` when the stage that
/// feeds it did not complete.
#[derive(Debug, Clone, Serialize, Default)]
pub struct Tables {
    /// Descriptive statistics.
    pub table1: Option<Table>,
    /// Fluctuation-test p-values.
    pub table2: Option<Table>,
    /// Break dates with confidence intervals.
    pub table3: Option<Table>,
    /// Stable segments.
    pub table4: Option<Table>,
    /// Cointegration verdicts.
    pub table5: Option<Table>,
    /// Differencing orders.
    pub table6: Option<Table>,
}

impl Tables {
    /// The tables that materialized, in number order.
    pub fn present(&self) -> impl Iterator<Item = &Table> {
        [&self.table1, &self.table2, &self.table3, &self.table4, &self.table5, &self.table6]
            .into_iter()
            .flatten()
    }
}

impl Table {
    /// Render as a Markdown pipe table with the title as a heading.
    pub fn to_markdown(&self) -> String {
        let mut out = format!("## {}\n\n", self.title);
        let line = |cells: &[String]| {
            let mut s = String::from("|");
            for c in cells {
                s.push(' ');
                s.push_str(&c.replace('|', "\\|"));
                s.push_str(" |");
            }
            s.push('\n');
            s
        };
        out.push_str(&line(&self.header));
        out.push('|');
        for _ in &self.header {
            out.push_str(" --- |");
        }
        out.push('\n');
        for row in &self.rows {
            out.push_str(&line(row));
        }
        out
    }

    /// Render as RFC-4180 CSV: header plus body, CRLF line ends, cells
    /// quoted when they contain a comma, quote, or newline.
    pub fn to_csv(&self) -> String {
        let escape = |cell: &str| -> String {
            if cell.contains(',') || cell.contains('"') || cell.contains('\n') {
                format!("\"{}\"", cell.replace('"', "\"\""))
            } else {
                cell.to_string()
            }
        };
        let mut out = String::new();
        for row in std::iter::once(&self.header).chain(&self.rows) {
            let cells: Vec<String> = row.iter().map(|c| escape(c)).collect();
            out.push_str(&cells.join(","));
            out.push_str("\r\n");
        }
        out
    }
}

/// Integer rendering with ties-to-even, matching how the reference
/// environment prints whole-number summaries.
fn fmt_int(x: f64) -> String {
    format!("{x:.0}")
}

/// Fixed-point rendering.
fn fmt(x: f64, dp: usize) -> String {
    format!("{x:.dp$}")
}

/// Fixed-point with trailing zeros (then a trailing dot) removed.
fn fmt_trim(x: f64, dp: usize) -> String {
    let mut s = fmt(x, dp);
    if s.contains('.') {
        while s.ends_with('0') {
            s.pop();
        }
        if s.ends_with('.') {
            s.pop();
        }
    }
    s
}

/// p-value cell: the table floor prints as its plain value, anything below
/// double precision's resolution prints as an inequality.
fn fmt_p(test: &ScTestResult) -> String {
    if test.p_is_table_floor {
        fmt_trim(test.p_value, 4)
    } else if test.p_value < 2.2e-16 {
        "< 2.2e-16".to_string()
    } else {
        fmt_trim(test.p_value, 4)
    }
}

fn descriptives_row(name: &str, s: &SummaryStats) -> Vec<String> {
    vec![
        name.to_string(),
        fmt_int(s.min),
        fmt_int(s.q1),
        fmt_int(s.median),
        fmt_int(s.mean),
        fmt_int(s.q3),
        fmt_int(s.max),
        fmt(s.sd, 3),
        fmt(s.skewness, 3),
        fmt(s.kurtosis, 2),
    ]
}

/// `"stat v critical (level)"`, or blank when not significant.
fn trace_cell(h: &TraceHypothesis) -> String {
    let cv = match h.significance {
        Significance::OnePercent => h.critical_values.pct1,
        Significance::FivePercent => h.critical_values.pct5,
        Significance::TenPercent => h.critical_values.pct10,
        Significance::NotSignificant => return String::new(),
    };
    format!("{} v {} ({})", fmt(h.statistic, 2), fmt(cv, 2), h.significance.label())
}

fn pz_cell(r: &ipseries::integration::PoResult) -> String {
    let cv = match r.significance {
        Significance::OnePercent => r.critical_values.pct1,
        Significance::FivePercent => r.critical_values.pct5,
        // The Pz tabulation carries no 10% row, so this arm is unreachable;
        // fall back to the 5% value defensively.
        Significance::TenPercent => r.critical_values.pct5,
        Significance::NotSignificant => return String::new(),
    };
    format!("{} v {} ({})", fmt(r.statistic, 4), fmt(cv, 4), r.significance.label())
}

/// Pair the two break lists into episode rows: breaks within
/// [`CLUSTER_GAP_MONTHS`] of each other share a row, others stand alone
/// with the partner columns blank.
fn paired_rows(tm: &[Breakpoint], pat: &[Breakpoint]) -> Vec<Vec<String>> {
    let triple = |bp: &Breakpoint| -> [String; 3] {
        [bp.ci_low.to_string(), bp.date.to_string(), bp.ci_high.to_string()]
    };
    let blank = || [String::new(), String::new(), String::new()];
    let mut rows = Vec::new();
    let (mut i, mut j) = (0usize, 0usize);
    while i < tm.len() || j < pat.len() {
        let (left, right) = match (tm.get(i), pat.get(j)) {
            (Some(a), Some(b)) => {
                if a.date.months_until(b.date).abs() <= CLUSTER_GAP_MONTHS {
                    i += 1;
                    j += 1;
                    (triple(a), triple(b))
                } else if a.date < b.date {
                    i += 1;
                    (triple(a), blank())
                } else {
                    j += 1;
                    (blank(), triple(b))
                }
            }
            (Some(a), None) => {
                i += 1;
                (triple(a), blank())
            }
            (None, Some(b)) => {
                j += 1;
                (blank(), triple(b))
            }
            (None, None) => unreachable!("loop guard"),
        };
        rows.push(left.into_iter().chain(right).collect());
    }
    rows
}

fn span_label(span: &str) -> String {
    if span == "full" {
        "Full timeseries".to_string()
    } else {
        span.to_string()
    }
}

/// Build every table whose inputs are present.
pub fn build_tables(results: &ReportResults) -> Tables {
    let mut tables = Tables::default();

    if let Some(desc) = &results.descriptives {
        tables.table1 = Some(Table {
            name: "table1",
            title: "Descriptive statistics of the cleaned monthly series".into(),
            header: [
                "Variable",
                "Minimum",
                "1st Quartile",
                "Median",
                "Mean",
                "3rd Quartile",
                "Maximum",
                "Standard Deviation",
                "Skewness",
                "Kurtosis",
            ]
            .map(String::from)
            .to_vec(),
            rows: vec![
                descriptives_row("Trademarks", &desc.trademarks),
                descriptives_row("Patents", &desc.patents),
            ],
        });
    }

    if let Some(efp) = &results.efp {
        // Columns in the published order; entries carry their kind, so look
        // each column up by label rather than trusting battery order.
        let col = |entries: &[crate::pipeline::EfpEntry], label: &str| -> String {
            entries
                .iter()
                .find(|e| e.process.kind.label().eq_ignore_ascii_case(label) )
                .map(|e| fmt_p(&e.sctest))
                .unwrap_or_default()
        };
        let row = |name: &str, entries: &[crate::pipeline::EfpEntry]| -> Vec<String> {
            vec![
                name.to_string(),
                col(entries, "OLS-CUSUM"),
                col(entries, "OLS-MOSUM"),
                col(entries, "REC-CUSUM"),
                col(entries, "REC-MOSUM"),
            ]
        };
        tables.table2 = Some(Table {
            name: "table2",
            title: "Fluctuation-test p-values for parameter stability".into(),
            header: ["Variable", "OLS-CUSUM", "OLS-MOSUM", "REC-CUSUM", "REC-MOSUM"]
                .map(String::from)
                .to_vec(),
            rows: vec![
                row("Trademarks", &efp.trademarks),
                row("Patents", &efp.patents),
            ],
        });
    }

    if let Some(breaks) = &results.breaks {
        tables.table3 = Some(Table {
            name: "table3",
            title: "Structural break dates with 95% confidence intervals".into(),
            header: [
                "Trademarks 2.5%",
                "Trademarks Breakpoint",
                "Trademarks 97.5%",
                "Patents 2.5%",
                "Patents Breakpoint",
                "Patents 97.5%",
            ]
            .map(String::from)
            .to_vec(),
            rows: paired_rows(&breaks.trademarks.breaks, &breaks.patents.breaks),
        });
    }

    if let Some(segments) = &results.segments {
        tables.table4 = Some(Table {
            name: "table4",
            title: "Stable segments between clustered break episodes".into(),
            header: ["Segment", "Span"].map(String::from).to_vec(),
            rows: segments
                .segments
                .iter()
                .map(|s| vec![s.label.to_string(), format!("{} to {}", s.start, s.end)])
                .collect(),
        });
    }

    if let Some(coint) = &results.cointegration {
        tables.table5 = Some(Table {
            name: "table5",
            title: "Cointegration tests on the full span and each segment".into(),
            header: [
                "Segment",
                "Johansen r<=1: statistic v critical value (level)",
                "Johansen r=0: statistic v critical value (level)",
                "Phillips-Ouliaris Pz: statistic v critical value (level)",
            ]
            .map(String::from)
            .to_vec(),
            rows: coint
                .iter()
                .map(|sc| {
                    vec![
                        span_label(&sc.span),
                        sc.johansen
                            .as_ref()
                            .map(|j| trace_cell(&j.hypotheses[1]))
                            .unwrap_or_default(),
                        sc.johansen
                            .as_ref()
                            .map(|j| trace_cell(&j.hypotheses[0]))
                            .unwrap_or_default(),
                        sc.pz.as_ref().map(pz_cell).unwrap_or_default(),
                    ]
                })
                .collect(),
        });
    }

    if let Some(orders) = &results.integration_orders {
        tables.table6 = Some(Table {
            name: "table6",
            title: "Differencing orders required for stationarity".into(),
            header: ["Variable", "Segment", "KPSS", "ADF", "PP"].map(String::from).to_vec(),
            rows: orders
                .iter()
                .map(|row| {
                    // Segment labels print on trademark rows only; the paired
                    // patent row beneath shares the span implicitly.
                    let seg = if row.variable == "Trademarks" {
                        if row.span == "full" { "Full dataset".to_string() } else { row.span.clone() }
                    } else {
                        String::new()
                    };
                    let cells = row.orders.as_ref().map(|o| {
                        [
                            o.per_test.kpss.to_string(),
                            o.per_test.adf.to_string(),
                            o.per_test.pp.to_string(),
                        ]
                    });
                    let [kpss, adf, pp] = cells.unwrap_or_default();
                    vec![row.variable.clone(), seg, kpss, adf, pp]
                })
                .collect(),
        });
    }

    tables
}
