//! Calendar-month dates, monthly series, CSV ingestion, and segment slicing.
//!
//! The ingestion contract is deliberately narrow: one CSV layout (the bundled
//! USPTO monthly filing counts), strictly consecutive months, integer counts.
//! Counts are carried as `f64` after ingestion because downstream repair steps
//! produce half-integer values.

use std::fmt;

use serde::{Deserialize, Serialize, Serializer};

use crate::error::{Error, Result};

/// Three-letter month labels used by [`MonthDate`]'s `Display`.
const MONTH_ABBR: [&str; 12] = [
    "Jan", "Feb", "Mar", "Apr", "May", "Jun", "Jul", "Aug", "Sep", "Oct", "Nov", "Dec",
];

/// A calendar month: `(year, month)` with `month` in `1..=12`.
///
/// Stored as a pair rather than an epoch offset because the whole analysis is
/// calendar-monthly; day-of-month and leap-day arithmetic never matter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Deserialize)]
pub struct MonthDate {
    /// Calendar year.
    pub year: i32,
    /// Calendar month, `1..=12`.
    pub month: u8,
}

impl MonthDate {
    /// Build a month date, validating the month number.
    pub fn new(year: i32, month: u8) -> Result<Self> {
        if !(1..=12).contains(&month) {
            return Err(Error::Parameter {
                name: "month",
                reason: format!("must be 1..=12, got {month}"),
            });
        }
        Ok(Self { year, month })
    }

    /// The month `offset` months after (`offset < 0`: before) this one.
    pub fn add_months(self, offset: i32) -> Self {
        let zero_based = self.year * 12 + i32::from(self.month) - 1 + offset;
        Self {
            year: zero_based.div_euclid(12),
            month: (zero_based.rem_euclid(12) + 1) as u8,
        }
    }

    /// Signed distance in months: `other - self`.
    pub fn months_until(self, other: Self) -> i32 {
        (other.year - self.year) * 12 + i32::from(other.month) - i32::from(self.month)
    }

    /// `"YYYY-MM"` key used in JSON output.
    pub fn ym(self) -> String {
        format!("{:04}-{:02}", self.year, self.month)
    }
}

impl fmt::Display for MonthDate {
    /// Human-facing form used in rendered tables, e.g. `May 1987`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}", MONTH_ABBR[usize::from(self.month - 1)], self.year)
    }
}

impl Serialize for MonthDate {
    /// Serialize as the compact `"YYYY-MM"` string.
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.ym())
    }
}

/// One parsed CSV row: month, trademark-filing count, patent-application count.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RawRow {
    /// Calendar month of the row.
    pub date: MonthDate,
    /// Trademark filings in that month.
    pub trademarks: i64,
    /// Patent applications in that month.
    pub patents: i64,
}

/// The parsed CSV: rows in strictly consecutive month order.
#[derive(Debug, Clone, Default)]
pub struct RawTable {
    /// Parsed rows, one per month.
    pub rows: Vec<RawRow>,
}

/// Column selector for [`to_monthly_series`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Column {
    /// `Number.of.Trademark.Applications`.
    Trademarks,
    /// `Number.of.Patent.Applications`.
    Patents,
}

impl fmt::Display for Column {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Column::Trademarks => write!(f, "Trademarks"),
            Column::Patents => write!(f, "Patents"),
        }
    }
}

/// Exact header line the CSV must carry.
pub const CSV_HEADER: &str =
    "Date,Number.of.Trademark.Applications,Number.of.Patent.Applications";

/// Parse the bundled CSV layout.
///
/// Requirements (violations are errors, never silently repaired):
/// - UTF-8 text; LF or CRLF line endings; no quoting.
/// - Header row byte-equal to [`CSV_HEADER`].
/// - `Date` in `M/D/YYYY` form (the day is carried by the source but ignored).
/// - Counts are plain integers.
/// - Months strictly consecutive (each row exactly one month after the last).
pub fn parse_csv(input: &str) -> Result<RawTable> {
    let mut lines = input.lines().enumerate();
    let (_, header) = lines.next().ok_or(Error::CsvFormat {
        line: 1,
        what: "empty input, expected header row".into(),
    })?;
    let header = header.trim_end_matches('\r');
    if header != CSV_HEADER {
        // Name the first column that deviates to make the failure actionable.
        let expected: Vec<&str> = CSV_HEADER.split(',').collect();
        let got: Vec<&str> = header.split(',').collect();
        let offending = expected
            .iter()
            .zip(got.iter().chain(std::iter::repeat(&"<missing>")))
            .find(|(e, g)| *e != *g)
            .map(|(e, g)| format!("expected column `{e}`, found `{g}`"))
            .unwrap_or_else(|| "trailing columns beyond the expected three".into());
        return Err(Error::CsvFormat { line: 1, what: offending });
    }

    let mut rows = Vec::new();
    for (idx, raw_line) in lines {
        let line_no = idx + 1;
        let line = raw_line.trim_end_matches('\r');
        if line.is_empty() {
            continue; // tolerate a trailing blank line
        }
        let mut fields = line.split(',');
        let (date_s, tm_s, pat_s) = match (fields.next(), fields.next(), fields.next(), fields.next()) {
            (Some(d), Some(t), Some(p), None) => (d, t, p),
            _ => {
                return Err(Error::CsvFormat {
                    line: line_no,
                    what: format!("expected exactly 3 comma-separated fields, got `{line}`"),
                })
            }
        };
        let date = parse_mdy(date_s).ok_or_else(|| Error::CsvFormat {
            line: line_no,
            what: format!("unparseable date `{date_s}` (expected M/D/YYYY)"),
        })?;
        let trademarks: i64 = tm_s.parse().map_err(|_| Error::CsvFormat {
            line: line_no,
            what: format!("non-integer trademark count `{tm_s}`"),
        })?;
        let patents: i64 = pat_s.parse().map_err(|_| Error::CsvFormat {
            line: line_no,
            what: format!("non-integer patent count `{pat_s}`"),
        })?;
        if let Some(prev) = rows.last() {
            let prev: &RawRow = prev;
            let expected = prev.date.add_months(1);
            if date != expected {
                return Err(Error::CsvSequence {
                    line: line_no,
                    expected: expected.ym(),
                    found: date.ym(),
                });
            }
        }
        rows.push(RawRow { date, trademarks, patents });
    }
    Ok(RawTable { rows })
}

/// Parse `M/D/YYYY`; the day field must be a valid integer but is not kept.
fn parse_mdy(s: &str) -> Option<MonthDate> {
    let mut parts = s.split('/');
    let month: u8 = parts.next()?.parse().ok()?;
    let _day: u8 = parts.next()?.parse().ok()?;
    let year: i32 = parts.next()?.parse().ok()?;
    if parts.next().is_some() {
        return None;
    }
    MonthDate::new(year, month).ok()
}

/// A monthly series: an anchor month plus consecutive values.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MonthlySeries {
    /// Month of `values[0]`.
    pub start: MonthDate,
    /// Observations, one per consecutive month.
    pub values: Vec<f64>,
}

impl MonthlySeries {
    /// Build a series from an anchor month and values.
    pub fn new(start: MonthDate, values: Vec<f64>) -> Self {
        Self { start, values }
    }

    /// Number of observations.
    pub fn len(&self) -> usize {
        self.values.len()
    }

    /// True when the series has no observations.
    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Month of the `i`-th observation.
    pub fn date_at(&self, i: usize) -> MonthDate {
        self.start.add_months(i as i32)
    }

    /// Month of the final observation; `None` on an empty series.
    pub fn end(&self) -> Option<MonthDate> {
        (!self.is_empty()).then(|| self.date_at(self.len() - 1))
    }

    /// Index of `date` within the span, if in range.
    pub fn index_of(&self, date: MonthDate) -> Option<usize> {
        let off = self.start.months_until(date);
        (off >= 0 && (off as usize) < self.len()).then_some(off as usize)
    }

    /// First differences (`x[t] - x[t-1]`), anchored one month later.
    pub fn diff(&self) -> MonthlySeries {
        let values = self.values.windows(2).map(|w| w[1] - w[0]).collect();
        MonthlySeries::new(self.start.add_months(1), values)
    }
}

/// A labelled inclusive month range within a parent span.
///
/// Label `0` denotes the full span; `1..` are derived sub-segments.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Segment {
    /// `0` for the full span, `1..` for derived segments.
    pub label: u8,
    /// First month, inclusive.
    pub start: MonthDate,
    /// Last month, inclusive.
    pub end: MonthDate,
}

impl Segment {
    /// Build a segment, validating `start <= end`.
    pub fn new(label: u8, start: MonthDate, end: MonthDate) -> Result<Self> {
        if start > end {
            return Err(Error::Parameter {
                name: "segment",
                reason: format!("start {} after end {}", start.ym(), end.ym()),
            });
        }
        Ok(Self { label, start, end })
    }

    /// Number of months covered (inclusive of both ends).
    pub fn months(&self) -> usize {
        (self.start.months_until(self.end) + 1) as usize
    }
}

/// Extract the first `keep` values of one column as a [`MonthlySeries`].
pub fn to_monthly_series(raw: &RawTable, column: Column, keep: usize) -> Result<MonthlySeries> {
    if keep > raw.rows.len() {
        return Err(Error::Bounds {
            what: format!("keep={keep} exceeds available rows {}", raw.rows.len()),
        });
    }
    let Some(first) = raw.rows.first() else {
        return Err(Error::Bounds {
            what: "cannot build a series from an empty table".into(),
        });
    };
    let values = raw.rows[..keep]
        .iter()
        .map(|r| match column {
            Column::Trademarks => r.trademarks as f64,
            Column::Patents => r.patents as f64,
        })
        .collect();
    Ok(MonthlySeries::new(first.date, values))
}

/// Copy the sub-series covered by `seg` (both endpoints inclusive).
pub fn slice_segment(series: &MonthlySeries, seg: &Segment) -> Result<MonthlySeries> {
    let lo = series.index_of(seg.start).ok_or_else(|| Error::Bounds {
        what: format!("segment start {} outside series span", seg.start.ym()),
    })?;
    let hi = series.index_of(seg.end).ok_or_else(|| Error::Bounds {
        what: format!("segment end {} outside series span", seg.end.ym()),
    })?;
    Ok(MonthlySeries::new(
        seg.start,
        series.values[lo..=hi].to_vec(),
    ))
}
