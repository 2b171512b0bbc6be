//! Stable-period segmentation from two break sets.
//!
//! Break months from both series are pooled and clustered (breaks within
//! two years of each other describe the same economic episode). Each stable
//! segment runs from the month **after** the later break of one cluster to
//! the month **before** the earlier break of the next, so no segment ever
//! contains a break month from either series.

use serde::Serialize;

use crate::breaks::baiperron::BreakpointSet;
use crate::error::{Error, Result};
use crate::series::{MonthDate, Segment};

/// Breaks closer than this many months (inclusive) belong to one cluster.
pub const CLUSTER_GAP_MONTHS: i32 = 24;

/// Chronologically ordered stable segments.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SegmentSet {
    /// Non-overlapping segments labelled `1..`.
    pub segments: Vec<Segment>,
}

impl SegmentSet {
    /// Number of segments.
    pub fn len(&self) -> usize {
        self.segments.len()
    }

    /// True when no segments were derived.
    pub fn is_empty(&self) -> bool {
        self.segments.is_empty()
    }
}

/// Derive stable segments from the two series' break sets over `[span_start,
/// span_end]`.
///
/// With both sets empty the whole span comes back as one segment. A cluster
/// ending at the span boundary would produce an empty segment — that is
/// reported as a parameter error rather than silently dropped.
pub fn derive_segments(
    first: &BreakpointSet,
    second: &BreakpointSet,
    span_start: MonthDate,
    span_end: MonthDate,
) -> Result<SegmentSet> {
    if span_end < span_start {
        return Err(Error::Parameter {
            name: "span",
            reason: format!("span end {} precedes start {}", span_end.ym(), span_start.ym()),
        });
    }
    let mut months: Vec<MonthDate> = first
        .dates()
        .into_iter()
        .chain(second.dates())
        .collect();
    months.sort();

    if months.is_empty() {
        return Ok(SegmentSet {
            segments: vec![Segment::new(1, span_start, span_end)?],
        });
    }

    // Cluster pooled break months: a gap above CLUSTER_GAP_MONTHS starts a
    // new cluster. Each cluster keeps its earliest and latest break month.
    let mut clusters: Vec<(MonthDate, MonthDate)> = Vec::new();
    for &m in &months {
        match clusters.last_mut() {
            Some((_, last)) if last.months_until(m) <= CLUSTER_GAP_MONTHS => {
                *last = m;
            }
            _ => clusters.push((m, m)),
        }
    }

    let mut segments = Vec::with_capacity(clusters.len() + 1);
    let mut label = 1u8;
    let mut cursor = span_start;
    for &(earliest, latest) in &clusters {
        segments.push(Segment::new(label, cursor, earliest.add_months(-1))?);
        label += 1;
        cursor = latest.add_months(1);
    }
    segments.push(Segment::new(label, cursor, span_end)?);
    Ok(SegmentSet { segments })
}
