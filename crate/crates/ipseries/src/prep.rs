//! Outlier detection and pointwise repair for monthly count series.
//!
//! The detector is a two-channel, iterative screen built on the classical
//! additive decomposition:
//!
//! - **Additive channel**: robust z of the decomposition remainder against
//!   the global remainder median, scaled by a *local* MAD (±18 months) so a
//!   calm decade does not mute a spike inside a volatile one.
//! - **Level-shift channel**: the seasonal difference of the first
//!   difference (`d2[t] = x[t] - x[t-1] - x[t-12] + x[t-13]`) isolates
//!   one-month level jumps; its score is gated by a persistence guard (a
//!   robust z of the 6-month median step in the seasonally adjusted series)
//!   so isolated spikes cannot masquerade as shifts.
//!
//! Channels run inside one loop with additive priority: point anomalies
//! corrupt the differenced scale, so they are removed first. Each accepted
//! flag is masked together with its direct neighbours and patched in the
//! working copy by the neighbour average before the next pass rescores.
//!
//! Scores are reported in *threshold units*: a flag's score is its channel z
//! rescaled so that the acceptance boundary sits exactly at the user-facing
//! threshold (default 6.0).

use serde::ser::SerializeSeq;
use serde::{Serialize, Serializer};

use crate::descriptives::decompose_additive;
use crate::error::{Error, Result};
use crate::series::{MonthDate, MonthlySeries};
use crate::util::{mad, median, MAD_SCALE};

/// Default user-facing detection threshold.
pub const DEFAULT_THRESHOLD: f64 = 6.0;

/// Additive-channel acceptance boundary as a fraction of the threshold.
const AO_FRACTION: f64 = 3.9 / 6.0;
/// Level-shift-channel acceptance boundary as a fraction of the threshold.
const LS_FRACTION: f64 = 3.1 / 6.0;
/// Persistence-guard boundary as a fraction of the threshold.
const GUARD_FRACTION: f64 = 2.8 / 6.0;
/// Half-width (months) of the additive channel's local MAD window.
const AO_HALF: usize = 18;
/// Half-width (months) of the level-shift channel's local MAD window.
const LS_HALF: usize = 24;
/// Maximum detect-and-patch passes before the loop gives up.
const MAX_PASSES: usize = 20;

/// Which channel accepted a flag.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ChannelKind {
    /// Point anomaly (remainder channel).
    Additive,
    /// One-month level jump (differenced channel).
    LevelShift,
}

/// One flagged observation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OutlierFlag {
    /// Position in the series (0-based). Not serialized; the date carries
    /// the public identity.
    #[serde(skip)]
    pub index: usize,
    /// Calendar month of the flag.
    pub date: MonthDate,
    /// Original observed value at the flag.
    #[serde(serialize_with = "serialize_count")]
    pub observed: f64,
    /// Detection score in threshold units (≥ threshold by construction).
    pub score: f64,
    /// Accepting channel. Diagnostic only; not serialized.
    #[serde(skip)]
    pub kind: ChannelKind,
}

/// Emit whole numbers as JSON integers (counts read as `15843`, not
/// `15843.0`).
fn serialize_count<S: Serializer>(v: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    if v.fract() == 0.0 && v.abs() < 9.0e15 {
        s.serialize_i64(*v as i64)
    } else {
        s.serialize_f64(*v)
    }
}

/// Detection result: the threshold used and the accepted flags in index
/// order. Serializes as a bare JSON array of flags.
#[derive(Debug, Clone, PartialEq)]
pub struct OutlierReport {
    /// User-facing threshold the detection ran at.
    pub threshold: f64,
    /// Accepted flags, sorted by index.
    pub flags: Vec<OutlierFlag>,
}

impl Serialize for OutlierReport {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut seq = s.serialize_seq(Some(self.flags.len()))?;
        for f in &self.flags {
            seq.serialize_element(f)?;
        }
        seq.end()
    }
}

impl OutlierReport {
    /// Number of flags.
    pub fn len(&self) -> usize {
        self.flags.len()
    }

    /// True when nothing was flagged.
    pub fn is_empty(&self) -> bool {
        self.flags.is_empty()
    }

    /// Flagged calendar months, in index order.
    pub fn dates(&self) -> Vec<MonthDate> {
        self.flags.iter().map(|f| f.date).collect()
    }
}

/// Per-pass channel scores.
struct ChannelScores {
    z_ao: Vec<f64>,
    z_ls: Vec<f64>,
    z_guard: Vec<f64>,
    /// True when every defined remainder is identical, leaving the robust
    /// scales undefined.
    degenerate: bool,
}

fn channel_scores(work: &MonthlySeries) -> Result<ChannelScores> {
    let n = work.len();
    let x = &work.values;
    let d = decompose_additive(work)?;
    let adjusted: Vec<f64> = (0..n).map(|t| x[t] - d.seasonal[t]).collect();

    let defined: Vec<f64> = d.remainder.iter().flatten().copied().collect();
    debug_assert!(!defined.is_empty());
    if defined.iter().all(|&v| v == defined[0]) {
        return Ok(ChannelScores {
            z_ao: vec![0.0; n],
            z_ls: vec![0.0; n],
            z_guard: vec![0.0; n],
            degenerate: true,
        });
    }
    let gmed = median(&defined);

    // Additive channel: remainder deviation over a local robust scale.
    let mut z_ao = vec![0.0; n];
    for t in 0..n {
        let Some(rt) = d.remainder[t] else { continue };
        let lo = t.saturating_sub(AO_HALF);
        let hi = (t + AO_HALF + 1).min(n);
        let window: Vec<f64> = d.remainder[lo..hi].iter().flatten().copied().collect();
        let local = mad(&window) * MAD_SCALE;
        if local > 0.0 {
            z_ao[t] = (rt - gmed).abs() / local;
        }
    }

    // Level-shift channel on the twice-differenced series. A genuine level
    // shift at t leaves pulses of opposite sign at t and t+12; their scaled
    // contrast is the score.
    let mut z_ls = vec![0.0; n];
    if n >= 26 {
        let mut d2 = vec![f64::NAN; n];
        for t in 13..n {
            d2[t] = x[t] - x[t - 1] - x[t - 12] + x[t - 13];
        }
        let global = mad(&d2[13..]) * MAD_SCALE;
        if global > 0.0 {
            for t in 13..n {
                let lo = t.saturating_sub(LS_HALF).max(13);
                let hi = (t + LS_HALF + 1).min(n);
                let scale = (mad(&d2[lo..hi]) * MAD_SCALE).max(global);
                let num = if t + 12 < n {
                    (d2[t] - d2[t + 12]).abs() / std::f64::consts::SQRT_2
                } else {
                    d2[t].abs()
                };
                z_ls[t] = num / scale;
            }
        }
    }

    // Persistence guard: robust z of the 6-month median step in the
    // seasonally adjusted series. A level shift moves the local median; a
    // point spike barely does.
    let mut z_guard = vec![0.0; n];
    let mut step = vec![0.0; n];
    let mut steps = Vec::with_capacity(n);
    for t in 6..(n - 5) {
        step[t] = median(&adjusted[t..t + 6]) - median(&adjusted[t - 6..t]);
        steps.push(step[t]);
    }
    let smed = median(&steps);
    let smad = mad(&steps) * MAD_SCALE;
    if smad > 0.0 {
        for t in 6..(n - 5) {
            z_guard[t] = (step[t] - smed).abs() / smad;
        }
    }

    Ok(ChannelScores { z_ao, z_ls, z_guard, degenerate: false })
}

/// Detect anomalous months.
///
/// Runs the two-channel screen described in the module docs. Flags come back
/// sorted by index with scores in threshold units.
///
/// Errors: fewer than 25 observations ([`Error::TooShort`]); non-finite or
/// non-positive `threshold` ([`Error::Parameter`]); a perfectly periodic
/// series whose remainder carries no dispersion
/// ([`Error::DegenerateDispersion`]).
pub fn detect_outliers(series: &MonthlySeries, threshold: f64) -> Result<OutlierReport> {
    let n = series.len();
    if n < 25 {
        return Err(Error::TooShort { op: "detect_outliers", need: 25, got: n });
    }
    if !threshold.is_finite() || threshold <= 0.0 {
        return Err(Error::Parameter {
            name: "threshold",
            reason: format!("must be a positive finite number, got {threshold}"),
        });
    }
    let tau_ao = threshold * AO_FRACTION;
    let tau_ls = threshold * LS_FRACTION;
    let gamma = threshold * GUARD_FRACTION;

    let mut work = series.clone();
    let mut masked = vec![false; n];
    masked[0] = true;
    masked[n - 1] = true;
    let mut flags: Vec<OutlierFlag> = Vec::new();

    for pass in 0..MAX_PASSES {
        let scores = channel_scores(&work)?;
        if scores.degenerate {
            if pass == 0 {
                return Err(Error::DegenerateDispersion {
                    op: "detect_outliers",
                    what: "decomposition remainder",
                });
            }
            break;
        }

        let argmax = |z: &[f64], keep: &dyn Fn(usize) -> bool| -> (usize, f64) {
            let mut best_t = 0;
            let mut best = 0.0;
            for t in 0..n {
                if !masked[t] && keep(t) && z[t] > best {
                    best = z[t];
                    best_t = t;
                }
            }
            (best_t, best)
        };

        let accept = |t: usize, z: f64, tau: f64, kind: ChannelKind| OutlierFlag {
            index: t,
            date: series.date_at(t),
            observed: series.values[t],
            score: z / tau * threshold,
            kind,
        };

        // Additive channel first: spikes poison the differenced scale.
        let (t, z) = argmax(&scores.z_ao, &|_| true);
        if z > tau_ao {
            flags.push(accept(t, z, tau_ao, ChannelKind::Additive));
        } else {
            let (t, z) = argmax(&scores.z_ls, &|t| scores.z_guard[t] > gamma);
            if z > tau_ls {
                flags.push(accept(t, z, tau_ls, ChannelKind::LevelShift));
            } else {
                break;
            }
        }
        let t = flags.last().expect("just pushed").index;
        masked[t - 1] = true;
        masked[t] = true;
        masked[t + 1] = true;
        work.values[t] = 0.5 * (work.values[t - 1] + work.values[t + 1]);
    }

    flags.sort_by_key(|f| f.index);
    Ok(OutlierReport { threshold, flags })
}

/// Replace each flagged value with the average of its two neighbours,
/// computed against the **original** input; all other points pass through.
///
/// Errors: a flag at position 0 or `len-1` ([`Error::BoundaryFlag`]); two
/// flags at adjacent positions ([`Error::AdjacentFlags`], replacement order
/// would matter); a flag beyond the series ([`Error::Bounds`]).
pub fn replace_outliers(series: &MonthlySeries, report: &OutlierReport) -> Result<MonthlySeries> {
    let n = series.len();
    let mut idx: Vec<usize> = report.flags.iter().map(|f| f.index).collect();
    idx.sort_unstable();
    idx.dedup();
    for &i in &idx {
        if i >= n {
            return Err(Error::Bounds { what: format!("flag index {i} beyond series length {n}") });
        }
        if i == 0 || i == n - 1 {
            return Err(Error::BoundaryFlag { index: i });
        }
    }
    if let Some(w) = idx.windows(2).find(|w| w[1] - w[0] == 1) {
        return Err(Error::AdjacentFlags { first: w[0], second: w[1] });
    }
    let mut out = series.values.clone();
    for &i in &idx {
        out[i] = 0.5 * (series.values[i - 1] + series.values[i + 1]);
    }
    Ok(MonthlySeries::new(series.start, out))
}

/// Detect and repair in one step.
pub fn clean_series(
    series: &MonthlySeries,
    threshold: f64,
) -> Result<(MonthlySeries, OutlierReport)> {
    let report = detect_outliers(series, threshold)?;
    let cleaned = replace_outliers(series, &report)?;
    Ok((cleaned, report))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn start() -> MonthDate {
        MonthDate::new(2000, 1).unwrap()
    }

    /// Sinusoid (period 32 months) with one huge spike at t = 50.
    fn spiked_sinusoid() -> MonthlySeries {
        let n = 120;
        let mut v: Vec<f64> = (0..n)
            .map(|t| 100.0 * (2.0 * std::f64::consts::PI * t as f64 / 32.0).sin())
            .collect();
        let sd = 100.0 / 2.0f64.sqrt();
        v[50] += 20.0 * sd;
        MonthlySeries::new(start(), v)
    }

    #[test]
    fn single_spike_is_the_only_flag() {
        let s = spiked_sinusoid();
        let rep = detect_outliers(&s, DEFAULT_THRESHOLD).unwrap();
        let idx: Vec<usize> = rep.flags.iter().map(|f| f.index).collect();
        assert_eq!(idx, vec![50]);
        assert_eq!(rep.flags[0].kind, ChannelKind::Additive);
        assert!(rep.flags[0].score > DEFAULT_THRESHOLD);
        assert_eq!(rep.flags[0].date.ym(), "2004-03");
    }

    #[test]
    fn detection_is_shift_invariant() {
        let s = spiked_sinusoid();
        let shifted = MonthlySeries::new(
            start(),
            s.values.iter().map(|v| v + 1.0e6).collect(),
        );
        let a = detect_outliers(&s, DEFAULT_THRESHOLD).unwrap();
        let b = detect_outliers(&shifted, DEFAULT_THRESHOLD).unwrap();
        let ia: Vec<usize> = a.flags.iter().map(|f| f.index).collect();
        let ib: Vec<usize> = b.flags.iter().map(|f| f.index).collect();
        assert_eq!(ia, ib);
        for (fa, fb) in a.flags.iter().zip(&b.flags) {
            assert!((fa.score - fb.score).abs() < 1e-6 * fa.score.max(1.0));
        }
    }

    #[test]
    fn too_short_and_bad_threshold() {
        let s = MonthlySeries::new(start(), vec![1.0; 24]);
        assert!(matches!(
            detect_outliers(&s, 6.0),
            Err(Error::TooShort { need: 25, .. })
        ));
        let ok = spiked_sinusoid();
        assert!(matches!(detect_outliers(&ok, 0.0), Err(Error::Parameter { .. })));
        assert!(matches!(detect_outliers(&ok, f64::NAN), Err(Error::Parameter { .. })));
    }

    #[test]
    fn perfectly_periodic_is_degenerate() {
        let v: Vec<f64> = (0..36).map(|t| f64::from(t % 12)).collect();
        let s = MonthlySeries::new(start(), v);
        assert!(matches!(
            detect_outliers(&s, 6.0),
            Err(Error::DegenerateDispersion { .. })
        ));
    }

    #[test]
    fn replacement_touches_exactly_the_flags() {
        let s = spiked_sinusoid();
        let rep = detect_outliers(&s, DEFAULT_THRESHOLD).unwrap();
        let cleaned = replace_outliers(&s, &rep).unwrap();
        let mut changed = 0;
        for t in 0..s.len() {
            if cleaned.values[t] != s.values[t] {
                changed += 1;
                assert_eq!(cleaned.values[t], 0.5 * (s.values[t - 1] + s.values[t + 1]));
            }
        }
        assert_eq!(changed, rep.len());

        let empty = OutlierReport { threshold: 6.0, flags: vec![] };
        let same = replace_outliers(&s, &empty).unwrap();
        assert_eq!(same.values, s.values);
    }

    #[test]
    fn adjacent_and_boundary_flags_error() {
        let s = MonthlySeries::new(start(), (0..30).map(f64::from).collect());
        let flag = |index: usize| OutlierFlag {
            index,
            date: s.date_at(index),
            observed: s.values[index],
            score: 9.0,
            kind: ChannelKind::Additive,
        };
        let adjacent = OutlierReport { threshold: 6.0, flags: vec![flag(4), flag(5)] };
        assert!(matches!(
            replace_outliers(&s, &adjacent),
            Err(Error::AdjacentFlags { first: 4, second: 5 })
        ));
        let boundary = OutlierReport { threshold: 6.0, flags: vec![flag(0)] };
        assert!(matches!(
            replace_outliers(&s, &boundary),
            Err(Error::BoundaryFlag { index: 0 })
        ));
        let beyond = OutlierReport { threshold: 6.0, flags: vec![flag(29), flag(15)] };
        // index 29 is the last point -> boundary, not bounds
        assert!(replace_outliers(&s, &beyond).is_err());
    }

    #[test]
    fn report_serializes_as_bare_array() {
        let rep = OutlierReport {
            threshold: 6.0,
            flags: vec![OutlierFlag {
                index: 60,
                date: MonthDate::new(1982, 9).unwrap(),
                observed: 15843.0,
                score: 7.5,
                kind: ChannelKind::Additive,
            }],
        };
        let json = serde_json::to_string(&rep).unwrap();
        assert_eq!(json, r#"[{"date":"1982-09","observed":15843,"score":7.5}]"#);
    }
}
