//! Multiple-break dating for the mean-shift model by exact dynamic
//! programming over segment residual sums of squares, with BIC model
//! selection.
//!
//! A break is dated by the **last index of the regime it ends** (so a break
//! "May 1987" means the first regime runs through May 1987 and the next one
//! starts in June 1987).

use serde::Serialize;

use crate::error::{Error, Result};
use crate::series::{MonthDate, MonthlySeries};

/// One dated break with its confidence interval.
///
/// Until [`super::confint::breakpoint_confint`] runs, `ci_low == date ==
/// ci_high` and `widened` is false.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Breakpoint {
    /// 0-based index of the last month of the ending regime.
    pub index: usize,
    /// Calendar month of that index.
    pub date: MonthDate,
    /// Lower confidence bound (inclusive).
    pub ci_low: MonthDate,
    /// Upper confidence bound (inclusive).
    pub ci_high: MonthDate,
    /// True when the interval had to fall back to the full admissible range
    /// because a neighbouring regime was too short or dispersion-free.
    pub widened: bool,
}

/// One fitted partition size considered during model selection.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModelFit {
    /// Number of breaks.
    pub m: usize,
    /// Minimal total residual sum of squares over partitions with `m` breaks.
    pub rss: f64,
    /// `n·ln(rss/n) + 2(m+1)·ln(n)`.
    pub bic: f64,
    /// Optimal break indices (last index of each regime).
    pub break_indices: Vec<usize>,
}

/// Dated breaks for one series.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BreakpointSet {
    /// Selected breaks in chronological order.
    pub breaks: Vec<Breakpoint>,
    /// Total RSS of the selected partition.
    pub rss: f64,
    /// BIC of the selected partition.
    pub bic: f64,
    /// Number of selected breaks.
    pub n_breaks: usize,
    /// Series length the dating ran on.
    pub n: usize,
    /// Minimum regime length `⌊n·h⌋`.
    pub min_segment: usize,
    /// Confidence level of the intervals, once computed.
    pub ci_level: Option<f64>,
    /// Every candidate partition size examined (for diagnostics; RSS is
    /// non-increasing in `m`).
    pub candidates: Vec<ModelFit>,
}

impl BreakpointSet {
    /// Break indices in chronological order.
    pub fn indices(&self) -> Vec<usize> {
        self.breaks.iter().map(|b| b.index).collect()
    }

    /// Break dates in chronological order.
    pub fn dates(&self) -> Vec<MonthDate> {
        self.breaks.iter().map(|b| b.date).collect()
    }
}

/// Per-segment RSS of a constant fit, O(1) after two prefix-sum passes.
pub(crate) struct SegmentRss {
    s1: Vec<f64>,
    s2: Vec<f64>,
}

impl SegmentRss {
    pub(crate) fn new(y: &[f64]) -> Self {
        let mut s1 = Vec::with_capacity(y.len() + 1);
        let mut s2 = Vec::with_capacity(y.len() + 1);
        s1.push(0.0);
        s2.push(0.0);
        let (mut a, mut b) = (0.0, 0.0);
        for &v in y {
            a += v;
            b += v * v;
            s1.push(a);
            s2.push(b);
        }
        Self { s1, s2 }
    }

    /// RSS of fitting a constant on `y[i..=j]`.
    pub(crate) fn rss(&self, i: usize, j: usize) -> f64 {
        let m = (j - i + 1) as f64;
        let s = self.s1[j + 1] - self.s1[i];
        // Clamp tiny negative round-off.
        ((self.s2[j + 1] - self.s2[i]) - s * s / m).max(0.0)
    }
}

/// BIC for a mean-shift partition: `n·ln(rss/n) + 2(m+1)·ln(n)`.
fn partition_bic(n: usize, rss: f64, m: usize) -> f64 {
    let nf = n as f64;
    nf * (rss / nf).ln() + (2 * (m + 1)) as f64 * nf.ln()
}

/// Date up to `max_breaks` mean shifts.
///
/// Exact dynamic program: `dp[m][j]` is the minimal RSS of partitioning
/// `y[0..=j]` into `m+1` regimes of at least `⌊n·h⌋` observations each;
/// ties keep the earliest break. The returned set is the BIC minimizer over
/// `m = 0..=max_breaks`.
///
/// Errors ([`Error::Parameter`]): `h` outside (0,1); minimum regime length
/// `⌊n·h⌋ < 2`; `max_breaks > ⌊1/h⌋ - 1`.
pub fn date_breakpoints(
    series: &MonthlySeries,
    h: f64,
    max_breaks: usize,
) -> Result<BreakpointSet> {
    let n = series.len();
    if !(h > 0.0 && h < 1.0) {
        return Err(Error::Parameter {
            name: "h",
            reason: format!("minimum-segment fraction must lie in (0,1), got {h}"),
        });
    }
    let hs = (n as f64 * h).floor() as usize;
    if hs < 2 {
        return Err(Error::Parameter {
            name: "h",
            reason: format!("minimum segment ⌊n·h⌋ = {hs} is below 2 (n = {n})"),
        });
    }
    let cap = (1.0 / h).floor() as usize - 1;
    if max_breaks > cap {
        return Err(Error::Parameter {
            name: "max_breaks",
            reason: format!("at most ⌊1/h⌋-1 = {cap} breaks fit, got {max_breaks}"),
        });
    }

    let y = &series.values;
    let table = SegmentRss::new(y);

    // dp[m][j]: minimal RSS of splitting y[0..=j] into m+1 admissible
    // regimes; arg[m][j]: last index of the penultimate regime.
    let mut dp = vec![vec![f64::INFINITY; n]; max_breaks + 1];
    let mut arg = vec![vec![usize::MAX; n]; max_breaks + 1];
    for j in (hs - 1)..n {
        dp[0][j] = table.rss(0, j);
    }
    for m in 1..=max_breaks {
        for j in 0..n {
            if j + 1 < (m + 1) * hs {
                continue;
            }
            let mut best = f64::INFINITY;
            let mut best_i = usize::MAX;
            //

            // The last regime is y[i+1..=j]; earlier regimes end at i.
            for i in (m * hs - 1)..=(j - hs) {
                let prev = dp[m - 1][i];
                if !prev.is_finite() {
                    continue;
                }
                let v = prev + table.rss(i + 1, j);
                // Strict improvement keeps the earliest tie.
                if v < best - 1e-12 {
                    best = v;
                    best_i = i;
                }
            }
            dp[m][j] = best;
            arg[m][j] = best_i;
        }
    }

    let mut candidates = Vec::new();
    for m in 0..=max_breaks {
        let rss = dp[m][n - 1];
        if !rss.is_finite() {
            continue;
        }
        let mut idx = Vec::with_capacity(m);
        let mut j = n - 1;
        let mut mm = m;
        while mm > 0 {
            let i = arg[mm][j];
            idx.push(i);
            j = i;
            mm -= 1;
        }
        idx.reverse();
        candidates.push(ModelFit { m, rss, bic: partition_bic(n, rss, m), break_indices: idx });
    }
    debug_assert!(!candidates.is_empty(), "m = 0 is always feasible when ⌊n·h⌋ ≤ n");

    let selected = candidates
        .iter()
        .min_by(|a, b| a.bic.total_cmp(&b.bic))
        .expect("at least one candidate")
        .clone();

    let breaks = selected
        .break_indices
        .iter()
        .map(|&i| {
            let date = series.date_at(i);
            Breakpoint { index: i, date, ci_low: date, ci_high: date, widened: false }
        })
        .collect::<Vec<_>>();

    Ok(BreakpointSet {
        n_breaks: breaks.len(),
        breaks,
        rss: selected.rss,
        bic: selected.bic,
        n,
        min_segment: hs,
        ci_level: None,
        candidates,
    })
}
