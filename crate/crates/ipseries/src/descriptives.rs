//! Descriptive statistics, rank correlations, and classical additive
//! decomposition for monthly series.
//!
//! Conventions (chosen to match the reference numbers this library targets):
//! - quartiles interpolate order statistics at fractional rank `1 + (n-1)p`;
//! - `sd` uses the `n-1` denominator, while the shape moments (skewness
//!   `m3/m2^1.5`, non-excess kurtosis `m4/m2^2`) use the `n` denominator;
//! - trend is the centered 13-term moving average with half end-weights,
//!   undefined at the first/last six positions and never extrapolated.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::series::MonthlySeries;
use crate::util::{mean, quantile_type7};

/// Moments and quantiles of one series.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SummaryStats {
    /// Smallest observation.
    pub min: f64,
    /// First quartile.
    pub q1: f64,
    /// Median.
    pub median: f64,
    /// Arithmetic mean.
    pub mean: f64,
    /// Third quartile.
    pub q3: f64,
    /// Largest observation.
    pub max: f64,
    /// Standard deviation (`n-1` denominator).
    pub sd: f64,
    /// Skewness `m3 / m2^1.5` (`n`-denominator central moments).
    pub skewness: f64,
    /// Non-excess kurtosis `m4 / m2^2` (normal distribution = 3).
    pub kurtosis: f64,
}

/// Compute [`SummaryStats`].
///
/// Errors: fewer than 2 observations ([`Error::TooShort`]); a constant series
/// ([`Error::DegenerateDispersion`], since the shape moments are undefined).
pub fn summary_stats(series: &MonthlySeries) -> Result<SummaryStats> {
    let x = &series.values;
    let n = x.len();
    if n < 2 {
        return Err(Error::TooShort { op: "summary_stats", need: 2, got: n });
    }
    let mut sorted = x.clone();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("non-NaN data"));
    let m = mean(x);
    let nf = n as f64;
    let m2 = x.iter().map(|v| (v - m).powi(2)).sum::<f64>() / nf;
    if m2 == 0.0 {
        return Err(Error::DegenerateDispersion { op: "summary_stats", what: "variance" });
    }
    let m3 = x.iter().map(|v| (v - m).powi(3)).sum::<f64>() / nf;
    let m4 = x.iter().map(|v| (v - m).powi(4)).sum::<f64>() / nf;
    Ok(SummaryStats {
        min: sorted[0],
        q1: quantile_type7(&sorted, 0.25),
        median: quantile_type7(&sorted, 0.5),
        mean: m,
        q3: quantile_type7(&sorted, 0.75),
        max: sorted[n - 1],
        sd: (m2 * nf / (nf - 1.0)).sqrt(),
        skewness: m3 / m2.powf(1.5),
        kurtosis: m4 / (m2 * m2),
    })
}

/// Rank-correlation method selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum RankMethod {
    /// Pearson correlation of mid-ranks.
    Spearman,
    /// Kendall's tau-b with tie corrections.
    Kendall,
}

/// Rank correlation between two equally long series.
///
/// Spearman assigns average ranks to ties and computes the Pearson
/// correlation of the rank vectors. Kendall is tau-b:
/// `(C - D) / sqrt((n0 - t_x)(n0 - t_y))` with `n0 = n(n-1)/2` and the usual
/// per-group tie corrections.
pub fn rank_correlation(
    x: &MonthlySeries,
    y: &MonthlySeries,
    method: RankMethod,
) -> Result<f64> {
    let n = x.len();
    if n != y.len() {
        return Err(Error::Dimension {
            what: format!("rank_correlation inputs differ: {n} vs {}", y.len()),
        });
    }
    if n < 3 {
        return Err(Error::TooShort { op: "rank_correlation", need: 3, got: n });
    }
    let all_tied = |v: &[f64]| v.iter().all(|&a| a == v[0]);
    if all_tied(&x.values) || all_tied(&y.values) {
        return Err(Error::DegenerateDispersion { op: "rank_correlation", what: "rank variance" });
    }
    match method {
        RankMethod::Spearman => {
            let rx = mid_ranks(&x.values);
            let ry = mid_ranks(&y.values);
            Ok(pearson(&rx, &ry))
        }
        RankMethod::Kendall => Ok(kendall_tau_b(&x.values, &y.values)),
    }
}

/// Average (mid) ranks, ties sharing the mean of their rank block.
fn mid_ranks(x: &[f64]) -> Vec<f64> {
    let n = x.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| x[a].partial_cmp(&x[b]).expect("non-NaN data"));
    let mut ranks = vec![0.0; n];
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j + 1 < n && x[order[j + 1]] == x[order[i]] {
            j += 1;
        }
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for &idx in &order[i..=j] {
            ranks[idx] = avg;
        }
        i = j + 1;
    }
    ranks
}

/// Pearson correlation of two equally long slices.
fn pearson(a: &[f64], b: &[f64]) -> f64 {
    let ma = mean(a);
    let mb = mean(b);
    let mut sab = 0.0;
    let mut saa = 0.0;
    let mut sbb = 0.0;
    for (&u, &v) in a.iter().zip(b) {
        let du = u - ma;
        let dv = v - mb;
        sab += du * dv;
        saa += du * du;
        sbb += dv * dv;
    }
    sab / (saa * sbb).sqrt()
}

/// Kendall tau-b via direct pair enumeration (n here is a few hundred).
fn kendall_tau_b(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len();
    let mut concordant = 0i64;
    let mut discordant = 0i64;
    for i in 0..n {
        for j in (i + 1)..n {
            let dx = x[i] - x[j];
            let dy = y[i] - y[j];
            let prod = if dx == 0.0 || dy == 0.0 { 0.0 } else { dx.signum() * dy.signum() };
            if prod > 0.0 {
                concordant += 1;
            } else if prod < 0.0 {
                discordant += 1;
            }
        }
    }
    let tie_term = |v: &[f64]| -> f64 {
        let mut sorted = v.to_vec();
        sorted.sort_by(|a, b| a.partial_cmp(b).expect("non-NaN data"));
        let mut t = 0.0;
        let mut i = 0;
        while i < sorted.len() {
            let mut j = i;
            while j + 1 < sorted.len() && sorted[j + 1] == sorted[i] {
                j += 1;
            }
            let g = (j - i + 1) as f64;
            t += g * (g - 1.0) / 2.0;
            i = j + 1;
        }
        t
    };
    let n0 = n as f64 * (n as f64 - 1.0) / 2.0;
    let tx = tie_term(x);
    let ty = tie_term(y);
    (concordant - discordant) as f64 / ((n0 - tx) * (n0 - ty)).sqrt()
}

/// Classical additive decomposition of a monthly series.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Decomposition {
    /// Centered 13-term moving-average trend; `None` at the first/last six
    /// positions (never extrapolated).
    pub trend: Vec<Option<f64>>,
    /// Seasonal component, exactly 12-periodic.
    pub seasonal: Vec<f64>,
    /// `observed - trend - seasonal`; `None` where trend is undefined.
    pub remainder: Vec<Option<f64>>,
    /// Seasonal figures indexed by calendar month (`[0]` = January),
    /// centered to zero mean.
    pub figures: [f64; 12],
    /// Seasonal period (always 12 here).
    pub period: usize,
}

/// Seasonal period of the decomposition.
pub const PERIOD: usize = 12;
/// Half-width of the centered moving average (6 months each side).
pub const TREND_HALF: usize = PERIOD / 2;

/// Decompose `observed = trend + seasonal + remainder`.
///
/// - trend: centered 13-term moving average, weights `(0.5, 1, ..., 1, 0.5)/12`;
/// - seasonal figure per calendar month: mean of `observed - trend` over that
///   month's defined positions, then centered so the 12 figures sum to zero;
/// - remainder: `observed - trend - seasonal` where trend is defined.
///
/// Errors: fewer than 24 observations (two full periods).
pub fn decompose_additive(series: &MonthlySeries) -> Result<Decomposition> {
    let x = &series.values;
    let n = x.len();
    if n < 2 * PERIOD {
        return Err(Error::TooShort { op: "decompose_additive", need: 2 * PERIOD, got: n });
    }

    let mut trend: Vec<Option<f64>> = vec![None; n];
    for t in TREND_HALF..(n - TREND_HALF) {
        let mut acc = 0.5 * (x[t - TREND_HALF] + x[t + TREND_HALF]);
        for k in (t - TREND_HALF + 1)..(t + TREND_HALF) {
            acc += x[k];
        }
        trend[t] = Some(acc / PERIOD as f64);
    }

    // Per-calendar-month means of the detrended series.
    let mut sums = [0.0; 12];
    let mut counts = [0usize; 12];
    for t in 0..n {
        if let Some(tr) = trend[t] {
            let month_idx = usize::from(series.date_at(t).month - 1);
            sums[month_idx] += x[t] - tr;
            counts[month_idx] += 1;
        }
    }
    let mut figures = [0.0; 12];
    for m in 0..12 {
        debug_assert!(counts[m] > 0, "n >= 24 guarantees every month is covered");
        figures[m] = sums[m] / counts[m] as f64;
    }
    let centre = figures.iter().sum::<f64>() / 12.0;
    for f in &mut figures {
        *f -= centre;
    }

    let seasonal: Vec<f64> = (0..n)
        .map(|t| figures[usize::from(series.date_at(t).month - 1)])
        .collect();
    let remainder: Vec<Option<f64>> = (0..n)
        .map(|t| trend[t].map(|tr| x[t] - tr - seasonal[t]))
        .collect();

    Ok(Decomposition { trend, seasonal, remainder, figures, period: PERIOD })
}
