//! Unit-root tests (KPSS, ADF, PP) and the order-of-integration ladder.
//!
//! The three tests share a decision convention used by [`ndiffs`]:
//!
//! * KPSS tests the null of level stationarity; the series counts as
//!   stationary when the statistic stays strictly below the 5% critical
//!   value 0.463.
//! * ADF and PP test the null of a unit root; the series counts as
//!   stationary when the interpolated p-value is strictly below 0.05.
//!
//! ADF/PP p-values come from the standard Dickey–Fuller response-surface
//! table for the constant-only case, interpolated first across sample sizes
//! and then across tabulated quantiles, clamped to `[0.01, 0.99]` with a
//! flag when the statistic falls off either end of the table.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::series::MonthlySeries;
use crate::util;

/// Which unit-root test a result belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum UnitRootTest {
    /// Kwiatkowski–Phillips–Schmidt–Shin (null: stationarity).
    Kpss,
    /// Augmented Dickey–Fuller (null: unit root).
    Adf,
    /// Phillips–Perron Z-tau (null: unit root).
    Pp,
}

impl UnitRootTest {
    /// The three tests in the order they are reported.
    pub const ALL: [UnitRootTest; 3] = [Self::Kpss, Self::Adf, Self::Pp];

    /// Upper-case display label.
    pub fn label(self) -> &'static str {
        match self {
            Self::Kpss => "KPSS",
            Self::Adf => "ADF",
            Self::Pp => "PP",
        }
    }
}

/// Outcome of a single unit-root test.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct UnitRootResult {
    /// Which test produced this result.
    pub test: UnitRootTest,
    /// Test statistic (KPSS level statistic, ADF t-ratio, or PP Z-tau).
    pub statistic: f64,
    /// Interpolated p-value (ADF/PP, clamped to `[0.01, 0.99]`) or the
    /// level interpolated from the KPSS critical-value table (clamped to
    /// `[0.01, 0.10]`).
    pub p_or_level: f64,
    /// Whether this test's own null hypothesis is rejected at the 5% level
    /// (KPSS null: stationarity; ADF/PP null: unit root).
    pub reject_null: bool,
    /// True when `p_or_level` was clamped at a table boundary.
    pub p_is_bound: bool,
}

impl UnitRootResult {
    /// Whether this result counts the series as stationary under the
    /// ladder's decision convention.
    pub fn is_stationary(&self) -> bool {
        match self.test {
            UnitRootTest::Kpss => !self.reject_null,
            UnitRootTest::Adf | UnitRootTest::Pp => self.reject_null,
        }
    }
}

/// One rung of the differencing ladder: the order found by a single test.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct NdiffsEntry {
    /// Test that produced this order.
    pub test: UnitRootTest,
    /// Differences required for stationarity (capped at 2).
    pub d: u8,
    /// True when even the twice-differenced series failed the test, so `d`
    /// is a cap rather than a certificate.
    pub capped: bool,
}

/// Integration order of one series across all three tests.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct IntegrationOrder {
    /// Consensus order: the maximum across the three tests.
    pub d: u8,
    /// Per-test orders in KPSS/ADF/PP order.
    pub per_test: PerTestOrder,
    /// True when any test hit the cap without passing.
    pub capped: bool,
}

/// Map from test to its differencing order.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct PerTestOrder {
    /// Order according to KPSS.
    pub kpss: u8,
    /// Order according to ADF.
    pub adf: u8,
    /// Order according to PP.
    pub pp: u8,
}

/// KPSS critical values for the level-stationarity variant, as
/// (level, critical value) pairs in decreasing-level order.
pub const KPSS_CRITICAL_VALUES: [(f64, f64); 4] =
    [(0.10, 0.347), (0.05, 0.463), (0.025, 0.574), (0.01, 0.739)];

/// The 5% KPSS critical value used by the ladder's decision rule.
pub const KPSS_CV_5PCT: f64 = 0.463;

/// Dickey–Fuller quantile table (constant-only case): rows are sample sizes,
/// columns the statistic at the probabilities in [`DF_PLEVELS`].
#[allow(clippy::approx_constant)] // tabulated quantiles; -3.14 is not a pi
const DF_TABLE: [(f64, [f64; 8]); 6] = [
    (25.0, [-3.75, -3.33, -3.00, -2.63, -0.37, 0.00, 0.34, 0.72]),
    (50.0, [-3.58, -3.22, -2.93, -2.60, -0.40, -0.03, 0.29, 0.66]),
    (100.0, [-3.51, -3.17, -2.89, -2.58, -0.42, -0.05, 0.26, 0.63]),
    (250.0, [-3.46, -3.14, -2.88, -2.57, -0.42, -0.06, 0.24, 0.62]),
    (500.0, [-3.44, -3.13, -2.87, -2.57, -0.43, -0.07, 0.24, 0.61]),
    (100_000.0, [-3.43, -3.12, -2.86, -2.57, -0.44, -0.07, 0.23, 0.60]),
];

/// Probabilities attached to the columns of [`DF_TABLE`].
const DF_PLEVELS: [f64; 8] = [0.01, 0.025, 0.05, 0.10, 0.90, 0.95, 0.975, 0.99];

/// Dickey–Fuller p-value by double interpolation: across sample sizes, then
/// across the tabulated quantiles. Returns the p-value and a flag that is
/// true when the statistic fell off the table and the value was clamped.
fn df_pvalue(stat: f64, n: usize) -> (f64, bool) {
    let nf = n as f64;
    // Bracket the sample size: the largest tabulated size <= max(n, 25)
    // below, the smallest tabulated size >= n above (the asymptotic row
    // when n exceeds every entry).
    let lo_idx = DF_TABLE
        .iter()
        .rposition(|&(size, _)| size <= nf.max(25.0))
        .expect("table starts at 25");
    let hi_idx = DF_TABLE
        .iter()
        .position(|&(size, _)| size >= nf)
        .unwrap_or(DF_TABLE.len() - 1);
    let row: [f64; 8] = if lo_idx == hi_idx {
        DF_TABLE[lo_idx].1
    } else {
        let (lo_n, lo_row) = DF_TABLE[lo_idx];
        let (hi_n, hi_row) = DF_TABLE[hi_idx];
        let w = (nf - lo_n) / (hi_n - lo_n);
        std::array::from_fn(|j| lo_row[j] + (hi_row[j] - lo_row[j]) * w)
    };
    if stat <= row[0] {
        return (DF_PLEVELS[0], true);
    }
    if stat >= row[7] {
        return (DF_PLEVELS[7], true);
    }
    let j = (0..7).find(|&j| stat <= row[j + 1]).expect("bracketed above");
    let t = (stat - row[j]) / (row[j + 1] - row[j]);
    (DF_PLEVELS[j] + (DF_PLEVELS[j + 1] - DF_PLEVELS[j]) * t, false)
}

/// Level interpolated from the KPSS critical-value table (clamped to
/// `[0.01, 0.10]`); larger statistics map to smaller levels.
fn kpss_level(stat: f64) -> (f64, bool) {
    let first = KPSS_CRITICAL_VALUES[0];
    let last = KPSS_CRITICAL_VALUES[KPSS_CRITICAL_VALUES.len() - 1];
    if stat <= first.1 {
        return (first.0, true);
    }
    if stat >= last.1 {
        return (last.0, true);
    }
    let j = (0..KPSS_CRITICAL_VALUES.len() - 1)
        .find(|&j| stat <= KPSS_CRITICAL_VALUES[j + 1].1)
        .expect("bracketed above");
    let (p_lo, cv_lo) = KPSS_CRITICAL_VALUES[j];
    let (p_hi, cv_hi) = KPSS_CRITICAL_VALUES[j + 1];
    let t = (stat - cv_lo) / (cv_hi - cv_lo);
    (p_lo + (p_hi - p_lo) * t, false)
}

/// KPSS level-stationarity test.
///
/// Statistic: `n^-2 * sum_t S_t^2 / lrv`, where `S_t` are partial sums of the
/// demeaned series and `lrv` is the Bartlett long-run variance with the
/// standard truncation lag. Requires at least 12 observations; a series with
/// zero long-run variance is degenerate.
pub fn kpss_test(series: &MonthlySeries) -> Result<UnitRootResult> {
    kpss_values(&series.values)
}

fn kpss_values(y: &[f64]) -> Result<UnitRootResult> {
    let n = y.len();
    if n < 12 {
        return Err(Error::TooShort { op: "kpss_test", need: 12, got: n });
    }
    let m = util::mean(y);
    let e: Vec<f64> = y.iter().map(|v| v - m).collect();
    let lrv = util::bartlett_lrv(&e, util::bartlett_lag(n));
    if lrv <= 0.0 {
        return Err(Error::DegenerateDispersion { op: "kpss_test", what: "long-run variance" });
    }
    let mut partial = 0.0;
    let mut sum_sq = 0.0;
    for v in &e {
        partial += v;
        sum_sq += partial * partial;
    }
    let stat = sum_sq / (n as f64 * n as f64) / lrv;
    let (level, bound) = kpss_level(stat);
    Ok(UnitRootResult {
        test: UnitRootTest::Kpss,
        statistic: stat,
        p_or_level: level,
        reject_null: stat >= KPSS_CV_5PCT,
        p_is_bound: bound,
    })
}

/// Augmented Dickey–Fuller test with a constant and `k = floor((n-1)^(1/3))`
/// lagged differences.
///
/// Statistic: the t-ratio on the lagged level in the regression of the first
/// difference on a constant, the lagged level, and `k` lagged differences.
/// Errors when the sample leaves no residual degrees of freedom.
pub fn adf_test(series: &MonthlySeries) -> Result<UnitRootResult> {
    adf_values(&series.values)
}

fn adf_values(y: &[f64]) -> Result<UnitRootResult> {
    let n = y.len();
    if n < 2 {
        return Err(Error::TooShort { op: "adf_test", need: 2, got: n });
    }
    let k = ((n - 1) as f64).powf(1.0 / 3.0).floor() as usize;
    let dy: Vec<f64> = y.windows(2).map(|w| w[1] - w[0]).collect();
    let cols = k + 2;
    let rows = dy.len().saturating_sub(k);
    if rows < cols + 1 {
        return Err(Error::TooShort { op: "adf_test", need: k + cols + 2, got: n });
    }
    let response = DVector::from_fn(rows, |i, _| dy[k + i]);
    let design = DMatrix::from_fn(rows, cols, |i, j| match j {
        0 => 1.0,
        1 => y[k + i],
        _ => dy[k + i - (j - 1)],
    });
    let fit = util::ols(&design, &response)?;
    let stat = fit.coef[1] / fit.se(1);
    let (p, bound) = df_pvalue(stat, rows);
    Ok(UnitRootResult {
        test: UnitRootTest::Adf,
        statistic: stat,
        p_or_level: p,
        reject_null: p < 0.05,
        p_is_bound: bound,
    })
}

/// Phillips–Perron Z-tau test with a constant.
///
/// Fits the Dickey–Fuller regression without lagged differences and corrects
/// the t-ratio with the Bartlett long-run variance of the residuals:
/// `Z = sqrt(g0/l2) * tau - (l2 - g0) / (2 sqrt(l2)) * T * se / s`.
pub fn pp_test(series: &MonthlySeries) -> Result<UnitRootResult> {
    pp_values(&series.values)
}

fn pp_values(y: &[f64]) -> Result<UnitRootResult> {
    let n = y.len();
    if n < 6 {
        return Err(Error::TooShort { op: "pp_test", need: 6, got: n });
    }
    let t_obs = n - 1;
    let response = DVector::from_fn(t_obs, |i, _| y[i + 1]);
    let design = DMatrix::from_fn(t_obs, 2, |i, j| if j == 0 { 1.0 } else { y[i] });
    let fit = util::ols(&design, &response)?;
    let rss: f64 = fit.residuals.iter().map(|e| e * e).sum();
    let s2 = rss / (t_obs - 2) as f64;
    let se = (s2 * fit.xtx_inv[(1, 1)]).sqrt();
    let tau = (fit.coef[1] - 1.0) / se;
    let g0 = rss / t_obs as f64;
    let u: Vec<f64> = fit.residuals.iter().copied().collect();
    let lam2 = util::bartlett_lrv(&u, util::bartlett_lag(t_obs));
    if lam2 <= 0.0 || s2 <= 0.0 {
        return Err(Error::DegenerateDispersion { op: "pp_test", what: "long-run variance" });
    }
    let stat = (g0 / lam2).sqrt() * tau
        - (lam2 - g0) / (2.0 * lam2.sqrt()) * t_obs as f64 * se / s2.sqrt();
    let (p, bound) = df_pvalue(stat, t_obs);
    Ok(UnitRootResult {
        test: UnitRootTest::Pp,
        statistic: stat,
        p_or_level: p,
        reject_null: p < 0.05,
        p_is_bound: bound,
    })
}

fn run_test(test: UnitRootTest, values: &[f64]) -> Result<UnitRootResult> {
    match test {
        UnitRootTest::Kpss => kpss_values(values),
        UnitRootTest::Adf => adf_values(values),
        UnitRootTest::Pp => pp_values(values),
    }
}

/// Smallest number of differences `d` in {0, 1, 2} after which the chosen
/// test counts the series as stationary at the 5% level; `d = 2` with
/// `capped = true` when even the second difference fails.
pub fn ndiffs(series: &MonthlySeries, test: UnitRootTest) -> Result<NdiffsEntry> {
    let mut values = series.values.clone();
    for d in 0..=2u8 {
        if run_test(test, &values)?.is_stationary() {
            return Ok(NdiffsEntry { test, d, capped: false });
        }
        if d < 2 {
            values = values.windows(2).map(|w| w[1] - w[0]).collect();
        }
    }
    Ok(NdiffsEntry { test, d: 2, capped: true })
}

/// Runs [`ndiffs`] under all three tests and aggregates: the consensus `d`
/// is the maximum across tests (the differencing depth at which every test
/// is satisfied).
pub fn integration_order(series: &MonthlySeries) -> Result<IntegrationOrder> {
    let kpss = ndiffs(series, UnitRootTest::Kpss)?;
    let adf = ndiffs(series, UnitRootTest::Adf)?;
    let pp = ndiffs(series, UnitRootTest::Pp)?;
    Ok(IntegrationOrder {
        d: kpss.d.max(adf.d).max(pp.d),
        per_test: PerTestOrder { kpss: kpss.d, adf: adf.d, pp: pp.d },
        capped: kpss.capped || adf.capped || pp.capped,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::series::MonthDate;

    fn series(values: Vec<f64>) -> MonthlySeries {
        MonthlySeries::new(MonthDate::new(2000, 1).unwrap(), values)
    }

    /// Deterministic pseudo-noise in [-0.5, 0.5) from a splitmix64 hash:
    /// statistically iid-like, so cumulative sums behave like random walks,
    /// without pulling an RNG dependency into unit tests.
    fn wobble(i: usize) -> f64 {
        let mut z = (i as u64).wrapping_add(0x9E37_79B9_7F4A_7C15);
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^= z >> 31;
        (z >> 11) as f64 / (1u64 << 53) as f64 - 0.5
    }

    #[test]
    fn df_pvalue_matches_table_anchors() {
        // Exact table entries must interpolate to their own levels.
        let (p, bound) = df_pvalue(-2.86, 100_000);
        assert!((p - 0.05).abs() < 1e-12 && !bound);
        let (p, _) = df_pvalue(-3.43, 100_000);
        assert!((p - 0.01).abs() < 1e-12);
        // Clamping below the table floor.
        let (p, bound) = df_pvalue(-12.0, 400);
        assert_eq!(p, 0.01);
        assert!(bound);
        // Clamping above the ceiling.
        let (p, bound) = df_pvalue(3.0, 400);
        assert_eq!(p, 0.99);
        assert!(bound);
        // Small samples fall back to the n=25 row.
        let (p_small, _) = df_pvalue(-3.00, 10);
        assert!((p_small - 0.05).abs() < 1e-12);
        // Midway between two sample-size rows: n=75 blends the 50 and 100
        // rows equally, so the 5% point sits at -2.91.
        let (p_mid, _) = df_pvalue(-2.91, 75);
        assert!((p_mid - 0.05).abs() < 1e-12);
    }

    #[test]
    fn kpss_level_interpolates_and_clamps() {
        let (p, bound) = kpss_level(0.463);
        assert!((p - 0.05).abs() < 1e-12 && !bound);
        let (p, bound) = kpss_level(0.2);
        assert_eq!(p, 0.10);
        assert!(bound);
        let (p, bound) = kpss_level(1.5);
        assert_eq!(p, 0.01);
        assert!(bound);
    }

    #[test]
    fn kpss_is_affine_invariant() {
        let y: Vec<f64> = (0..120).map(|i| (i as f64 * 0.7).sin() + wobble(i)).collect();
        let scaled: Vec<f64> = y.iter().map(|v| 250.0 * v + 1e6).collect();
        let a = kpss_test(&series(y)).unwrap();
        let b = kpss_test(&series(scaled)).unwrap();
        assert!((a.statistic - b.statistic).abs() < 1e-9 * a.statistic.abs().max(1.0));
    }

    #[test]
    fn kpss_flags_a_trending_series_but_not_noise() {
        // A strong deterministic trend swamps the long-run variance.
        let trend: Vec<f64> = (0..200).map(|i| i as f64 + wobble(i)).collect();
        let r = kpss_test(&series(trend)).unwrap();
        assert!(r.reject_null, "trend should reject stationarity, stat={}", r.statistic);
        // Bounded wobble is level-stationary.
        let noise: Vec<f64> = (0..200).map(wobble).collect();
        let r = kpss_test(&series(noise)).unwrap();
        assert!(!r.reject_null, "noise should not reject, stat={}", r.statistic);
    }

    #[test]
    fn adf_and_pp_reject_on_stationary_noise_but_not_on_a_ramp() {
        let noise: Vec<f64> = (0..200).map(wobble).collect();
        let adf = adf_test(&series(noise.clone())).unwrap();
        let pp = pp_test(&series(noise)).unwrap();
        assert!(adf.reject_null && pp.reject_null);
        assert_eq!(adf.p_or_level, 0.01);
        assert!(adf.p_is_bound);
        // A pure cumulative ramp behaves like an integrated series.
        let ramp: Vec<f64> = (0..200)
            .scan(0.0, |acc, i| {
                *acc += wobble(i) + 0.02;
                Some(*acc)
            })
            .collect();
        let adf = adf_test(&series(ramp.clone())).unwrap();
        assert!(!adf.reject_null, "random-walk-like ramp, p={}", adf.p_or_level);
    }

    #[test]
    fn ndiffs_ladder_counts_differences() {
        // Integrated wobble needs exactly one difference under every test.
        let walk: Vec<f64> = (0..300)
            .scan(0.0, |acc, i| {
                *acc += wobble(i * 7 + 3);
                Some(*acc)
            })
            .collect();
        let s = series(walk);
        for test in UnitRootTest::ALL {
            let entry = ndiffs(&s, test).unwrap();
            assert_eq!(entry.d, 1, "{} disagreed", test.label());
            assert!(!entry.capped);
        }
        let order = integration_order(&s).unwrap();
        assert_eq!(order.d, 1);
        assert_eq!(
            (order.per_test.kpss, order.per_test.adf, order.per_test.pp),
            (1, 1, 1)
        );
        assert!(!order.capped);
    }

    #[test]
    fn degenerate_and_short_inputs_error() {
        let flat = series(vec![5.0; 40]);
        assert!(matches!(kpss_test(&flat), Err(Error::DegenerateDispersion { .. })));
        let tiny = series(vec![1.0, 2.0, 3.0]);
        assert!(matches!(kpss_test(&tiny), Err(Error::TooShort { .. })));
        assert!(matches!(adf_test(&tiny), Err(Error::TooShort { .. })));
        assert!(matches!(pp_test(&tiny), Err(Error::TooShort { .. })));
    }
}
