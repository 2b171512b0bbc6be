//! Phillips–Ouliaris multivariate trace (`Pz`) test for cointegration.
//!
//! The statistic measures how far the pair of series is from a full-rank
//! stochastic trend: fit a first-order VAR in (undemeaned) levels, take the
//! Bartlett long-run covariance of its residuals, and compare it to the
//! second-moment matrix of the levels themselves:
//! `Pz = (n-1) * trace(Omega * M^-1)`. Under no cointegration `Pz` stays
//! small; a cointegrating relation inflates it.

use nalgebra::DMatrix;
use serde::Serialize;

use super::Significance;
use crate::error::{Error, Result};
use crate::series::MonthlySeries;
use crate::util;

/// Critical values for `Pz` in the bivariate, no-demeaning case.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct PoCriticalValues {
    /// 5% critical value.
    pub pct5: f64,
    /// 1% critical value.
    pub pct1: f64,
}

impl PoCriticalValues {
    /// Strongest level the statistic clears (strict inequalities).
    pub fn verdict(&self, stat: f64) -> Significance {
        if stat > self.pct1 {
            Significance::OnePercent
        } else if stat > self.pct5 {
            Significance::FivePercent
        } else {
            Significance::NotSignificant
        }
    }
}

/// Embedded critical values for the 2-variable, no-demeaning case.
pub const PZ_CRITICAL_VALUES: PoCriticalValues =
    PoCriticalValues { pct5: 40.8217, pct1: 55.1911 };

/// Outcome of the `Pz` test.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct PoResult {
    /// The `Pz` trace statistic (non-negative).
    pub statistic: f64,
    /// Embedded critical values.
    pub critical_values: PoCriticalValues,
    /// Strongest level cleared.
    pub significance: Significance,
    /// Bartlett truncation lag used for the long-run covariance.
    pub lag_window: usize,
}

/// Runs the Phillips–Ouliaris `Pz` test on a pair of equally-dated series.
///
/// Conventions: the levels enter undemeaned; the innovation estimate is the
/// residual of a first-order VAR in levels (no intercept); the long-run
/// covariance uses a Bartlett window with the standard truncation lag
/// computed from the series length; the second-moment matrix averages the
/// `n-1` current rows. Singular designs or moment matrices surface as rank
/// errors.
pub fn phillips_ouliaris_pz(first: &MonthlySeries, second: &MonthlySeries) -> Result<PoResult> {
    const OP: &str = "phillips_ouliaris_pz";
    let n = first.values.len();
    if second.values.len() != n {
        return Err(Error::Dimension {
            what: format!(
                "phillips_ouliaris_pz needs equal lengths, got {} and {}",
                n,
                second.values.len()
            ),
        });
    }
    if n < 12 {
        return Err(Error::TooShort { op: OP, need: 12, got: n });
    }

    let z = DMatrix::from_fn(n, 2, |i, j| {
        if j == 0 {
            first.values[i]
        } else {
            second.values[i]
        }
    });
    let lagged = z.rows(0, n - 1).into_owned();
    let current = z.rows(1, n - 1).into_owned();

    let coef = util::lstsq(&lagged, &current, OP)?;
    let residuals = &current - &lagged * coef;

    let lag_window = util::bartlett_lag(n);
    let omega = util::bartlett_lrcov(&residuals, lag_window);
    let moment = current.transpose() * &current / (n as f64 - 1.0);
    let moment_inv = moment.try_inverse().ok_or(Error::Singular { op: OP })?;
    let statistic = (n as f64 - 1.0) * (omega * moment_inv).trace();

    Ok(PoResult {
        statistic,
        critical_values: PZ_CRITICAL_VALUES,
        significance: PZ_CRITICAL_VALUES.verdict(statistic),
        lag_window,
    })
}
