//! Johansen trace test for cointegration of a bivariate system.
//!
//! The model is a VECM with `K-1` lagged differences and a restricted
//! constant (the constant enters the cointegrating relation, no linear
//! trend). With `Z0` the current differences, `Z1` the lagged differences,
//! and `ZK` the `K`-lagged levels augmented by a constant column, the
//! procedure residualizes `Z0` and `ZK` on `Z1`, forms the product-moment
//! matrices `S00`, `S0K`, `SKK`, and solves the generalized eigenproblem via
//! a Cholesky whitening of `SKK`. The trace statistic for rank hypothesis
//! `r` sums `-N log(1 - lambda_i)` over the system eigenvalues `i > r`.

use nalgebra::{Cholesky, DMatrix};
use serde::Serialize;

use super::Significance;
use crate::error::{Error, Result};
use crate::series::MonthlySeries;
use crate::util;

/// Deterministic-term specification. Only the restricted constant is
/// supported: the constant is confined to the cointegrating relation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Ecdet {
    /// Restricted constant, no linear trend.
    Const,
}

/// Trace-statistic critical values at the 10%/5%/1% levels.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct TraceCriticalValues {
    /// 10% critical value.
    pub pct10: f64,
    /// 5% critical value.
    pub pct5: f64,
    /// 1% critical value.
    pub pct1: f64,
}

impl TraceCriticalValues {
    /// Strongest level the statistic clears (strict inequalities).
    pub fn verdict(&self, stat: f64) -> Significance {
        if stat > self.pct1 {
            Significance::OnePercent
        } else if stat > self.pct5 {
            Significance::FivePercent
        } else if stat > self.pct10 {
            Significance::TenPercent
        } else {
            Significance::NotSignificant
        }
    }
}

/// Critical values for the rank-zero hypothesis (restricted constant,
/// bivariate system).
pub const TRACE_CV_R0: TraceCriticalValues =
    TraceCriticalValues { pct10: 17.85, pct5: 19.96, pct1: 24.60 };

/// Critical values for the rank-at-most-one hypothesis.
pub const TRACE_CV_R1: TraceCriticalValues =
    TraceCriticalValues { pct10: 7.52, pct5: 9.24, pct1: 12.97 };

/// One rank hypothesis of the trace ladder.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct TraceHypothesis {
    /// Hypothesized maximum cointegration rank (0 or 1).
    pub rank: u8,
    /// Trace statistic for this hypothesis.
    pub statistic: f64,
    /// Embedded critical values.
    pub critical_values: TraceCriticalValues,
    /// Strongest level cleared.
    pub significance: Significance,
}

/// Full output of the Johansen trace procedure.
#[derive(Debug, Clone, Serialize)]
pub struct JohansenResult {
    /// Eigenvalues of the whitened product-moment matrix, descending, in
    /// `[0, 1)`. The system has three (two variables plus the restricted
    /// constant); the third is structurally zero.
    pub eigenvalues: Vec<f64>,
    /// Rank hypotheses `r = 0` and `r <= 1`, in that order.
    pub hypotheses: [TraceHypothesis; 2],
    /// Lag order `K` of the underlying VAR in levels.
    pub lags: usize,
    /// Deterministic-term specification.
    pub ecdet: Ecdet,
}

impl JohansenResult {
    /// Trace statistic for the rank-zero hypothesis.
    pub fn trace_r0(&self) -> f64 {
        self.hypotheses[0].statistic
    }

    /// Trace statistic for the rank-at-most-one hypothesis.
    pub fn trace_r1(&self) -> f64 {
        self.hypotheses[1].statistic
    }
}

/// Runs the Johansen trace procedure on a pair of equally-dated series.
///
/// `lags` is the VAR order `K` (at least 2); the series must have equal
/// lengths of at least `5 * K`. Singular moment matrices (e.g. one series a
/// multiple of the other) surface as rank errors.
pub fn johansen_trace(
    first: &MonthlySeries,
    second: &MonthlySeries,
    lags: usize,
) -> Result<JohansenResult> {
    const OP: &str = "johansen_trace";
    let n = first.values.len();
    if second.values.len() != n {
        return Err(Error::Dimension {
            what: format!(
                "johansen_trace needs equal lengths, got {} and {}",
                n,
                second.values.len()
            ),
        });
    }
    if lags < 2 {
        return Err(Error::Parameter { name: "lags", reason: "must be at least 2".into() });
    }
    if n < 5 * lags {
        return Err(Error::TooShort { op: OP, need: 5 * lags, got: n });
    }

    let k = lags;
    let p = 2usize;
    let x = DMatrix::from_fn(n, p, |i, j| {
        if j == 0 {
            first.values[i]
        } else {
            second.values[i]
        }
    });
    let dx = DMatrix::from_fn(n - 1, p, |i, j| x[(i + 1, j)] - x[(i, j)]);
    let rows = n - k;

    // Current differences, lagged differences, and K-lagged levels + const.
    let z0 = dx.rows(k - 1, rows).into_owned();
    let mut z1 = DMatrix::zeros(rows, p * (k - 1));
    for j in 1..k {
        z1.view_mut((0, p * (j - 1)), (rows, p)).copy_from(&dx.rows(k - 1 - j, rows));
    }
    let mut zk = DMatrix::zeros(rows, p + 1);
    zk.view_mut((0, 0), (rows, p)).copy_from(&x.rows(0, rows));
    zk.column_mut(p).fill(1.0);

    let r0 = residualize(&z0, &z1)?;
    let rk = residualize(&zk, &z1)?;

    let nf = rows as f64;
    let s00 = r0.transpose() * &r0 / nf;
    let skk = rk.transpose() * &rk / nf;
    let s0k = r0.transpose() * &rk / nf;
    let sk0 = s0k.transpose();

    let chol = Cholesky::new(skk).ok_or(Error::Singular { op: OP })?;
    let l = chol.l();
    let l_inv = l
        .solve_lower_triangular(&DMatrix::identity(p + 1, p + 1))
        .ok_or(Error::Singular { op: OP })?;
    let s00_inv = s00.try_inverse().ok_or(Error::Singular { op: OP })?;
    let m = &l_inv * sk0 * s00_inv * s0k * l_inv.transpose();

    // Symmetrize against rounding drift before the eigensolve.
    let dim = p + 1;
    let m_sym = DMatrix::from_fn(dim, dim, |i, j| 0.5 * (m[(i, j)] + m[(j, i)]));
    let mut eigenvalues: Vec<f64> = m_sym.symmetric_eigen().eigenvalues.iter().copied().collect();
    eigenvalues.sort_by(|a, b| b.total_cmp(a));
    // Eigenvalues are squared canonical correlations: clamp the structural
    // zero's rounding dust and reject numerically broken spectra.
    for ev in &mut eigenvalues {
        *ev = ev.max(0.0);
    }
    if !(eigenvalues[0] < 1.0) {
        return Err(Error::Singular { op: OP });
    }

    let trace_r0 = -nf * ((1.0 - eigenvalues[0]).ln() + (1.0 - eigenvalues[1]).ln());
    let trace_r1 = -nf * (1.0 - eigenvalues[1]).ln();
    Ok(JohansenResult {
        eigenvalues,
        hypotheses: [
            TraceHypothesis {
                rank: 0,
                statistic: trace_r0,
                critical_values: TRACE_CV_R0,
                significance: TRACE_CV_R0.verdict(trace_r0),
            },
            TraceHypothesis {
                rank: 1,
                statistic: trace_r1,
                critical_values: TRACE_CV_R1,
                significance: TRACE_CV_R1.verdict(trace_r1),
            },
        ],
        lags: k,
        ecdet: Ecdet::Const,
    })
}

/// Residuals of each column of `a` on the columns of `b` (no intercept);
/// identity when `b` has no columns.
fn residualize(a: &DMatrix<f64>, b: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    if b.ncols() == 0 {
        return Ok(a.clone());
    }
    let coef = util::lstsq(b, a, "johansen_trace")?;
    Ok(a - b * coef)
}
