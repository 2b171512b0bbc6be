//! Empirical fluctuation processes for the intercept-only model and their
//! significance tests.
//!
//! Four variants: cumulative and moving sums of either OLS residuals or
//! recursive (one-step-ahead prediction) residuals. CUSUM variants carry
//! exact limiting distributions (Brownian bridge / linear-boundary Brownian
//! motion crossing probabilities); MOSUM variants interpolate an embedded
//! critical-value table simulated from the limiting processes at bandwidth
//! 0.15, so their p-values are bounded by the table range [0.01, 0.20].

use serde::Serialize;

use crate::error::{Error, Result};
use crate::series::MonthlySeries;
use crate::util::{kolmogorov_tail, normal_cdf};

/// Fluctuation-process variant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum EfpKind {
    /// Cumulative sums of OLS residuals.
    OlsCusum,
    /// Moving sums of OLS residuals.
    OlsMosum,
    /// Cumulative sums of recursive residuals.
    RecCusum,
    /// Moving sums of recursive residuals.
    RecMosum,
}

impl EfpKind {
    /// All four variants in reporting order.
    pub const ALL: [EfpKind; 4] =
        [EfpKind::OlsCusum, EfpKind::OlsMosum, EfpKind::RecCusum, EfpKind::RecMosum];

    /// Human-readable name as used in reports.
    pub fn label(self) -> &'static str {
        match self {
            EfpKind::OlsCusum => "OLS-CUSUM",
            EfpKind::OlsMosum => "OLS-MOSUM",
            EfpKind::RecCusum => "Rec-CUSUM",
            EfpKind::RecMosum => "Rec-MOSUM",
        }
    }

    fn is_mosum(self) -> bool {
        matches!(self, EfpKind::OlsMosum | EfpKind::RecMosum)
    }
}

/// An empirical fluctuation process on the unit interval.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FluctuationProcess {
    /// Variant that produced the path.
    pub kind: EfpKind,
    /// Process values. CUSUM paths carry the leading zero, so a base of
    /// `m` residuals yields `m + 1` points; MOSUM paths hold one value per
    /// window position (`m - ⌊m·h⌋ + 1` points).
    pub path: Vec<f64>,
    /// MOSUM bandwidth as a fraction of the base length (0.15 default);
    /// carried but unused by CUSUM variants.
    pub bandwidth: f64,
    /// Number of observations in the underlying series.
    pub n: usize,
}

/// Significance-test outcome for a fluctuation process.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScTestResult {
    /// Boundary-normalized supremum statistic.
    pub statistic: f64,
    /// Crossing probability (CUSUM: exact limiting form; MOSUM: table
    /// interpolation bounded to [0.01, 0.20]).
    pub p_value: f64,
    /// True when the p-value sits at the smallest tabulated level, i.e. the
    /// true p-value is only known to be `<=` the reported one.
    pub p_is_table_floor: bool,
    /// Significance level the verdict was taken at.
    pub alpha: f64,
    /// True when `p_value < alpha`.
    pub reject: bool,
}

/// Tabulated significance levels for the MOSUM tests (descending).
const MOSUM_LEVELS: [f64; 6] = [0.20, 0.15, 0.10, 0.05, 0.025, 0.01];
/// Simulated OLS-MOSUM critical values at bandwidth 0.15 (Brownian-bridge
/// increments; 100k replications on a 2000-point grid).
const OLS_MOSUM_CV: [f64; 6] = [1.0236, 1.0661, 1.1208, 1.2053, 1.2841, 1.3814];
/// Simulated Rec-MOSUM critical values at bandwidth 0.15 (Brownian-motion
/// increments; same simulation design).
const REC_MOSUM_CV: [f64; 6] = [1.0961, 1.1422, 1.2004, 1.2905, 1.3748, 1.4819];
/// Bandwidth the embedded MOSUM tables were simulated at. For any other
/// bandwidth the tabulated p-values are an approximation; callers that allow
/// a configurable bandwidth should surface that caveat.
pub const MOSUM_TABLE_BANDWIDTH: f64 = 0.15;

/// Recursive (one-step-ahead prediction) residuals of the mean model:
/// `w_t = (y_t - mean(y_1..t-1)) / sqrt(1 + 1/(t-1))`, `t = 2..n`.
fn recursive_residuals(y: &[f64]) -> Vec<f64> {
    let n = y.len();
    let mut w = Vec::with_capacity(n - 1);
    let mut csum = 0.0;
    for t in 2..=n {
        csum += y[t - 2];
        let prev_mean = csum / (t - 1) as f64;
        w.push((y[t - 1] - prev_mean) / (1.0 + 1.0 / (t - 1) as f64).sqrt());
    }
    w
}

/// Base residuals for a variant: OLS (mean-centered, `σ̂²` with `n-1`) or
/// recursive (variance about the residual mean, `n_w - 1`).
fn base_residuals(series: &MonthlySeries, kind: EfpKind) -> Result<(Vec<f64>, f64)> {
    let y = &series.values;
    let resid = match kind {
        EfpKind::OlsCusum | EfpKind::OlsMosum => {
            let m = y.iter().sum::<f64>() / y.len() as f64;
            y.iter().map(|v| v - m).collect::<Vec<f64>>()
        }
        EfpKind::RecCusum | EfpKind::RecMosum => recursive_residuals(y),
    };
    let nb = resid.len() as f64;
    let centre = match kind {
        // OLS residuals already sum to zero; recursive ones do not.
        EfpKind::OlsCusum | EfpKind::OlsMosum => 0.0,
        _ => resid.iter().sum::<f64>() / nb,
    };
    let sigma2 = resid.iter().map(|v| (v - centre).powi(2)).sum::<f64>() / (nb - 1.0);
    if sigma2 <= 0.0 {
        return Err(Error::DegenerateDispersion { op: "efp", what: "residual variance" });
    }
    Ok((resid, sigma2.sqrt()))
}

/// Build the fluctuation process of `kind` for the mean-only model.
///
/// `h` is the MOSUM bandwidth (fraction of the residual count); it is
/// validated for every variant but only consumed by the moving-sum ones.
///
/// Errors: `h` outside (0,1) ([`Error::Parameter`]); too few observations
/// for the variant ([`Error::TooShort`]); zero residual variance
/// ([`Error::DegenerateDispersion`]).
pub fn efp(series: &MonthlySeries, kind: EfpKind, h: f64) -> Result<FluctuationProcess> {
    if !(h > 0.0 && h < 1.0) {
        return Err(Error::Parameter {
            name: "h",
            reason: format!("bandwidth must lie in (0,1), got {h}"),
        });
    }
    let min_len = match kind {
        EfpKind::OlsCusum | EfpKind::OlsMosum => 2,
        // Recursive residuals need at least two, hence three observations.
        EfpKind::RecCusum | EfpKind::RecMosum => 3,
    };
    if series.len() < min_len {
        return Err(Error::TooShort { op: "efp", need: min_len, got: series.len() });
    }
    let n = series.len();
    let (resid, sigma) = base_residuals(series, kind)?;
    let m = resid.len();
    let scale = sigma * (m as f64).sqrt();

    // Cumulative path with the leading zero.
    let mut cum = Vec::with_capacity(m + 1);
    cum.push(0.0);
    let mut acc = 0.0;
    for r in &resid {
        acc += r;
        cum.push(acc / scale);
    }

    let path = if kind.is_mosum() {
        let nh = (m as f64 * h).floor() as usize;
        if nh < 2 {
            return Err(Error::TooShort { op: "efp (mosum window)", need: 2, got: nh });
        }
        (0..=(m - nh)).map(|i| cum[i + nh] - cum[i]).collect()
    } else {
        cum
    };

    Ok(FluctuationProcess { kind, path, bandwidth: h, n })
}

impl FluctuationProcess {
    /// Unit-interval positions of the path points (CUSUM: `i / m`; MOSUM:
    /// window centers).
    pub fn grid(&self) -> Vec<f64> {
        let len = self.path.len();
        match self.kind {
            EfpKind::OlsCusum | EfpKind::RecCusum => {
                let m = (len - 1).max(1) as f64;
                (0..len).map(|i| i as f64 / m).collect()
            }
            EfpKind::OlsMosum | EfpKind::RecMosum => {
                // Window i covers residuals [i, i+nh); place it at its center.
                let m = (len - 1) as f64 / (1.0 - self.bandwidth).max(f64::EPSILON);
                let nh = (m * self.bandwidth).round();
                (0..len).map(|i| (i as f64 + nh / 2.0) / m).collect()
            }
        }
    }

    /// Boundary-normalized supremum statistic.
    pub fn statistic(&self) -> f64 {
        match self.kind {
            EfpKind::RecCusum => {
                let m = (self.path.len() - 1).max(1) as f64;
                self.path
                    .iter()
                    .enumerate()
                    .map(|(i, v)| v.abs() / (1.0 + 2.0 * i as f64 / m))
                    .fold(0.0, f64::max)
            }
            _ => self.path.iter().fold(0.0, |a, v| a.max(v.abs())),
        }
    }

    /// Upper significance boundary evaluated on [`Self::grid`]. The lower
    /// boundary is its negation.
    pub fn boundary(&self, alpha: f64) -> Result<Vec<f64>> {
        let lambda = critical_value(self.kind, alpha)?;
        Ok(match self.kind {
            EfpKind::RecCusum => {
                let m = (self.path.len() - 1).max(1) as f64;
                (0..self.path.len())
                    .map(|i| lambda * (1.0 + 2.0 * i as f64 / m))
                    .collect()
            }
            _ => vec![lambda; self.path.len()],
        })
    }
}

/// Rec-CUSUM boundary-crossing probability for boundary `λ(1 + 2t)`:
/// `2(1 - Φ(3λ)) + 2 e^{-4λ²} Φ(λ)`.
fn rec_cusum_tail(lambda: f64) -> f64 {
    let p = 2.0 * (1.0 - normal_cdf(3.0 * lambda))
        + 2.0 * (-4.0 * lambda * lambda).exp() * normal_cdf(lambda);
    p.clamp(0.0, 1.0)
}

/// Interpolate a MOSUM p-value from the embedded table (clamped to the
/// tabulated range). Returns `(p, at_floor)`.
fn mosum_p(stat: f64, cv: &[f64; 6]) -> (f64, bool) {
    if stat >= cv[5] {
        return (MOSUM_LEVELS[5], true);
    }
    if stat <= cv[0] {
        return (MOSUM_LEVELS[0], false);
    }
    for i in 0..5 {
        if stat <= cv[i + 1] {
            let frac = (stat - cv[i]) / (cv[i + 1] - cv[i]);
            return (MOSUM_LEVELS[i] + frac * (MOSUM_LEVELS[i + 1] - MOSUM_LEVELS[i]), false);
        }
    }
    unreachable!("stat bracketed above");
}

/// Critical value at level `alpha` for the limiting process of `kind`
/// (solved by bisection for the CUSUM variants, interpolated from the
/// embedded table for the MOSUM ones).
pub fn critical_value(kind: EfpKind, alpha: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::Parameter {
            name: "alpha",
            reason: format!("level must lie in (0,1), got {alpha}"),
        });
    }
    match kind {
        EfpKind::OlsCusum => Ok(bisect_decreasing(kolmogorov_tail, alpha, 1e-6, 10.0)),
        EfpKind::RecCusum => Ok(bisect_decreasing(rec_cusum_tail, alpha, 1e-6, 10.0)),
        EfpKind::OlsMosum | EfpKind::RecMosum => {
            let cv = if kind == EfpKind::OlsMosum { &OLS_MOSUM_CV } else { &REC_MOSUM_CV };
            let a = alpha.clamp(MOSUM_LEVELS[5], MOSUM_LEVELS[0]);
            // Levels descend while critical values ascend.
            for i in 0..5 {
                if a >= MOSUM_LEVELS[i + 1] {
                    let frac = (MOSUM_LEVELS[i] - a) / (MOSUM_LEVELS[i] - MOSUM_LEVELS[i + 1]);
                    return Ok(cv[i] + frac * (cv[i + 1] - cv[i]));
                }
            }
            Ok(cv[5])
        }
    }
}

/// Solve `f(x) = target` for a continuous decreasing `f` on `[lo, hi]`.
fn bisect_decreasing(f: impl Fn(f64) -> f64, target: f64, mut lo: f64, mut hi: f64) -> f64 {
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) > target {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-12 {
            break;
        }
    }
    0.5 * (lo + hi)
}

/// Significance test for a fluctuation process at level `alpha`.
///
/// Errors: empty path ([`Error::TooShort`]); `alpha` outside (0,1)
/// ([`Error::Parameter`]).
pub fn sctest(process: &FluctuationProcess, alpha: f64) -> Result<ScTestResult> {
    if process.path.is_empty() {
        return Err(Error::TooShort { op: "sctest", need: 1, got: 0 });
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::Parameter {
            name: "alpha",
            reason: format!("level must lie in (0,1), got {alpha}"),
        });
    }
    let stat = process.statistic();
    let (p, floor) = match process.kind {
        EfpKind::OlsCusum => (kolmogorov_tail(stat).clamp(0.0, 1.0), false),
        EfpKind::RecCusum => (rec_cusum_tail(stat), false),
        EfpKind::OlsMosum => mosum_p(stat, &OLS_MOSUM_CV),
        EfpKind::RecMosum => mosum_p(stat, &REC_MOSUM_CV),
    };
    // A measured-zero tail still reports a positive floor so that p ∈ (0,1].
    let p = p.max(f64::MIN_POSITIVE);
    Ok(ScTestResult {
        statistic: stat,
        p_value: p,
        p_is_table_floor: floor,
        alpha,
        reject: p < alpha,
    })
}

/// Convenience: run `efp` + `sctest` in one call.
pub fn efp_test(
    series: &MonthlySeries,
    kind: EfpKind,
    h: f64,
    alpha: f64,
) -> Result<(FluctuationProcess, ScTestResult)> {
    let proc = efp(series, kind, h)?;
    let res = sctest(&proc, alpha)?;
    Ok((proc, res))
}
