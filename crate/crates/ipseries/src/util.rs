//! Shared numerical kernels: robust location/scale, quantiles, least squares,
//! Bartlett long-run variance, and the special functions the statistics need
//! (`erfcx`, normal CDF, modified Bessel `K1`, Kolmogorov tail).
//!
//! Everything here is deterministic and allocation-light; the statistical
//! modules build on these primitives so that conventions (denominators,
//! kernel weights, tie handling) are defined exactly once.

use nalgebra::{DMatrix, DVector};
use statrs::function::erf::erfc;

use crate::error::{Error, Result};

/// Consistency constant making MAD unbiased for the normal sd.
pub const MAD_SCALE: f64 = 1.4826;

/// Arithmetic mean. Empty input returns NaN; callers gate on length.
pub fn mean(x: &[f64]) -> f64 {
    x.iter().sum::<f64>() / x.len() as f64
}

/// Sample variance with the `n-1` denominator.
pub fn variance(x: &[f64]) -> f64 {
    let m = mean(x);
    x.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (x.len() - 1) as f64
}

/// Median of a slice (sorted copy; even lengths average the two middles).
pub fn median(x: &[f64]) -> f64 {
    let mut v = x.to_vec();
    v.sort_by(|a, b| a.partial_cmp(b).expect("non-NaN data"));
    sorted_median(&v)
}

/// Median of an already ascending slice.
pub fn sorted_median(v: &[f64]) -> f64 {
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Raw median absolute deviation about the median (no consistency factor).
pub fn mad(x: &[f64]) -> f64 {
    let med = median(x);
    let dev: Vec<f64> = x.iter().map(|v| (v - med).abs()).collect();
    median(&dev)
}

/// Linear-interpolation quantile where probability `p` sits at fractional
/// rank `1 + (n-1)p` (the common spreadsheet/statistics-package default).
pub fn quantile_type7(sorted: &[f64], p: f64) -> f64 {
    let n = sorted.len();
    debug_assert!(n > 0 && (0.0..=1.0).contains(&p));
    let h = (n - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = lo.min(n - 1).max(0) + 1;
    if hi >= n {
        return sorted[n - 1];
    }
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Smallest power of two `>= n`.
pub fn next_pow2(n: usize) -> usize {
    n.next_power_of_two()
}

/// Ordinary least squares fit via thin QR (numerically safer than normal
/// equations for the near-collinear lagged-difference regressions).
#[derive(Debug, Clone)]
pub struct OlsFit {
    /// Estimated coefficients, one per design column.
    pub coef: DVector<f64>,
    /// Residuals `y - X beta`.
    pub residuals: DVector<f64>,
    /// Residual variance with the `n - k` denominator.
    pub s2: f64,
    /// `(X'X)^-1`, for coefficient standard errors.
    pub xtx_inv: DMatrix<f64>,
}

impl OlsFit {
    /// Standard error of coefficient `j`.
    pub fn se(&self, j: usize) -> f64 {
        (self.s2 * self.xtx_inv[(j, j)]).sqrt()
    }
}

/// Fit `y = X beta + u` by least squares.
pub fn ols(x: &DMatrix<f64>, y: &DVector<f64>) -> Result<OlsFit> {
    let (n, k) = (x.nrows(), x.ncols());
    if n != y.len() {
        return Err(Error::Dimension {
            what: format!("design has {n} rows but response has {}", y.len()),
        });
    }
    if n < k {
        return Err(Error::TooShort { op: "ols", need: k, got: n });
    }
    let qr = x.clone().qr();
    let r = qr.r();
    // A zero diagonal entry in R flags exact collinearity.
    if (0..k).any(|j| r[(j, j)].abs() < 1e-12 * (n as f64).sqrt()) {
        return Err(Error::Singular { op: "ols" });
    }
    let qty = qr.q().transpose() * y;
    let coef = r
        .solve_upper_triangular(&qty)
        .ok_or(Error::Singular { op: "ols" })?;
    let r_inv = r
        .solve_upper_triangular(&DMatrix::identity(k, k))
        .ok_or(Error::Singular { op: "ols" })?;
    let xtx_inv = &r_inv * r_inv.transpose();
    let residuals = y - x * &coef;
    let dof = n.saturating_sub(k).max(1);
    let s2 = residuals.iter().map(|e| e * e).sum::<f64>() / dof as f64;
    Ok(OlsFit { coef, residuals, s2, xtx_inv })
}

/// Least-squares coefficients for a matrix response: solves
/// `min ||Y - X B||_F` column by column via thin QR (no intercept is added).
pub fn lstsq(x: &DMatrix<f64>, y: &DMatrix<f64>, op: &'static str) -> Result<DMatrix<f64>> {
    let (n, k) = (x.nrows(), x.ncols());
    if n != y.nrows() {
        return Err(Error::Dimension {
            what: format!("design has {n} rows but response has {}", y.nrows()),
        });
    }
    if n < k {
        return Err(Error::TooShort { op, need: k, got: n });
    }
    let qr = x.clone().qr();
    let r = qr.r();
    if (0..k).any(|j| r[(j, j)].abs() < 1e-12 * (n as f64).sqrt()) {
        return Err(Error::Singular { op });
    }
    let qty = qr.q().transpose() * y;
    r.solve_upper_triangular(&qty).ok_or(Error::Singular { op })
}

/// Bartlett-kernel long-run variance of a scalar series:
/// `gamma_0 + 2 * sum_{j=1..l} (1 - j/(l+1)) gamma_j`, autocovariances with
/// the `n` denominator.
pub fn bartlett_lrv(u: &[f64], l: usize) -> f64 {
    let n = u.len() as f64;
    let mut s: f64 = u.iter().map(|v| v * v).sum::<f64>() / n;
    for j in 1..=l {
        if j >= u.len() {
            break;
        }
        let w = 1.0 - j as f64 / (l + 1) as f64;
        let g: f64 = u[j..].iter().zip(&u[..u.len() - j]).map(|(a, b)| a * b).sum::<f64>() / n;
        s += 2.0 * w * g;
    }
    s
}

/// Bartlett-kernel long-run covariance of a multivariate series (rows are
/// observations): `Gamma_0 + sum w_j (Gamma_j + Gamma_j')`, `n` denominator.
pub fn bartlett_lrcov(u: &DMatrix<f64>, l: usize) -> DMatrix<f64> {
    let n = u.nrows();
    let p = u.ncols();
    let nf = n as f64;
    let mut omega = u.transpose() * u / nf;
    for j in 1..=l {
        if j >= n {
            break;
        }
        let w = 1.0 - j as f64 / (l + 1) as f64;
        let lead = u.rows(j, n - j);
        let lag = u.rows(0, n - j);
        let gamma = lead.transpose() * lag / nf;
        omega += (&gamma + gamma.transpose()) * w;
    }
    // Enforce exact symmetry against rounding drift.
    let mut out = DMatrix::zeros(p, p);
    for i in 0..p {
        for j in 0..p {
            out[(i, j)] = 0.5 * (omega[(i, j)] + omega[(j, i)]);
        }
    }
    out
}

/// Standard truncation-lag rule used by every Bartlett window in this crate.
pub fn bartlett_lag(n: usize) -> usize {
    (4.0 * (n as f64 / 100.0).powf(0.25)).floor() as usize
}

/// Standard normal CDF.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * erfc(-x / std::f64::consts::SQRT_2)
}

/// Scaled complementary error function `exp(z^2) * erfc(z)` for `z >= 0`,
/// stable where the naive product would overflow/underflow.
pub fn erfcx(z: f64) -> f64 {
    debug_assert!(z >= 0.0);
    if z < 5.0 {
        (z * z).exp() * erfc(z)
    } else {
        // Asymptotic series: 1/(z sqrt(pi)) * sum (-1)^k (2k-1)!! / (2 z^2)^k.
        let inv2z2 = 1.0 / (2.0 * z * z);
        let mut term = 1.0;
        let mut sum = 1.0;
        for k in 1..=10 {
            term *= -((2 * k - 1) as f64) * inv2z2;
            sum += term;
            if term.abs() < 1e-17 {
                break;
            }
        }
        sum / (z * std::f64::consts::PI.sqrt())
    }
}

/// Modified Bessel function of the first kind, order 1 (polynomial
/// approximations from Abramowitz & Stegun 9.8.1/9.8.2 era tables).
fn bessel_i1(x: f64) -> f64 {
    let ax = x.abs();
    let val = if ax < 3.75 {
        let y = (x / 3.75).powi(2);
        ax * (0.5
            + y * (0.878_905_94
                + y * (0.514_988_69
                    + y * (0.150_849_34
                        + y * (0.026_587_33 + y * (0.003_015_32 + y * 0.000_324_11))))))
    } else {
        let y = 3.75 / ax;
        let poly = 0.398_942_28
            + y * (-0.039_880_24
                + y * (-0.003_620_18
                    + y * (0.001_638_01
                        + y * (-0.010_315_55
                            + y * (0.022_829_67
                                + y * (-0.028_953_12
                                    + y * (0.017_876_54 + y * (-0.004_200_59))))))));
        ax.exp() / ax.sqrt() * poly
    };
    if x < 0.0 {
        -val
    } else {
        val
    }
}

/// Modified Bessel function of the second kind, order 1 (Abramowitz & Stegun
/// 9.8.3/9.8.4 polynomial approximations; ~1e-7 relative accuracy).
pub fn bessel_k1(x: f64) -> f64 {
    debug_assert!(x > 0.0);
    if x <= 2.0 {
        let y = x * x / 4.0;
        (x / 2.0).ln() * bessel_i1(x)
            + (1.0 / x)
                * (1.0
                    + y * (0.154_431_44
                        + y * (-0.672_785_79
                            + y * (-0.181_568_97
                                + y * (-0.019_194_02
                                    + y * (-0.001_104_04 + y * (-0.000_046_86)))))))
    } else {
        let y = 2.0 / x;
        (-x).exp() / x.sqrt()
            * (1.253_314_14
                + y * (0.234_986_19
                    + y * (-0.036_556_20
                        + y * (0.015_042_68
                            + y * (-0.007_803_53 + y * (0.003_256_14 + y * (-0.000_682_45)))))))
    }
}

/// Upper tail of the Kolmogorov distribution:
/// `P(sup |B(t)| > lambda) = 2 sum_{k>=1} (-1)^{k+1} exp(-2 k^2 lambda^2)`.
pub fn kolmogorov_tail(lambda: f64) -> f64 {
    if lambda <= 0.0 {
        return 1.0;
    }
    let mut p = 0.0;
    for k in 1..=100 {
        let term = (-2.0 * (k * k) as f64 * lambda * lambda).exp();
        if term < 1e-300 {
            break;
        }
        p += if k % 2 == 1 { 2.0 * term } else { -2.0 * term };
    }
    p.clamp(0.0, 1.0)
}
