//! Confidence intervals for break dates from the asymptotic argmax
//! distribution of the least-squares break estimator.
//!
//! For a mean shift of size `δ` between regimes with variances `v1`, `v2`,
//! the centered break estimator converges (after scaling by `δ²/v1`) to the
//! argmax of the two-sided drifted process
//!
//! ```text
//! V(s) = W1(-s) - |s|/2          s ≤ 0
//! V(s) = φ·W2(s) - s/2           s > 0,   φ = sqrt(v2/v1)
//! ```
//!
//! The CDF of that argmax has a closed form: conditioning on the branch
//! maxima and applying the reflection/Girsanov joint density of a drifted
//! Brownian maximum reduces every term to integrals
//! `J_k(β) = ∫₀^∞ w^k exp(-A w² - β w) dw`, which evaluate through the
//! scaled complementary error function. Interval endpoints come from the
//! CDF quantiles by bisection, scaled back by `v1/δ²` and rounded outward
//! to whole months.

use crate::breaks::baiperron::BreakpointSet;
use crate::error::{Error, Result};
use crate::series::MonthlySeries;
use crate::util::erfcx;

/// `(J0, J1, J2)` for `J_k(β) = ∫₀^∞ w^k exp(-A w² - β w) dw`.
fn j012(beta: f64, a: f64) -> (f64, f64, f64) {
    let sa = a.sqrt();
    let z = beta / (2.0 * sa);
    let j0 = 0.5 * (std::f64::consts::PI / a).sqrt() * erfcx(z);
    let j1 = 1.0 / (2.0 * a) - beta / (2.0 * a) * j0;
    let j2 = (1.0 / (2.0 * a)) * (j0 * (1.0 + beta * beta / (2.0 * a)) - beta / (2.0 * a));
    (j0, j1, j2)
}

/// Which J-integral a term consumes.
#[derive(Clone, Copy)]
enum JKind {
    J1,
    J2,
}

/// `E[...]` over one branch: the drifted-maximum density at horizon `x`
/// multiplied by a linear combination of J-integrals.
fn branch_e(sigma: f64, nu: f64, x: f64, terms: &[(f64, JKind, f64)]) -> f64 {
    let a = 1.0 / (2.0 * sigma * sigma * x);
    let d = (2.0 / std::f64::consts::PI).sqrt()
        * sigma.powi(-3)
        * x.powf(-1.5)
        * (-nu * nu * x / (2.0 * sigma * sigma)).exp();
    let mut out = 0.0;
    for &(coef, kind, beta) in terms {
        let (_, j1, j2) = j012(beta, a);
        out += coef
            * match kind {
                JKind::J1 => j1,
                JKind::J2 => j2,
            };
    }
    d * out
}

/// CDF of the argmax of `V(s)` at `x`, for diffusion ratio `phi`.
pub fn argmax_cdf(x: f64, phi: f64) -> f64 {
    let c = 1.0 / (phi * phi);
    if x == 0.0 {
        return c / (1.0 + c);
    }
    if x > 0.0 {
        let e1 = branch_e(phi, 0.5, x, &[(1.0, JKind::J2, c / 2.0)]);
        let e2 = branch_e(
            phi,
            0.5,
            x,
            &[(1.0, JKind::J1, c / 2.0), (-1.0, JKind::J1, 1.0 + c / 2.0)],
        );
        1.0 - e1 + c / (c + 1.0) * e2
    } else {
        let xa = -x;
        let e1 = branch_e(1.0, 0.5, xa, &[(1.0, JKind::J2, 0.5)]);
        let e2 = branch_e(
            1.0,
            0.5,
            xa,
            &[(1.0 / c, JKind::J1, 0.5), (-1.0 / c, JKind::J1, c + 0.5)],
        );
        e1 - 1.0 / (1.0 + c) * e2
    }
}

/// Quantile of the argmax distribution. The distribution has an atom at 0
/// (both branches may stay non-positive), so probabilities falling inside
/// the atom map to 0.
pub fn argmax_quantile(p: f64, phi: f64) -> f64 {
    const EPS: f64 = 1e-9;
    const SPAN: f64 = 5.0e4;
    if p >= argmax_cdf(EPS, phi) {
        // Right tail: G increasing on (0, ∞).
        if p >= argmax_cdf(SPAN, phi) {
            return SPAN;
        }
        let (mut lo, mut hi) = (EPS, SPAN);
        for _ in 0..300 {
            let mid = 0.5 * (lo + hi);
            if argmax_cdf(mid, phi) < p {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo < 1e-10 * hi.abs().max(1.0) {
                break;
            }
        }
        0.5 * (lo + hi)
    } else if p <= argmax_cdf(-EPS, phi) {
        if p <= argmax_cdf(-SPAN, phi) {
            return -SPAN;
        }
        let (mut lo, mut hi) = (-SPAN, -EPS);
        for _ in 0..300 {
            let mid = 0.5 * (lo + hi);
            if argmax_cdf(mid, phi) < p {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo < 1e-10 * lo.abs().max(1.0) {
                break;
            }
        }
        0.5 * (lo + hi)
    } else {
        // Inside the atom at the origin.
        0.0
    }
}

/// Fill confidence intervals on a dated break set.
///
/// Each break uses the regimes on both of its sides (delimited by the
/// neighbouring breaks) for the shift size and variances. A neighbouring
/// regime that is too short or dispersion-free cannot support the variance
/// estimate; the interval then widens to the full admissible range and the
/// break's `widened` flag is set.
///
/// Errors: `level` outside (0,1) ([`Error::Parameter`]); series/set length
/// mismatch ([`Error::Dimension`]).
pub fn breakpoint_confint(
    series: &MonthlySeries,
    bps: &BreakpointSet,
    level: f64,
) -> Result<BreakpointSet> {
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::Parameter {
            name: "level",
            reason: format!("confidence level must lie in (0,1), got {level}"),
        });
    }
    let n = series.len();
    if n != bps.n {
        return Err(Error::Dimension {
            what: format!("break set was dated on n = {}, series has n = {n}", bps.n),
        });
    }
    let y = &series.values;
    let idx = bps.indices();
    let p_lo = (1.0 - level) / 2.0;
    let p_hi = 1.0 - p_lo;

    let mut out = bps.clone();
    out.ci_level = Some(level);
    for (k, b) in idx.iter().copied().enumerate() {
        let prev_end: i64 = if k == 0 { -1 } else { idx[k - 1] as i64 };
        let next_end = if k + 1 < idx.len() { idx[k + 1] } else { n - 1 };
        let seg1 = &y[(prev_end + 1) as usize..=b];
        let seg2 = &y[b + 1..=next_end];

        let msd = |s: &[f64]| -> f64 {
            let m = s.iter().sum::<f64>() / s.len() as f64;
            s.iter().map(|v| (v - m).powi(2)).sum::<f64>() / s.len() as f64
        };
        let delta = seg2.iter().sum::<f64>() / seg2.len() as f64
            - seg1.iter().sum::<f64>() / seg1.len() as f64;
        let (v1, v2) = (msd(seg1), msd(seg2));

        let bp = &mut out.breaks[k];
        if seg1.len() < 2 || seg2.len() < 2 || v1 <= 0.0 || v2 <= 0.0 || delta == 0.0 {
            bp.widened = true;
            bp.ci_low = series.date_at((prev_end + 1) as usize);
            bp.ci_high = series.date_at(next_end);
            continue;
        }
        let scale = v1 / (delta * delta);
        let phi = (v2 / v1).sqrt();
        let q_hi = argmax_quantile(p_hi, phi);
        let q_lo = argmax_quantile(p_lo, phi);
        let lo = (b as i64 - (scale * q_hi).ceil() as i64).clamp(0, n as i64 - 1);
        let hi = (b as i64 - (scale * q_lo).floor() as i64).clamp(0, n as i64 - 1);
        bp.ci_low = series.date_at(lo as usize);
        bp.ci_high = series.date_at(hi as usize);
        bp.widened = false;
    }
    Ok(out)
}
