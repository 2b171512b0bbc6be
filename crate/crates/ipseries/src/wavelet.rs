//! Morlet continuous wavelet transform, cross-wavelet spectrum, red-noise
//! significance, and cone of influence.
//!
//! The transform follows the standard frequency-domain construction: the
//! demeaned, variance-normalized series is zero-padded to the next power of
//! two, Fourier-transformed once, multiplied per scale by the analytic
//! Morlet daughter `sqrt(2*pi*s/dt) * pi^(-1/4) * exp(-(s*w - omega0)^2/2)`
//! (positive frequencies only), and inverse-transformed. With this
//! normalization the expected power of unit-variance white noise is 1 at
//! every adequately resolved scale.
//!
//! Cross-wavelet power `|W_x * conj(W_y)|` is compared against a red-noise
//! benchmark: each series contributes a normalized AR(1) spectrum
//! `P(p) = (1 - phi^2) / (1 + phi^2 - 2 phi cos(2 pi / p))`, and the
//! significance threshold is `c(alpha) * sqrt(Px * Py)` where `c(alpha)`
//! solves `2 c K1(2 c) = alpha` — the upper quantile of the square root of
//! a product of two independent unit-mean exponential powers.

use num_complex::Complex;
use rustfft::FftPlanner;
use serde::Serialize;
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::series::MonthlySeries;
use crate::util;

/// Default Morlet nondimensional frequency.
pub const MORLET_OMEGA0: f64 = 6.0;
/// Default scale resolution (twelve sub-octaves per octave).
pub const DEFAULT_DJ: f64 = 1.0 / 12.0;
/// Significance level of the spectrum's built-in mask.
pub const MASK_ALPHA: f64 = 0.05;

/// Parameters of the continuous wavelet transform.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct WaveletParams {
    /// Morlet nondimensional frequency (at least 5 for the analytic
    /// approximation to hold).
    pub omega0: f64,
    /// Sampling interval (months).
    pub dt: f64,
    /// Scale resolution: spacing of `log2(scale)` between adjacent scales.
    pub dj: f64,
    /// Smallest scale (months).
    pub s0: f64,
    /// Largest scale index; the transform uses scales `0..=j_max`.
    pub j_max: usize,
}

impl WaveletParams {
    /// Standard parameterization for a series of length `n`: `omega0 = 6`,
    /// `dt = 1`, `dj = 1/12`, `s0 = 2 dt`, and `j_max` chosen so the largest
    /// scale is about the series length.
    pub fn for_length(n: usize) -> Result<Self> {
        let dt = 1.0;
        let s0 = 2.0 * dt;
        if n < 8 {
            return Err(Error::TooShort { op: "wavelet params", need: 8, got: n });
        }
        let j_max = ((n as f64 * dt / s0).log2() / DEFAULT_DJ).floor() as usize;
        let params = Self { omega0: MORLET_OMEGA0, dt, dj: DEFAULT_DJ, s0, j_max };
        params.validate()?;
        Ok(params)
    }

    /// Checks the parameter invariants.
    pub fn validate(&self) -> Result<()> {
        if !(self.omega0 >= 5.0) {
            return Err(Error::Parameter {
                name: "omega0",
                reason: format!("must be at least 5, got {}", self.omega0),
            });
        }
        if !(self.dt > 0.0) {
            return Err(Error::Parameter {
                name: "dt",
                reason: format!("must be positive, got {}", self.dt),
            });
        }
        if !(self.dj > 0.0) {
            return Err(Error::Parameter {
                name: "dj",
                reason: format!("must be positive, got {}", self.dj),
            });
        }
        if !(self.s0 > 0.0) {
            return Err(Error::Parameter {
                name: "s0",
                reason: format!("must be positive, got {}", self.s0),
            });
        }
        if self.j_max < 1 {
            return Err(Error::Parameter {
                name: "j_max",
                reason: "must be at least 1".into(),
            });
        }
        Ok(())
    }

    /// Conversion factor from scale to Fourier period:
    /// `4 pi / (omega0 + sqrt(2 + omega0^2))`.
    pub fn fourier_factor(&self) -> f64 {
        4.0 * PI / (self.omega0 + (2.0 + self.omega0 * self.omega0).sqrt())
    }

    /// The geometric ladder of scales `s0 * 2^(j * dj)`, `j = 0..=j_max`.
    pub fn scales(&self) -> Vec<f64> {
        (0..=self.j_max).map(|j| self.s0 * 2f64.powf(j as f64 * self.dj)).collect()
    }

    /// Fourier periods corresponding to [`Self::scales`].
    pub fn periods(&self) -> Vec<f64> {
        let ff = self.fourier_factor();
        self.scales().into_iter().map(|s| ff * s).collect()
    }
}

/// Cross-wavelet spectrum of a pair of series.
#[derive(Debug, Clone, Serialize)]
pub struct CrossWaveletSpectrum {
    /// Wavelet scales (months), ascending.
    pub scales: Vec<f64>,
    /// Fourier periods (months), ascending with scale.
    pub periods: Vec<f64>,
    /// Cross power `|W_x * conj(W_y)|`, scale-major: `power[scale][time]`.
    pub power: Vec<Vec<f64>>,
    /// Relative phase `arg(W_x * conj(W_y))` in `(-pi, pi]`.
    pub phase: Vec<Vec<f64>>,
    /// True where power exceeds the red-noise benchmark at [`MASK_ALPHA`].
    pub signif: Vec<Vec<bool>>,
    /// Cone of influence: the largest trustworthy period at each time.
    pub coi: Vec<f64>,
    /// Significance level of the mask.
    pub alpha: f64,
    /// Fitted AR(1) coefficient of the first series.
    pub ar1_x: f64,
    /// Fitted AR(1) coefficient of the second series.
    pub ar1_y: f64,
}

impl CrossWaveletSpectrum {
    /// Number of scales (rows).
    pub fn n_scales(&self) -> usize {
        self.periods.len()
    }

    /// Number of time points (columns).
    pub fn n_times(&self) -> usize {
        self.coi.len()
    }

    /// True when the cell at (scale row, time column) lies inside the cone
    /// of influence, i.e. is unaffected by edge padding.
    pub fn in_cone(&self, scale_idx: usize, time_idx: usize) -> bool {
        self.periods[scale_idx] < self.coi[time_idx]
    }
}

/// Continuous Morlet wavelet transform: one complex row per scale, each of
/// the series' length. The series is demeaned and variance-normalized
/// internally; edges are handled by zero-padding to the next power of two.
pub fn morlet_cwt(
    series: &MonthlySeries,
    params: &WaveletParams,
) -> Result<Vec<Vec<Complex<f64>>>> {
    params.validate()?;
    let n = series.values.len();
    if n < 8 {
        return Err(Error::TooShort { op: "morlet_cwt", need: 8, got: n });
    }
    let mean = util::mean(&series.values);
    let mut e: Vec<f64> = series.values.iter().map(|v| v - mean).collect();
    let sd = util::variance(&series.values).sqrt();
    if sd > 0.0 {
        for v in &mut e {
            *v /= sd;
        }
    }

    let m = util::next_pow2(n);
    let mf = m as f64;
    let mut planner = FftPlanner::new();
    let fft = planner.plan_fft_forward(m);
    let ifft = planner.plan_fft_inverse(m);

    let mut spectrum: Vec<Complex<f64>> = e
        .iter()
        .map(|&v| Complex::new(v, 0.0))
        .chain(std::iter::repeat(Complex::new(0.0, 0.0)).take(m - n))
        .collect();
    fft.process(&mut spectrum);
    for c in &mut spectrum {
        *c /= mf;
    }

    let omega: Vec<f64> = (0..m)
        .map(|k| {
            if k <= m / 2 {
                2.0 * PI * k as f64 / (mf * params.dt)
            } else {
                -2.0 * PI * (m - k) as f64 / (mf * params.dt)
            }
        })
        .collect();

    let gauss_norm = PI.powf(-0.25);
    let mut rows = Vec::with_capacity(params.j_max + 1);
    let mut row = vec![Complex::new(0.0, 0.0); m];
    for s in params.scales() {
        let amp = (2.0 * PI * s / params.dt).sqrt() * gauss_norm;
        for (k, slot) in row.iter_mut().enumerate() {
            *slot = if omega[k] > 0.0 {
                let arg = s * omega[k] - params.omega0;
                spectrum[k] * (amp * (-arg * arg / 2.0).exp())
            } else {
                Complex::new(0.0, 0.0)
            };
        }
        ifft.process(&mut row);
        rows.push(row[..n].to_vec());
    }
    Ok(rows)
}

/// Lag-1 sample autocorrelation of the mean-removed series — the AR(1)
/// coefficient used for the red-noise background.
pub fn ar1_fit(series: &MonthlySeries) -> Result<f64> {
    let n = series.values.len();
    if n < 3 {
        return Err(Error::TooShort { op: "ar1_fit", need: 3, got: n });
    }
    let m = util::mean(&series.values);
    let e: Vec<f64> = series.values.iter().map(|v| v - m).collect();
    let den: f64 = e.iter().map(|v| v * v).sum();
    if den <= 0.0 {
        return Err(Error::DegenerateDispersion { op: "ar1_fit", what: "variance" });
    }
    let num: f64 = e.windows(2).map(|w| w[0] * w[1]).sum();
    Ok(num / den)
}

/// Normalized AR(1) power spectrum at period `p` (in samples):
/// `(1 - phi^2) / (1 + phi^2 - 2 phi cos(2 pi / p))`; equals 1 for white
/// noise at every period.
fn ar1_spectrum(phi: f64, period: f64) -> f64 {
    (1.0 - phi * phi) / (1.0 + phi * phi - 2.0 * phi * (2.0 * PI / period).cos())
}

/// Upper `alpha`-quantile `c` of the square root of a product of two
/// independent unit-mean exponential powers: solves `2 c K1(2 c) = alpha`.
/// Doubling it gives the quantile usually quoted for `nu = 2` complex
/// wavelets (`2 c(0.05) ≈ 3.9985`).
pub fn product_power_quantile(alpha: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::Parameter {
            name: "alpha",
            reason: format!("must lie in (0, 1), got {alpha}"),
        });
    }
    // 2c*K1(2c) decreases from 1 (c -> 0) to 0; bisect.
    let tail = |c: f64| 2.0 * c * util::bessel_k1(2.0 * c);
    let (mut lo, mut hi) = (1e-9, 40.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if tail(mid) > alpha {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Red-noise significance threshold for cross-wavelet power of two
/// variance-normalized series at a given Fourier period:
/// `c(alpha) * sqrt(Px(p) * Py(p))`.
pub fn significance_threshold(phi_x: f64, phi_y: f64, period: f64, alpha: f64) -> Result<f64> {
    if !(phi_x.abs() < 1.0) {
        return Err(Error::Parameter {
            name: "phi_x",
            reason: format!("AR(1) coefficient must lie in (-1, 1), got {phi_x}"),
        });
    }
    if !(phi_y.abs() < 1.0) {
        return Err(Error::Parameter {
            name: "phi_y",
            reason: format!("AR(1) coefficient must lie in (-1, 1), got {phi_y}"),
        });
    }
    if !(period > 0.0) {
        return Err(Error::Parameter {
            name: "period",
            reason: format!("must be positive, got {period}"),
        });
    }
    let c = product_power_quantile(alpha)?;
    Ok(c * (ar1_spectrum(phi_x, period) * ar1_spectrum(phi_y, period)).sqrt())
}

fn coi_with_factor(n: usize, dt: f64, fourier_factor: f64) -> Vec<f64> {
    (0..n)
        .map(|t| {
            let edge = (t as f64 + 0.5).min(n as f64 - t as f64 - 0.5);
            fourier_factor * std::f64::consts::SQRT_2 * dt * edge
        })
        .collect()
}

/// Cone of influence for the default Morlet wavelet: the largest period at
/// each time unaffected by edge padding,
/// `fourier_factor * sqrt(2) * dt * min(t + 0.5, n - t - 0.5)`.
pub fn cone_of_influence(n: usize, dt: f64) -> Vec<f64> {
    let ff = 4.0 * PI / (MORLET_OMEGA0 + (2.0 + MORLET_OMEGA0 * MORLET_OMEGA0).sqrt());
    coi_with_factor(n, dt, ff)
}

/// Cross-wavelet spectrum `W_xy = W_x * conj(W_y)` of two equally long
/// series, with red-noise significance mask at [`MASK_ALPHA`] and cone of
/// influence.
pub fn cross_wavelet(
    x: &MonthlySeries,
    y: &MonthlySeries,
    params: &WaveletParams,
) -> Result<CrossWaveletSpectrum> {
    let n = x.values.len();
    if y.values.len() != n {
        return Err(Error::Dimension {
            what: format!("cross_wavelet needs equal lengths, got {} and {}", n, y.values.len()),
        });
    }
    let wx = morlet_cwt(x, params)?;
    let wy = morlet_cwt(y, params)?;
    let phi_x = ar1_fit(x)?;
    let phi_y = ar1_fit(y)?;
    let periods = params.periods();

    let mut power = Vec::with_capacity(wx.len());
    let mut phase = Vec::with_capacity(wx.len());
    let mut signif = Vec::with_capacity(wx.len());
    for (j, (rx, ry)) in wx.iter().zip(&wy).enumerate() {
        let threshold = significance_threshold(phi_x, phi_y, periods[j], MASK_ALPHA)?;
        let mut p_row = Vec::with_capacity(n);
        let mut ph_row = Vec::with_capacity(n);
        let mut s_row = Vec::with_capacity(n);
        for t in 0..n {
            let w = rx[t] * ry[t].conj();
            let p = w.norm();
            let mut ph = w.im.atan2(w.re);
            if ph == -PI {
                ph = PI;
            }
            p_row.push(p);
            ph_row.push(ph);
            s_row.push(p > threshold);
        }
        power.push(p_row);
        phase.push(ph_row);
        signif.push(s_row);
    }

    Ok(CrossWaveletSpectrum {
        scales: params.scales(),
        periods,
        power,
        phase,
        signif,
        coi: coi_with_factor(n, params.dt, params.fourier_factor()),
        alpha: MASK_ALPHA,
        ar1_x: phi_x,
        ar1_y: phi_y,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::series::MonthDate;

    fn series(values: Vec<f64>) -> MonthlySeries {
        MonthlySeries::new(MonthDate::new(2000, 1).unwrap(), values)
    }

    fn wobble(i: usize) -> f64 {
        let mut z = (i as u64).wrapping_add(0x9E37_79B9_7F4A_7C15);
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^= z >> 31;
        (z >> 11) as f64 / (1u64 << 53) as f64 - 0.5
    }

    #[test]
    fn default_params_for_length() {
        let p = WaveletParams::for_length(472).unwrap();
        assert_eq!(p.j_max, 94);
        let scales = p.scales();
        assert_eq!(scales.len(), 95);
        assert!((scales[0] - 2.0).abs() < 1e-12);
        let periods = p.periods();
        assert!(periods.windows(2).all(|w| w[1] > w[0]));
        assert!((p.fourier_factor() - 1.0330).abs() < 1e-4);
        assert!(WaveletParams::for_length(4).is_err());
        let bad = WaveletParams { omega0: 3.0, ..p };
        assert!(matches!(bad.validate(), Err(Error::Parameter { .. })));
    }

    #[test]
    fn product_power_quantile_matches_frozen_values() {
        let c05 = product_power_quantile(0.05).unwrap();
        let c01 = product_power_quantile(0.01).unwrap();
        assert!((c05 - 1.999_261).abs() < 1e-4, "c(0.05) = {c05}");
        assert!((c01 - 2.883_572).abs() < 1e-4, "c(0.01) = {c01}");
        assert!(c01 > c05);
        // Round-trip through the defining equation.
        assert!((2.0 * c05 * util::bessel_k1(2.0 * c05) - 0.05).abs() < 1e-6);
        assert!(product_power_quantile(0.0).is_err());
        assert!(product_power_quantile(1.0).is_err());
    }

    #[test]
    fn ar1_fit_reference_behaviors() {
        // Alternating +/-1: lag-1 products all -1, so r1 = -(n-1)/n.
        let n = 50;
        let alt: Vec<f64> = (0..n).map(|i| if i % 2 == 0 { 1.0 } else { -1.0 }).collect();
        let phi = ar1_fit(&series(alt)).unwrap();
        assert!((phi - (-(n as f64 - 1.0) / n as f64)).abs() < 1e-12);
        // Hash noise: near zero.
        let noise: Vec<f64> = (0..10_000).map(wobble).collect();
        let phi = ar1_fit(&series(noise)).unwrap();
        assert!(phi.abs() < 0.03, "white phi = {phi}");
        // Cumulated noise: near one.
        let walk: Vec<f64> = (0..1000)
            .scan(0.0, |acc, i| {
                *acc += wobble(i);
                Some(*acc)
            })
            .collect();
        let phi = ar1_fit(&series(walk)).unwrap();
        assert!(phi > 0.95, "walk phi = {phi}");
        assert!(matches!(
            ar1_fit(&series(vec![2.0; 10])),
            Err(Error::DegenerateDispersion { .. })
        ));
        assert!(matches!(ar1_fit(&series(vec![1.0, 2.0])), Err(Error::TooShort { .. })));
    }

    #[test]
    fn threshold_is_flat_for_white_noise_and_monotone_otherwise() {
        let c = product_power_quantile(0.05).unwrap();
        for p in [2.0, 8.0, 64.0, 512.0] {
            let t = significance_threshold(0.0, 0.0, p, 0.05).unwrap();
            assert!((t - c).abs() < 1e-12);
        }
        // Red noise: threshold grows with period.
        let mut last = 0.0;
        for p in [2.0, 4.0, 8.0, 16.0, 32.0, 64.0, 128.0] {
            let t = significance_threshold(0.9, 0.9, p, 0.05).unwrap();
            assert!(t > last, "threshold not increasing at period {p}");
            last = t;
        }
        // Stricter alpha, higher threshold.
        let t05 = significance_threshold(0.5, 0.3, 24.0, 0.05).unwrap();
        let t01 = significance_threshold(0.5, 0.3, 24.0, 0.01).unwrap();
        assert!(t01 > t05);
        assert!(significance_threshold(1.0, 0.0, 24.0, 0.05).is_err());
        assert!(significance_threshold(0.0, -1.2, 24.0, 0.05).is_err());
    }

    #[test]
    fn cone_shape() {
        let n = 100;
        let coi = cone_of_influence(n, 1.0);
        let ff = 4.0 * PI / (6.0 + (38.0_f64).sqrt());
        assert!((coi[0] - ff * std::f64::consts::SQRT_2 * 0.5).abs() < 1e-12);
        for t in 0..n {
            assert!((coi[t] - coi[n - 1 - t]).abs() < 1e-12, "asymmetry at {t}");
        }
        let max = coi.iter().cloned().fold(0.0, f64::max);
        assert!((coi[n / 2] - max).abs() < 1e-12 || (coi[n / 2 - 1] - max).abs() < 1e-12);
    }

    #[test]
    fn constant_series_transforms_to_zero() {
        let p = WaveletParams::for_length(64).unwrap();
        let w = morlet_cwt(&series(vec![7.5; 64]), &p).unwrap();
        for row in &w {
            assert_eq!(row.len(), 64);
            for c in row {
                assert!(c.norm() < 1e-12);
            }
        }
    }

    #[test]
    fn sinusoid_peak_lands_on_its_period() {
        let n = 256;
        let x: Vec<f64> = (0..n).map(|t| (2.0 * PI * t as f64 / 32.0).sin()).collect();
        let p = WaveletParams::for_length(n).unwrap();
        let w = morlet_cwt(&series(x), &p).unwrap();
        let periods = p.periods();
        let avg: Vec<f64> = w
            .iter()
            .map(|row| row.iter().map(|c| c.norm_sqr()).sum::<f64>() / n as f64)
            .collect();
        let peak = (0..avg.len()).max_by(|&a, &b| avg[a].total_cmp(&avg[b])).unwrap();
        let off = (periods[peak] / 32.0).log2().abs();
        assert!(off <= p.dj + 1e-9, "peak period {} is {off} octaves off", periods[peak]);
    }

    #[test]
    fn self_spectrum_is_squared_power_with_zero_phase() {
        let n = 128;
        let x: Vec<f64> =
            (0..n).map(|t| (2.0 * PI * t as f64 / 24.0).sin() + 0.3 * wobble(t)).collect();
        let s = series(x);
        let p = WaveletParams::for_length(n).unwrap();
        let w = morlet_cwt(&s, &p).unwrap();
        let spec = cross_wavelet(&s, &s, &p).unwrap();
        assert_eq!(spec.power.len(), w.len());
        for (j, row) in w.iter().enumerate() {
            for t in 0..n {
                let expect = row[t].norm_sqr();
                let got = spec.power[j][t];
                assert!(
                    (got - expect).abs() <= 1e-9 * expect.max(1e-300),
                    "power mismatch at ({j},{t})"
                );
                assert_eq!(spec.phase[j][t], 0.0, "phase at ({j},{t})");
            }
        }
    }

    #[test]
    fn power_is_invariant_under_positive_affine_maps() {
        let n = 96;
        let x: Vec<f64> = (0..n).map(|t| (2.0 * PI * t as f64 / 18.0).cos() + wobble(t)).collect();
        let y: Vec<f64> = (0..n).map(|t| (2.0 * PI * t as f64 / 18.0).sin() + wobble(t + 7)).collect();
        let p = WaveletParams::for_length(n).unwrap();
        let base = cross_wavelet(&series(x.clone()), &series(y.clone()), &p).unwrap();
        let x2: Vec<f64> = x.iter().map(|v| 40.0 * v + 1000.0).collect();
        let shifted = cross_wavelet(&series(x2), &series(y), &p).unwrap();
        for (a, b) in base.power.iter().flatten().zip(shifted.power.iter().flatten()) {
            assert!((a - b).abs() <= 1e-9 * a.max(1e-12));
        }
    }

    #[test]
    fn cross_wavelet_validates_lengths() {
        let p = WaveletParams::for_length(64).unwrap();
        let a = series((0..64).map(wobble).collect());
        let b = series((0..63).map(wobble).collect());
        assert!(matches!(cross_wavelet(&a, &b, &p), Err(Error::Dimension { .. })));
    }
}
