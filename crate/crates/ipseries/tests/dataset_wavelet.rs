//! Cross-wavelet spectrum of the bundled dataset pair, checked against
//! frozen reference values: grid shape, AR(1) backgrounds, aggregate power,
//! significance concentration, and the cone of influence.

use ipseries::prep::clean_series;
use ipseries::series::{parse_csv, to_monthly_series, Column};
use ipseries::wavelet::{ar1_fit, cross_wavelet, CrossWaveletSpectrum, WaveletParams};
use ipseries::MonthlySeries;

fn load_cleaned() -> (MonthlySeries, MonthlySeries) {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/../../data/uspto_monthly.csv");
    let text = std::fs::read_to_string(path).expect("bundled dataset present");
    let table = parse_csv(&text).expect("dataset parses");
    let n = table.rows.len();
    let tm = to_monthly_series(&table, Column::Trademarks, n).unwrap();
    let pat = to_monthly_series(&table, Column::Patents, n).unwrap();
    let (tm, _) = clean_series(&tm, 6.0).unwrap();
    let (pat, _) = clean_series(&pat, 6.0).unwrap();
    (tm, pat)
}

fn spectrum() -> CrossWaveletSpectrum {
    let (tm, pat) = load_cleaned();
    let params = WaveletParams::for_length(tm.len()).unwrap();
    cross_wavelet(&tm, &pat, &params).unwrap()
}

#[test]
fn grid_and_backgrounds_match_frozen_values() {
    let (tm, pat) = load_cleaned();
    let params = WaveletParams::for_length(tm.len()).unwrap();
    assert_eq!(params.j_max, 94);
    let spec = cross_wavelet(&tm, &pat, &params).unwrap();
    assert_eq!(spec.n_scales(), 95);
    assert_eq!(spec.n_times(), 472);
    assert_eq!(spec.power.len(), 95);
    assert!(spec.power.iter().all(|row| row.len() == 472));

    // Both monthly count series are strongly red.
    assert!((spec.ar1_x - 0.981_045_121_3).abs() < 1e-9, "phi_tm = {}", spec.ar1_x);
    assert!((spec.ar1_y - 0.927_544_197_3).abs() < 1e-9, "phi_pat = {}", spec.ar1_y);
    assert_eq!(spec.ar1_x, ar1_fit(&tm).unwrap());
    assert_eq!(spec.ar1_y, ar1_fit(&pat).unwrap());
    assert!((spec.alpha - 0.05).abs() < 1e-15);
}

#[test]
fn aggregate_cross_power_matches_frozen_value() {
    let spec = spectrum();
    let total: f64 = spec.power.iter().flatten().sum();
    assert!(
        (total - 657_018.985_288).abs() < 1e-6 * total,
        "total cross power = {total}"
    );
    // The global peak sits at the longest resolved periods (the common
    // secular trend dominates).
    let (mut peak, mut peak_j) = (0.0, 0);
    for (j, row) in spec.power.iter().enumerate() {
        for &p in row {
            if p > peak {
                peak = p;
                peak_j = j;
            }
        }
    }
    assert!((peak - 486.593_800).abs() < 1e-4 * peak, "peak power = {peak}");
    assert!(
        (spec.periods[peak_j] - 471.2127).abs() < 1e-3,
        "peak period = {}",
        spec.periods[peak_j]
    );
}

#[test]
fn cone_of_influence_matches_frozen_values() {
    let spec = spectrum();
    assert!((spec.coi[0] - 0.730_472).abs() < 1e-6);
    let max = spec.coi.iter().cloned().fold(0.0, f64::max);
    assert!((max - 344.0524).abs() < 1e-4, "max coi = {max}");
    let n = spec.n_times();
    for t in 0..n {
        assert!((spec.coi[t] - spec.coi[n - 1 - t]).abs() < 1e-12);
    }
    let in_cone: usize = (0..spec.n_scales())
        .map(|j| (0..n).filter(|&t| spec.in_cone(j, t)).count())
        .sum();
    assert_eq!(in_cone, 33_926);
}

#[test]
fn significance_concentrates_in_short_periods_after_1995() {
    let spec = spectrum();
    let n = spec.n_times();

    // Overall in-cone significant share at the 5% mask.
    let (mut cells, mut hits) = (0usize, 0usize);
    for j in 0..spec.n_scales() {
        for t in 0..n {
            if spec.in_cone(j, t) {
                cells += 1;
                hits += usize::from(spec.signif[j][t]);
            }
        }
    }
    let frac = hits as f64 / cells as f64;
    assert!((frac - 0.030_832).abs() < 1e-3, "in-cone significant fraction = {frac}");

    // Sub-two-year band split at 1995-01 (column 208 from the 1977-09
    // start): the short-period co-movement is essentially absent before
    // 1995 and widespread after.
    let split = 208;
    let (mut pre_cells, mut pre_hits, mut post_cells, mut post_hits) = (0usize, 0, 0usize, 0);
    for j in 0..spec.n_scales() {
        if spec.periods[j] >= 24.0 {
            continue;
        }
        for t in 0..n {
            if !spec.in_cone(j, t) {
                continue;
            }
            if t < split {
                pre_cells += 1;
                pre_hits += usize::from(spec.signif[j][t]);
            } else {
                post_cells += 1;
                post_hits += usize::from(spec.signif[j][t]);
            }
        }
    }
    assert_eq!(pre_cells, 8_683);
    assert_eq!(post_cells, 11_091);
    let pre = pre_hits as f64 / pre_cells as f64;
    let post = post_hits as f64 / post_cells as f64;
    assert!((pre - 0.001_152).abs() < 1e-3, "pre-1995 fraction = {pre}");
    assert!((post - 0.093_409).abs() < 2e-3, "post-1995 fraction = {post}");
    assert!(
        post > 10.0 * pre,
        "short-period significance should concentrate after 1995 (pre {pre}, post {post})"
    );
}

#[test]
fn phases_stay_in_the_principal_interval() {
    let spec = spectrum();
    for row in &spec.phase {
        for &ph in row {
            assert!(ph > -std::f64::consts::PI && ph <= std::f64::consts::PI);
        }
    }
}
