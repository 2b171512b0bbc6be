//! Static SVG figures.
//!
//! Every renderer is a pure function from result blocks to an SVG string:
//! coordinates are emitted at fixed precision and nothing time- or
//! environment-dependent is written, so identical inputs yield identical
//! bytes.

use std::fmt::Write as _;

use ipseries::breaks::BreakpointSet;
use ipseries::descriptives::Decomposition;
use ipseries::wavelet::CrossWaveletSpectrum;
use ipseries::{MonthDate, MonthlySeries};

use crate::pipeline::EfpEntry;

/// Diverging blue-to-red palette for the cross-power heatmap.
const HEAT_PALETTE: [&str; 9] = [
    "#08306b", "#2166ac", "#4393c3", "#92c5de", "#d1e5f0", "#fddbc7", "#f4a582", "#d6604d",
    "#b2182b",
];

const FONT: &str = "font-family=\"Helvetica, Arial, sans-serif\"";

/// Axis-aligned drawing region.
#[derive(Debug, Clone, Copy)]
struct Frame {
    x: f64,
    y: f64,
    w: f64,
    h: f64,
}

impl Frame {
    /// Map a unit-interval pair into the frame (origin top-left; `v` grows
    /// upward on screen).
    fn at(&self, u: f64, v: f64) -> (f64, f64) {
        (self.x + u * self.w, self.y + (1.0 - v) * self.h)
    }
}

fn svg_open(out: &mut String, width: f64, height: f64, title: &str) {
    let _ = write!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{width:.0}\" height=\"{height:.0}\" \
         viewBox=\"0 0 {width:.0} {height:.0}\">\n<rect width=\"{width:.0}\" height=\"{height:.0}\" \
         fill=\"white\"/>\n<title>{title}</title>\n"
    );
}

fn text(out: &mut String, x: f64, y: f64, size: f64, anchor: &str, fill: &str, body: &str) {
    let _ = write!(
        out,
        "<text x=\"{x:.2}\" y=\"{y:.2}\" font-size=\"{size:.0}\" text-anchor=\"{anchor}\" \
         fill=\"{fill}\" {FONT}>{body}</text>\n"
    );
}

fn line(out: &mut String, x1: f64, y1: f64, x2: f64, y2: f64, stroke: &str, extra: &str) {
    let _ = write!(
        out,
        "<line x1=\"{x1:.2}\" y1=\"{y1:.2}\" x2=\"{x2:.2}\" y2=\"{y2:.2}\" stroke=\"{stroke}\" \
         {extra}/>\n"
    );
}

fn frame_border(out: &mut String, f: Frame) {
    let _ = write!(
        out,
        "<rect x=\"{:.2}\" y=\"{:.2}\" width=\"{:.2}\" height=\"{:.2}\" fill=\"none\" \
         stroke=\"#333333\" stroke-width=\"1\"/>\n",
        f.x, f.y, f.w, f.h
    );
}

/// Vertical span of the finite values, padded so lines keep clear of the
/// frame; degenerate spans get a unit of headroom.
fn padded_range(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for v in values {
        lo = lo.min(v);
        hi = hi.max(v);
    }
    if !lo.is_finite() || !hi.is_finite() {
        return (0.0, 1.0);
    }
    let pad = if hi > lo { 0.05 * (hi - lo) } else { 0.5 };
    (lo - pad, hi + pad)
}

/// Polyline through `(index, value)` points, split into runs at `None`.
fn gapped_polyline(
    out: &mut String,
    f: Frame,
    values: &[Option<f64>],
    (lo, hi): (f64, f64),
    stroke: &str,
) {
    let n = values.len();
    if n == 0 || hi <= lo {
        return;
    }
    let mut points = String::new();
    let mut run = 0usize;
    let flush = |points: &mut String, run: &mut usize, out: &mut String| {
        if *run >= 2 {
            let _ = write!(
                out,
                "<polyline points=\"{}\" fill=\"none\" stroke=\"{stroke}\" stroke-width=\"1\"/>\n",
                points.trim_end()
            );
        }
        points.clear();
        *run = 0;
    };
    for (i, v) in values.iter().enumerate() {
        match v {
            Some(v) => {
                let u = if n > 1 { i as f64 / (n - 1) as f64 } else { 0.5 };
                let (x, y) = f.at(u, (v - lo) / (hi - lo));
                let _ = write!(points, "{x:.2},{y:.2} ");
                run += 1;
            }
            None => flush(&mut points, &mut run, out),
        }
    }
    flush(&mut points, &mut run, out);
}

/// Tick positions at January of every fifth calendar year.
fn year_ticks(start: MonthDate, n: usize) -> Vec<(usize, i32)> {
    (0..n)
        .filter_map(|i| {
            let d = start.add_months(i as i32);
            (d.month == 1 && d.year % 5 == 0).then_some((i, d.year))
        })
        .collect()
}

fn x_axis_years(out: &mut String, f: Frame, start: MonthDate, n: usize) {
    for (i, year) in year_ticks(start, n) {
        let u = if n > 1 { i as f64 / (n - 1) as f64 } else { 0.5 };
        let (x, y) = f.at(u, 0.0);
        line(out, x, y, x, y + 4.0, "#333333", "stroke-width=\"1\"");
        text(out, x, y + 16.0, 10.0, "middle", "#333333", &year.to_string());
    }
}

fn y_axis_ticks(out: &mut String, f: Frame, (lo, hi): (f64, f64)) {
    // Three round-ish labels: bottom, middle, top of the padded range.
    for frac in [0.0, 0.5, 1.0] {
        let v = lo + frac * (hi - lo);
        let (x, y) = f.at(0.0, frac);
        line(out, x - 4.0, y, x, y, "#333333", "stroke-width=\"1\"");
        text(out, x - 6.0, y + 3.0, 9.0, "end", "#333333", &format!("{v:.0}"));
    }
}

/// Four stacked panels: observed, trend, seasonal, remainder.
pub fn decomposition_figure(
    caption: &str,
    series: &MonthlySeries,
    decomp: &Decomposition,
) -> String {
    let (width, height) = (900.0, 720.0);
    let (left, right, top, gap, bottom) = (70.0, 20.0, 40.0, 14.0, 50.0);
    let panel_h = (height - top - bottom - 3.0 * gap) / 4.0;
    let n = series.len();

    let mut out = String::new();
    svg_open(&mut out, width, height, caption);
    text(&mut out, width / 2.0, 22.0, 14.0, "middle", "#111111", caption);

    let observed: Vec<Option<f64>> = series.values.iter().map(|&v| Some(v)).collect();
    let seasonal: Vec<Option<f64>> = decomp.seasonal.iter().map(|&v| Some(v)).collect();
    let panels: [(&str, &Vec<Option<f64>>); 4] = [
        ("Observed", &observed),
        ("Trend", &decomp.trend),
        ("Seasonal", &seasonal),
        ("Random", &decomp.remainder),
    ];

    for (p, (label, values)) in panels.into_iter().enumerate() {
        let f = Frame {
            x: left,
            y: top + p as f64 * (panel_h + gap),
            w: width - left - right,
            h: panel_h,
        };
        let range = padded_range(values.iter().filter_map(|v| *v));
        frame_border(&mut out, f);
        y_axis_ticks(&mut out, f, range);
        if range.0 < 0.0 && range.1 > 0.0 {
            let v = (0.0 - range.0) / (range.1 - range.0);
            let (x1, y) = f.at(0.0, v);
            let (x2, _) = f.at(1.0, v);
            line(&mut out, x1, y, x2, y, "#bbbbbb", "stroke-width=\"1\" stroke-dasharray=\"3,3\"");
        }
        gapped_polyline(&mut out, f, values, range, "black");
        text(&mut out, left - 56.0, f.y + 12.0, 10.0, "start", "#555555", label);
        if p == 3 {
            x_axis_years(&mut out, f, series.start, n);
        }
    }
    out.push_str("</svg>\n");
    out
}

/// Trace the boundary of every connected true-region of `mask` as closed
/// vertex loops. `mask[row][col]`; vertices are `(col, row)` lattice points
/// with cell `(r, c)` spanning vertices `(c..=c+1, r..=r+1)`. Each boundary
/// edge appears in exactly one loop.
fn contour_paths(mask: &[Vec<bool>]) -> Vec<Vec<(usize, usize)>> {
    use std::collections::BTreeMap;
    let rows = mask.len();
    let cols = mask.first().map(|r| r.len()).unwrap_or(0);
    let at = |r: i64, c: i64| -> bool {
        r >= 0 && c >= 0 && (r as usize) < rows && (c as usize) < cols && mask[r as usize][c as usize]
    };
    // Directed edges keyed by start vertex; BTreeMap gives deterministic
    // traversal order.
    let mut edges: BTreeMap<(usize, usize), Vec<(usize, usize)>> = BTreeMap::new();
    let mut push = |from: (usize, usize), to: (usize, usize)| {
        edges.entry(from).or_default().push(to);
    };
    for r in 0..rows {
        for c in 0..cols {
            if !mask[r][c] {
                continue;
            }
            let (ri, ci) = (r as i64, c as i64);
            if !at(ri - 1, ci) {
                push((c, r), (c + 1, r));
            }
            if !at(ri + 1, ci) {
                push((c + 1, r + 1), (c, r + 1));
            }
            if !at(ri, ci - 1) {
                push((c, r + 1), (c, r));
            }
            if !at(ri, ci + 1) {
                push((c + 1, r), (c + 1, r + 1));
            }
        }
    }
    for targets in edges.values_mut() {
        targets.sort();
    }
    let mut loops = Vec::new();
    while let Some((&start, _)) = edges.iter().next() {
        let mut path = vec![start];
        let mut cur = start;
        loop {
            let targets = edges.get_mut(&cur).expect("boundary edges pair up");
            let next = targets.remove(0);
            if targets.is_empty() {
                edges.remove(&cur);
            }
            if next == start {
                break;
            }
            path.push(next);
            cur = next;
        }
        loops.push(path);
    }
    loops
}

/// Collapse collinear runs so contour paths stay compact.
fn simplify_loop(path: &[(usize, usize)]) -> Vec<(usize, usize)> {
    if path.len() < 3 {
        return path.to_vec();
    }
    let mut keep = Vec::with_capacity(path.len());
    let m = path.len();
    for i in 0..m {
        let prev = path[(i + m - 1) % m];
        let here = path[i];
        let next = path[(i + 1) % m];
        let d1 = (here.0 as i64 - prev.0 as i64, here.1 as i64 - prev.1 as i64);
        let d2 = (next.0 as i64 - here.0 as i64, next.1 as i64 - here.1 as i64);
        if d1 != d2 {
            keep.push(here);
        }
    }
    if keep.is_empty() {
        vec![path[0]]
    } else {
        keep
    }
}

/// Cross-wavelet heatmap with significance contours and the cone of
/// influence.
pub fn wavelet_figure(
    caption: &str,
    start: MonthDate,
    spectrum: &CrossWaveletSpectrum,
) -> String {
    let (width, height) = (940.0, 560.0);
    let f = Frame { x: 70.0, y: 46.0, w: width - 70.0 - 30.0, h: height - 46.0 - 56.0 };
    let n_scales = spectrum.n_scales();
    let n = spectrum.n_times();
    let mut out = String::new();
    svg_open(&mut out, width, height, caption);
    text(&mut out, width / 2.0, 24.0, 14.0, "middle", "#111111", caption);
    if n_scales == 0 || n == 0 {
        out.push_str("</svg>\n");
        return out;
    }

    // Log2-period axis: rows are uniform because scales are a dyadic
    // geometric ladder. Short periods sit at the top.
    let cell_w = f.w / n as f64;
    let cell_h = f.h / n_scales as f64;
    let dj = if n_scales > 1 {
        (spectrum.periods[n_scales - 1] / spectrum.periods[0]).log2() / (n_scales - 1) as f64
    } else {
        1.0
    };
    let v_min = spectrum.periods[0].log2() - dj / 2.0;
    let v_max = spectrum.periods[n_scales - 1].log2() + dj / 2.0;
    let y_of_log2 = |v: f64| -> f64 { f.y + (v - v_min) / (v_max - v_min) * f.h };

    // Color scale: log cross-power clamped to its 5th..95th percentile span.
    let mut logs: Vec<f64> = spectrum
        .power
        .iter()
        .flatten()
        .map(|&p| p.max(f64::MIN_POSITIVE).log2())
        .collect();
    logs.sort_by(|a, b| a.partial_cmp(b).expect("finite log powers"));
    let lo = logs[(logs.len() - 1) * 5 / 100];
    let hi = logs[(logs.len() - 1) * 95 / 100];
    let span = (hi - lo).max(f64::EPSILON);
    let shade = |p: f64| -> &'static str {
        let t = ((p.max(f64::MIN_POSITIVE).log2() - lo) / span).clamp(0.0, 1.0);
        let idx = ((t * HEAT_PALETTE.len() as f64) as usize).min(HEAT_PALETTE.len() - 1);
        HEAT_PALETTE[idx]
    };

    // Heatmap as per-row runs of equal color.
    for (j, row) in spectrum.power.iter().enumerate() {
        let y = f.y + j as f64 * cell_h;
        let mut t = 0usize;
        while t < n {
            let color = shade(row[t]);
            let mut t2 = t + 1;
            while t2 < n && shade(row[t2]) == color {
                t2 += 1;
            }
            let _ = write!(
                out,
                "<rect x=\"{:.2}\" y=\"{:.2}\" width=\"{:.2}\" height=\"{:.2}\" fill=\"{}\"/>\n",
                f.x + t as f64 * cell_w,
                y,
                (t2 - t) as f64 * cell_w,
                cell_h,
                color
            );
            t = t2;
        }
    }

    // Significance contours: closed paths around each connected region.
    for path in contour_paths(&spectrum.signif) {
        let path = simplify_loop(&path);
        let mut d = String::new();
        for (k, (c, r)) in path.iter().enumerate() {
            let x = f.x + *c as f64 * cell_w;
            let y = f.y + *r as f64 * cell_h;
            let _ = write!(d, "{}{x:.2},{y:.2} ", if k == 0 { "M" } else { "L" });
        }
        let _ = write!(
            out,
            "<path class=\"signif-contour\" d=\"{}Z\" fill=\"none\" stroke=\"black\" \
             stroke-width=\"1.5\"/>\n",
            d
        );
    }

    // Cone of influence: wash out the unreliable region below the cone and
    // mark the cone itself with a dashed line.
    let mut cone = String::new();
    let mut dash = String::new();
    for (t, &coi) in spectrum.coi.iter().enumerate() {
        let x = f.x + (t as f64 + 0.5) * cell_w;
        let y = y_of_log2(coi.max(f64::MIN_POSITIVE).log2()).clamp(f.y, f.y + f.h);
        let _ = write!(cone, "{x:.2},{y:.2} ");
        let _ = write!(dash, "{x:.2},{y:.2} ");
    }
    let _ = write!(
        out,
        "<polygon points=\"{}{:.2},{:.2} {:.2},{:.2}\" fill=\"white\" fill-opacity=\"0.45\" \
         stroke=\"none\"/>\n",
        cone,
        f.x + f.w,
        f.y + f.h,
        f.x,
        f.y + f.h
    );
    let _ = write!(
        out,
        "<polyline class=\"coi\" points=\"{}\" fill=\"none\" stroke=\"black\" stroke-width=\"1\" \
         stroke-dasharray=\"5,4\"/>\n",
        dash.trim_end()
    );

    frame_border(&mut out, f);
    // Period ticks on a dyadic ladder.
    for p in [4.0f64, 8.0, 16.0, 32.0, 64.0, 128.0, 256.0] {
        let v = p.log2();
        if v < v_min || v > v_max {
            continue;
        }
        let y = y_of_log2(v);
        line(&mut out, f.x - 4.0, y, f.x, y, "#333333", "stroke-width=\"1\"");
        text(&mut out, f.x - 6.0, y + 3.0, 9.0, "end", "#333333", &format!("{p:.0}"));
    }
    text(&mut out, 16.0, f.y + f.h / 2.0, 11.0, "middle", "#333333", "Period (months)");
    for (i, year) in year_ticks(start, n) {
        let x = f.x + (i as f64 + 0.5) * cell_w;
        line(&mut out, x, f.y + f.h, x, f.y + f.h + 4.0, "#333333", "stroke-width=\"1\"");
        text(&mut out, x, f.y + f.h + 16.0, 10.0, "middle", "#333333", &year.to_string());
    }
    out.push_str("</svg>\n");
    out
}

/// 2x2 grid of fluctuation processes with their crossing boundaries.
pub fn efp_figure(caption: &str, entries: &[EfpEntry]) -> String {
    let (width, height) = (900.0, 640.0);
    let (left, hgap, top, vgap, bottom, right) = (60.0, 50.0, 50.0, 50.0, 30.0, 20.0);
    let panel_w = (width - left - right - hgap) / 2.0;
    let panel_h = (height - top - bottom - vgap) / 2.0;
    let mut out = String::new();
    svg_open(&mut out, width, height, caption);
    text(&mut out, width / 2.0, 24.0, 14.0, "middle", "#111111", caption);

    for (p, entry) in entries.iter().take(4).enumerate() {
        let f = Frame {
            x: left + (p % 2) as f64 * (panel_w + hgap),
            y: top + (p / 2) as f64 * (panel_h + vgap),
            w: panel_w,
            h: panel_h,
        };
        let grid = entry.process.grid();
        let path = &entry.process.path;
        let boundary = entry
            .process
            .boundary(entry.sctest.alpha)
            .unwrap_or_else(|_| vec![0.0; path.len()]);
        let extent = path
            .iter()
            .chain(&boundary)
            .fold(1.0f64, |a, v| a.max(v.abs()))
            * 1.1;
        let range = (-extent, extent);
        let to_v = |y: f64| (y - range.0) / (range.1 - range.0);

        frame_border(&mut out, f);
        let (zx1, zy) = f.at(0.0, to_v(0.0));
        let (zx2, _) = f.at(1.0, to_v(0.0));
        line(&mut out, zx1, zy, zx2, zy, "#bbbbbb", "stroke-width=\"1\" stroke-dasharray=\"3,3\"");

        let poly = |out: &mut String, ys: &dyn Fn(usize) -> f64, stroke: &str| {
            let mut pts = String::new();
            for (i, &u) in grid.iter().enumerate() {
                let (x, y) = f.at(u, to_v(ys(i)));
                let _ = write!(pts, "{x:.2},{y:.2} ");
            }
            let _ = write!(
                out,
                "<polyline points=\"{}\" fill=\"none\" stroke=\"{stroke}\" stroke-width=\"1.2\"/>\n",
                pts.trim_end()
            );
        };
        poly(&mut out, &|i| boundary[i], "red");
        poly(&mut out, &|i| -boundary[i], "red");
        poly(&mut out, &|i| path[i], "black");

        text(
            &mut out,
            f.x + f.w / 2.0,
            f.y - 8.0,
            11.0,
            "middle",
            "#111111",
            entry.process.kind.label(),
        );
        for frac in [0.0, 0.5, 1.0] {
            let v = range.0 + frac * (range.1 - range.0);
            let (x, y) = f.at(0.0, frac);
            line(&mut out, x - 4.0, y, x, y, "#333333", "stroke-width=\"1\"");
            text(&mut out, x - 6.0, y + 3.0, 9.0, "end", "#333333", &format!("{v:.1}"));
        }
    }
    out.push_str("</svg>\n");
    out
}

/// Both series with vertical break lines and confidence-interval whiskers.
pub fn breaks_figure(
    caption: &str,
    tm: &MonthlySeries,
    pat: &MonthlySeries,
    tm_breaks: &BreakpointSet,
    pat_breaks: &BreakpointSet,
) -> String {
    let (width, height) = (940.0, 480.0);
    let f = Frame { x: 70.0, y: 46.0, w: width - 70.0 - 30.0, h: height - 46.0 - 56.0 };
    let n = tm.len().max(pat.len());
    let mut out = String::new();
    svg_open(&mut out, width, height, caption);
    text(&mut out, width / 2.0, 24.0, 14.0, "middle", "#111111", caption);

    let range = padded_range(tm.values.iter().chain(&pat.values).copied());
    frame_border(&mut out, f);
    y_axis_ticks(&mut out, f, range);
    x_axis_years(&mut out, f, tm.start, n);

    let u_of_date = |series: &MonthlySeries, d: MonthDate| -> Option<f64> {
        let off = series.start.months_until(d);
        (off >= 0 && (off as usize) < n)
            .then(|| if n > 1 { off as f64 / (n - 1) as f64 } else { 0.5 })
    };

    // Break markers beneath the data: dashed verticals plus CI whiskers in
    // two bands so the series' intervals never overprint each other.
    for (set, series, color, band) in [
        (tm_breaks, tm, "black", 14.0),
        (pat_breaks, pat, "red", 28.0),
    ] {
        for bp in &set.breaks {
            if let Some(u) = u_of_date(series, bp.date) {
                let (x, y1) = f.at(u, 1.0);
                let (_, y2) = f.at(u, 0.0);
                line(&mut out, x, y1, x, y2, color, "stroke-width=\"1\" stroke-dasharray=\"4,4\"");
            }
            let y = f.y + f.h - band;
            if let (Some(ul), Some(uh)) = (u_of_date(series, bp.ci_low), u_of_date(series, bp.ci_high))
            {
                let (x1, _) = f.at(ul, 0.0);
                let (x2, _) = f.at(uh, 0.0);
                let caps = "stroke-width=\"1.4\"";
                line(&mut out, x1, y, x2, y, color, caps);
                line(&mut out, x1, y - 3.0, x1, y + 3.0, color, caps);
                line(&mut out, x2, y - 3.0, x2, y + 3.0, color, caps);
            }
        }
    }

    let draw = |out: &mut String, series: &MonthlySeries, stroke: &str| {
        let values: Vec<Option<f64>> = series.values.iter().map(|&v| Some(v)).collect();
        gapped_polyline(out, f, &values, range, stroke);
    };
    draw(&mut out, tm, "black");
    draw(&mut out, pat, "red");

    text(&mut out, f.x + 8.0, f.y + 14.0, 10.0, "start", "black", "Trademarks");
    text(&mut out, f.x + 8.0, f.y + 28.0, 10.0, "start", "red", "Patents");
    out.push_str("</svg>\n");
    out
}
