//! `ipseries` — bivariate monthly intellectual-property series analysis.
//!
//! `analyze` runs the full pipeline and writes tables, figures, and a JSON
//! report; the per-stage subcommands print their stage's results as JSON
//! for piecewise inspection and golden testing.

use std::io::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use ipseries::breaks::{efp_test, EfpKind, MOSUM_TABLE_BANDWIDTH};
use ipseries::descriptives::{rank_correlation, summary_stats, RankMethod};
use ipseries::integration::{integration_order, johansen_trace, phillips_ouliaris_pz};
use ipseries::series::slice_segment;
use ipseries::wavelet::{cross_wavelet, WaveletParams};

use ipseries_cli::pipeline::{
    self, cleaned_pair, run_pipeline, segment_spans, CliError, Format, PipelineConfig,
    PipelineReport, SpanCointegration, SpanIntegration, StageStatus,
};
use ipseries_cli::{svg, tables};

#[derive(Parser)]
#[command(
    name = "ipseries",
    version,
    about = "Structural-break, cointegration, and cross-wavelet analysis of monthly \
             trademark-filing and patent-application counts"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every stage and write tables, figures, and report.json.
    Analyze(AnalyzeArgs),
    /// Descriptive statistics, correlations, and outlier flags as JSON.
    Stats(InputArgs),
    /// Fluctuation tests, dated breaks, and segments as JSON.
    Breaks(BreaksArgs),
    /// Johansen and Phillips-Ouliaris tests per span as JSON.
    Coint(CointArgs),
    /// Cross-wavelet spectrum summary as JSON.
    Wavelet(InputArgs),
    /// Differencing orders per span as JSON.
    Ndiffs(NdiffsArgs),
}

#[derive(Args)]
struct InputArgs {
    /// Input CSV (Date, trademark count, patent count).
    #[arg(long)]
    input: PathBuf,
    /// Keep only the first N rows.
    #[arg(long)]
    truncate: Option<usize>,
    /// Robust-z threshold for outlier repair.
    #[arg(long, default_value_t = 6.0)]
    outlier_threshold: f64,
}

#[derive(Args)]
struct BreaksArgs {
    #[command(flatten)]
    input: InputArgs,
    /// Fluctuation/dating bandwidth as a fraction of the sample.
    #[arg(long, default_value_t = 0.15)]
    h: f64,
    /// Significance level for the stability tests.
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
}

#[derive(Args)]
struct NdiffsArgs {
    #[command(flatten)]
    input: InputArgs,
    /// Bandwidth used to derive the segment spans.
    #[arg(long, default_value_t = 0.15)]
    h: f64,
}

#[derive(Args)]
struct CointArgs {
    #[command(flatten)]
    input: InputArgs,
    /// Bandwidth used to derive the segment spans.
    #[arg(long, default_value_t = 0.15)]
    h: f64,
    /// Johansen VAR lag order.
    #[arg(long, default_value_t = 2)]
    lags: usize,
}

#[derive(Args)]
struct AnalyzeArgs {
    #[command(flatten)]
    input: InputArgs,
    /// Output directory (created if absent).
    #[arg(long)]
    out: PathBuf,
    /// Comma-separated subset of json,md,csv,svg.
    #[arg(long, default_value = "json,md,csv,svg")]
    formats: String,
    /// Significance level for stability tests and the wavelet mask.
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    /// Fluctuation/dating bandwidth as a fraction of the sample.
    #[arg(long, default_value_t = 0.15)]
    h: f64,
    /// Johansen VAR lag order.
    #[arg(long, default_value_t = 2)]
    lags: usize,
}

impl InputArgs {
    fn config(&self) -> PipelineConfig {
        let mut config = PipelineConfig::new(self.input.clone(), PathBuf::new());
        config.truncate_to = self.truncate;
        config.outlier_threshold = self.outlier_threshold;
        config
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Analyze(args) => cmd_analyze(&args),
        Command::Stats(args) => cmd_stats(&args),
        Command::Breaks(args) => cmd_breaks(&args),
        Command::Coint(args) => cmd_coint(&args),
        Command::Wavelet(args) => cmd_wavelet(&args),
        Command::Ndiffs(args) => cmd_ndiffs(&args),
    };
    match outcome {
        Ok(code) => code,
        Err(err) => {
            let code = match &err {
                CliError::Usage(_) => 2u8,
                CliError::Stage(_) => 1u8,
            };
            eprintln!("ipseries: error: {err}");
            ExitCode::from(code)
        }
    }
}

// --- analyze ---------------------------------------------------------------

/// True unless the no-color environment variable is set (any value).
fn color_enabled() -> bool {
    std::env::var_os("IPSERIES_NO_COLOR").is_none()
}

fn paint(code: &str, body: &str, on: bool) -> String {
    if on {
        format!("\x1b[{code}m{body}\x1b[0m")
    } else {
        body.to_string()
    }
}

fn print_stage_summary(report: &PipelineReport) {
    let on = color_enabled();
    let mut err = std::io::stderr().lock();
    for s in &report.stages {
        let mark = match s.status {
            StageStatus::Ok => paint("32", "ok     ", on),
            StageStatus::Skipped => paint("33", "skipped", on),
            StageStatus::Failed => paint("31", "FAILED ", on),
        };
        let _ = writeln!(err, "{mark} {:<18} {}", s.stage, s.detail);
    }
}

fn cmd_analyze(args: &AnalyzeArgs) -> Result<ExitCode, CliError> {
    let mut formats = Vec::new();
    for token in args.formats.split(',') {
        let f = Format::parse(token).map_err(CliError::Usage)?;
        if !formats.contains(&f) {
            formats.push(f);
        }
    }

    let mut config = args.input.config();
    config.out_dir = args.out.clone();
    config.formats = formats;
    config.alpha = args.alpha;
    config.efp_bandwidth = args.h;
    config.johansen_lags = args.lags;
    config.validate().map_err(CliError::Usage)?;

    let report = run_pipeline(&config).map_err(|e| CliError::Usage(e.0))?;

    std::fs::create_dir_all(&config.out_dir)
        .map_err(|e| CliError::Stage(format!("{}: {e}", config.out_dir.display())))?;
    emit_outputs(&config, &report)?;
    print_stage_summary(&report);

    Ok(if report.succeeded() { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

fn emit_outputs(config: &PipelineConfig, report: &PipelineReport) -> Result<(), CliError> {
    let write = |name: &str, body: &str| -> Result<(), CliError> {
        let path = config.out_dir.join(name);
        std::fs::write(&path, body)
            .map_err(|e| CliError::Stage(format!("{}: {e}", path.display())))
    };

    for format in &config.formats {
        match format {
            Format::Json => {
                let body = serde_json::to_string_pretty(report)
                    .map_err(|e| CliError::Stage(format!("report serialization: {e}")))?;
                write("report.json", &(body + "\n"))?;
            }
            Format::Md => {
                for t in report.tables.present() {
                    write(&format!("{}.md", t.name), &t.to_markdown())?;
                }
            }
            Format::Csv => {
                for t in report.tables.present() {
                    write(&format!("{}.csv", t.name), &t.to_csv())?;
                }
            }
            Format::Svg => {
                for (name, body) in render_figures(report) {
                    write(name, &body)?;
                }
            }
        }
    }
    Ok(())
}

/// The figures whose inputs materialized, as `(file name, svg)` pairs.
fn render_figures(report: &PipelineReport) -> Vec<(&'static str, String)> {
    let mut figures = Vec::new();
    let results = &report.results;
    let Some(cleaned) = &results.cleaned else {
        return figures;
    };
    if let Some(d) = &results.decomposition {
        figures.push((
            "fig1.svg",
            svg::decomposition_figure(
                "Decomposition of monthly trademark filings",
                &cleaned.trademarks,
                &d.trademarks,
            ),
        ));
        figures.push((
            "fig2.svg",
            svg::decomposition_figure(
                "Decomposition of monthly patent applications",
                &cleaned.patents,
                &d.patents,
            ),
        ));
    }
    if let Some(spec) = &results.cross_wavelet {
        figures.push((
            "fig3.svg",
            svg::wavelet_figure(
                "Cross-wavelet power: trademarks and patents",
                cleaned.trademarks.start,
                spec,
            ),
        ));
    }
    if let Some(efp) = &results.efp {
        figures.push((
            "fig4.svg",
            svg::efp_figure("Fluctuation tests: trademarks", &efp.trademarks),
        ));
    }
    if let Some(breaks) = &results.breaks {
        figures.push((
            "fig5.svg",
            svg::breaks_figure(
                "Structural breaks with confidence intervals",
                &cleaned.trademarks,
                &cleaned.patents,
                &breaks.trademarks,
                &breaks.patents,
            ),
        ));
    }
    figures
}

// --- per-stage subcommands ---------------------------------------------------

fn print_json<T: Serialize>(value: &T) -> Result<ExitCode, CliError> {
    let body = serde_json::to_string_pretty(value)
        .map_err(|e| CliError::Stage(format!("serialization: {e}")))?;
    println!("{body}");
    Ok(ExitCode::SUCCESS)
}

fn cmd_stats(args: &InputArgs) -> Result<ExitCode, CliError> {
    let config = args.config();
    let (tm, pat, outliers) = cleaned_pair(&config)?;
    let stage = |e: ipseries::Error| CliError::Stage(e.to_string());

    #[derive(Serialize)]
    struct StatsOut {
        descriptives: pipeline::PerSeries<ipseries::descriptives::SummaryStats>,
        correlations: pipeline::Correlations,
        outliers: pipeline::OutlierBlock,
        table1: Option<tables::Table>,
    }

    let mut results = pipeline::ReportResults::default();
    results.descriptives = Some(pipeline::PerSeries {
        trademarks: summary_stats(&tm).map_err(stage)?,
        patents: summary_stats(&pat).map_err(stage)?,
    });
    let out = StatsOut {
        correlations: pipeline::Correlations {
            spearman: rank_correlation(&tm, &pat, RankMethod::Spearman).map_err(stage)?,
            kendall: rank_correlation(&tm, &pat, RankMethod::Kendall).map_err(stage)?,
        },
        table1: tables::build_tables(&results).table1,
        descriptives: results.descriptives.take().expect("just set"),
        outliers,
    };
    print_json(&out)
}

fn cmd_breaks(args: &BreaksArgs) -> Result<ExitCode, CliError> {
    if !(args.alpha > 0.0 && args.alpha < 0.5) {
        return Err(CliError::Usage(format!("--alpha must lie in (0, 0.5), got {}", args.alpha)));
    }
    if !(args.h > 0.0 && args.h < 1.0) {
        return Err(CliError::Usage(format!("--h must lie in (0, 1), got {}", args.h)));
    }
    let config = args.input.config();
    let (tm, pat, _) = cleaned_pair(&config)?;
    if tm.len() < pipeline::MIN_BREAK_LEN {
        return Err(CliError::Stage(format!(
            "series too short: break dating needs at least {} observations, got {}",
            pipeline::MIN_BREAK_LEN,
            tm.len()
        )));
    }
    let stage = |e: ipseries::Error| CliError::Stage(e.to_string());

    let battery = |series: &ipseries::MonthlySeries| -> Result<Vec<pipeline::EfpEntry>, CliError> {
        EfpKind::ALL
            .iter()
            .map(|&kind| {
                let (process, sctest) = efp_test(series, kind, args.h, args.alpha).map_err(stage)?;
                let approx = matches!(kind, EfpKind::OlsMosum | EfpKind::RecMosum)
                    && (args.h - MOSUM_TABLE_BANDWIDTH).abs() > 1e-12;
                Ok(pipeline::EfpEntry { process, sctest, p_value_approximate: approx })
            })
            .collect()
    };

    let mut results = pipeline::ReportResults::default();
    results.efp = Some(pipeline::PerSeries {
        trademarks: battery(&tm)?,
        patents: battery(&pat)?,
    });

    let max_breaks = (1.0 / args.h).floor() as usize - 1;
    let date = |s: &ipseries::MonthlySeries| -> Result<_, CliError> {
        let set = ipseries::breaks::date_breakpoints(s, args.h, max_breaks).map_err(stage)?;
        ipseries::breaks::breakpoint_confint(s, &set, 0.95).map_err(stage)
    };
    let tm_set = date(&tm)?;
    let pat_set = date(&pat)?;
    let end = tm
        .end()
        .ok_or_else(|| CliError::Stage("empty series after repair".into()))?;
    results.segments = Some(
        ipseries::breaks::derive_segments(&tm_set, &pat_set, tm.start, end).map_err(stage)?,
    );
    results.breaks = Some(pipeline::PerSeries { trademarks: tm_set, patents: pat_set });

    #[derive(Serialize)]
    struct BreaksOut {
        efp: pipeline::PerSeries<Vec<pipeline::EfpEntry>>,
        breaks: pipeline::PerSeries<ipseries::breaks::BreakpointSet>,
        segments: ipseries::breaks::SegmentSet,
        table2: Option<tables::Table>,
        table3: Option<tables::Table>,
        table4: Option<tables::Table>,
    }

    let t = tables::build_tables(&results);
    let out = BreaksOut {
        efp: results.efp.take().expect("just set"),
        breaks: results.breaks.take().expect("just set"),
        segments: results.segments.take().expect("just set"),
        table2: t.table2,
        table3: t.table3,
        table4: t.table4,
    };
    print_json(&out)
}

fn cmd_coint(args: &CointArgs) -> Result<ExitCode, CliError> {
    if !(args.h > 0.0 && args.h < 1.0) {
        return Err(CliError::Usage(format!("--h must lie in (0, 1), got {}", args.h)));
    }
    if args.lags < 2 {
        return Err(CliError::Usage(format!("--lags must be at least 2, got {}", args.lags)));
    }
    let config = args.input.config();
    let (tm, pat, _) = cleaned_pair(&config)?;
    let spans = segment_spans(&tm, &pat, args.h)?;
    let stage = |e: ipseries::Error| CliError::Stage(e.to_string());

    let mut entries = Vec::with_capacity(spans.len());
    for (label, seg) in &spans {
        let a = slice_segment(&tm, seg).map_err(stage)?;
        let b = slice_segment(&pat, seg).map_err(stage)?;
        let johansen = johansen_trace(&a, &b, args.lags);
        let pz = phillips_ouliaris_pz(&a, &b);
        entries.push(SpanCointegration {
            span: label.clone(),
            start: seg.start,
            end: seg.end,
            johansen_error: johansen.as_ref().err().map(|e| e.to_string()),
            johansen: johansen.ok(),
            pz_error: pz.as_ref().err().map(|e| e.to_string()),
            pz: pz.ok(),
        });
    }

    let mut results = pipeline::ReportResults::default();
    results.cointegration = Some(entries);

    #[derive(Serialize)]
    struct CointOut {
        cointegration: Vec<SpanCointegration>,
        table5: Option<tables::Table>,
    }
    let out = CointOut {
        table5: tables::build_tables(&results).table5,
        cointegration: results.cointegration.take().expect("just set"),
    };
    print_json(&out)
}

fn cmd_ndiffs(args: &NdiffsArgs) -> Result<ExitCode, CliError> {
    if !(args.h > 0.0 && args.h < 1.0) {
        return Err(CliError::Usage(format!("--h must lie in (0, 1), got {}", args.h)));
    }
    let config = args.input.config();
    let (tm, pat, _) = cleaned_pair(&config)?;
    let spans = segment_spans(&tm, &pat, args.h)?;
    let stage = |e: ipseries::Error| CliError::Stage(e.to_string());

    let mut rows = Vec::with_capacity(spans.len() * 2);
    for (label, seg) in &spans {
        let a = slice_segment(&tm, seg).map_err(stage)?;
        let b = slice_segment(&pat, seg).map_err(stage)?;
        for (name, series) in [("Trademarks", &a), ("Patents", &b)] {
            let orders = integration_order(series);
            rows.push(SpanIntegration {
                variable: name.to_string(),
                span: label.clone(),
                error: orders.as_ref().err().map(|e| e.to_string()),
                orders: orders.ok(),
            });
        }
    }

    let mut results = pipeline::ReportResults::default();
    results.integration_orders = Some(rows);

    #[derive(Serialize)]
    struct NdiffsOut {
        integration_orders: Vec<SpanIntegration>,
        table6: Option<tables::Table>,
    }
    let out = NdiffsOut {
        table6: tables::build_tables(&results).table6,
        integration_orders: results.integration_orders.take().expect("just set"),
    };
    print_json(&out)
}

fn cmd_wavelet(args: &InputArgs) -> Result<ExitCode, CliError> {
    let config = args.config();
    let (tm, pat, _) = cleaned_pair(&config)?;
    let stage = |e: ipseries::Error| CliError::Stage(e.to_string());
    let params = WaveletParams::for_length(tm.len()).map_err(stage)?;
    let spec = cross_wavelet(&tm, &pat, &params).map_err(stage)?;

    // Print a compact summary rather than the full matrices; the complete
    // spectrum lives in report.json from `analyze`.
    #[derive(Serialize)]
    struct Peak {
        scale_index: usize,
        time_index: usize,
        period: f64,
        power: f64,
    }
    #[derive(Serialize)]
    struct WaveletOut {
        n_scales: usize,
        n_times: usize,
        alpha: f64,
        ar1_trademarks: f64,
        ar1_patents: f64,
        periods: Vec<f64>,
        coi: Vec<f64>,
        total_power: f64,
        peak: Peak,
        significant_fraction_in_cone: f64,
    }

    let mut peak = Peak { scale_index: 0, time_index: 0, period: spec.periods[0], power: 0.0 };
    let mut total = 0.0;
    let (mut in_cone, mut signif) = (0usize, 0usize);
    for j in 0..spec.n_scales() {
        for t in 0..spec.n_times() {
            let p = spec.power[j][t];
            total += p;
            if p > peak.power {
                peak = Peak { scale_index: j, time_index: t, period: spec.periods[j], power: p };
            }
            if spec.in_cone(j, t) {
                in_cone += 1;
                if spec.signif[j][t] {
                    signif += 1;
                }
            }
        }
    }
    let out = WaveletOut {
        n_scales: spec.n_scales(),
        n_times: spec.n_times(),
        alpha: spec.alpha,
        ar1_trademarks: spec.ar1_x,
        ar1_patents: spec.ar1_y,
        periods: spec.periods.clone(),
        coi: spec.coi.clone(),
        total_power: total,
        peak,
        significant_fraction_in_cone: if in_cone > 0 {
            signif as f64 / in_cone as f64
        } else {
            0.0
        },
    };
    print_json(&out)
}
