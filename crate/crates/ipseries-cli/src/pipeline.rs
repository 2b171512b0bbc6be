//! Pipeline orchestration: run every analysis stage in order on one input
//! file, record per-stage status, and assemble the self-describing report.
//!
//! Every stage either succeeds (its block lands in [`ReportResults`]), fails
//! (its error is recorded and dependent stages are skipped), or is skipped
//! because a dependency is unavailable. The report always materializes; the
//! process exit code reflects whether every stage completed.

use std::path::PathBuf;

use serde::Serialize;
use sha2::{Digest, Sha256};

use ipseries::breaks::{
    breakpoint_confint, date_breakpoints, derive_segments, efp_test, BreakpointSet, EfpKind,
    FluctuationProcess, ScTestResult, SegmentSet, MOSUM_TABLE_BANDWIDTH,
};
use ipseries::descriptives::{
    decompose_additive, rank_correlation, summary_stats, Decomposition, RankMethod, SummaryStats,
};
use ipseries::integration::{
    integration_order, johansen_trace, phillips_ouliaris_pz, IntegrationOrder, JohansenResult,
    PoResult,
};
use ipseries::prep::{clean_series, OutlierReport};
use ipseries::series::{parse_csv, slice_segment, to_monthly_series, Column, Segment};
use ipseries::wavelet::{cross_wavelet, CrossWaveletSpectrum, WaveletParams};
use ipseries::{MonthDate, MonthlySeries};

/// Output formats the pipeline can materialize.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    /// `report.json` with every block and every table under stable keys.
    Json,
    /// `table1.md` … `table6.md`.
    Md,
    /// `table1.csv` … `table6.csv` (RFC 4180).
    Csv,
    /// `fig1.svg` … `fig5.svg`.
    Svg,
}

impl Format {
    /// All four formats, the default.
    pub const ALL: [Format; 4] = [Format::Json, Format::Md, Format::Csv, Format::Svg];

    /// Parse a single comma-separated token.
    pub fn parse(token: &str) -> Result<Format, String> {
        match token.trim() {
            "json" => Ok(Format::Json),
            "md" => Ok(Format::Md),
            "csv" => Ok(Format::Csv),
            "svg" => Ok(Format::Svg),
            other => Err(format!("unknown format {other:?} (expected json, md, csv, svg)")),
        }
    }
}

/// Validated pipeline configuration.
#[derive(Debug, Clone, Serialize)]
pub struct PipelineConfig {
    /// Input CSV path, echoed into provenance.
    pub input: PathBuf,
    /// Output directory for tables, figures, and the report.
    pub out_dir: PathBuf,
    /// Formats to materialize (always non-empty, deduplicated, stable order).
    pub formats: Vec<Format>,
    /// Keep the first N rows; `None` keeps min(472, rows).
    pub truncate_to: Option<usize>,
    /// Robust-z threshold of the outlier detector.
    pub outlier_threshold: f64,
    /// MOSUM bandwidth as a fraction of the sample.
    pub efp_bandwidth: f64,
    /// Significance level for fluctuation tests and the wavelet mask.
    pub alpha: f64,
    /// Johansen VAR lag order `K`.
    pub johansen_lags: usize,
}

impl PipelineConfig {
    /// Defaults matching the bundled dataset's published analysis.
    pub fn new(input: PathBuf, out_dir: PathBuf) -> Self {
        Self {
            input,
            out_dir,
            formats: Format::ALL.to_vec(),
            truncate_to: None,
            outlier_threshold: 6.0,
            efp_bandwidth: 0.15,
            alpha: 0.05,
            johansen_lags: 2,
        }
    }

    /// Range checks that are usage errors (exit code 2), not stage failures.
    pub fn validate(&self) -> Result<(), String> {
        if !(self.alpha > 0.0 && self.alpha < 0.5) {
            return Err(format!("--alpha must lie in (0, 0.5), got {}", self.alpha));
        }
        if !(self.efp_bandwidth > 0.0 && self.efp_bandwidth < 1.0) {
            return Err(format!("--h must lie in (0, 1), got {}", self.efp_bandwidth));
        }
        if !(self.outlier_threshold > 0.0) {
            return Err(format!(
                "--outlier-threshold must be positive, got {}",
                self.outlier_threshold
            ));
        }
        if self.johansen_lags < 2 {
            return Err(format!("--lags must be at least 2, got {}", self.johansen_lags));
        }
        if self.formats.is_empty() {
            return Err("--formats must name at least one format".into());
        }
        Ok(())
    }
}

/// Fewest observations the break-dating battery accepts: enough for the
/// 13-term decomposition to settle and for MOSUM windows to hold a
/// meaningful number of points.
pub const MIN_BREAK_LEN: usize = 96;

/// Default row budget when `--truncate` is not given.
pub const DEFAULT_TRUNCATE: usize = 472;

/// Per-stage outcome.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum StageStatus {
    /// Stage ran and its results are in the report.
    Ok,
    /// A dependency was unavailable; `detail` names it.
    Skipped,
    /// The stage itself errored; `detail` carries the error.
    Failed,
}

/// One entry of the stage ledger.
#[derive(Debug, Clone, Serialize)]
pub struct StageRecord {
    /// Stage name, in pipeline order.
    pub stage: &'static str,
    /// Outcome.
    pub status: StageStatus,
    /// Human-readable summary, skip reason, or error.
    pub detail: String,
}

/// Provenance block: everything needed to reproduce the run.
#[derive(Debug, Clone, Serialize)]
pub struct Provenance {
    /// Tool name.
    pub tool: &'static str,
    /// Crate version.
    pub version: &'static str,
    /// Input path as given.
    pub input_path: String,
    /// SHA-256 of the input bytes.
    pub input_sha256: String,
    /// Effective configuration (truncation resolved).
    pub config: ConfigEcho,
}

/// Echo of the effective configuration.
#[derive(Debug, Clone, Serialize)]
pub struct ConfigEcho {
    /// Rows kept after truncation.
    pub truncate_to: usize,
    /// Outlier detection threshold.
    pub outlier_threshold: f64,
    /// MOSUM bandwidth.
    pub efp_bandwidth: f64,
    /// Significance level.
    pub alpha: f64,
    /// Johansen lag order.
    pub johansen_lags: usize,
    /// Formats requested.
    pub formats: Vec<Format>,
}

/// Both series' versions of a block.
#[derive(Debug, Clone, Serialize)]
pub struct PerSeries<T> {
    /// Trademark-filings block.
    pub trademarks: T,
    /// Patent-applications block.
    pub patents: T,
}

/// Rank correlations of the cleaned pair.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Correlations {
    /// Spearman rho.
    pub spearman: f64,
    /// Kendall tau-b.
    pub kendall: f64,
}

/// Outlier stage block.
#[derive(Debug, Clone, Serialize)]
pub struct OutlierBlock {
    /// Threshold the detector ran at.
    pub threshold: f64,
    /// Flags per series.
    pub trademarks: OutlierReport,
    /// Flags per series.
    pub patents: OutlierReport,
}

/// One fluctuation test: the process path and its significance test.
#[derive(Debug, Clone, Serialize)]
pub struct EfpEntry {
    /// Path, bandwidth, and length.
    pub process: FluctuationProcess,
    /// Boundary-crossing test at the configured alpha.
    pub sctest: ScTestResult,
    /// True when the MOSUM p-value tables are an approximation because the
    /// configured bandwidth differs from the tabulated one.
    pub p_value_approximate: bool,
}

/// Cointegration results on one span.
#[derive(Debug, Clone, Serialize)]
pub struct SpanCointegration {
    /// `"full"` or the segment label `"1"`…`"6"`.
    pub span: String,
    /// First month of the span.
    pub start: MonthDate,
    /// Last month of the span.
    pub end: MonthDate,
    /// Johansen trace outcome, when the span supported it.
    pub johansen: Option<JohansenResult>,
    /// Error that prevented the Johansen run, if any.
    pub johansen_error: Option<String>,
    /// Phillips–Ouliaris outcome, when the span supported it.
    pub pz: Option<PoResult>,
    /// Error that prevented the Pz run, if any.
    pub pz_error: Option<String>,
}

/// Integration orders of one series on one span.
#[derive(Debug, Clone, Serialize)]
pub struct SpanIntegration {
    /// `"Trademarks"` or `"Patents"`.
    pub variable: String,
    /// `"full"` or the segment label.
    pub span: String,
    /// Orders per test plus consensus, when computable.
    pub orders: Option<IntegrationOrder>,
    /// Error that prevented the ladder, if any.
    pub error: Option<String>,
}

/// Every analysis block, each present once its stage has run.
#[derive(Debug, Clone, Serialize, Default)]
pub struct ReportResults {
    /// The outlier-repaired series every later stage consumes.
    pub cleaned: Option<PerSeries<MonthlySeries>>,
    /// Moments and quantiles of the cleaned series.
    pub descriptives: Option<PerSeries<SummaryStats>>,
    /// Rank correlations of the cleaned pair.
    pub correlations: Option<Correlations>,
    /// Outlier flags and the threshold.
    pub outliers: Option<OutlierBlock>,
    /// Additive decompositions of the cleaned series.
    pub decomposition: Option<PerSeries<Decomposition>>,
    /// Cross-wavelet spectrum of the cleaned pair.
    pub cross_wavelet: Option<CrossWaveletSpectrum>,
    /// Four fluctuation tests per series.
    pub efp: Option<PerSeries<Vec<EfpEntry>>>,
    /// Dated breaks with confidence intervals.
    pub breaks: Option<PerSeries<BreakpointSet>>,
    /// Stable segments between break clusters.
    pub segments: Option<SegmentSet>,
    /// Johansen + Pz on the full span and each segment.
    pub cointegration: Option<Vec<SpanCointegration>>,
    /// Differencing orders per series and span (the d-matrix).
    pub integration_orders: Option<Vec<SpanIntegration>>,
}

/// The complete pipeline output.
#[derive(Debug, Clone, Serialize)]
pub struct PipelineReport {
    /// Reproducibility block.
    pub provenance: Provenance,
    /// Stage ledger in execution order.
    pub stages: Vec<StageRecord>,
    /// Analysis blocks.
    pub results: ReportResults,
    /// Rendered tables under stable keys (same content as the md/csv files).
    pub tables: crate::tables::Tables,
}

impl PipelineReport {
    /// True when no stage failed (skipped stages do not fail the run).
    pub fn succeeded(&self) -> bool {
        self.stages.iter().all(|s| s.status != StageStatus::Failed)
    }

    /// The cleaned series pair, recomputed from the recorded config. Only
    /// available when the prep stages succeeded.
    pub fn stage(&self, name: &str) -> Option<&StageRecord> {
        self.stages.iter().find(|s| s.stage == name)
    }
}

/// A usage-level problem detected after reading the input (exit code 2).
#[derive(Debug)]
pub struct UsageError(pub String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

struct StageLedger {
    records: Vec<StageRecord>,
}

impl StageLedger {
    fn new() -> Self {
        Self { records: Vec::with_capacity(12) }
    }

    fn ok(&mut self, stage: &'static str, detail: impl Into<String>) {
        self.records.push(StageRecord { stage, status: StageStatus::Ok, detail: detail.into() });
    }

    fn failed(&mut self, stage: &'static str, detail: impl Into<String>) {
        self.records.push(StageRecord {
            stage,
            status: StageStatus::Failed,
            detail: detail.into(),
        });
    }

    fn skipped(&mut self, stage: &'static str, detail: impl Into<String>) {
        self.records.push(StageRecord {
            stage,
            status: StageStatus::Skipped,
            detail: detail.into(),
        });
    }
}

/// Last month of a series known to be non-empty at this point of the
/// pipeline (every stage that reaches here has at least one observation).
fn span_end(series: &MonthlySeries) -> MonthDate {
    series.end().expect("non-empty series")
}

/// Stage names in execution order; the report carries exactly these.
pub const STAGES: [&str; 12] = [
    "ingest",
    "truncate",
    "outlier_repair",
    "descriptives",
    "decomposition",
    "correlations",
    "cross_wavelet",
    "efp_tests",
    "break_dating",
    "segmentation",
    "cointegration",
    "integration_orders",
];

/// Run the full pipeline.
///
/// Every stage error is recorded in the report rather than propagated; the
/// only hard error is a usage-level contradiction (an explicit `--truncate`
/// exceeding the file's rows), which surfaces as [`UsageError`] before any
/// analysis runs.
pub fn run_pipeline(config: &PipelineConfig) -> Result<PipelineReport, UsageError> {
    let mut ledger = StageLedger::new();
    let mut results = ReportResults::default();

    // --- ingest -----------------------------------------------------------
    let raw_bytes = std::fs::read(&config.input);
    let (input_sha256, table) = match raw_bytes {
        Ok(bytes) => {
            let hash = format!("{:x}", Sha256::digest(&bytes));
            match std::str::from_utf8(&bytes)
                .map_err(|e| e.to_string())
                .and_then(|text| parse_csv(text).map_err(|e| e.to_string()))
            {
                Ok(table) => (hash, Some(table)),
                Err(err) => {
                    ledger.failed("ingest", format!("{}: {err}", config.input.display()));
                    (hash, None)
                }
            }
        }
        Err(err) => {
            ledger.failed("ingest", format!("{}: {err}", config.input.display()));
            (String::new(), None)
        }
    };

    let rows = table.as_ref().map(|t| t.rows.len()).unwrap_or(0);

    // Explicit truncation beyond the file is a usage error, not a stage
    // failure: the request itself is contradictory.
    if let (Some(want), Some(_)) = (config.truncate_to, table.as_ref()) {
        if want > rows {
            return Err(UsageError(format!(
                "--truncate {want} exceeds the {rows} rows in {}",
                config.input.display()
            )));
        }
    }

    let keep = config.truncate_to.unwrap_or_else(|| rows.min(DEFAULT_TRUNCATE));
    let provenance = Provenance {
        tool: "ipseries",
        version: env!("CARGO_PKG_VERSION"),
        input_path: config.input.display().to_string(),
        input_sha256,
        config: ConfigEcho {
            truncate_to: keep,
            outlier_threshold: config.outlier_threshold,
            efp_bandwidth: config.efp_bandwidth,
            alpha: config.alpha,
            johansen_lags: config.johansen_lags,
            formats: config.formats.clone(),
        },
    };

    let series_pair = match &table {
        Some(table) => {
            ledger.ok(
                "ingest",
                format!(
                    "{rows} rows, {}..{}",
                    table.rows.first().map(|r| r.date.ym()).unwrap_or_default(),
                    table.rows.last().map(|r| r.date.ym()).unwrap_or_default()
                ),
            );
            match (
                to_monthly_series(table, Column::Trademarks, keep),
                to_monthly_series(table, Column::Patents, keep),
            ) {
                (Ok(tm), Ok(pat)) => {
                    ledger.ok("truncate", format!("kept {keep} of {rows} rows"));
                    Some((tm, pat))
                }
                (Err(e), _) | (_, Err(e)) => {
                    ledger.failed("truncate", e.to_string());
                    None
                }
            }
        }
        None => {
            ledger.skipped("truncate", "requires ingest");
            None
        }
    };

    // --- outlier repair ----------------------------------------------------
    let cleaned = match &series_pair {
        Some((tm, pat)) => {
            match (
                clean_series(tm, config.outlier_threshold),
                clean_series(pat, config.outlier_threshold),
            ) {
                (Ok((tm_clean, tm_rep)), Ok((pat_clean, pat_rep))) => {
                    ledger.ok(
                        "outlier_repair",
                        format!(
                            "{} trademark and {} patent months repaired",
                            tm_rep.len(),
                            pat_rep.len()
                        ),
                    );
                    results.outliers = Some(OutlierBlock {
                        threshold: config.outlier_threshold,
                        trademarks: tm_rep,
                        patents: pat_rep,
                    });
                    Some((tm_clean, pat_clean))
                }
                // Seasonal scoring needs a minimum history; shorter inputs
                // pass through unrepaired rather than aborting the run.
                (Err(e @ ipseries::Error::TooShort { .. }), _)
                | (_, Err(e @ ipseries::Error::TooShort { .. })) => {
                    ledger.skipped(
                        "outlier_repair",
                        format!("{e}; series passed through unrepaired"),
                    );
                    Some((tm.clone(), pat.clone()))
                }
                (Err(e), _) | (_, Err(e)) => {
                    ledger.failed("outlier_repair", e.to_string());
                    None
                }
            }
        }
        None => {
            ledger.skipped("outlier_repair", "requires truncate");
            None
        }
    };

    if let Some((tm, pat)) = &cleaned {
        results.cleaned =
            Some(PerSeries { trademarks: tm.clone(), patents: pat.clone() });
    }
    let Some((tm, pat)) = cleaned else {
        for stage in &STAGES[3..] {
            ledger.skipped(stage, "requires outlier repair");
        }
        let tables = crate::tables::build_tables(&results);
        return Ok(PipelineReport { provenance, stages: ledger.records, results, tables });
    };
    let n = tm.len();

    // --- descriptives ------------------------------------------------------
    match (summary_stats(&tm), summary_stats(&pat)) {
        (Ok(a), Ok(b)) => {
            ledger.ok("descriptives", format!("moments and quantiles over {n} months"));
            results.descriptives = Some(PerSeries { trademarks: a, patents: b });
        }
        (Err(e), _) | (_, Err(e)) => ledger.failed("descriptives", e.to_string()),
    }

    // --- decomposition -----------------------------------------------------
    match (decompose_additive(&tm), decompose_additive(&pat)) {
        (Ok(a), Ok(b)) => {
            ledger.ok("decomposition", "classical additive, period 12");
            results.decomposition = Some(PerSeries { trademarks: a, patents: b });
        }
        (Err(e), _) | (_, Err(e)) => ledger.failed("decomposition", e.to_string()),
    }

    // --- correlations ------------------------------------------------------
    match (
        rank_correlation(&tm, &pat, RankMethod::Spearman),
        rank_correlation(&tm, &pat, RankMethod::Kendall),
    ) {
        (Ok(s), Ok(k)) => {
            ledger.ok("correlations", format!("spearman {s:.4}, kendall {k:.4}"));
            results.correlations = Some(Correlations { spearman: s, kendall: k });
        }
        (Err(e), _) | (_, Err(e)) => ledger.failed("correlations", e.to_string()),
    }

    // --- cross-wavelet -----------------------------------------------------
    match WaveletParams::for_length(n).and_then(|params| cross_wavelet(&tm, &pat, &params)) {
        Ok(spec) => {
            ledger.ok(
                "cross_wavelet",
                format!("{} scales x {} months", spec.n_scales(), spec.n_times()),
            );
            results.cross_wavelet = Some(spec);
        }
        Err(e) => ledger.failed("cross_wavelet", e.to_string()),
    }

    // --- the break battery requires a minimum length -----------------------
    let breaks_feasible = n >= MIN_BREAK_LEN;
    let too_short =
        format!("series too short: break dating needs at least {MIN_BREAK_LEN} observations, got {n}");

    // --- EFP tests ----------------------------------------------------------
    if breaks_feasible {
        let battery = |series: &MonthlySeries| -> Result<Vec<EfpEntry>, ipseries::Error> {
            EfpKind::ALL
                .iter()
                .map(|&kind| {
                    let (process, test) =
                        efp_test(series, kind, config.efp_bandwidth, config.alpha)?;
                    let approximate = matches!(kind, EfpKind::OlsMosum | EfpKind::RecMosum)
                        && (config.efp_bandwidth - MOSUM_TABLE_BANDWIDTH).abs() > 1e-12;
                    Ok(EfpEntry { process, sctest: test, p_value_approximate: approximate })
                })
                .collect()
        };
        match (battery(&tm), battery(&pat)) {
            (Ok(a), Ok(b)) => {
                let rejections =
                    a.iter().chain(&b).filter(|e| e.sctest.reject).count();
                ledger.ok("efp_tests", format!("{rejections} of 8 tests reject stability"));
                results.efp = Some(PerSeries { trademarks: a, patents: b });
            }
            (Err(e), _) | (_, Err(e)) => ledger.failed("efp_tests", e.to_string()),
        }
    } else {
        ledger.skipped("efp_tests", too_short.clone());
    }

    // --- break dating + confidence intervals --------------------------------
    if breaks_feasible {
        let max_breaks = (1.0 / config.efp_bandwidth).floor() as usize - 1;
        let date_series = |series: &MonthlySeries| -> Result<BreakpointSet, ipseries::Error> {
            let set = date_breakpoints(series, config.efp_bandwidth, max_breaks)?;
            breakpoint_confint(series, &set, 0.95)
        };
        match (date_series(&tm), date_series(&pat)) {
            (Ok(a), Ok(b)) => {
                ledger.ok(
                    "break_dating",
                    format!("{} trademark and {} patent breaks", a.n_breaks, b.n_breaks),
                );
                results.breaks = Some(PerSeries { trademarks: a, patents: b });
            }
            (Err(e), _) | (_, Err(e)) => ledger.failed("break_dating", e.to_string()),
        }
    } else {
        ledger.skipped("break_dating", too_short.clone());
    }

    // --- segmentation --------------------------------------------------------
    if let Some(bps) = &results.breaks {
        match derive_segments(&bps.trademarks, &bps.patents, tm.start, span_end(&tm)) {
            Ok(set) => {
                ledger.ok("segmentation", format!("{} stable segments", set.len()));
                results.segments = Some(set);
            }
            Err(e) => ledger.failed("segmentation", e.to_string()),
        }
    } else if !breaks_feasible {
        ledger.skipped("segmentation", too_short.clone());
    } else {
        ledger.skipped("segmentation", "requires break dating");
    }

    // --- spans for the cointegration / integration batteries -----------------
    let spans: Option<Vec<(String, MonthlySeries, MonthlySeries)>> =
        results.segments.as_ref().map(|segs| {
            let mut spans = Vec::with_capacity(segs.len() + 1);
            spans.push(("full".to_string(), tm.clone(), pat.clone()));
            for seg in &segs.segments {
                // Segments derive from these series' own break dates, so
                // slicing cannot fail.
                let a = slice_segment(&tm, seg).expect("segment within span");
                let b = slice_segment(&pat, seg).expect("segment within span");
                spans.push((seg.label.to_string(), a, b));
            }
            spans
        });

    // --- cointegration -------------------------------------------------------
    if let Some(spans) = &spans {
        let mut entries = Vec::with_capacity(spans.len());
        let mut failures = 0usize;
        for (label, a, b) in spans {
            let johansen = johansen_trace(a, b, config.johansen_lags);
            let pz = phillips_ouliaris_pz(a, b);
            if johansen.is_err() || pz.is_err() {
                failures += 1;
            }
            entries.push(SpanCointegration {
                span: label.clone(),
                start: a.start,
                end: span_end(a),
                johansen_error: johansen.as_ref().err().map(|e| e.to_string()),
                johansen: johansen.ok(),
                pz_error: pz.as_ref().err().map(|e| e.to_string()),
                pz: pz.ok(),
            });
        }
        if failures == 0 {
            ledger.ok("cointegration", format!("{} spans tested", entries.len()));
        } else {
            ledger.failed(
                "cointegration",
                format!("{failures} of {} spans errored", entries.len()),
            );
        }
        results.cointegration = Some(entries);
    } else if !breaks_feasible {
        ledger.skipped("cointegration", too_short.clone());
    } else {
        ledger.skipped("cointegration", "requires segmentation");
    }

    // --- integration orders ----------------------------------------------------
    if let Some(spans) = &spans {
        let mut rows = Vec::with_capacity(spans.len() * 2);
        let mut failures = 0usize;
        for (label, a, b) in spans {
            for (name, series) in [("Trademarks", a), ("Patents", b)] {
                let orders = integration_order(series);
                if orders.is_err() {
                    failures += 1;
                }
                rows.push(SpanIntegration {
                    variable: name.to_string(),
                    span: label.clone(),
                    error: orders.as_ref().err().map(|e| e.to_string()),
                    orders: orders.ok(),
                });
            }
        }
        if failures == 0 {
            ledger.ok("integration_orders", format!("{} ladder cells", rows.len() * 3));
        } else {
            ledger.failed(
                "integration_orders",
                format!("{failures} of {} ladders errored", rows.len()),
            );
        }
        results.integration_orders = Some(rows);
    } else if !breaks_feasible {
        ledger.skipped("integration_orders", too_short);
    } else {
        ledger.skipped("integration_orders", "requires segmentation");
    }

    let tables = crate::tables::build_tables(&results);
    Ok(PipelineReport { provenance, stages: ledger.records, results, tables })
}

/// Error category for the per-stage subcommands: usage problems exit with
/// code 2, analysis failures with code 1.
#[derive(Debug)]
pub enum CliError {
    /// The request itself is contradictory or malformed.
    Usage(String),
    /// A stage could not run on this input.
    Stage(String),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Stage(m) => f.write_str(m),
        }
    }
}

impl std::error::Error for CliError {}

/// Ingest, truncate, and repair: the shared front half of every per-stage
/// subcommand. Returns the cleaned pair plus the outlier block.
pub fn cleaned_pair(
    config: &PipelineConfig,
) -> Result<(MonthlySeries, MonthlySeries, OutlierBlock), CliError> {
    let stage = |m: String| CliError::Stage(m);
    let text = std::fs::read_to_string(&config.input)
        .map_err(|e| stage(format!("{}: {e}", config.input.display())))?;
    let table = parse_csv(&text).map_err(|e| stage(e.to_string()))?;
    let rows = table.rows.len();
    if let Some(want) = config.truncate_to {
        if want > rows {
            return Err(CliError::Usage(format!(
                "--truncate {want} exceeds the {rows} rows in {}",
                config.input.display()
            )));
        }
    }
    let keep = config.truncate_to.unwrap_or_else(|| rows.min(DEFAULT_TRUNCATE));
    let tm =
        to_monthly_series(&table, Column::Trademarks, keep).map_err(|e| stage(e.to_string()))?;
    let pat = to_monthly_series(&table, Column::Patents, keep).map_err(|e| stage(e.to_string()))?;
    let (tm, tm_rep) =
        clean_series(&tm, config.outlier_threshold).map_err(|e| stage(e.to_string()))?;
    let (pat, pat_rep) =
        clean_series(&pat, config.outlier_threshold).map_err(|e| stage(e.to_string()))?;
    let outliers = OutlierBlock {
        threshold: config.outlier_threshold,
        trademarks: tm_rep,
        patents: pat_rep,
    };
    Ok((tm, pat, outliers))
}

/// The analysis spans used by the `coint`/`ndiffs` subcommands: the full
/// span plus the derived stable segments.
pub fn segment_spans(
    tm: &MonthlySeries,
    pat: &MonthlySeries,
    h: f64,
) -> Result<Vec<(String, Segment)>, CliError> {
    if tm.len() < MIN_BREAK_LEN {
        return Err(CliError::Stage(format!(
            "series too short: break dating needs at least {MIN_BREAK_LEN} observations, got {}",
            tm.len()
        )));
    }
    let stage = |e: ipseries::Error| CliError::Stage(e.to_string());
    let max_breaks = (1.0 / h).floor() as usize - 1;
    let date = |s: &MonthlySeries| -> Result<BreakpointSet, CliError> {
        let set = date_breakpoints(s, h, max_breaks).map_err(stage)?;
        breakpoint_confint(s, &set, 0.95).map_err(stage)
    };
    let a = date(tm)?;
    let b = date(pat)?;
    let end = span_end(tm);
    let segs = derive_segments(&a, &b, tm.start, end).map_err(stage)?;
    let mut spans = vec![("full".to_string(), Segment::new(0, tm.start, end).map_err(stage)?)];
    for seg in &segs.segments {
        spans.push((seg.label.to_string(), *seg));
    }
    Ok(spans)
}
