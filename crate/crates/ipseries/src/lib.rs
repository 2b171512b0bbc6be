//! `ipseries` — time-series econometrics for monthly intellectual-property
//! count data.
//!
//! The crate covers the full arc of a bivariate monthly-count analysis:
//!
//! 1. **Ingest** strictly consecutive monthly CSV data ([`series`]).
//! 2. **Describe**: moments, quantiles, rank correlations, classical
//!    additive decomposition ([`descriptives`]).
//! 3. **Repair**: robust two-channel outlier detection and neighbour-average
//!    replacement ([`prep`]).
//! 4. **Co-movement**: Morlet cross-wavelet transform with red-noise
//!    significance ([`wavelet`]).
//! 5. **Stability**: empirical-fluctuation structural-break tests, dynamic-
//!    programming break dating with confidence intervals, and segmentation
//!    ([`breaks`]).
//! 6. **Long-run links**: Johansen trace and Phillips–Ouliaris system
//!    cointegration tests plus unit-root ladders ([`integration`]).
//!
//! All statistics are deterministic pure functions over immutable inputs.

pub mod breaks;
pub mod descriptives;
pub mod error;
pub mod integration;
pub mod prep;
pub mod series;
pub mod util;
pub mod wavelet;

pub use error::{Error, Result};
pub use series::{Column, MonthDate, MonthlySeries, RawRow, RawTable, Segment};
