//! Structural-stability toolkit: empirical fluctuation processes with
//! significance tests, exact multiple-break dating with confidence
//! intervals, and cross-series segmentation.

pub mod baiperron;
pub mod confint;
pub mod efp;
pub mod segments;

pub use baiperron::{date_breakpoints, BreakpointSet, Breakpoint, ModelFit};
pub use confint::{argmax_cdf, argmax_quantile, breakpoint_confint};
pub use efp::{
    critical_value, efp, efp_test, sctest, EfpKind, FluctuationProcess, ScTestResult,
    MOSUM_TABLE_BANDWIDTH,
};
pub use segments::{derive_segments, SegmentSet, CLUSTER_GAP_MONTHS};
