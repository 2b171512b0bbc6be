//! Order-of-integration and cointegration analysis.
//!
//! Three unit-root tests (KPSS, ADF, PP) feed a differencing ladder
//! ([`ndiffs`]) that reports how many differences bring a series to
//! stationarity. Two system tests assess whether a pair of series shares a
//! common stochastic trend: the Johansen trace procedure on a restricted-
//! constant VECM ([`johansen_trace`]) and the Phillips–Ouliaris multivariate
//! `Pz` statistic ([`phillips_ouliaris_pz`]).
//!
//! All decision rules compare against embedded critical-value tables; the
//! [`Significance`] enum records the strongest conventional level a
//! right-tailed statistic clears.

pub mod johansen;
pub mod po;
pub mod unitroot;

pub use johansen::{johansen_trace, Ecdet, JohansenResult, TraceCriticalValues, TraceHypothesis};
pub use po::{phillips_ouliaris_pz, PoCriticalValues, PoResult, PZ_CRITICAL_VALUES};
pub use unitroot::{
    adf_test, integration_order, kpss_test, ndiffs, pp_test, IntegrationOrder, NdiffsEntry,
    UnitRootResult, UnitRootTest,
};

use serde::Serialize;

/// Strongest conventional significance level cleared by a right-tailed
/// statistic (strict inequality against each critical value).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Significance {
    /// Statistic exceeds the 1% critical value.
    #[serde(rename = "1%")]
    OnePercent,
    /// Statistic exceeds the 5% critical value but not the 1%.
    #[serde(rename = "5%")]
    FivePercent,
    /// Statistic exceeds the 10% critical value but not the 5%.
    #[serde(rename = "10%")]
    TenPercent,
    /// Statistic clears no tabulated level.
    #[serde(rename = "ns")]
    NotSignificant,
}

impl Significance {
    /// Short display form: `"1%"`, `"5%"`, `"10%"`, or `"ns"`.
    pub fn label(self) -> &'static str {
        match self {
            Self::OnePercent => "1%",
            Self::FivePercent => "5%",
            Self::TenPercent => "10%",
            Self::NotSignificant => "ns",
        }
    }

    /// True unless the statistic cleared no level at all.
    pub fn is_significant(self) -> bool {
        self != Self::NotSignificant
    }
}

impl std::fmt::Display for Significance {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.label())
    }
}
