//! Checking and measuring allocations: competitive ratios, charging
//! certificates, deviation testing, non-wastefulness and the daily
//! unvaccinated-fraction series.

mod charging;
mod decompose;
mod metrics;
mod ratio;
mod strategy;
mod waste;

pub use charging::{build_charging_report, CertificateFailure, Charge, ChargeKind, ChargingReport};
pub use decompose::{decompose_symmetric_difference, Component, ComponentShape, Decomposition, EdgeSource, LabeledEdge, Node};
pub use metrics::{compute_metrics, MetricsRow, MetricsSeries, ALL_GROUP};
pub use ratio::{competitive_ratio, ratio_of, theorem_bound, Ratio, RatioReport};
pub use strategy::{test_strategyproofness, DeviationReport, EXHAUSTIVE_DAY_LIMIT};
pub use waste::{check_non_wasteful, max_capped_bmatching_size};

use thiserror::Error;

use crate::model::ValidationReport;
use crate::offline::OfflineError;
use crate::online::OnlineError;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AnalysisError {
    #[error("{which} allocation is infeasible:\n{report}")]
    InfeasibleAllocation { which: &'static str, report: ValidationReport },
    #[error("instance contains a non-finite value")]
    NonFinite,
    #[error(transparent)]
    Online(#[from] OnlineError),
    #[error(transparent)]
    Offline(#[from] OfflineError),
}
