//! Local fairness statistics and the global metrics computed from their
//! aggregate: demographic parity, equalized odds and intersectional
//! disparity.
//!
//! The statistic vector of a participant always starts with eight counts
//! `s[a·4 + y·2 + ŷ]` over the first protected attribute `a`, the label
//! `y` and the prediction `ŷ = 1[score > threshold]`. With `K > 1`
//! attributes it continues with four counts `[y·2 + ŷ]` per intersectional
//! group, groups ordered by their attribute bitmask.

mod brute_force;
mod dataset;
mod metrics;
mod stats;

pub use brute_force::{
    brute_force_metrics, brute_force_metrics_sorted, BruteForceMetrics, GroupRow,
};
pub use dataset::{Dataset, Record, FEATURE_DIM, MAX_ATTRIBUTES};
pub use metrics::{
    dp_violation, eo_violation, intersectional_violation, positive_rate, FairnessReport,
    IntersectionalReport, MetricInputs, PrivacyCharge, ReleasedMetric, SIGMA_NOISE_ASSUMPTION,
};
pub use stats::{
    extract_local_stats, stat_index, vector_len, AggregateStatistics, GroupCounts, LocalStatistics,
    DEFAULT_THRESHOLD, STAT_COUNT,
};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FairnessError {
    #[error("dataset has no records")]
    EmptyDataset,
    #[error("prediction threshold {0} must lie in (0, 1)")]
    InvalidThreshold(f64),
    #[error("invalid record {index}: {reason}")]
    InvalidRecord { index: usize, reason: String },
    #[error("attribute count {0} unsupported (need 1..={max})", max = MAX_ATTRIBUTES)]
    AttributeCount(u8),
    #[error("datasets disagree on attribute count ({0} vs {1})")]
    AttributeMismatch(u8, u8),
    #[error("degenerate {what}: denominator is at the clamping floor")]
    DegenerateGroup { what: String },
    #[error("empty intersectional groups: {0:?}")]
    EmptyGroup(Vec<u32>),
    #[error("invalid metric parameter: {0}")]
    Parameter(String),
    #[error("statistic vector has length {got}, expected {expected}")]
    VectorLength { got: usize, expected: usize },
}

pub type Result<T> = std::result::Result<T, FairnessError>;
