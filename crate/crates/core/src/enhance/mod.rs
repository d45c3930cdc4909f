//! Cluster enhancement from change predictions: naive merging and the
//! constraint-guarded union-find.

mod merge;
mod predict;
mod report;
#[cfg(test)]
mod tests;

pub use merge::{constrained_enhance, naive_enhance, ConstraintStore, EnhanceOutcome, MergeStats};
pub use predict::{predict_all, Prediction, PredictionSet, Thresholds};
pub use report::{collapse_report, percentile, AffectedCluster, CollapseReport, PERCENTILES};

use thiserror::Error;

use crate::forest::ForestError;

#[derive(Debug, Error)]
pub enum EnhanceError {
    #[error("thresholds must satisfy 0 <= p_spend < p_change <= 1 (got {p_spend}, {p_change})")]
    Thresholds { p_spend: f64, p_change: f64 },
    #[error(transparent)]
    Model(#[from] ForestError),
    #[error("prediction file line {line}: {msg}")]
    Format { line: usize, msg: String },
    #[error("assignments cover {0} and {1} addresses")]
    SizeMismatch(usize, usize),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}
