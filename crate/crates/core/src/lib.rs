//! Change-output detection and constraint-guarded address clustering over
//! transaction corpora.

pub mod chain;
pub mod scalar;

pub use scalar::Scalar;
pub mod cluster;
pub mod ground_truth;
pub mod heuristics;
pub mod synth;
pub mod roc;
pub mod combiner;
pub mod forest;
pub mod enhance;
pub mod analytics;
pub mod pipeline;

/// Double-precision forest.
pub type Forest = forest::ForestModel<f64>;
/// Double-precision ROC curve.
pub type Roc = roc::RocCurve<f64>;
