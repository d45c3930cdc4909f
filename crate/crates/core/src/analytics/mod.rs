//! Downstream analyses over a clustering: tagged flows, velocity, the
//! Meiklejohn change heuristic, pairwise clustering probability and comparison
//! of two clusterings.

mod compare;
mod flows;
mod meiklejohn;
mod velocity;
#[cfg(test)]
mod tests;

pub use compare::{
    compare_clusterings, exact_quadrants, pair_probability, pair_probability_f64, read_prices, sampled_quadrants,
    ComparisonTable, PriceSeries, Quadrants, EXACT_PAIR_LIMIT,
};
pub use flows::{flows, FlowRow, FlowTable, FlowVolumes};
pub use meiklejohn::{change_clustering, meiklejohn_predict, MeiklejohnVariant};
pub use velocity::{velocity, write_velocity_csv, DAY};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum AnalyticsError {
    #[error("no tag in category {0}")]
    EmptyCategory(String),
    #[error("need at least two addresses")]
    TooFewAddresses,
    #[error("bucket width must be positive")]
    Bucket,
    #[error("clusterings cover {0} and {1} addresses")]
    SizeMismatch(usize, usize),
    #[error("price file line {line}: {msg}")]
    Price { line: usize, msg: String },
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}
