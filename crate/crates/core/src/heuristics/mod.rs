//! Universal and fingerprint change heuristics, vote tables and their evaluation.

mod candidates;
mod eval;
pub mod fixtures;
mod kind;
mod votes;

pub use candidates::{
    candidates, candidates_all, is_bip69_sorted, rounded_fee_rate, unique_candidate, Fingerprint,
    OutputSet,
};
pub use eval::{evaluate_heuristics, evaluate_predictor, write_scores_csv, HeuristicScore};
pub use kind::{Feature, HeuristicKind, KIND_COUNT};
pub use votes::{build_vote_table, TxVotes, VoteTable, Votes};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum HeuristicError {
    #[error("ground truth is empty")]
    EmptyGroundTruth,
    #[error("vote table format: {0}")]
    Format(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

#[cfg(test)]
mod tests;
