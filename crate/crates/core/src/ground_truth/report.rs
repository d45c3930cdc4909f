use serde::{Deserialize, Serialize};

/// Per-category counts over the whole corpus.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorpusOverview {
    pub transactions: usize,
    pub coinbase: usize,
    pub one_output: usize,
    pub two_outputs: usize,
    pub three_plus_outputs: usize,
    pub coinjoin: usize,
    /// Two-output transactions carrying an OP_RETURN output.
    pub overlay: usize,
    pub standard: usize,
    pub address_reuse: usize,
    pub cluster_member: usize,
    pub unknown_change: usize,
}

/// Counts of candidates removed by each filter.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FilterReport {
    pub candidates: usize,
    pub unspent_removed: usize,
    pub two_candidate_removed: usize,
    pub high_self_rate_clusters: usize,
    pub high_self_rate_removed: usize,
    pub tag_conflict_removed: usize,
    pub blocklist_removed: usize,
    pub reused_change_removed: usize,
    #[serde(rename = "final")]
    pub final_count: usize,
}

impl FilterReport {
    pub fn removed(&self) -> usize {
        self.unspent_removed
            + self.two_candidate_removed
            + self.high_self_rate_removed
            + self.tag_conflict_removed
            + self.blocklist_removed
            + self.reused_change_removed
    }

    pub fn is_conserved(&self) -> bool {
        self.candidates >= self.removed() && self.candidates - self.removed() == self.final_count
    }
}

/// Everything written to the ground-truth report file.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GroundTruthReport {
    pub overview: CorpusOverview,
    pub filters: FilterReport,
    /// Share of standard transactions that ended up in the ground truth.
    pub standard_share: f64,
    pub self_rate_threshold: f64,
    pub self_rate_denominator: String,
}
