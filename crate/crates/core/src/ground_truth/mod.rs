//! Ground-truth extraction: standard transactions whose change output is revealed
//! by the base clustering, refined by the unspent, two-candidate, tag-conflict and
//! known-change filters.

mod report;

pub use report::{CorpusOverview, FilterReport, GroundTruthReport};

use std::collections::{HashMap, HashSet};
use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::chain::{is_coinjoin, is_standard, AddrId, ChainView, CoinJoinRule, TagSet, TxIdx};
use crate::cluster::{ClusterAssignment, DisjointSet};
use crate::heuristics::OutputSet;

#[derive(Debug, Error)]
pub enum GroundTruthError {
    #[error("ground truth line {line}: {msg}")]
    Format { line: usize, msg: String },
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

/// A standard transaction with at least one output in its inputs' base cluster.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Candidate {
    pub tx: TxIdx,
    /// Outputs whose address shares the inputs' base cluster.
    pub matches: OutputSet,
}

/// Standard transactions split by how much is known about their change.
#[derive(Debug, Clone, Default)]
pub struct CandidateSet {
    pub candidates: Vec<Candidate>,
    /// An input address is paid again in an output.
    pub address_reuse: Vec<TxIdx>,
    /// Neither reuse nor cluster membership reveals the change.
    pub unknown_change: Vec<TxIdx>,
    pub overview: CorpusOverview,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GroundTruthEntry {
    pub tx: TxIdx,
    pub change_index: u8,
}

/// Transactions with known change, in corpus order.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct GroundTruthSet {
    entries: Vec<GroundTruthEntry>,
}

#[derive(Serialize, Deserialize)]
struct GroundTruthRecord {
    txid: String,
    change_index: u8,
}

impl GroundTruthSet {
    pub fn from_entries(mut entries: Vec<GroundTruthEntry>) -> Self {
        entries.sort_by_key(|e| e.tx);
        entries.dedup_by_key(|e| e.tx);
        GroundTruthSet { entries }
    }

    pub fn entries(&self) -> &[GroundTruthEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn change_index(&self, tx: TxIdx) -> Option<u8> {
        self.entries
            .binary_search_by_key(&tx, |e| e.tx)
            .ok()
            .map(|i| self.entries[i].change_index)
    }

    pub fn txs(&self) -> Vec<TxIdx> {
        self.entries.iter().map(|e| e.tx).collect()
    }

    pub fn write<W: Write>(&self, mut w: W, view: &ChainView) -> Result<(), GroundTruthError> {
        for e in &self.entries {
            let rec = GroundTruthRecord {
                txid: view.tx(e.tx).txid.clone(),
                change_index: e.change_index,
            };
            serde_json::to_writer(&mut w, &rec).map_err(|e| std::io::Error::other(e.to_string()))?;
            w.write_all(b"\n")?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read<R: BufRead>(r: R, view: &ChainView) -> Result<Self, GroundTruthError> {
        let mut entries = Vec::new();
        for (i, line) in r.lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let format = |msg: String| GroundTruthError::Format { line: i + 1, msg };
            let rec: GroundTruthRecord = serde_json::from_str(&line).map_err(|e| format(e.to_string()))?;
            let tx = view
                .lookup(&rec.txid)
                .ok_or_else(|| format(format!("unknown txid {}", rec.txid)))?;
            if rec.change_index as usize >= view.tx(tx).outputs.len() {
                return Err(format("change index out of range".into()));
            }
            entries.push(GroundTruthEntry {
                tx,
                change_index: rec.change_index,
            });
        }
        Ok(Self::from_entries(entries))
    }
}

/// Classify every standard transaction and collect the cluster-member candidates.
pub fn extract_candidates(view: &ChainView, base: &ClusterAssignment, rule: &CoinJoinRule) -> CandidateSet {
    let mut set = CandidateSet::default();
    let ov = &mut set.overview;
    for t in view.tx_indices() {
        let tx = view.tx(t);
        ov.transactions += 1;
        match tx.outputs.len() {
            1 => ov.one_output += 1,
            2 => ov.two_outputs += 1,
            _ => ov.three_plus_outputs += 1,
        }
        if tx.coinbase {
            ov.coinbase += 1;
        }
        if is_coinjoin(tx, rule) {
            ov.coinjoin += 1;
        }
        if tx.outputs.len() == 2 && tx.has_op_return() {
            ov.overlay += 1;
        }
        if !is_standard(tx, rule) {
            continue;
        }
        ov.standard += 1;
        let inputs = view.input_addresses(t);
        let outputs = view.output_addresses(t);
        if outputs.iter().any(|o| inputs.contains(o)) {
            ov.address_reuse += 1;
            set.address_reuse.push(t);
            continue;
        }
        let root = base.root(inputs[0]);
        let matches = OutputSet::from_fn(|i| base.root(outputs[i]) == root);
        if matches.is_empty() {
            ov.unknown_change += 1;
            set.unknown_change.push(t);
        } else {
            ov.cluster_member += 1;
            set.candidates.push(Candidate { tx: t, matches });
        }
    }
    set
}

/// Drop candidates with an unspent output.
pub fn filter_unspent(c: Vec<Candidate>, view: &ChainView, report: &mut FilterReport) -> Vec<Candidate> {
    let before = c.len();
    let kept: Vec<Candidate> = c.into_iter().filter(|x| view.all_outputs_spent(x.tx)).collect();
    report.unspent_removed += before - kept.len();
    kept
}

/// Drop candidates with both outputs in the inputs' cluster, then every candidate
/// of a base cluster in which such transactions exceed `threshold` of its candidates.
pub fn filter_two_candidates(
    c: Vec<Candidate>,
    view: &ChainView,
    base: &ClusterAssignment,
    threshold: f64,
    report: &mut FilterReport,
) -> Vec<Candidate> {
    let mut per_cluster: HashMap<AddrId, (usize, usize)> = HashMap::new();
    for x in &c {
        let root = base.input_root(view, x.tx).expect("standard tx has inputs");
        let e = per_cluster.entry(root).or_default();
        e.0 += 1;
        if x.matches.len() == 2 {
            e.1 += 1;
        }
    }
    let flagged: HashSet<AddrId> = per_cluster
        .iter()
        .filter(|(_, (total, two))| *two as f64 > threshold * *total as f64)
        .map(|(r, _)| *r)
        .collect();
    report.high_self_rate_clusters += flagged.len();
    let mut kept = Vec::with_capacity(c.len());
    for x in c {
        if x.matches.len() == 2 {
            report.two_candidate_removed += 1;
        } else if flagged.contains(&base.input_root(view, x.tx).expect("inputs")) {
            report.high_self_rate_removed += 1;
        } else {
            kept.push(x);
        }
    }
    kept
}

/// Drop candidates from base clusters carrying two or more distinct entity labels,
/// and from clusters containing a blocklisted address.
pub fn filter_tag_conflicts(
    c: Vec<Candidate>,
    view: &ChainView,
    base: &ClusterAssignment,
    tags: &TagSet,
    blocklist: &[AddrId],
    report: &mut FilterReport,
) -> Vec<Candidate> {
    let by_cluster = tags.by_cluster(view, base);
    let conflicted: HashSet<AddrId> = by_cluster
        .iter()
        .filter(|(_, labels)| {
            let distinct: HashSet<&str> = labels.iter().map(|(l, _)| l.as_str()).collect();
            distinct.len() >= 2
        })
        .map(|(r, _)| *r)
        .collect();
    let blocked: HashSet<AddrId> = blocklist.iter().map(|a| base.root(*a)).collect();
    let mut kept = Vec::with_capacity(c.len());
    for x in c {
        let root = base.input_root(view, x.tx).expect("inputs");
        if blocked.contains(&root) {
            report.blocklist_removed += 1;
        } else if conflicted.contains(&root) {
            report.tag_conflict_removed += 1;
        } else {
            kept.push(x);
        }
    }
    kept
}

/// Keep fresh-change candidates; drop reused-change candidates whose change address
/// was already linked to one of the inputs by co-spends earlier in the corpus.
/// Candidates with an unspent output are dropped first.
pub fn filter_known_change(
    c: Vec<Candidate>,
    view: &ChainView,
    rule: &CoinJoinRule,
    report: &mut FilterReport,
) -> GroundTruthSet {
    let mut c = filter_unspent(c, view, report);
    c.sort_by_key(|x| x.tx);
    let mut ds = DisjointSet::new(view.address_count());
    let mut entries = Vec::with_capacity(c.len());
    let mut next = c.iter().peekable();
    for t in view.tx_indices() {
        while let Some(x) = next.next_if(|x| x.tx == t) {
            let change = x.matches.unique().expect("single-match candidates only");
            let addr = view.output_addresses(t)[change];
            let fresh = view.first_seen(addr) == t;
            let known = !fresh && {
                let r = ds.find_unchecked(addr.0);
                view.input_addresses(t)
                    .iter()
                    .any(|a| ds.find_unchecked(a.0) == r)
            };
            if known {
                report.reused_change_removed += 1;
            } else {
                entries.push(GroundTruthEntry {
                    tx: t,
                    change_index: change as u8,
                });
            }
        }
        let tx = view.tx(t);
        if tx.coinbase || is_coinjoin(tx, rule) {
            continue;
        }
        let inputs = view.input_addresses(t);
        for a in &inputs[1..] {
            ds.union(inputs[0].0, a.0).expect("address ids are dense");
        }
    }
    GroundTruthSet { entries }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GroundTruthConfig {
    /// Two-candidate share above which a whole base cluster is dropped.
    pub self_rate_threshold: f64,
    /// Addresses whose base clusters are excluded outright.
    pub blocklist: Vec<String>,
    pub coinjoin: CoinJoinRule,
}

impl Default for GroundTruthConfig {
    fn default() -> Self {
        GroundTruthConfig {
            self_rate_threshold: 0.10,
            blocklist: Vec::new(),
            coinjoin: CoinJoinRule::default(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct GroundTruthOutcome {
    pub ground_truth: GroundTruthSet,
    pub report: FilterReport,
    pub overview: CorpusOverview,
    /// Standard transactions with unknown change (the set to predict).
    pub unknown_change: Vec<TxIdx>,
    pub address_reuse: Vec<TxIdx>,
}

/// Candidate extraction followed by the filters, in fixed order:
/// unspent, two-candidate, tag/blocklist, known change.
pub fn extract_ground_truth(
    view: &ChainView,
    base: &ClusterAssignment,
    tags: &TagSet,
    config: &GroundTruthConfig,
) -> GroundTruthOutcome {
    let set = extract_candidates(view, base, &config.coinjoin);
    let mut report = FilterReport {
        candidates: set.candidates.len(),
        ..FilterReport::default()
    };
    let blocklist: Vec<AddrId> = config
        .blocklist
        .iter()
        .filter_map(|a| view.address_id(a))
        .collect();
    let c = filter_unspent(set.candidates, view, &mut report);
    let c = filter_two_candidates(c, view, base, config.self_rate_threshold, &mut report);
    let c = filter_tag_conflicts(c, view, base, tags, &blocklist, &mut report);
    let gt = filter_known_change(c, view, &config.coinjoin, &mut report);
    report.final_count = gt.len();
    GroundTruthOutcome {
        ground_truth: gt,
        report,
        overview: set.overview,
        unknown_change: set.unknown_change,
        address_reuse: set.address_reuse,
    }
}

impl GroundTruthOutcome {
    pub fn summary(&self, config: &GroundTruthConfig) -> GroundTruthReport {
        let standard_share = if self.overview.standard == 0 {
            0.0
        } else {
            self.ground_truth.len() as f64 / self.overview.standard as f64
        };
        GroundTruthReport {
            overview: self.overview,
            filters: self.report,
            standard_share,
            self_rate_threshold: config.self_rate_threshold,
            self_rate_denominator: "candidate transactions of the cluster".into(),
        }
    }
}

#[cfg(test)]
pub(crate) mod tests;
