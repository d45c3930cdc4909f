use serde::Serialize;

use super::{collapse_report, CollapseReport, PredictionSet};
use crate::chain::{AddrId, ChainView};
use crate::cluster::{ClusterAssignment, DisjointSet};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct MergeStats {
    /// Transactions with exactly one output above `p_change`.
    pub change_edges: usize,
    pub merged: usize,
    /// Change edges whose endpoints already shared a cluster.
    pub redundant: usize,
    /// Change edges refused because of a constraint.
    pub skipped: usize,
    /// Transactions with both outputs above `p_change`.
    pub both_above: usize,
    /// Spend edges registered as constraints.
    pub constraints: usize,
    /// Spend edges inside one base cluster; they cannot be enforced.
    pub constraints_within_cluster: usize,
}

#[derive(Debug, Clone)]
pub struct EnhanceOutcome {
    pub assignment: ClusterAssignment,
    pub stats: MergeStats,
    pub report: CollapseReport,
}

/// Cannot-link sets keyed by disjoint-set root. Entries may hold stale roots;
/// they are re-canonicalized when read.
#[derive(Debug, Clone)]
pub struct ConstraintStore {
    forbidden: Vec<Vec<u32>>,
    pairs: Vec<(AddrId, AddrId)>,
}

impl ConstraintStore {
    pub fn new(n: usize) -> Self {
        ConstraintStore {
            forbidden: vec![Vec::new(); n],
            pairs: Vec::new(),
        }
    }

    /// Records that the clusters of `a` and `b` must stay apart.
    /// Returns false when they are already together.
    pub fn forbid(&mut self, ds: &mut DisjointSet, a: AddrId, b: AddrId) -> bool {
        let ra = ds.find_unchecked(a.0);
        let rb = ds.find_unchecked(b.0);
        if ra == rb {
            return false;
        }
        self.forbidden[ra as usize].push(rb);
        self.forbidden[rb as usize].push(ra);
        self.pairs.push((a, b));
        true
    }

    fn canonical(&mut self, ds: &mut DisjointSet, root: u32) -> &[u32] {
        let mut set = std::mem::take(&mut self.forbidden[root as usize]);
        for r in set.iter_mut() {
            *r = ds.find_unchecked(*r);
        }
        set.sort_unstable();
        set.dedup();
        self.forbidden[root as usize] = set;
        &self.forbidden[root as usize]
    }

    /// Whether the clusters rooted at `ra` and `rb` may merge.
    pub fn allows(&mut self, ds: &mut DisjointSet, ra: u32, rb: u32) -> bool {
        let a_forbids = self.canonical(ds, ra).binary_search(&rb).is_ok();
        let b_forbids = self.canonical(ds, rb).binary_search(&ra).is_ok();
        !(a_forbids || b_forbids)
    }

    /// Unions `ra` and `rb` and moves both constraint sets to the new root.
    pub fn merge(&mut self, ds: &mut DisjointSet, ra: u32, rb: u32) -> u32 {
        let r = ds.link_roots(ra, rb);
        let other = if r == ra { rb } else { ra };
        let moved = std::mem::take(&mut self.forbidden[other as usize]);
        self.forbidden[r as usize].extend(moved);
        r
    }

    /// Every registered (input address, spend address) pair.
    pub fn pairs(&self) -> &[(AddrId, AddrId)] {
        &self.pairs
    }
}

fn change_edges<'a>(
    view: &'a ChainView,
    base: &'a ClusterAssignment,
    predictions: &'a PredictionSet,
    stats: &'a mut MergeStats,
) -> impl Iterator<Item = (AddrId, AddrId)> + 'a {
    let th = predictions.thresholds;
    predictions.predictions().iter().filter_map(move |p| {
        if p.probability.iter().all(|&q| q > th.p_change) {
            stats.both_above += 1;
            return None;
        }
        let i = th.change_of(p.probability)?;
        stats.change_edges += 1;
        let from = base.input_root(view, p.tx)?;
        Some((from, view.output_addresses(p.tx)[i]))
    })
}

/// Merges the input cluster with the change address cluster for every
/// transaction with exactly one output above `p_change`, in corpus order.
pub fn naive_enhance(view: &ChainView, base: &ClusterAssignment, predictions: &PredictionSet) -> EnhanceOutcome {
    let mut ds = base.to_disjoint_set();
    let mut stats = MergeStats::default();
    let edges: Vec<_> = change_edges(view, base, predictions, &mut stats).collect();
    for (a, b) in edges {
        let ra = ds.find_unchecked(a.0);
        let rb = ds.find_unchecked(b.0);
        if ra == rb {
            stats.redundant += 1;
        } else {
            ds.link_roots(ra, rb);
            stats.merged += 1;
        }
    }
    finish(view, base, ds, stats)
}

/// Like [`naive_enhance`], but every output at or below `p_spend` first forbids
/// its cluster from joining the input cluster, and merges that would join two
/// forbidden clusters are skipped.
pub fn constrained_enhance(
    view: &ChainView,
    base: &ClusterAssignment,
    predictions: &PredictionSet,
) -> (EnhanceOutcome, ConstraintStore) {
    let mut ds = base.to_disjoint_set();
    let mut store = ConstraintStore::new(ds.len());
    let mut stats = MergeStats::default();
    let th = predictions.thresholds;
    for p in predictions.predictions() {
        let Some(from) = base.input_root(view, p.tx) else { continue };
        for i in 0..2 {
            if th.is_spend(p.probability[i]) {
                let to = view.output_addresses(p.tx)[i];
                if store.forbid(&mut ds, from, to) {
                    stats.constraints += 1;
                } else {
                    stats.constraints_within_cluster += 1;
                }
            }
        }
    }
    let edges: Vec<_> = change_edges(view, base, predictions, &mut stats).collect();
    for (a, b) in edges {
        let ra = ds.find_unchecked(a.0);
        let rb = ds.find_unchecked(b.0);
        if ra == rb {
            stats.redundant += 1;
        } else if store.allows(&mut ds, ra, rb) {
            store.merge(&mut ds, ra, rb);
            stats.merged += 1;
        } else {
            stats.skipped += 1;
        }
    }
    (finish(view, base, ds, stats), store)
}

fn finish(view: &ChainView, base: &ClusterAssignment, mut ds: DisjointSet, stats: MergeStats) -> EnhanceOutcome {
    let assignment = ClusterAssignment::from_disjoint_set(&mut ds, view);
    let mut report = collapse_report(base, &assignment).expect("same corpus");
    report.skipped_merges = stats.skipped;
    report.redundant_merges = stats.redundant;
    EnhanceOutcome {
        assignment,
        stats,
        report,
    }
}
