use rayon::prelude::*;

use crate::chain::{ChainView, TxIdx};
use crate::cluster::{ClusterAssignment, DisjointSet};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MeiklejohnVariant {
    /// Change address has not appeared before this transaction.
    Local,
    /// Change address appears in exactly one output of the whole corpus.
    Global,
}

impl std::str::FromStr for MeiklejohnVariant {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "local" => Ok(MeiklejohnVariant::Local),
            "global" => Ok(MeiklejohnVariant::Global),
            _ => Err(format!("unknown variant {s}")),
        }
    }
}

/// Change index per transaction: the only output whose address qualifies,
/// provided that address is not also an input.
pub fn meiklejohn_predict(view: &ChainView, txs: &[TxIdx], variant: MeiklejohnVariant) -> Vec<(TxIdx, Option<usize>)> {
    txs.par_iter()
        .map(|&t| {
            let outs = view.output_addresses(t);
            let fresh = |a| match variant {
                MeiklejohnVariant::Local => view.first_seen(a) == t,
                MeiklejohnVariant::Global => view.output_occurrences(a) == 1,
            };
            let mut hits = outs.iter().enumerate().filter(|(_, a)| fresh(**a));
            let pick = match (hits.next(), hits.next()) {
                (Some((i, a)), None) if !view.input_addresses(t).contains(a) => Some(i),
                _ => None,
            };
            (t, pick)
        })
        .collect()
}

/// Joins each transaction's input cluster with its predicted change address, in corpus order.
pub fn change_clustering(view: &ChainView, base: &ClusterAssignment, changes: &[(TxIdx, Option<usize>)]) -> ClusterAssignment {
    let mut ds: DisjointSet = base.to_disjoint_set();
    let mut sorted: Vec<(TxIdx, usize)> = changes.iter().filter_map(|(t, c)| c.map(|c| (*t, c))).collect();
    sorted.sort_unstable();
    for (t, c) in sorted {
        if let Some(from) = base.input_root(view, t) {
            ds.union(from.0, view.output_addresses(t)[c].0).expect("address ids are in range");
        }
    }
    ClusterAssignment::from_disjoint_set(&mut ds, view)
}
