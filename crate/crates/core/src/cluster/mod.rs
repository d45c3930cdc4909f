//! Disjoint-set structure and the multi-input (co-spend) clustering.

mod disjoint;

pub use disjoint::DisjointSet;

use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::chain::{is_coinjoin, AddrId, ChainView, CoinJoinRule, TxIdx};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ClusterError {
    #[error("unknown id {0}")]
    UnknownId(u32),
    #[error("id {0} maps to a representative that is not its own root")]
    NotARoot(u32),
    #[error("cluster file line {line}: {msg}")]
    Schema { line: usize, msg: String },
    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for ClusterError {
    fn from(e: std::io::Error) -> Self {
        ClusterError::Io(e.to_string())
    }
}

/// Per-cluster aggregates. Transactions are counted where the cluster funds an input.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClusterStats {
    pub address_count: u32,
    pub tx_count: u32,
    pub first_time: Option<i64>,
    pub last_time: Option<i64>,
}

impl ClusterStats {
    /// Largest time difference between two originating transactions.
    pub fn max_time_gap(&self) -> i64 {
        match (self.first_time, self.last_time) {
            (Some(a), Some(b)) => b - a,
            _ => 0,
        }
    }
}

/// A partition of the corpus addresses with per-cluster aggregates.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClusterAssignment {
    roots: Vec<AddrId>,
    stats: Vec<ClusterStats>,
}

#[derive(Serialize, Deserialize)]
struct ClusterRecord<'a> {
    address: &'a str,
    id: u32,
    root: u32,
}

impl ClusterAssignment {
    /// Snapshot a disjoint set whose ids are the view's address ids.
    pub fn from_disjoint_set(ds: &mut DisjointSet, view: &ChainView) -> Self {
        assert_eq!(ds.len(), view.address_count(), "disjoint set does not cover the corpus");
        let roots = ds.roots().into_iter().map(AddrId).collect();
        Self::with_aggregates(roots, view)
    }

    /// Build from any `address -> representative` labelling (representatives need not be roots).
    pub fn from_labels<K: Ord + Clone>(view: &ChainView, label: impl Fn(AddrId) -> K) -> Self {
        let mut first: std::collections::BTreeMap<K, AddrId> = Default::default();
        let mut roots = Vec::with_capacity(view.address_count());
        for a in 0..view.address_count() as u32 {
            let k = label(AddrId(a));
            let r = *first.entry(k).or_insert(AddrId(a));
            roots.push(r);
        }
        Self::with_aggregates(roots, view)
    }

    fn with_aggregates(roots: Vec<AddrId>, view: &ChainView) -> Self {
        let mut stats = vec![ClusterStats::default(); roots.len()];
        for r in &roots {
            stats[r.index()].address_count += 1;
        }
        let mut seen: Vec<AddrId> = Vec::new();
        for t in view.tx_indices() {
            seen.clear();
            for a in view.input_addresses(t) {
                let r = roots[a.index()];
                if !seen.contains(&r) {
                    seen.push(r);
                }
            }
            let time = view.tx(t).block_time;
            for r in &seen {
                let s = &mut stats[r.index()];
                s.tx_count += 1;
                s.first_time = Some(s.first_time.map_or(time, |f| f.min(time)));
                s.last_time = Some(s.last_time.map_or(time, |l| l.max(time)));
            }
        }
        ClusterAssignment { roots, stats }
    }

    pub fn address_count(&self) -> usize {
        self.roots.len()
    }

    pub fn root(&self, a: AddrId) -> AddrId {
        self.roots[a.index()]
    }

    pub fn roots(&self) -> &[AddrId] {
        &self.roots
    }

    pub fn is_root(&self, a: AddrId) -> bool {
        self.roots[a.index()] == a
    }

    pub fn stats(&self, root: AddrId) -> &ClusterStats {
        &self.stats[root.index()]
    }

    /// `(root, stats)` for every cluster, in root order.
    pub fn clusters(&self) -> impl Iterator<Item = (AddrId, &ClusterStats)> + '_ {
        self.roots
            .iter()
            .enumerate()
            .filter(|(i, r)| r.index() == *i)
            .map(move |(_, r)| (*r, &self.stats[r.index()]))
    }

    pub fn cluster_count(&self) -> usize {
        self.clusters().count()
    }

    /// Cluster of the first input (all inputs share it for clustered transactions).
    pub fn input_root(&self, view: &ChainView, tx: TxIdx) -> Option<AddrId> {
        view.input_addresses(tx).first().map(|a| self.root(*a))
    }

    /// Disjoint set reproducing this partition.
    pub fn to_disjoint_set(&self) -> DisjointSet {
        let raw: Vec<u32> = self.roots.iter().map(|r| r.0).collect();
        DisjointSet::from_roots(&raw).expect("assignment roots are canonical")
    }

    /// Every cluster of `self` lies inside one cluster of `coarser`.
    pub fn refines(&self, coarser: &ClusterAssignment) -> bool {
        if self.roots.len() != coarser.roots.len() {
            return false;
        }
        self.roots
            .iter()
            .enumerate()
            .all(|(a, r)| coarser.roots[a] == coarser.roots[r.index()])
    }

    pub fn write_clusters<W: Write>(&self, mut w: W, view: &ChainView) -> Result<(), ClusterError> {
        for (i, r) in self.roots.iter().enumerate() {
            let rec = ClusterRecord {
                address: view.address(AddrId(i as u32)),
                id: i as u32,
                root: r.0,
            };
            serde_json::to_writer(&mut w, &rec).map_err(|e| ClusterError::Io(e.to_string()))?;
            w.write_all(b"\n")?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_clusters<R: BufRead>(r: R, view: &ChainView) -> Result<Self, ClusterError> {
        let mut roots = vec![u32::MAX; view.address_count()];
        let mut count = 0usize;
        for (i, line) in r.lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let schema = |msg: String| ClusterError::Schema { line: i + 1, msg };
            let rec: ClusterRecord =
                serde_json::from_str(&line).map_err(|e| schema(e.to_string()))?;
            let id = view
                .address_id(rec.address)
                .ok_or_else(|| schema(format!("address {} not in corpus", rec.address)))?;
            if id.0 != rec.id {
                return Err(schema(format!("id {} does not match corpus id {}", rec.id, id.0)));
            }
            if rec.root as usize >= roots.len() {
                return Err(schema(format!("root {} out of range", rec.root)));
            }
            if roots[id.index()] == u32::MAX {
                count += 1;
            }
            roots[id.index()] = rec.root;
        }
        if count != view.address_count() {
            return Err(ClusterError::Schema {
                line: 0,
                msg: format!("{} of {} addresses assigned", count, view.address_count()),
            });
        }
        let mut ds = DisjointSet::from_roots(&roots)?;
        Ok(Self::from_disjoint_set(&mut ds, view))
    }

    /// CSV: root,address,address_count,tx_count,first_time,last_time
    pub fn write_summary<W: Write>(&self, mut w: W, view: &ChainView) -> Result<(), ClusterError> {
        writeln!(w, "root,address,address_count,tx_count,first_time,last_time")?;
        let opt = |t: Option<i64>| t.map(|v| v.to_string()).unwrap_or_default();
        for (root, s) in self.clusters() {
            writeln!(
                w,
                "{},{},{},{},{},{}",
                root.0,
                view.address(root),
                s.address_count,
                s.tx_count,
                opt(s.first_time),
                opt(s.last_time)
            )?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Union-find over all input addresses of every non-coinbase, non-CoinJoin transaction,
/// in corpus order.
pub fn multi_input_disjoint_set(view: &ChainView, rule: &CoinJoinRule) -> DisjointSet {
    let mut ds = DisjointSet::new(view.address_count());
    for t in view.tx_indices() {
        let tx = view.tx(t);
        if tx.coinbase || is_coinjoin(tx, rule) {
            continue;
        }
        let inputs = view.input_addresses(t);
        if let Some((first, rest)) = inputs.split_first() {
            let mut root = ds.find_unchecked(first.0);
            for a in rest {
                let ra = ds.find_unchecked(a.0);
                root = ds.link_roots(root, ra);
            }
        }
    }
    ds
}

pub fn multi_input_clustering(view: &ChainView, rule: &CoinJoinRule) -> ClusterAssignment {
    let mut ds = multi_input_disjoint_set(view, rule);
    ClusterAssignment::from_disjoint_set(&mut ds, view)
}
