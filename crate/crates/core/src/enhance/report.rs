use std::collections::BTreeMap;
use std::io::Write;

use serde::Serialize;

use super::EnhanceError;
use crate::chain::AddrId;
use crate::cluster::ClusterAssignment;

pub const PERCENTILES: [f64; 5] = [90.0, 99.0, 99.9, 99.99, 99.999];

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AffectedCluster {
    pub root: u32,
    /// Base clusters joined into this one.
    pub constituents: usize,
    /// Enhanced size minus the largest constituent's size.
    pub address_increase: u32,
    pub tx_increase: u32,
    /// Change of the largest time gap between transactions; only when some
    /// constituent had at least two transactions.
    pub time_gap_change: Option<i64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct CollapseReport {
    pub affected: Vec<AffectedCluster>,
    /// Transaction counts of every constituent except the largest of its cluster.
    pub smaller_tx_counts: Vec<u32>,
    /// (percentile, value) over `smaller_tx_counts`.
    pub percentiles: Vec<(f64, u32)>,
    pub skipped_merges: usize,
    pub redundant_merges: usize,
}

/// Nearest-rank percentile of ascending `sorted`.
pub fn percentile(sorted: &[u32], p: f64) -> Option<u32> {
    if sorted.is_empty() {
        return None;
    }
    // the small offset keeps 99.9% of 1000 at rank 999 despite rounding
    let rank = (p * sorted.len() as f64 / 100.0 - 1e-9).ceil() as usize;
    Some(sorted[rank.clamp(1, sorted.len()) - 1])
}

/// Compares an enhanced clustering with the base clustering it was built from.
pub fn collapse_report(before: &ClusterAssignment, after: &ClusterAssignment) -> Result<CollapseReport, EnhanceError> {
    if before.address_count() != after.address_count() {
        return Err(EnhanceError::SizeMismatch(before.address_count(), after.address_count()));
    }
    let mut groups: BTreeMap<AddrId, Vec<AddrId>> = BTreeMap::new();
    for (r, _) in before.clusters() {
        groups.entry(after.root(r)).or_default().push(r);
    }
    let mut report = CollapseReport::default();
    for (root, mut parts) in groups {
        if parts.len() < 2 {
            continue;
        }
        let s = after.stats(root);
        parts.sort_by_key(|r| (std::cmp::Reverse(before.stats(*r).tx_count), *r));
        let max_addr = parts.iter().map(|r| before.stats(*r).address_count).max().unwrap_or(0);
        let max_tx = before.stats(parts[0]).tx_count;
        report.smaller_tx_counts.extend(parts[1..].iter().map(|r| before.stats(*r).tx_count));
        let gaps: Vec<i64> = parts
            .iter()
            .map(|r| before.stats(*r))
            .filter(|c| c.tx_count >= 2)
            .map(|c| c.max_time_gap())
            .collect();
        report.affected.push(AffectedCluster {
            root: root.0,
            constituents: parts.len(),
            address_increase: s.address_count - max_addr,
            tx_increase: s.tx_count - max_tx,
            time_gap_change: gaps.iter().max().map(|g| s.max_time_gap() - g),
        });
    }
    let mut sorted = report.smaller_tx_counts.clone();
    sorted.sort_unstable();
    report.percentiles = PERCENTILES
        .iter()
        .filter_map(|&p| percentile(&sorted, p).map(|v| (p, v)))
        .collect();
    Ok(report)
}

fn log2_bucket(v: u32) -> u32 {
    if v == 0 {
        0
    } else {
        1 << (31 - v.leading_zeros())
    }
}

impl CollapseReport {
    pub fn write_text<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "affected_clusters: {}", self.affected.len())?;
        writeln!(w, "merged_base_clusters: {}", self.smaller_tx_counts.len())?;
        writeln!(w, "skipped_merges: {}", self.skipped_merges)?;
        writeln!(w, "redundant_merges: {}", self.redundant_merges)?;
        let total_addr: u64 = self.affected.iter().map(|a| a.address_increase as u64).sum();
        let total_tx: u64 = self.affected.iter().map(|a| a.tx_increase as u64).sum();
        writeln!(w, "address_increase_total: {total_addr}")?;
        writeln!(w, "tx_increase_total: {total_tx}")?;
        for (p, v) in &self.percentiles {
            writeln!(w, "smaller_cluster_tx_count_p{p}: {v}")?;
        }
        Ok(())
    }

    /// One row per affected cluster.
    pub fn write_clusters_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "root,constituents,address_increase,tx_increase,time_gap_change")?;
        for a in &self.affected {
            let gap = a.time_gap_change.map(|g| g.to_string()).unwrap_or_default();
            writeln!(
                w,
                "{},{},{},{},{}",
                a.root, a.constituents, a.address_increase, a.tx_increase, gap
            )?;
        }
        Ok(())
    }

    /// Counts of affected clusters per power-of-two bucket of the increases.
    pub fn write_histogram_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        let mut hist: BTreeMap<(&str, u32), usize> = BTreeMap::new();
        for a in &self.affected {
            *hist.entry(("address", log2_bucket(a.address_increase))).or_default() += 1;
            *hist.entry(("tx", log2_bucket(a.tx_increase))).or_default() += 1;
        }
        writeln!(w, "measure,bucket_lower,clusters")?;
        for ((m, b), n) in hist {
            writeln!(w, "{m},{b},{n}")?;
        }
        Ok(())
    }
}
