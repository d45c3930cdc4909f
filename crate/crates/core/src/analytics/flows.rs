use std::collections::{BTreeMap, BTreeSet};
use std::io::Write;

use serde::Serialize;

use super::AnalyticsError;
use crate::chain::{AddrId, ChainView, TagCategory, TagSet};
use crate::cluster::ClusterAssignment;

/// Satoshi sent per source entity label.
pub type FlowVolumes = BTreeMap<String, u64>;

/// Sums, per source entity, the value of outputs that leave a cluster tagged
/// `src` for a different cluster tagged `dst`. A cluster with several source
/// labels is attributed to the smallest one.
pub fn flows(
    view: &ChainView,
    clustering: &ClusterAssignment,
    tags: &TagSet,
    src: TagCategory,
    dst: TagCategory,
) -> Result<FlowVolumes, AnalyticsError> {
    if tags.is_empty() {
        return Ok(FlowVolumes::new());
    }
    for c in [src, dst] {
        if !tags.has_category(c) {
            return Err(AnalyticsError::EmptyCategory(format!("{c:?}").to_lowercase()));
        }
    }
    let tagged = tags.by_cluster(view, clustering);
    let mut source: BTreeMap<AddrId, &str> = BTreeMap::new();
    let mut sinks: BTreeSet<AddrId> = BTreeSet::new();
    for (root, set) in &tagged {
        if let Some((label, _)) = set.iter().filter(|(_, c)| *c == src).min() {
            source.insert(*root, label.as_str());
        }
        if set.iter().any(|(_, c)| *c == dst) {
            sinks.insert(*root);
        }
    }
    let mut out = FlowVolumes::new();
    for t in view.tx_indices() {
        let Some(from) = clustering.input_root(view, t) else { continue };
        let Some(label) = source.get(&from) else { continue };
        let tx = view.tx(t);
        let mut sum = 0u64;
        for (o, a) in tx.outputs.iter().zip(view.output_addresses(t)) {
            let r = clustering.root(*a);
            if r != from && sinks.contains(&r) {
                sum += o.value;
            }
        }
        if sum > 0 {
            *out.entry(label.to_string()).or_default() += sum;
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FlowRow {
    pub entity: String,
    pub volume_before: u64,
    pub volume_after: u64,
    /// None when the volume before is zero.
    pub percent_change: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct FlowTable {
    pub rows: Vec<FlowRow>,
}

impl FlowTable {
    pub fn compare(before: &FlowVolumes, after: &FlowVolumes) -> Self {
        let names: BTreeSet<&String> = before.keys().chain(after.keys()).collect();
        let rows = names
            .into_iter()
            .map(|n| {
                let b = before.get(n).copied().unwrap_or(0);
                let a = after.get(n).copied().unwrap_or(0);
                FlowRow {
                    entity: n.clone(),
                    volume_before: b,
                    volume_after: a,
                    percent_change: (b > 0).then(|| (a as f64 - b as f64) / b as f64 * 100.0),
                }
            })
            .collect();
        FlowTable { rows }
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "entity,volume_before,volume_after,change_percent")?;
        for r in &self.rows {
            let pct = r.percent_change.map(|p| format!("{p:.2}")).unwrap_or_default();
            writeln!(w, "{},{},{},{}", r.entity, r.volume_before, r.volume_after, pct)?;
        }
        Ok(())
    }
}
