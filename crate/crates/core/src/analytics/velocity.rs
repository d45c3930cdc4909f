use std::collections::BTreeMap;
use std::io::Write;

use super::AnalyticsError;
use crate::chain::ChainView;
use crate::cluster::ClusterAssignment;

pub const DAY: i64 = 86_400;

/// Value moved per time bucket after removing outputs that return to the
/// input cluster. Buckets are aligned to multiples of `bucket` seconds and
/// cover every bucket between the first and last transaction.
pub fn velocity(
    view: &ChainView,
    clustering: &ClusterAssignment,
    bucket: i64,
) -> Result<Vec<(i64, u64)>, AnalyticsError> {
    if bucket <= 0 {
        return Err(AnalyticsError::Bucket);
    }
    let mut buckets: BTreeMap<i64, u64> = BTreeMap::new();
    for t in view.tx_indices() {
        let tx = view.tx(t);
        let slot = buckets.entry(tx.block_time.div_euclid(bucket) * bucket).or_default();
        if tx.coinbase {
            continue;
        }
        let Some(from) = clustering.input_root(view, t) else { continue };
        *slot += tx
            .outputs
            .iter()
            .zip(view.output_addresses(t))
            .filter(|(_, a)| clustering.root(**a) != from)
            .map(|(o, _)| o.value)
            .sum::<u64>();
    }
    let mut series = Vec::new();
    if let (Some((&first, _)), Some((&last, _))) = (buckets.first_key_value(), buckets.last_key_value()) {
        let mut b = first;
        while b <= last {
            series.push((b, buckets.get(&b).copied().unwrap_or(0)));
            b += bucket;
        }
    }
    Ok(series)
}

pub fn write_velocity_csv<W: Write>(mut w: W, series: &[(i64, u64)]) -> std::io::Result<()> {
    writeln!(w, "bucket_start,value")?;
    for (b, v) in series {
        writeln!(w, "{b},{v}")?;
    }
    Ok(())
}
