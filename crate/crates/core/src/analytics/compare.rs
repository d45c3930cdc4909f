use std::collections::{BTreeMap, HashMap};
use std::io::{BufRead, Write};

use chrono::NaiveDate;
use num_rational::Ratio;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::AnalyticsError;
use crate::chain::{AddrId, ChainView, TxIdx};
use crate::cluster::ClusterAssignment;

/// Below this many addresses pair quadrants are counted exactly.
pub const EXACT_PAIR_LIMIT: usize = 10_000;

fn pairs(n: u128) -> u128 {
    n * n.saturating_sub(1) / 2
}

/// Probability that two distinct random addresses share a cluster.
pub fn pair_probability(clustering: &ClusterAssignment) -> Result<Ratio<u128>, AnalyticsError> {
    let n = clustering.address_count() as u128;
    if n < 2 {
        return Err(AnalyticsError::TooFewAddresses);
    }
    let same: u128 = clustering.clusters().map(|(_, s)| pairs(s.address_count as u128)).sum();
    Ok(Ratio::new(same, pairs(n)))
}

pub fn pair_probability_f64(clustering: &ClusterAssignment) -> Result<f64, AnalyticsError> {
    let r = pair_probability(clustering)?;
    Ok(*r.numer() as f64 / *r.denom() as f64)
}

/// Shares of address pairs by whether each clustering joins them.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Quadrants {
    pub neither: f64,
    pub ours_only: f64,
    pub theirs_only: f64,
    pub both: f64,
    /// Pairs examined; all pairs when exact.
    pub pairs: u128,
    pub exact: bool,
}

pub fn exact_quadrants(ours: &ClusterAssignment, theirs: &ClusterAssignment) -> Quadrants {
    let n = ours.address_count() as u128;
    let total = pairs(n);
    let a: u128 = ours.clusters().map(|(_, s)| pairs(s.address_count as u128)).sum();
    let b: u128 = theirs.clusters().map(|(_, s)| pairs(s.address_count as u128)).sum();
    let mut joint: HashMap<(AddrId, AddrId), u128> = HashMap::new();
    for i in 0..ours.address_count() {
        let id = AddrId(i as u32);
        *joint.entry((ours.root(id), theirs.root(id))).or_default() += 1;
    }
    let both: u128 = joint.values().map(|&c| pairs(c)).sum();
    let share = |x: u128| if total == 0 { 0.0 } else { x as f64 / total as f64 * 100.0 };
    Quadrants {
        neither: share(total - a - b + both),
        ours_only: share(a - both),
        theirs_only: share(b - both),
        both: share(both),
        pairs: total,
        exact: true,
    }
}

pub fn sampled_quadrants(ours: &ClusterAssignment, theirs: &ClusterAssignment, samples: usize, seed: u64) -> Quadrants {
    let n = ours.address_count() as u32;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut counts = [0u64; 4];
    if n >= 2 {
        for _ in 0..samples {
            let x = rng.gen_range(0..n);
            let mut y = rng.gen_range(0..n - 1);
            if y >= x {
                y += 1;
            }
            let (x, y) = (AddrId(x), AddrId(y));
            let o = ours.root(x) == ours.root(y);
            let t = theirs.root(x) == theirs.root(y);
            counts[(o as usize) | ((t as usize) << 1)] += 1;
        }
    }
    let share = |c: u64| if samples == 0 { 0.0 } else { c as f64 / samples as f64 * 100.0 };
    Quadrants {
        neither: share(counts[0]),
        ours_only: share(counts[1]),
        theirs_only: share(counts[2]),
        both: share(counts[3]),
        pairs: samples as u128,
        exact: false,
    }
}

/// Daily BTC prices in USD, keyed by days since 1970-01-01.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PriceSeries(pub BTreeMap<i64, f64>);

/// Reads a `date,usd_per_btc` CSV with ISO dates.
pub fn read_prices<R: BufRead>(r: R) -> Result<PriceSeries, AnalyticsError> {
    let mut out = BTreeMap::new();
    for (i, line) in r.lines().enumerate() {
        let line = line?;
        let bad = |msg: &str| AnalyticsError::Price {
            line: i + 1,
            msg: msg.to_string(),
        };
        if i == 0 && line.starts_with("date") || line.trim().is_empty() {
            continue;
        }
        let (date, price) = line.split_once(',').ok_or_else(|| bad("expected date,usd_per_btc"))?;
        let day = NaiveDate::parse_from_str(date.trim(), "%Y-%m-%d").map_err(|_| bad("bad date"))?;
        let p: f64 = price.trim().parse().map_err(|_| bad("bad price"))?;
        if !p.is_finite() || p < 0.0 {
            return Err(bad("bad price"));
        }
        out.insert(day.signed_duration_since(NaiveDate::default()).num_days(), p);
    }
    Ok(PriceSeries(out))
}

impl PriceSeries {
    /// Price on the day of `time`, or the latest earlier day listed.
    pub fn at(&self, time: i64) -> Option<f64> {
        self.0.range(..=time.div_euclid(86_400)).next_back().map(|(_, p)| *p)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonTable {
    pub addresses: usize,
    pub ours_clusters: usize,
    pub theirs_clusters: usize,
    pub ours_largest: u32,
    pub theirs_largest: u32,
    /// Share of the considered transactions with a change prediction.
    pub ours_coverage: f64,
    pub theirs_coverage: f64,
    pub quadrants: Quadrants,
    pub quadrant_seed: u64,
    /// Transactions where both predict the same change output.
    pub overlapping: usize,
    pub overlapping_value: u64,
    /// Transactions where both predict, but different outputs.
    pub conflicting: usize,
    pub conflicting_value: u64,
    pub conflicting_usd: Option<f64>,
}

/// Compares two clusterings and the change predictions they were built from.
/// Values are total transaction output values.
#[allow(clippy::too_many_arguments)]
pub fn compare_clusterings(
    view: &ChainView,
    ours: &ClusterAssignment,
    theirs: &ClusterAssignment,
    ours_changes: &[(TxIdx, Option<usize>)],
    theirs_changes: &[(TxIdx, Option<usize>)],
    considered: usize,
    samples: usize,
    seed: u64,
    prices: Option<&PriceSeries>,
) -> Result<ComparisonTable, AnalyticsError> {
    if ours.address_count() != theirs.address_count() {
        return Err(AnalyticsError::SizeMismatch(ours.address_count(), theirs.address_count()));
    }
    let quadrants = if ours.address_count() < EXACT_PAIR_LIMIT {
        exact_quadrants(ours, theirs)
    } else {
        sampled_quadrants(ours, theirs, samples, seed)
    };
    let largest = |c: &ClusterAssignment| c.clusters().map(|(_, s)| s.address_count).max().unwrap_or(0);
    let ours_map: BTreeMap<TxIdx, usize> = ours_changes.iter().filter_map(|(t, c)| c.map(|c| (*t, c))).collect();
    let theirs_map: BTreeMap<TxIdx, usize> = theirs_changes.iter().filter_map(|(t, c)| c.map(|c| (*t, c))).collect();
    let coverage = |m: &BTreeMap<TxIdx, usize>| if considered == 0 { 0.0 } else { m.len() as f64 / considered as f64 };
    let mut table = ComparisonTable {
        addresses: ours.address_count(),
        ours_clusters: ours.cluster_count(),
        theirs_clusters: theirs.cluster_count(),
        ours_largest: largest(ours),
        theirs_largest: largest(theirs),
        ours_coverage: coverage(&ours_map),
        theirs_coverage: coverage(&theirs_map),
        quadrants,
        quadrant_seed: seed,
        overlapping: 0,
        overlapping_value: 0,
        conflicting: 0,
        conflicting_value: 0,
        conflicting_usd: prices.map(|_| 0.0),
    };
    for (t, a) in &ours_map {
        let Some(b) = theirs_map.get(t) else { continue };
        let tx = view.tx(*t);
        let value = tx.total_output_value();
        if a == b {
            table.overlapping += 1;
            table.overlapping_value += value;
        } else {
            table.conflicting += 1;
            table.conflicting_value += value;
            if let (Some(usd), Some(p)) = (table.conflicting_usd.as_mut(), prices) {
                *usd += value as f64 / 1e8 * p.at(tx.block_time).unwrap_or(0.0);
            }
        }
    }
    Ok(table)
}

impl ComparisonTable {
    /// `measure,ours,theirs` rows; single-valued measures leave `theirs` empty.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "measure,ours,theirs")?;
        writeln!(w, "clusters,{},{}", self.ours_clusters, self.theirs_clusters)?;
        writeln!(w, "largest_cluster_addresses,{},{}", self.ours_largest, self.theirs_largest)?;
        writeln!(w, "coverage,{:.6},{:.6}", self.ours_coverage, self.theirs_coverage)?;
        let q = &self.quadrants;
        writeln!(w, "pairs_clustered_by_neither_percent,{:.4},", q.neither)?;
        writeln!(w, "pairs_clustered_only_by_ours_percent,{:.4},", q.ours_only)?;
        writeln!(w, "pairs_clustered_only_by_theirs_percent,{:.4},", q.theirs_only)?;
        writeln!(w, "pairs_clustered_by_both_percent,{:.4},", q.both)?;
        writeln!(w, "pairs_exact,{},", q.exact)?;
        writeln!(w, "pair_sample_seed,{},", self.quadrant_seed)?;
        writeln!(w, "overlapping_predictions,{},", self.overlapping)?;
        writeln!(w, "overlapping_value_sat,{},", self.overlapping_value)?;
        writeln!(w, "conflicting_predictions,{},", self.conflicting)?;
        writeln!(w, "conflicting_value_sat,{},", self.conflicting_value)?;
        if let Some(usd) = self.conflicting_usd {
            writeln!(w, "conflicting_value_usd,{usd:.2},")?;
        }
        Ok(())
    }
}
