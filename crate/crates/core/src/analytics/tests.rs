use std::collections::BTreeMap;

use super::*;
use crate::chain::fixture::Fixture;
use crate::chain::{ChainView, CoinJoinRule, TagCategory, TagSet, TxIdx};
use crate::cluster::{multi_input_clustering, ClusterAssignment};
use crate::ground_truth::tests::random_fixture;
use num_rational::Ratio;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn labelled(view: &ChainView, groups: &[&[&str]]) -> ClusterAssignment {
    ClusterAssignment::from_labels(view, |a| {
        let name = view.address(a);
        groups
            .iter()
            .position(|g| g.contains(&name))
            .map_or(name.to_string(), |i| format!("#{i}"))
    })
}

fn partition_view(n: usize) -> ChainView {
    let mut f = Fixture::new();
    for i in 0..n {
        f.coinbase(&[(format!("x{i}").as_str(), 1_000)]);
    }
    f.view()
}

fn random_partition(view: &ChainView, rng: &mut ChaCha8Rng, k: u32) -> ClusterAssignment {
    let labels: Vec<u32> = (0..view.address_count()).map(|_| rng.gen_range(0..k)).collect();
    ClusterAssignment::from_labels(view, |a| labels[a.index()])
}

#[test]
fn pair_probability_examples() {
    let view = partition_view(6);
    let singletons = ClusterAssignment::from_labels(&view, |a| a.0);
    assert_eq!(pair_probability(&singletons).unwrap(), Ratio::from_integer(0));
    let one = ClusterAssignment::from_labels(&view, |_| 0);
    assert_eq!(pair_probability(&one).unwrap(), Ratio::from_integer(1));
    let sizes = labelled(&view, &[&["x0", "x1", "x2"], &["x3", "x4"]]);
    assert_eq!(pair_probability(&sizes).unwrap(), Ratio::new(4, 15));
    assert!(matches!(
        pair_probability(&ClusterAssignment::from_labels(&partition_view(1), |a| a.0)),
        Err(AnalyticsError::TooFewAddresses)
    ));
}

#[test]
fn pair_probability_counts_pairs() {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    for _ in 0..100 {
        let n = rng.gen_range(2..40);
        let view = partition_view(n);
        let k = rng.gen_range(1..n as u32 + 1);
        let c = random_partition(&view, &mut rng, k);
        let mut together = 0u128;
        for i in 0..n {
            for j in i + 1..n {
                together += (c.roots()[i] == c.roots()[j]) as u128;
            }
        }
        let total = (n * (n - 1) / 2) as u128;
        assert_eq!(pair_probability(&c).unwrap(), Ratio::new(together, total));
    }
}

proptest! {
    #[test]
    fn merging_never_lowers_pair_probability(seed in any::<u64>(), n in 2usize..60) {
        let view = partition_view(n);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let fine = random_partition(&view, &mut rng, n as u32);
        let merge: Vec<u32> = (0..n).map(|_| rng.gen_range(0..3)).collect();
        let coarse = ClusterAssignment::from_labels(&view, |a| merge[fine.root(a).index()]);
        prop_assert!(fine.refines(&coarse));
        prop_assert!(pair_probability(&fine).unwrap() <= pair_probability(&coarse).unwrap());
    }
}

/// Inputs 95100 from a1, pays 75000 to b1 and 20000 change to a2.
fn fig1() -> (ChainView, ClusterAssignment) {
    let mut f = Fixture::new();
    let cb = f.coinbase(&[("a1", 95_100)]);
    f.spend(&[(cb, 0)], &[("b1", 75_000), ("a2", 20_000)]);
    let view = f.view();
    let c = labelled(&view, &[&["a1", "a2"]]);
    (view, c)
}

#[test]
fn velocity_counts_spend_only() {
    let (view, c) = fig1();
    let s = velocity(&view, &c, DAY).unwrap();
    assert_eq!(s.len(), 1);
    assert_eq!(s[0].1, 75_000);
    let all = ClusterAssignment::from_labels(&view, |_| 0);
    assert!(velocity(&view, &all, DAY).unwrap().iter().all(|(_, v)| *v == 0));
    assert!(matches!(velocity(&view, &c, 0), Err(AnalyticsError::Bucket)));
}

#[test]
fn finer_clustering_moves_more_value() {
    for seed in 0..10 {
        let f = random_fixture(seed, 300);
        let view = f.view();
        let base = multi_input_clustering(&view, &CoinJoinRule::default());
        let merge: Vec<u32> = (0..view.address_count()).map(|a| (a as u32 * 7 + seed as u32) % 5).collect();
        let coarse = ClusterAssignment::from_labels(&view, |a| merge[base.root(a).index()]);
        let fine_s = velocity(&view, &base, 3_600).unwrap();
        let coarse_s = velocity(&view, &coarse, 3_600).unwrap();
        assert_eq!(fine_s.len(), coarse_s.len());
        let mut totals: BTreeMap<i64, u64> = BTreeMap::new();
        for t in view.tx_indices() {
            let tx = view.tx(t);
            if !tx.coinbase {
                *totals.entry(tx.block_time.div_euclid(3_600) * 3_600).or_default() += tx.total_output_value();
            }
        }
        for (a, b) in fine_s.iter().zip(&coarse_s) {
            assert_eq!(a.0, b.0);
            assert!(a.1 >= b.1);
            assert!(a.1 <= totals.get(&a.0).copied().unwrap_or(0));
        }
        for w in fine_s.windows(2) {
            assert_eq!(w[1].0 - w[0].0, 3_600);
        }
    }
}

fn tx(view: &ChainView, f: &Fixture, pos: usize) -> TxIdx {
    view.lookup(f.txid(pos)).unwrap()
}

#[test]
fn meiklejohn_fixtures() {
    let mut f = Fixture::new();
    let cb = f.coinbase(&[("a1", 100_000), ("b0", 50_000)]);
    // both outputs fresh: ambiguous
    let t1 = f.spend(&[(cb, 0)], &[("p1", 30_000), ("c1", 60_000)]);
    // b0 seen before, c2 fresh but reused later: only the local rule fires
    let t2 = f.spend(&[(t1, 1)], &[("b0", 20_000), ("c2", 30_000)]);
    let t3 = f.spend(&[(cb, 1)], &[("c2", 10_000), ("q1", 30_000)]);
    // q1 was fresh in t3 and comes back as an output here
    let t4 = f.spend(&[(t3, 1)], &[("q1", 10_000), ("r1", 10_000)]);
    let view = f.view();
    let txs: Vec<TxIdx> = [t1, t2, t3, t4].iter().map(|&p| tx(&view, &f, p)).collect();
    let local: Vec<Option<usize>> = meiklejohn_predict(&view, &txs, MeiklejohnVariant::Local).into_iter().map(|x| x.1).collect();
    let global: Vec<Option<usize>> = meiklejohn_predict(&view, &txs, MeiklejohnVariant::Global).into_iter().map(|x| x.1).collect();
    assert_eq!(local, vec![None, Some(1), Some(1), Some(1)]);
    assert_eq!(global, vec![None, None, None, Some(1)]);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(30))]
    #[test]
    fn global_predictions_are_local_predictions(seed in any::<u64>()) {
        let f = random_fixture(seed, 300);
        let view = f.view();
        let txs: Vec<TxIdx> = view.tx_indices().filter(|t| view.tx(*t).outputs.len() == 2 && !view.tx(*t).coinbase).collect();
        let local = meiklejohn_predict(&view, &txs, MeiklejohnVariant::Local);
        let global = meiklejohn_predict(&view, &txs, MeiklejohnVariant::Global);
        for (l, g) in local.iter().zip(&global) {
            if let Some(i) = g.1 {
                let a = view.output_addresses(g.0)[i];
                prop_assert_eq!(view.first_seen(a), g.0);
                let other = view.output_addresses(g.0)[1 - i];
                if view.first_seen(other) != g.0 {
                    prop_assert_eq!(l.1, Some(i));
                }
            }
        }
    }
}

#[test]
fn change_clustering_joins_predicted_change() {
    let (view, _) = fig1();
    let base = multi_input_clustering(&view, &CoinJoinRule::default());
    let t = TxIdx(1);
    let c = change_clustering(&view, &base, &[(t, Some(1))]);
    let id = |s| view.address_id(s).unwrap();
    assert_eq!(c.root(id("a1")), c.root(id("a2")));
    assert_ne!(c.root(id("a1")), c.root(id("b1")));
}

fn flow_fixture() -> (ChainView, TagSet) {
    let mut f = Fixture::new();
    let cb = f.coinbase(&[("dn1", 50_000), ("u1", 9_000)]);
    f.spend(&[(cb, 0)], &[("ex1", 10_000), ("dn2", 39_000)]);
    f.spend(&[(cb, 1)], &[("ex1", 8_000)]);
    let mut tags = TagSet::new();
    tags.insert("dn1", "market", TagCategory::Darknet).unwrap();
    tags.insert("ex1", "exchange", TagCategory::Exchange).unwrap();
    (f.view(), tags)
}

#[test]
fn flow_examples() {
    let (view, tags) = flow_fixture();
    let base = multi_input_clustering(&view, &CoinJoinRule::default());
    let v = flows(&view, &base, &tags, TagCategory::Darknet, TagCategory::Exchange).unwrap();
    assert_eq!(v, BTreeMap::from([("market".to_string(), 10_000)]));
    assert!(flows(&view, &base, &TagSet::new(), TagCategory::Darknet, TagCategory::Exchange)
        .unwrap()
        .is_empty());
    assert!(matches!(
        flows(&view, &base, &tags, TagCategory::Gambling, TagCategory::Exchange),
        Err(AnalyticsError::EmptyCategory(_))
    ));
    // once the exchange address joins the market cluster the payment is internal
    let merged = labelled(&view, &[&["dn1", "ex1"]]);
    let after = flows(&view, &merged, &tags, TagCategory::Darknet, TagCategory::Exchange).unwrap();
    let table = FlowTable::compare(&v, &after);
    assert_eq!(table.rows.len(), 1);
    assert_eq!((table.rows[0].volume_before, table.rows[0].volume_after), (10_000, 0));
    assert_eq!(table.rows[0].percent_change, Some(-100.0));
    let mut csv = Vec::new();
    table.write_csv(&mut csv).unwrap();
    assert_eq!(
        String::from_utf8(csv).unwrap(),
        "entity,volume_before,volume_after,change_percent\nmarket,10000,0,-100.00\n"
    );
}

#[test]
fn flows_match_generator_ledger() {
    use crate::synth::{generate, CategoryChoice, EntityKind, SynthConfig};
    let mut cfg = SynthConfig::small(15);
    cfg.coinjoins_per_day = 0.0;
    let m = cfg.groups.iter_mut().find(|g| g.kind == EntityKind::Merchant).unwrap();
    m.category = Some(CategoryChoice::Darknet);
    m.payees = Some(BTreeMap::from([(EntityKind::Exchange, 1.0)]));
    let corpus = generate(&cfg, 5).unwrap();
    let view = corpus.view().unwrap();
    let labels = corpus.labels.indexed(&view).unwrap();
    let entity = ClusterAssignment::from_labels(&view, |a| labels.owner_of(a));
    let got = flows(&view, &entity, &corpus.tags, TagCategory::Darknet, TagCategory::Exchange).unwrap();
    let info = &corpus.labels.entities;
    let mut want: BTreeMap<String, u64> = BTreeMap::new();
    for p in &corpus.ledger {
        let (a, b) = (&info[p.payer as usize], &info[p.payee as usize]);
        if a.category == Some(TagCategory::Darknet) && b.category == Some(TagCategory::Exchange) {
            *want.entry(a.name.clone()).or_default() += p.value;
        }
    }
    assert!(!want.is_empty());
    assert_eq!(got, want);
}

#[test]
fn quadrant_examples() {
    let view = partition_view(30);
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let c = random_partition(&view, &mut rng, 4);
    let q = exact_quadrants(&c, &c);
    assert_eq!((q.ours_only, q.theirs_only), (0.0, 0.0));
    let singletons = ClusterAssignment::from_labels(&view, |a| a.0);
    let one = ClusterAssignment::from_labels(&view, |_| 0);
    let q = exact_quadrants(&singletons, &one);
    assert_eq!((q.both, q.theirs_only), (0.0, 100.0));

    // brute-force enumeration
    let d = random_partition(&view, &mut rng, 3);
    let mut counts = [0u32; 4];
    for i in 0..30 {
        for j in i + 1..30 {
            let o = c.roots()[i] == c.roots()[j];
            let t = d.roots()[i] == d.roots()[j];
            counts[(o as usize) | ((t as usize) << 1)] += 1;
        }
    }
    let q = exact_quadrants(&c, &d);
    let pct = |n: u32| n as f64 / 435.0 * 100.0;
    for (got, n) in [q.neither, q.ours_only, q.theirs_only, q.both].iter().zip(counts) {
        assert!((got - pct(n)).abs() < 1e-9);
    }
    assert!((q.neither + q.ours_only + q.theirs_only + q.both - 100.0).abs() < 1e-9);
}

#[test]
fn sampled_quadrants_track_exact() {
    let view = partition_view(1000);
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let a = random_partition(&view, &mut rng, 3);
    let b = random_partition(&view, &mut rng, 2);
    let e = exact_quadrants(&a, &b);
    let s = sampled_quadrants(&a, &b, 20_000, 99);
    for (x, y) in [(e.neither, s.neither), (e.ours_only, s.ours_only), (e.theirs_only, s.theirs_only), (e.both, s.both)] {
        assert!((x - y).abs() <= 2.0, "{x} vs {y}");
    }
    assert_eq!(s, sampled_quadrants(&a, &b, 20_000, 99));
}

#[test]
fn comparison_counts_predictions() {
    let (view, _) = fig1();
    let base = multi_input_clustering(&view, &CoinJoinRule::default());
    let t = TxIdx(1);
    let mut prices = Vec::new();
    prices.extend_from_slice(b"date,usd_per_btc\n2017-07-14,2000\n");
    let series = read_prices(&prices[..]).unwrap();
    assert_eq!(series.at(1_500_000_000), Some(2000.0));
    assert_eq!(series.at(1_400_000_000), None);
    let ours = [(t, Some(1))];
    let theirs = [(t, Some(0))];
    let c1 = change_clustering(&view, &base, &ours);
    let c2 = change_clustering(&view, &base, &theirs);
    let table = compare_clusterings(&view, &c1, &c2, &ours, &theirs, 1, 1000, 0, Some(&series)).unwrap();
    assert_eq!((table.overlapping, table.conflicting), (0, 1));
    assert_eq!(table.conflicting_value, 95_000);
    assert!((table.conflicting_usd.unwrap() - 0.00095 * 2000.0).abs() < 1e-9);
    assert_eq!(table.ours_coverage, 1.0);
    let same = compare_clusterings(&view, &c1, &c1, &ours, &ours, 1, 1000, 0, None).unwrap();
    assert_eq!((same.overlapping, same.conflicting, same.conflicting_usd), (1, 0, None));
    assert!(read_prices(&b"2017-13-01,5\n"[..]).is_err());
}
