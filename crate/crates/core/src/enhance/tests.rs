use super::*;
use crate::chain::fixture::Fixture;
use crate::chain::{ChainView, CoinJoinRule, TxIdx};
use crate::cluster::multi_input_clustering;
use crate::forest::{ForestModel, ForestParams, Node, Tree, Variant};
use crate::ground_truth::tests::random_fixture;
use crate::heuristics::{candidates, HeuristicKind};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn pred(view: &ChainView, f: &Fixture, pos: usize, p: [f64; 2]) -> Prediction {
    Prediction {
        tx: view.lookup(f.txid(pos)).unwrap(),
        probability: p,
        variant: Variant::Full,
    }
}

/// `a1` funds two payments, both reaching `b1`.
fn two_payments() -> (Fixture, usize, usize) {
    let mut f = Fixture::new();
    let cb0 = f.coinbase(&[("a1", 10_000)]);
    let cb1 = f.coinbase(&[("a1", 10_000)]);
    let t1 = f.spend(&[(cb0, 0)], &[("b1", 5_000), ("c1", 4_000)]);
    let t2 = f.spend(&[(cb1, 0)], &[("b1", 4_000), ("d1", 5_000)]);
    (f, t1, t2)
}

fn same(a: &crate::cluster::ClusterAssignment, view: &ChainView, x: &str, y: &str) -> bool {
    a.root(view.address_id(x).unwrap()) == a.root(view.address_id(y).unwrap())
}

#[test]
fn thresholds() {
    assert!(Thresholds::new(0.99, 0.01).is_ok());
    assert!(Thresholds::new(0.5, 0.5).is_err());
    assert!(Thresholds::new(1.2, 0.1).is_err());
    let t = Thresholds::default();
    assert_eq!(t.change_of([0.995, 0.2]), Some(0));
    assert_eq!(t.change_of([0.995, 0.992]), None);
    assert_eq!(t.change_of([0.5, 0.5]), None);
    assert!(t.is_spend(0.01) && !t.is_spend(0.011));
}

#[test]
fn confident_change_is_merged() {
    let (f, t1, _) = two_payments();
    let view = f.view();
    let base = multi_input_clustering(&view, &CoinJoinRule::default());
    let ps = PredictionSet::new(vec![pred(&view, &f, t1, [0.3, 0.995])], Thresholds::default());
    let naive = naive_enhance(&view, &base, &ps);
    assert!(same(&naive.assignment, &view, "a1", "c1"));
    assert_eq!(naive.stats.merged, 1);
    assert_eq!(naive.report.affected.len(), 1);
    assert_eq!(naive.report.affected[0].address_increase, 1);
    let (constrained, _) = constrained_enhance(&view, &base, &ps);
    assert_eq!(constrained.assignment, naive.assignment);

    let both = PredictionSet::new(vec![pred(&view, &f, t1, [0.995, 0.992])], Thresholds::default());
    let out = naive_enhance(&view, &base, &both);
    assert_eq!(out.assignment, base);
    assert_eq!(out.stats.both_above, 1);
    assert!(out.report.affected.is_empty());
}

#[test]
fn spend_edge_blocks_later_change_edge() {
    let (f, t1, t2) = two_payments();
    let view = f.view();
    let base = multi_input_clustering(&view, &CoinJoinRule::default());
    let ps = PredictionSet::new(
        vec![pred(&view, &f, t1, [0.005, 0.5]), pred(&view, &f, t2, [0.995, 0.2])],
        Thresholds::default(),
    );
    let naive = naive_enhance(&view, &base, &ps);
    assert!(same(&naive.assignment, &view, "a1", "b1"));
    let (c, store) = constrained_enhance(&view, &base, &ps);
    assert!(!same(&c.assignment, &view, "a1", "b1"));
    assert_eq!(c.stats.skipped, 1);
    assert_eq!(c.report.skipped_merges, 1);
    assert_eq!(store.pairs().len(), 1);
    assert!(c.assignment.refines(&naive.assignment));
}

#[test]
fn constraints_follow_merged_clusters() {
    // a1 -> b1 is a spend; a1 merges with c1, then c1's cluster reaching b1 is refused
    let mut f = Fixture::new();
    let cb0 = f.coinbase(&[("a1", 10_000)]);
    let cb1 = f.coinbase(&[("c1", 10_000)]);
    let t1 = f.spend(&[(cb0, 0)], &[("b1", 5_000), ("c1", 4_000)]);
    let t2 = f.spend(&[(cb1, 0)], &[("e1", 3_000), ("b1", 6_000)]);
    let view = f.view();
    let base = multi_input_clustering(&view, &CoinJoinRule::default());
    let ps = PredictionSet::new(
        vec![pred(&view, &f, t1, [0.001, 0.999]), pred(&view, &f, t2, [0.3, 0.999])],
        Thresholds::default(),
    );
    let (c, _) = constrained_enhance(&view, &base, &ps);
    assert!(same(&c.assignment, &view, "a1", "c1"));
    assert!(!same(&c.assignment, &view, "c1", "b1"));
    assert_eq!((c.stats.merged, c.stats.skipped), (1, 1));
}

#[test]
fn report_percentiles_match_sorted_counts() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for n in [1usize, 7, 100, 1000] {
        let v: Vec<u32> = (0..n).map(|_| rng.gen_range(0..500)).collect();
        let mut s = v.clone();
        s.sort_unstable();
        for p in PERCENTILES {
            // smallest value with at least p% of the data at or below it
            let oracle = *s
                .iter()
                .find(|&&x| s.iter().filter(|&&y| y <= x).count() as f64 * 100.0 >= p * n as f64)
                .unwrap();
            assert_eq!(percentile(&s, p), Some(oracle), "n={n} p={p}");
        }
    }
    assert_eq!(percentile(&[], 90.0), None);
}

#[test]
fn report_of_hundred_merges() {
    // 100 funding chains, each merged with one fresh change address
    let mut f = Fixture::new();
    let mut spends = Vec::new();
    for i in 0..100 {
        let mut prev = f.coinbase(&[(format!("s{i}").as_str(), 1_000_000)]);
        let mut value = 1_000_000;
        for _ in 0..(i % 7) {
            value -= 2_000;
            prev = f.spend(&[(prev, 0)], &[(format!("s{i}").as_str(), value), ("x", 1_000)]);
        }
        let cb = f.coinbase(&[(format!("s{i}").as_str(), 50_000)]);
        spends.push(f.spend(&[(cb, 0)], &[(format!("c{i}").as_str(), 20_000), (format!("p{i}").as_str(), 20_000)]));
    }
    let view = f.view();
    let base = multi_input_clustering(&view, &CoinJoinRule::default());
    let ps = PredictionSet::new(
        spends.iter().map(|&t| pred(&view, &f, t, [0.999, 0.0])).collect(),
        Thresholds::default(),
    );
    let out = naive_enhance(&view, &base, &ps);
    assert_eq!(out.report.affected.len(), 100);
    assert!(out.report.affected.iter().all(|a| a.address_increase == 1 && a.tx_increase == 0));
    assert_eq!(out.report.smaller_tx_counts, vec![0; 100]);
    assert!(out.report.percentiles.iter().all(|(_, v)| *v == 0));
    assert!(out.report.affected.iter().all(|a| a.time_gap_change == Some(0) || a.time_gap_change.is_none()));
    assert!(collapse_report(&base, &base).unwrap().affected.is_empty());
}

fn random_predictions(view: &ChainView, seed: u64) -> PredictionSet {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut preds = Vec::new();
    for t in view.tx_indices() {
        let tx = view.tx(t);
        if tx.coinbase || tx.outputs.len() != 2 {
            continue;
        }
        let mut p = || match rng.gen_range(0..4) {
            0 => rng.gen_range(0.991..1.0),
            1 => rng.gen_range(0.0..0.01),
            _ => rng.gen_range(0.02..0.98),
        };
        preds.push(Prediction {
            tx: t,
            probability: [p(), p()],
            variant: Variant::Full,
        });
    }
    PredictionSet::new(preds, Thresholds::default())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]
    #[test]
    fn constrained_is_safe_and_refines_naive(seed in any::<u64>(), n in 20usize..400) {
        let f = random_fixture(seed, n);
        let view = f.view();
        let base = multi_input_clustering(&view, &CoinJoinRule::default());
        let ps = random_predictions(&view, seed ^ 1);
        let naive = naive_enhance(&view, &base, &ps);
        let (c, store) = constrained_enhance(&view, &base, &ps);
        for (a, b) in store.pairs() {
            prop_assert_ne!(c.assignment.root(*a), c.assignment.root(*b));
        }
        prop_assert!(c.assignment.refines(&naive.assignment));
        prop_assert!(base.refines(&c.assignment));
        for s in [naive.stats, c.stats] {
            prop_assert_eq!(s.merged + s.redundant + s.skipped, s.change_edges);
        }
        prop_assert_eq!(naive.assignment.cluster_count() + naive.stats.merged, base.cluster_count());
        prop_assert_eq!(c.assignment.cluster_count() + c.stats.merged, base.cluster_count());

        // replay the naive merges with plain relabelling to recount redundant edges
        let mut label: Vec<u32> = base.roots().iter().map(|r| r.0).collect();
        let mut redundant = 0;
        for p in ps.predictions() {
            let Some(i) = ps.thresholds.change_of(p.probability) else { continue };
            let from = label[view.input_addresses(p.tx)[0].index()];
            let to = label[view.output_addresses(p.tx)[i].index()];
            if from == to {
                redundant += 1;
            } else {
                for l in label.iter_mut() {
                    if *l == to {
                        *l = from;
                    }
                }
            }
        }
        prop_assert_eq!(redundant, naive.stats.redundant);
        for a in 0..label.len() {
            for b in [0, a / 2] {
                let together = label[a] == label[b];
                prop_assert_eq!(together, naive.assignment.roots()[a] == naive.assignment.roots()[b]);
            }
        }
    }
}

#[test]
fn prediction_file_round_trip() {
    let f = random_fixture(3, 200);
    let view = f.view();
    let ps = random_predictions(&view, 4);
    let mut buf = Vec::new();
    ps.write(&mut buf, &view).unwrap();
    let back = PredictionSet::read(&buf[..], &view, Thresholds::default()).unwrap();
    assert_eq!(back, ps);
    let text = String::from_utf8(buf).unwrap();
    let first = text.lines().next().unwrap();
    assert!(matches!(
        PredictionSet::read(first.as_bytes(), &view, Thresholds::default()),
        Err(EnhanceError::Format { line: 1, .. })
    ));
}

fn constant_model(variant: Variant, pos: u32, neg: u32) -> ForestModel<f64> {
    ForestModel {
        params: ForestParams::default(),
        variant,
        n_features: variant.feature_count(),
        trees: vec![Tree {
            nodes: vec![Node::Leaf { pos, neg }],
        }],
    }
}

#[test]
fn routing_follows_spentness() {
    let f = random_fixture(17, 1000);
    let view = f.view();
    let rule = CoinJoinRule::default();
    let base = multi_input_clustering(&view, &rule);
    let txs: Vec<TxIdx> = view
        .tx_indices()
        .filter(|&t| crate::chain::is_standard(view.tx(t), &rule))
        .collect();
    let full = constant_model(Variant::Full, 9, 1);
    let reduced = constant_model(Variant::NoFingerprint, 1, 9);
    let ps = predict_all(&view, &base, &rule, &full, &reduced, &txs, Thresholds::default()).unwrap();
    let mut expected = 0;
    for &t in &txs {
        let voted = HeuristicKind::ALL.iter().any(|k| candidates(*k, t, &view, &rule).unique().is_some());
        match ps.get(t) {
            None => assert!(!voted),
            Some(p) => {
                expected += 1;
                assert!(voted);
                let spent = (0..2).all(|i| view.spent_by(t, i).is_some());
                let want = if spent { 0.9 } else { 0.1 };
                assert_eq!(p.probability, [want, want]);
                assert_eq!(p.variant == Variant::Full, spent);
            }
        }
    }
    assert_eq!(ps.len(), expected);
    assert!(expected > 100);
    assert!(matches!(
        predict_all(&view, &base, &rule, &reduced, &full, &txs, Thresholds::default()),
        Err(EnhanceError::Model(_))
    ));
}
