use super::*;
use crate::chain::fixture::Fixture;
use crate::chain::TagCategory;
use crate::cluster::multi_input_clustering;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn base(view: &ChainView) -> ClusterAssignment {
    multi_input_clustering(view, &CoinJoinRule::default())
}

/// cb pays A twice; tx1 spends A to X with change C; tx2 co-spends C with A.
fn fig4() -> (Fixture, usize) {
    let mut f = Fixture::new();
    let cb = f.coinbase(&[("A", 100_000), ("A", 50_000)]);
    let tx1 = f.spend(&[(cb, 0)], &[("X", 60_000), ("C", 39_000)]);
    let tx2 = f.spend(&[(tx1, 1), (cb, 1)], &[("Y", 80_000), ("Z", 8_000)]);
    f.spend(&[(tx1, 0)], &[("X2", 59_000)]);
    f.spend(&[(tx2, 0)], &[("Y2", 79_000)]);
    f.spend(&[(tx2, 1)], &[("Z2", 7_000)]);
    (f, tx1)
}

#[test]
fn fig4_change_is_revealed() {
    let (f, tx1) = fig4();
    let view = f.view();
    let b = base(&view);
    let set = extract_candidates(&view, &b, &CoinJoinRule::default());
    assert_eq!(set.candidates.len(), 1);
    assert_eq!(set.candidates[0].tx, TxIdx(tx1 as u32));
    assert_eq!(set.candidates[0].matches, OutputSet::single(1));
    let out = extract_ground_truth(&view, &b, &TagSet::new(), &GroundTruthConfig::default());
    assert_eq!(out.ground_truth.change_index(TxIdx(tx1 as u32)), Some(1));
    assert!(out.report.is_conserved());
}

#[test]
fn address_reuse_is_not_a_candidate() {
    let mut f = Fixture::new();
    let cb = f.coinbase(&[("A", 100_000)]);
    f.spend(&[(cb, 0)], &[("X", 60_000), ("A", 39_000)]);
    let view = f.view();
    let set = extract_candidates(&view, &base(&view), &CoinJoinRule::default());
    assert!(set.candidates.is_empty());
    assert_eq!(set.overview.address_reuse, 1);
    assert_eq!(set.address_reuse, vec![TxIdx(1)]);
}

#[test]
fn unspent_candidate_is_removed() {
    let mut f = Fixture::new();
    let cb = f.coinbase(&[("A", 100_000), ("A", 50_000)]);
    let tx1 = f.spend(&[(cb, 0)], &[("X", 60_000), ("C", 39_000)]);
    f.spend(&[(tx1, 1), (cb, 1)], &[("Y", 80_000), ("Z", 8_000)]);
    let view = f.view();
    let out = extract_ground_truth(&view, &base(&view), &TagSet::new(), &GroundTruthConfig::default());
    assert!(out.ground_truth.is_empty());
    assert_eq!(out.report.unspent_removed, 1);
    assert!(out.report.is_conserved());
}

/// One entity with `n` candidate spends, `two_sided` of which pay both outputs to itself.
fn self_paying_cluster(n: usize, two_sided: usize) -> Fixture {
    let mut f = Fixture::new();
    let side: Vec<(&str, u64)> = std::iter::once(("E0", 1_000_000)).chain((0..=n).map(|_| ("E0", 1_000))).collect();
    let cb = f.coinbase(&side);
    let mut prev = (cb, 0u32, 1_000_000u64);
    let mut pays = Vec::new();
    for i in 0..n {
        let change = format!("E{}", i + 1);
        let pay = if i < two_sided { format!("E{}x", i + 1) } else { format!("P{i}") };
        // co-spending a side coin of E0 links every change address into one cluster
        let total = prev.2 + 1_000;
        let t = f.spend(&[(prev.0, prev.1), (cb, i as u32 + 1)], &[(pay.as_str(), 500), (change.as_str(), total - 600)]);
        pays.push((t, i < two_sided));
        prev = (t, 1, total - 600);
    }
    let mut ins: Vec<(usize, u32)> = vec![(prev.0, prev.1), (cb, n as u32 + 1)];
    ins.extend(pays.iter().filter(|p| p.1).map(|p| (p.0, 0)));
    let total = prev.2 + 1_000 + 500 * two_sided as u64;
    let sink = f.spend(&ins, &[("S", total - 100)]);
    f.spend(&[(sink, 0)], &[("S2", total - 200)]);
    for (t, own) in pays {
        if !own {
            f.spend(&[(t, 0)], &[("Q", 400)]);
        }
    }
    f
}

#[test]
fn two_candidate_rate_rule() {
    let f = self_paying_cluster(20, 3);
    let view = f.view();
    let b = base(&view);
    let mut report = FilterReport::default();
    let set = extract_candidates(&view, &b, &CoinJoinRule::default());
    assert_eq!(set.candidates.len(), 20);
    let c = filter_two_candidates(set.candidates, &view, &b, 0.10, &mut report);
    assert!(c.is_empty());
    assert_eq!(report.two_candidate_removed, 3);
    assert_eq!(report.high_self_rate_removed, 17);
    assert_eq!(report.high_self_rate_clusters, 1);
}

#[test]
fn two_candidate_filter_spares_clean_clusters() {
    let f = self_paying_cluster(20, 0);
    let view = f.view();
    let b = base(&view);
    let mut report = FilterReport::default();
    let set = extract_candidates(&view, &b, &CoinJoinRule::default());
    let c = filter_two_candidates(set.candidates.clone(), &view, &b, 0.10, &mut report);
    assert_eq!(c, set.candidates);
    assert_eq!(report, FilterReport::default());
}

#[test]
fn two_of_twenty_is_below_threshold() {
    let f = self_paying_cluster(20, 2);
    let view = f.view();
    let b = base(&view);
    let mut report = FilterReport::default();
    let set = extract_candidates(&view, &b, &CoinJoinRule::default());
    let c = filter_two_candidates(set.candidates, &view, &b, 0.10, &mut report);
    assert_eq!(c.len(), 18);
    assert_eq!(report.two_candidate_removed, 2);
}

#[test]
fn tag_conflicts_and_blocklist() {
    let (f, tx1) = fig4();
    let view = f.view();
    let b = base(&view);
    let set = extract_candidates(&view, &b, &CoinJoinRule::default());
    let a = view.address_id("A").unwrap();

    let mut tags = TagSet::new();
    tags.insert("A", "alpha", TagCategory::Exchange).unwrap();
    let mut report = FilterReport::default();
    let kept = filter_tag_conflicts(set.candidates.clone(), &view, &b, &tags, &[], &mut report);
    assert_eq!(kept.len(), 1);
    assert_eq!(kept[0].tx, TxIdx(tx1 as u32));

    tags.insert("C", "beta", TagCategory::Gambling).unwrap();
    let kept = filter_tag_conflicts(set.candidates.clone(), &view, &b, &tags, &[], &mut report);
    assert!(kept.is_empty());
    assert_eq!(report.tag_conflict_removed, 1);

    let mut report = FilterReport::default();
    let kept = filter_tag_conflicts(set.candidates, &view, &b, &TagSet::new(), &[a], &mut report);
    assert!(kept.is_empty());
    assert_eq!(report.blocklist_removed, 1);
}

/// Change goes to `C`, which is either fresh or was already seen before the tx.
fn reused_change(linked_before: bool) -> (Fixture, usize) {
    let mut f = Fixture::new();
    let cb = f.coinbase(&[("A", 100_000), ("C", 5_000), ("A", 7_000), ("C", 3_000)]);
    if linked_before {
        // A and C co-spent before the candidate
        let t = f.spend(&[(cb, 2), (cb, 3)], &[("W", 9_000)]);
        f.spend(&[(t, 0)], &[("W2", 8_000)]);
    }
    let tx = f.spend(&[(cb, 0)], &[("X", 60_000), ("C", 39_000)]);
    f.spend(&[(tx, 0)], &[("X2", 59_000)]);
    let t = f.spend(&[(tx, 1), (cb, 1)], &[("V", 43_000)]);
    f.spend(&[(t, 0)], &[("V2", 42_000)]);
    if !linked_before {
        // link A and C, but only after the candidate
        let t = f.spend(&[(cb, 2), (cb, 3)], &[("W", 9_000)]);
        f.spend(&[(t, 0)], &[("W2", 8_000)]);
    }
    (f, tx)
}

#[test]
fn known_change_filter() {
    for linked in [false, true] {
        let (f, tx) = reused_change(linked);
        let view = f.view();
        let b = base(&view);
        let out = extract_ground_truth(&view, &b, &TagSet::new(), &GroundTruthConfig::default());
        let got = out.ground_truth.change_index(TxIdx(tx as u32));
        if linked {
            assert_eq!(got, None);
            assert_eq!(out.report.reused_change_removed, 1);
        } else {
            assert_eq!(got, Some(1));
        }
        assert!(out.report.is_conserved());
    }
    let (f, tx1) = fig4();
    let view = f.view();
    let out = extract_ground_truth(&view, &base(&view), &TagSet::new(), &GroundTruthConfig::default());
    assert_eq!(view.first_seen(view.address_id("C").unwrap()), TxIdx(tx1 as u32));
    assert_eq!(out.ground_truth.len(), 1);
}

#[test]
fn jsonl_round_trip() {
    let (f, _) = fig4();
    let view = f.view();
    let out = extract_ground_truth(&view, &base(&view), &TagSet::new(), &GroundTruthConfig::default());
    let mut buf = Vec::new();
    out.ground_truth.write(&mut buf, &view).unwrap();
    let back = GroundTruthSet::read(&buf[..], &view).unwrap();
    assert_eq!(back, out.ground_truth);
    assert!(GroundTruthSet::read(&b"{\"txid\":\"zz\",\"change_index\":0}\n"[..], &view).is_err());
}

/// Random corpus: a handful of wallets spend one to three of their coins to two outputs.
pub(crate) fn random_fixture(seed: u64, n: usize) -> Fixture {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut f = Fixture::new();
    let mut utxo: Vec<(usize, u32, u64)> = Vec::new();
    let mut fresh = 0usize;
    for w in 0..8 {
        let cb = f.coinbase(&[(format!("w{w}").as_str(), 10_000_000)]);
        utxo.push((cb, 0, 10_000_000));
    }
    while f.transactions().len() < n && !utxo.is_empty() {
        let k = rng.gen_range(1..=3.min(utxo.len()));
        let mut ins = Vec::new();
        let mut total = 0;
        for _ in 0..k {
            let (t, o, v) = utxo.swap_remove(rng.gen_range(0..utxo.len()));
            ins.push((t, o));
            total += v;
        }
        if total < 1_000 {
            continue;
        }
        let mut addr = || {
            if rng.gen_bool(0.3) {
                format!("w{}", rng.gen_range(0..8))
            } else {
                fresh += 1;
                format!("a{fresh}")
            }
        };
        let (x, y) = (addr(), addr());
        let fee = 100;
        let first = rng.gen_range(1..total - fee);
        let t = f.spend(&ins, &[(x.as_str(), first), (y.as_str(), total - fee - first)]);
        if first > 500 {
            utxo.push((t, 0, first));
        }
        if total - fee - first > 500 {
            utxo.push((t, 1, total - fee - first));
        }
    }
    f
}

#[test]
fn candidates_match_brute_force() {
    for seed in 0..4 {
        let f = random_fixture(seed, 200);
        let view = f.view();
        let b = base(&view);
        let rule = CoinJoinRule::default();
        let set = extract_candidates(&view, &b, &rule);
        let mut brute = Vec::new();
        for t in view.tx_indices() {
            let tx = view.tx(t);
            if !is_standard(tx, &rule) {
                continue;
            }
            let ins = view.input_addresses(t);
            let outs = view.output_addresses(t);
            if outs.iter().any(|o| ins.contains(o)) {
                continue;
            }
            let m: Vec<usize> = (0..2).filter(|&i| b.root(outs[i]) == b.root(ins[0])).collect();
            if !m.is_empty() {
                brute.push((t, m));
            }
        }
        let got: Vec<(TxIdx, Vec<usize>)> = set.candidates.iter().map(|c| (c.tx, c.matches.iter().collect())).collect();
        assert_eq!(got, brute);
        let out = extract_ground_truth(&view, &b, &TagSet::new(), &GroundTruthConfig::default());
        assert!(out.report.is_conserved());
        for e in out.ground_truth.entries() {
            assert!(view.all_outputs_spent(e.tx));
            let outs = view.output_addresses(e.tx);
            let r = b.input_root(&view, e.tx).unwrap();
            assert_eq!(b.root(outs[e.change_index as usize]), r);
            assert_ne!(b.root(outs[1 - e.change_index as usize]), r);
        }
    }
}

/// Replays the prefix with a fresh union-find for every candidate.
#[test]
fn known_change_matches_prefix_replay() {
    for seed in 10..13 {
        let f = random_fixture(seed, 150);
        let view = f.view();
        let b = base(&view);
        let rule = CoinJoinRule::default();
        let set = extract_candidates(&view, &b, &rule);
        let single: Vec<Candidate> = set.candidates.into_iter().filter(|c| c.matches.len() == 1).collect();
        let mut report = FilterReport::default();
        let gt = filter_known_change(single.clone(), &view, &rule, &mut report);
        for c in single {
            if !view.all_outputs_spent(c.tx) {
                continue;
            }
            let ch = c.matches.unique().unwrap();
            let addr = view.output_addresses(c.tx)[ch];
            let mut ds = DisjointSet::new(view.address_count());
            for t in view.tx_indices().take_while(|t| *t < c.tx) {
                let ins = view.input_addresses(t);
                if view.tx(t).coinbase || is_coinjoin(view.tx(t), &rule) {
                    continue;
                }
                for a in &ins[1..] {
                    ds.union(ins[0].0, a.0).unwrap();
                }
            }
            let fresh = view.first_seen(addr) == c.tx;
            let linked = view.input_addresses(c.tx).iter().any(|a| ds.same(a.0, addr.0).unwrap());
            let expect = fresh || !linked;
            assert_eq!(gt.change_index(c.tx).is_some(), expect, "tx {:?}", c.tx);
        }
    }
}
