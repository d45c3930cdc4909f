use super::*;
use crate::chain::fixture::Fixture;
use crate::chain::{ChainView, CoinJoinRule, ScriptType, TxIdx};
use fixtures::{heuristic_fixtures, signal_rbf, Case, TESTED};
use crate::ground_truth::{GroundTruthEntry, GroundTruthSet};
use ScriptType::*;

const T: TxIdx = TESTED;

fn run(kind: HeuristicKind, view: &ChainView) -> OutputSet {
    candidates(kind, T, view, &CoinJoinRule::default())
}

#[test]
fn fixture_table() {
    let fixtures = heuristic_fixtures();
    for f in &fixtures {
        assert_eq!(f.actual(), f.expected, "{}: {}", f.kind, f.note);
    }
    for k in HeuristicKind::ALL {
        let n = fixtures.iter().filter(|f| f.kind == k).count();
        assert!(n >= 3, "{k} has {n} fixtures");
    }
}

#[test]
fn unique_candidate_follows_sets() {
    let rule = CoinJoinRule::default();
    for f in heuristic_fixtures() {
        assert_eq!(unique_candidate(f.kind, T, &f.view, &rule), f.expected.unique());
    }
}

#[test]
fn every_kind_abstains_on_nonstandard() {
    let mut f = Fixture::new();
    let cb = f.coinbase(&[("a", 100_000)]);
    let t = f.spend(&[(cb, 0)], &[("x", 30_000), ("y", 30_000), ("z", 30_007)]);
    for i in 0..3 {
        f.spend(&[(t, i)], &[("q", 20_000), ("r", 5_001)]);
    }
    let view = f.view();
    for k in HeuristicKind::ALL {
        assert_eq!(candidates(k, T, &view, &CoinJoinRule::default()), OutputSet::EMPTY, "{k}");
    }
    assert!(candidates_all(T, &view, &CoinJoinRule::default()).iter().all(|s| s.is_empty()));
}

#[test]
fn fingerprints_abstain_with_unspent_output() {
    let mut c = Case::simple();
    c.spent = [true, false];
    let v = c.view(|_| {});
    for k in HeuristicKind::fingerprint() {
        assert!(run(k, &v).is_empty(), "{k}");
    }
}

#[test]
fn candidates_all_agrees_with_candidates() {
    let cases = [
        Case::simple(),
        Case::new(&[(50_000, P2PKH), (50_000, P2SH)], [(60_000, P2SH), (39_000, P2WPKH)]),
        Case::new(&[(30_000, P2WPKH), (70_000, P2WPKH)], [(60_000, P2WPKH), (28_000, Multisig)]),
    ];
    for c in &cases {
        let v = c.view(|f| signal_rbf(f, 2));
        let all = candidates_all(T, &v, &CoinJoinRule::default());
        for k in HeuristicKind::ALL {
            assert_eq!(all[k.index()], run(k, &v), "{k}");
        }
    }
}

#[test]
fn vote_encoding() {
    let c = Case::new(&[(100_000, P2PKH)], [(60_000, P2PKH), (39_000, P2PKH)]);
    let v = c.view(|_| {});
    // only outputs values differ on trailing zeros up to 10^3: 60000 vs 39000
    let table = build_vote_table(&[T], &[HeuristicKind::PowerOfTen(4)], &v, &CoinJoinRule::default());
    let row = &table.rows()[0];
    let k = HeuristicKind::PowerOfTen(4).index();
    assert_eq!((row.outputs[0][k], row.outputs[1][k]), (-1, 1));
    assert_eq!(row.outputs[0].iter().filter(|x| **x != 0).count(), 1);
    assert_eq!(row.margin(1), 1);
    let none = build_vote_table(&[T], &[HeuristicKind::PowerOfTen(2)], &v, &CoinJoinRule::default());
    assert!(!none.rows()[0].has_votes());
    assert_eq!(none.no_vote_count(), 1);
}

#[test]
fn vote_table_matches_manual_application() {
    let cases = [
        Case::simple(),
        Case::new(&[(50_000, P2PKH), (50_000, P2PKH)], [(75_000, P2PKH), (20_000, P2PKH)]),
        Case::new(&[(50_000, P2PKH), (50_000, P2SH)], [(60_000, P2SH), (39_000, P2WPKH)]),
        Case::new(&[(100_000, P2WPKH)], [(60_000, P2WPKH), (39_000, P2PKH)]),
        Case::new(&[(75_200_000, P2PKH)], [(75_000_000, P2PKH), (123_457, P2PKH)]),
    ];
    let rule = CoinJoinRule::default();
    for c in &cases {
        let v = c.view(|f| f.tx_mut(3).version = 2);
        let table = build_vote_table(&[T], &HeuristicKind::ALL, &v, &rule);
        let row = &table.rows()[0];
        for k in HeuristicKind::ALL {
            let (a, b) = (row.outputs[0][k.index()], row.outputs[1][k.index()]);
            match unique_candidate(k, T, &v, &rule) {
                Some(0) => assert_eq!((a, b), (1, -1)),
                Some(_) => assert_eq!((a, b), (-1, 1)),
                None => assert_eq!((a, b), (0, 0)),
            }
        }
        let mut buf = Vec::new();
        table.write_binary(&mut buf, &v).unwrap();
        assert_eq!(VoteTable::read_binary(&buf[..], &v).unwrap(), table);
    }
}

#[test]
fn evaluation_bounds() {
    let c = Case::new(&[(50_000, P2PKH), (50_000, P2PKH)], [(75_000, P2PKH), (20_000, P2PKH)]);
    let v = c.view(|_| {});
    let gt = GroundTruthSet::from_entries(vec![GroundTruthEntry { tx: T, change_index: 1 }]);
    let rule = CoinJoinRule::default();
    assert!(matches!(
        evaluate_heuristics(&GroundTruthSet::default(), &HeuristicKind::ALL, &v, &[T], &rule),
        Err(HeuristicError::EmptyGroundTruth)
    ));
    let scores = evaluate_heuristics(&gt, &HeuristicKind::ALL, &v, &[T], &rule).unwrap();
    for s in &scores {
        assert!((0.0..=1.0).contains(&s.tpr) && (0.0..=1.0).contains(&s.fpr) && (0.0..=1.0).contains(&s.coverage));
        assert!(s.tpr + s.fpr <= 1.0);
    }
    let oc = scores.iter().find(|s| s.kind == HeuristicKind::OptimalChange { with_fee: false }).unwrap();
    assert_eq!((oc.tpr, oc.fpr, oc.coverage), (1.0, 0.0, 1.0));
    assert_eq!(evaluate_predictor(&gt, &[T], |_| None).unwrap(), (0.0, 0.0, 0.0));
    assert_eq!(evaluate_predictor(&gt, &[T], |t| gt.change_index(t).map(usize::from)).unwrap().0, 1.0);
    let mut csv = Vec::new();
    write_scores_csv(&mut csv, &scores).unwrap();
    let text = String::from_utf8(csv).unwrap();
    assert!(text.starts_with("kind,tpr,fpr,coverage\n"));
    assert_eq!(text.lines().count(), 27);
}
