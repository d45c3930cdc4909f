//! Threshold-vote classifier over heuristic vote tables.

use thiserror::Error;

use crate::ground_truth::GroundTruthSet;
use crate::heuristics::{TxVotes, VoteTable};
use crate::roc::{roc_auc, RocCurve, RocError};
use crate::Scalar;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CombinerError {
    #[error("ground truth is empty")]
    EmptyGroundTruth,
    #[error("no ground-truth transaction has a vote")]
    NoVotes,
    #[error(transparent)]
    Roc(#[from] RocError),
}

/// The output with at least `t` more votes than the other one, if any.
pub fn threshold_vote(row: &TxVotes, t: i32) -> Option<usize> {
    assert!(t >= 1, "threshold must be positive");
    (0..2).find(|&i| row.margin(i) >= t)
}

/// Per-output rows for the ground-truth transactions that received a vote:
/// the vote margin of the output and whether it is the change.
pub fn margin_rows(gt: &GroundTruthSet, table: &VoteTable) -> (Vec<i32>, Vec<bool>) {
    let mut scores = Vec::new();
    let mut labels = Vec::new();
    for e in gt.entries() {
        let Some(row) = table.get(e.tx) else { continue };
        if !row.has_votes() {
            continue;
        }
        for i in 0..2 {
            scores.push(row.margin(i));
            labels.push(i == e.change_index as usize);
        }
    }
    (scores, labels)
}

/// ROC of the threshold-vote classifier: an output is called change at threshold
/// `t` when its margin reaches `t`; every achievable margin is swept.
pub fn roc_threshold_vote<T: Scalar>(
    gt: &GroundTruthSet,
    table: &VoteTable,
) -> Result<RocCurve<T>, CombinerError> {
    if gt.is_empty() {
        return Err(CombinerError::EmptyGroundTruth);
    }
    let (scores, labels) = margin_rows(gt, table);
    if scores.is_empty() {
        return Err(CombinerError::NoVotes);
    }
    let scores: Vec<T> = scores.into_iter().map(|s| T::from_i32(s).expect("small integer")).collect();
    Ok(roc_auc(&scores, &labels)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chain::TxIdx;
    use crate::ground_truth::GroundTruthEntry;
    use crate::heuristics::KIND_COUNT;
    use rand::seq::SliceRandom;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn row(tx: u32, s0: usize, s1: usize) -> TxVotes {
        let mut outputs = [[0i8; KIND_COUNT]; 2];
        for k in 0..s0 {
            outputs[0][k] = 1;
            outputs[1][k] = -1;
        }
        for k in s0..s0 + s1 {
            outputs[1][k] = 1;
            outputs[0][k] = -1;
        }
        TxVotes { tx: TxIdx(tx), outputs }
    }

    #[test]
    fn threshold_examples() {
        assert_eq!(threshold_vote(&row(0, 9, 2), 7), Some(0));
        assert_eq!(threshold_vote(&row(0, 5, 5), 1), None);
        assert_eq!(threshold_vote(&row(0, 6, 2), 7), None);
        assert_eq!(threshold_vote(&row(0, 2, 6), 4), Some(1));
    }

    fn gt_of(changes: &[u8]) -> GroundTruthSet {
        GroundTruthSet::from_entries(
            changes
                .iter()
                .enumerate()
                .map(|(i, c)| GroundTruthEntry {
                    tx: TxIdx(i as u32),
                    change_index: *c,
                })
                .collect(),
        )
    }

    #[test]
    fn separable_votes() {
        let gt = gt_of(&[0, 1, 1, 0]);
        let table = VoteTable::from_rows(vec![row(0, 3, 0), row(1, 0, 2), row(2, 1, 4), row(3, 5, 1)]);
        let c: RocCurve<f64> = roc_threshold_vote(&gt, &table).unwrap();
        assert_eq!(c.auc, 1.0);
        assert!(matches!(
            roc_threshold_vote::<f64>(&GroundTruthSet::default(), &table),
            Err(CombinerError::EmptyGroundTruth)
        ));
        let silent = VoteTable::from_rows(vec![row(0, 0, 0)]);
        assert_eq!(roc_threshold_vote::<f64>(&gt, &silent), Err(CombinerError::NoVotes));
    }

    fn random_table(rng: &mut ChaCha8Rng, n: usize) -> (GroundTruthSet, VoteTable) {
        let mut changes = Vec::new();
        let mut rows = Vec::new();
        for i in 0..n {
            let change = rng.gen_range(0..2u8);
            let strong = rng.gen_range(0..8);
            let weak = rng.gen_range(0..5);
            let (s0, s1) = if change == 0 { (strong, weak) } else { (weak, strong) };
            changes.push(change);
            rows.push(row(i as u32, s0, s1));
        }
        (gt_of(&changes), VoteTable::from_rows(rows))
    }

    /// Counts, at each threshold, how often the classifier picks the change or the spend.
    #[test]
    fn curve_matches_confusion_counts() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let (gt, table) = random_table(&mut rng, 100);
        let c: RocCurve<f64> = roc_threshold_vote(&gt, &table).unwrap();
        let voted: Vec<_> = gt
            .entries()
            .iter()
            .filter(|e| table.get(e.tx).unwrap().has_votes())
            .collect();
        let n = voted.len() as f64;
        for p in &c.points[1..] {
            let t = p.threshold as i32;
            if t < 1 {
                continue;
            }
            let (mut tp, mut fp) = (0.0, 0.0);
            for e in &voted {
                match threshold_vote(table.get(e.tx).unwrap(), t) {
                    Some(i) if i == e.change_index as usize => tp += 1.0,
                    Some(_) => fp += 1.0,
                    None => {}
                }
            }
            assert!((p.tpr - tp / n).abs() < 1e-12, "tpr at t={t}");
            assert!((p.fpr - fp / n).abs() < 1e-12, "fpr at t={t}");
        }
        for w in c.points.windows(2) {
            assert!(w[0].threshold > w[1].threshold);
            assert!(w[0].tpr <= w[1].tpr && w[0].fpr <= w[1].fpr);
        }
    }

    #[test]
    fn shuffled_labels_give_half() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let (gt, table) = random_table(&mut rng, 12_000);
        let mut changes: Vec<u8> = gt.entries().iter().map(|e| e.change_index).collect();
        changes.shuffle(&mut rng);
        let c: RocCurve<f64> = roc_threshold_vote(&gt_of(&changes), &table).unwrap();
        assert!((c.auc - 0.5).abs() <= 0.05, "auc {}", c.auc);
        let real: RocCurve<f64> = roc_threshold_vote(&gt, &table).unwrap();
        assert!(real.auc > 0.7, "auc {}", real.auc);
    }

    #[test]
    fn output_order_does_not_matter() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let (gt, table) = random_table(&mut rng, 300);
        let swapped_rows = table
            .rows()
            .iter()
            .map(|r| TxVotes {
                tx: r.tx,
                outputs: [r.outputs[1], r.outputs[0]],
            })
            .collect();
        let swapped_gt: Vec<u8> = gt.entries().iter().map(|e| 1 - e.change_index).collect();
        let a: RocCurve<f64> = roc_threshold_vote(&gt, &table).unwrap();
        let b: RocCurve<f64> = roc_threshold_vote(&gt_of(&swapped_gt), &VoteTable::from_rows(swapped_rows)).unwrap();
        assert_eq!(a.auc, b.auc);
    }
}
