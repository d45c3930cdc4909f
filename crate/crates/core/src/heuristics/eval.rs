use std::io::Write;

use rayon::prelude::*;

use crate::chain::{ChainView, CoinJoinRule, TxIdx};
use crate::ground_truth::GroundTruthSet;

use super::candidates::candidates_all;
use super::kind::{HeuristicKind, KIND_COUNT};
use super::HeuristicError;

/// Rates of one heuristic: over the ground truth (tpr, fpr) and over the
/// remaining unknown-change transactions (coverage).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HeuristicScore {
    pub kind: HeuristicKind,
    pub tpr: f64,
    pub fpr: f64,
    pub coverage: f64,
}

pub fn evaluate_heuristics(
    gt: &GroundTruthSet,
    kinds: &[HeuristicKind],
    view: &ChainView,
    remaining: &[TxIdx],
    rule: &CoinJoinRule,
) -> Result<Vec<HeuristicScore>, HeuristicError> {
    if gt.is_empty() {
        return Err(HeuristicError::EmptyGroundTruth);
    }
    let zero = || ([0usize; KIND_COUNT], [0usize; KIND_COUNT]);
    let (tp, fp) = gt
        .entries()
        .par_iter()
        .fold(zero, |(mut tp, mut fp), e| {
            let sets = candidates_all(e.tx, view, rule);
            for k in 0..KIND_COUNT {
                match sets[k].unique() {
                    Some(u) if u == e.change_index as usize => tp[k] += 1,
                    Some(_) => fp[k] += 1,
                    None => {}
                }
            }
            (tp, fp)
        })
        .reduce(zero, |(mut a, mut b), (c, d)| {
            for k in 0..KIND_COUNT {
                a[k] += c[k];
                b[k] += d[k];
            }
            (a, b)
        });
    let fired = remaining
        .par_iter()
        .fold(
            || [0usize; KIND_COUNT],
            |mut acc, &t| {
                let sets = candidates_all(t, view, rule);
                for k in 0..KIND_COUNT {
                    acc[k] += sets[k].unique().is_some() as usize;
                }
                acc
            },
        )
        .reduce(
            || [0usize; KIND_COUNT],
            |mut a, b| {
                for k in 0..KIND_COUNT {
                    a[k] += b[k];
                }
                a
            },
        );
    let n = gt.len() as f64;
    let m = remaining.len();
    Ok(kinds
        .iter()
        .map(|&kind| {
            let k = kind.index();
            HeuristicScore {
                kind,
                tpr: tp[k] as f64 / n,
                fpr: fp[k] as f64 / n,
                coverage: if m == 0 { 0.0 } else { fired[k] as f64 / m as f64 },
            }
        })
        .collect())
}

/// Rates `(tpr, fpr, coverage)` of an arbitrary unique-output predictor.
pub fn evaluate_predictor(
    gt: &GroundTruthSet,
    remaining: &[TxIdx],
    predict: impl Fn(TxIdx) -> Option<usize> + Sync,
) -> Result<(f64, f64, f64), HeuristicError> {
    if gt.is_empty() {
        return Err(HeuristicError::EmptyGroundTruth);
    }
    let (mut tp, mut fp) = (0usize, 0usize);
    for e in gt.entries() {
        match predict(e.tx) {
            Some(u) if u == e.change_index as usize => tp += 1,
            Some(_) => fp += 1,
            None => {}
        }
    }
    let fired = remaining.par_iter().filter(|&&t| predict(t).is_some()).count();
    let n = gt.len() as f64;
    let coverage = if remaining.is_empty() {
        0.0
    } else {
        fired as f64 / remaining.len() as f64
    };
    Ok((tp as f64 / n, fp as f64 / n, coverage))
}

/// CSV with columns `kind,tpr,fpr,coverage`.
pub fn write_scores_csv<W: Write>(mut w: W, scores: &[HeuristicScore]) -> std::io::Result<()> {
    writeln!(w, "kind,tpr,fpr,coverage")?;
    for s in scores {
        writeln!(w, "{},{:.6},{:.6},{:.6}", s.kind, s.tpr, s.fpr, s.coverage)?;
    }
    w.flush()
}
