//! ROC curves and their area.

use std::cmp::Ordering;
use std::io::Write;

use thiserror::Error;

use crate::Scalar;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum RocError {
    #[error("need at least one positive and one negative label")]
    DegenerateLabels,
    #[error("scores and labels differ in length")]
    LengthMismatch,
    #[error("score is NaN")]
    NanScore,
}

/// Rates when predicting positive for every score `>= threshold`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RocPoint<T> {
    pub threshold: T,
    pub fpr: T,
    pub tpr: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RocCurve<T> {
    /// From (0, 0) at an infinite threshold to (1, 1).
    pub points: Vec<RocPoint<T>>,
    pub auc: T,
    pub positives: usize,
    pub negatives: usize,
}

impl<T: Scalar> RocCurve<T> {
    /// Highest-TPR point whose FPR does not exceed `max_fpr`.
    pub fn best_within_fpr(&self, max_fpr: T) -> RocPoint<T> {
        self.points
            .iter()
            .filter(|p| p.fpr <= max_fpr)
            .fold(self.points[0], |best, p| if p.tpr > best.tpr { *p } else { best })
    }

    /// TPR of the curve's step function at `fpr`, the most any threshold reaches
    /// without exceeding it.
    pub fn tpr_at(&self, fpr: T) -> T {
        self.best_within_fpr(fpr).tpr
    }

    /// CSV `threshold,fpr,tpr` followed by an `auc,<value>` line.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "threshold,fpr,tpr")?;
        for p in &self.points {
            writeln!(w, "{},{:.6},{:.6}", p.threshold, p.fpr, p.tpr)?;
        }
        writeln!(w, "auc,{:.6}", self.auc)?;
        w.flush()
    }
}

/// Sweeps every distinct score; equal scores form a single step.
pub fn roc_auc<T: Scalar>(scores: &[T], labels: &[bool]) -> Result<RocCurve<T>, RocError> {
    if scores.len() != labels.len() {
        return Err(RocError::LengthMismatch);
    }
    if scores.iter().any(|s| s.is_nan()) {
        return Err(RocError::NanScore);
    }
    let positives = labels.iter().filter(|l| **l).count();
    let negatives = labels.len() - positives;
    if positives == 0 || negatives == 0 {
        return Err(RocError::DegenerateLabels);
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].partial_cmp(&scores[a]).unwrap_or(Ordering::Equal));
    let p = T::from_usize(positives).expect("count fits");
    let n = T::from_usize(negatives).expect("count fits");
    let two = T::one() + T::one();
    let mut points = vec![RocPoint {
        threshold: T::infinity(),
        fpr: T::zero(),
        tpr: T::zero(),
    }];
    let (mut tp, mut fp) = (0usize, 0usize);
    let mut auc = T::zero();
    let mut i = 0;
    while i < order.len() {
        let s = scores[order[i]];
        while i < order.len() && scores[order[i]] == s {
            if labels[order[i]] {
                tp += 1;
            } else {
                fp += 1;
            }
            i += 1;
        }
        let prev = *points.last().expect("non-empty");
        let pt = RocPoint {
            threshold: s,
            fpr: T::from_usize(fp).expect("count fits") / n,
            tpr: T::from_usize(tp).expect("count fits") / p,
        };
        auc = auc + (pt.fpr - prev.fpr) * (pt.tpr + prev.tpr) / two;
        points.push(pt);
    }
    Ok(RocCurve {
        points,
        auc,
        positives,
        negatives,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Probability that a random positive outscores a random negative, ties counting half.
    fn concordance(scores: &[f64], labels: &[bool]) -> f64 {
        let (mut num, mut den) = (0.0, 0.0);
        for i in 0..scores.len() {
            for j in 0..scores.len() {
                if labels[i] && !labels[j] {
                    den += 1.0;
                    num += match scores[i].partial_cmp(&scores[j]).unwrap() {
                        Ordering::Greater => 1.0,
                        Ordering::Equal => 0.5,
                        Ordering::Less => 0.0,
                    };
                }
            }
        }
        num / den
    }

    #[test]
    fn perfect_and_flat() {
        let labels = [true, false, true, false];
        let perfect = [1.0, 0.0, 1.0, 0.0];
        assert_eq!(roc_auc(&perfect, &labels).unwrap().auc, 1.0);
        let flat = [0.3f32; 4];
        let c = roc_auc(&flat, &labels).unwrap();
        assert_eq!(c.auc, 0.5);
        assert_eq!(c.points.len(), 2);
        assert_eq!(roc_auc(&[0.1, 0.2], &[true, true]), Err(RocError::DegenerateLabels));
        assert_eq!(roc_auc(&[f64::NAN, 0.2], &[true, false]), Err(RocError::NanScore));
    }

    #[test]
    fn twenty_point_fixture() {
        let scores = [
            0.9, 0.8, 0.8, 0.7, 0.65, 0.6, 0.6, 0.55, 0.5, 0.5, 0.45, 0.4, 0.4, 0.35, 0.3, 0.2, 0.2, 0.15,
            0.1, 0.05,
        ];
        let labels = [
            true, true, false, true, true, false, true, false, true, true, false, false, true, false, true,
            false, false, false, true, false,
        ];
        let c = roc_auc(&scores, &labels).unwrap();
        assert!((c.auc - concordance(&scores, &labels)).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn auc_is_concordance(rows in prop::collection::vec((0u8..8, any::<bool>()), 2..60)) {
            let scores: Vec<f64> = rows.iter().map(|r| r.0 as f64).collect();
            let labels: Vec<bool> = rows.iter().map(|r| r.1).collect();
            prop_assume!(labels.iter().any(|l| *l) && labels.iter().any(|l| !*l));
            let c = roc_auc(&scores, &labels).unwrap();
            prop_assert!((c.auc - concordance(&scores, &labels)).abs() < 1e-9);
            for w in c.points.windows(2) {
                prop_assert!(w[0].fpr <= w[1].fpr && w[0].tpr <= w[1].tpr);
            }
            let last = c.points.last().unwrap();
            prop_assert_eq!((last.fpr, last.tpr), (1.0, 1.0));
        }
    }
}
