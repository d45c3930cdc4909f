use std::collections::BTreeMap;
use std::io::{BufRead, Write};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::EnhanceError;
use crate::chain::{ChainView, CoinJoinRule, TxIdx};
use crate::cluster::ClusterAssignment;
use crate::forest::{feature_rows_for, ForestModel, Variant};
use crate::heuristics::{build_vote_table, HeuristicKind};
use crate::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Thresholds {
    pub p_change: f64,
    pub p_spend: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Thresholds {
            p_change: 0.99,
            p_spend: 0.01,
        }
    }
}

impl Thresholds {
    pub fn new(p_change: f64, p_spend: f64) -> Result<Self, EnhanceError> {
        if !(0.0..=1.0).contains(&p_spend) || !(0.0..=1.0).contains(&p_change) || p_spend >= p_change {
            return Err(EnhanceError::Thresholds { p_spend, p_change });
        }
        Ok(Thresholds { p_change, p_spend })
    }

    /// The single output above `p_change`; none when zero or both qualify.
    pub fn change_of(&self, p: [f64; 2]) -> Option<usize> {
        match (p[0] > self.p_change, p[1] > self.p_change) {
            (true, false) => Some(0),
            (false, true) => Some(1),
            _ => None,
        }
    }

    pub fn is_spend(&self, p: f64) -> bool {
        p <= self.p_spend
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Prediction {
    pub tx: TxIdx,
    /// Change probability of each output.
    pub probability: [f64; 2],
    pub variant: Variant,
}

/// Per-transaction change probabilities in corpus order.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PredictionSet {
    predictions: Vec<Prediction>,
    pub thresholds: Thresholds,
}

#[derive(Serialize, Deserialize)]
struct PredictionRecord {
    txid: String,
    output_index: u8,
    probability: f64,
    variant: String,
}

fn variant_by_name(s: &str) -> Option<Variant> {
    [Variant::Full, Variant::NoFingerprint].into_iter().find(|v| v.name() == s)
}

impl PredictionSet {
    pub fn new(mut predictions: Vec<Prediction>, thresholds: Thresholds) -> Self {
        predictions.sort_by_key(|p| p.tx);
        predictions.dedup_by_key(|p| p.tx);
        PredictionSet {
            predictions,
            thresholds,
        }
    }

    pub fn predictions(&self) -> &[Prediction] {
        &self.predictions
    }

    pub fn len(&self) -> usize {
        self.predictions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.predictions.is_empty()
    }

    pub fn get(&self, tx: TxIdx) -> Option<&Prediction> {
        self.predictions
            .binary_search_by_key(&tx, |p| p.tx)
            .ok()
            .map(|i| &self.predictions[i])
    }

    /// One JSON object per output: `txid`, `output_index`, `probability`, `variant`.
    pub fn write<W: Write>(&self, mut w: W, view: &ChainView) -> Result<(), EnhanceError> {
        for p in &self.predictions {
            for i in 0..2 {
                let rec = PredictionRecord {
                    txid: view.tx(p.tx).txid.clone(),
                    output_index: i as u8,
                    probability: p.probability[i],
                    variant: p.variant.name().to_string(),
                };
                serde_json::to_writer(&mut w, &rec).map_err(std::io::Error::from)?;
                w.write_all(b"\n")?;
            }
        }
        Ok(())
    }

    /// Both outputs of every listed transaction must be present.
    pub fn read<R: BufRead>(r: R, view: &ChainView, thresholds: Thresholds) -> Result<Self, EnhanceError> {
        let mut partial: BTreeMap<TxIdx, (Option<f64>, Option<f64>, Variant, usize)> = BTreeMap::new();
        for (n, line) in r.lines().enumerate() {
            let line = line?;
            let lineno = n + 1;
            if line.trim().is_empty() {
                continue;
            }
            let bad = |msg: String| EnhanceError::Format { line: lineno, msg };
            let rec: PredictionRecord = serde_json::from_str(&line).map_err(|e| bad(e.to_string()))?;
            let tx = view
                .lookup(&rec.txid)
                .ok_or_else(|| bad(format!("unknown txid {}", rec.txid)))?;
            if view.tx(tx).outputs.len() != 2 || rec.output_index > 1 {
                return Err(bad("predictions apply to two-output transactions only".into()));
            }
            if !(0.0..=1.0).contains(&rec.probability) {
                return Err(bad(format!("probability {} outside [0, 1]", rec.probability)));
            }
            let variant = variant_by_name(&rec.variant).ok_or_else(|| bad(format!("unknown variant {}", rec.variant)))?;
            let e = partial.entry(tx).or_insert((None, None, variant, lineno));
            let slot = if rec.output_index == 0 { &mut e.0 } else { &mut e.1 };
            if slot.is_some() || e.2 != variant {
                return Err(bad("duplicate or inconsistent prediction".into()));
            }
            *slot = Some(rec.probability);
        }
        let mut out = Vec::with_capacity(partial.len());
        for (tx, (a, b, variant, line)) in partial {
            match (a, b) {
                (Some(a), Some(b)) => out.push(Prediction {
                    tx,
                    probability: [a, b],
                    variant,
                }),
                _ => {
                    return Err(EnhanceError::Format {
                        line,
                        msg: "transaction lacks a prediction for one output".into(),
                    })
                }
            }
        }
        Ok(PredictionSet::new(out, thresholds))
    }
}

/// Scores `txs` with the full model when both outputs are spent and with the
/// reduced model otherwise; transactions without any heuristic vote are skipped.
pub fn predict_all<T: Scalar>(
    view: &ChainView,
    base: &ClusterAssignment,
    rule: &CoinJoinRule,
    full: &ForestModel<T>,
    reduced: &ForestModel<T>,
    txs: &[TxIdx],
    thresholds: Thresholds,
) -> Result<PredictionSet, EnhanceError> {
    full.require_variant(Variant::Full)?;
    reduced.require_variant(Variant::NoFingerprint)?;
    for m in [full, reduced] {
        let expected = m.variant.feature_count();
        if m.n_features != expected {
            return Err(crate::forest::ForestError::FeatureMismatch {
                expected,
                got: m.n_features,
            }
            .into());
        }
    }
    let table = build_vote_table(txs, &HeuristicKind::ALL, view, rule);
    let predictions: Vec<Prediction> = table
        .rows()
        .par_iter()
        .filter(|v| v.has_votes())
        .map(|v| {
            let (model, variant) = if view.all_outputs_spent(v.tx) {
                (full, Variant::Full)
            } else {
                (reduced, Variant::NoFingerprint)
            };
            let rows = feature_rows_for(view, base, v, None);
            let p = |i: usize| {
                model
                    .predict_proba(&rows[i].features::<T>(variant))
                    .map(|p| p.to_f64_lossy())
            };
            Ok(Prediction {
                tx: v.tx,
                probability: [p(0)?, p(1)?],
                variant,
            })
        })
        .collect::<Result<_, crate::forest::ForestError>>()?;
    Ok(PredictionSet::new(predictions, thresholds))
}
