//! Random-forest classifier over per-output feature rows.

mod features;
mod io;
mod search;
mod split;
mod tree;

pub use features::{feature_rows_for, labelled_rows, FeatureRow, Matrix, Variant, EPOCH_BLOCKS, UNIVERSAL_COUNT};
pub use search::{group_folds, halving_search, SearchRound, DEFAULT_GRID};
pub use split::grouped_split;
pub use tree::{best_split, gini, gini_gain, Node, SplitChoice, Tree};

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::roc::{roc_auc, RocCurve, RocError};
use crate::Scalar;
use tree::TreeParams;

#[derive(Debug, Error)]
pub enum ForestError {
    #[error("training labels contain a single class")]
    SingleClass,
    #[error("{rows} training rows, need at least {needed}")]
    TooFewRows { rows: usize, needed: usize },
    #[error("expected {expected} features, got {got}")]
    FeatureMismatch { expected: usize, got: usize },
    #[error("model variant {got} where {expected} was required")]
    VariantMismatch { expected: &'static str, got: &'static str },
    #[error("all rows belong to one group")]
    SingleGroup,
    #[error("no rows")]
    Empty,
    #[error("parameter grid is empty")]
    EmptyGrid,
    #[error("invalid parameters: {0}")]
    Params(String),
    #[error("model format: {0}")]
    Format(String),
    #[error(transparent)]
    Roc(#[from] RocError),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ForestParams {
    pub n_trees: usize,
    pub max_features: usize,
    pub min_samples_split: usize,
    pub seed: u64,
    /// Train each tree on a bootstrap resample; off trains every tree on all rows.
    pub bootstrap: bool,
    /// Per feature and node, at most this many candidate thresholds.
    pub max_thresholds: usize,
}

impl Default for ForestParams {
    fn default() -> Self {
        ForestParams {
            n_trees: 100,
            max_features: 5,
            min_samples_split: 50,
            seed: 0,
            bootstrap: true,
            max_thresholds: 64,
        }
    }
}

impl ForestParams {
    pub fn for_variant(variant: Variant, seed: u64) -> Self {
        let min_samples_split = match variant {
            Variant::Full => 50,
            Variant::NoFingerprint => 100,
        };
        ForestParams {
            min_samples_split,
            seed,
            ..Default::default()
        }
    }

    fn validate(&self) -> Result<(), ForestError> {
        if self.n_trees == 0 {
            return Err(ForestError::Params("n_trees must be positive".into()));
        }
        if self.max_features == 0 {
            return Err(ForestError::Params("max_features must be positive".into()));
        }
        if self.max_thresholds == 0 {
            return Err(ForestError::Params("max_thresholds must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ForestModel<T> {
    pub params: ForestParams,
    pub variant: Variant,
    pub n_features: usize,
    pub trees: Vec<Tree<T>>,
}

impl<T: Scalar> ForestModel<T> {
    pub fn fit(x: &Matrix<T>, y: &[bool], params: ForestParams, variant: Variant) -> Result<Self, ForestError> {
        params.validate()?;
        let n = x.rows();
        if y.len() != n {
            return Err(ForestError::FeatureMismatch {
                expected: n,
                got: y.len(),
            });
        }
        let needed = params.min_samples_split.max(2);
        if n < needed {
            return Err(ForestError::TooFewRows { rows: n, needed });
        }
        if y.iter().all(|&l| l) || y.iter().all(|&l| !l) {
            return Err(ForestError::SingleClass);
        }
        if x.data.iter().any(|v| !v.is_finite()) {
            return Err(ForestError::Params("non-finite feature value".into()));
        }
        let tp = TreeParams {
            max_features: params.max_features,
            min_samples_split: params.min_samples_split,
            max_thresholds: params.max_thresholds,
        };
        let trees = (0..params.n_trees)
            .into_par_iter()
            .map(|i| {
                let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
                rng.set_stream(i as u64);
                let rows: Vec<u32> = if params.bootstrap {
                    (0..n).map(|_| rng.gen_range(0..n as u32)).collect()
                } else {
                    (0..n as u32).collect()
                };
                tree::grow(x, y, rows, tp, &mut rng)
            })
            .collect();
        Ok(ForestModel {
            params,
            variant,
            n_features: x.cols,
            trees,
        })
    }

    /// Mean over trees of the positive fraction in the reached leaf.
    pub fn predict_proba(&self, row: &[T]) -> Result<T, ForestError> {
        if row.len() != self.n_features {
            return Err(ForestError::FeatureMismatch {
                expected: self.n_features,
                got: row.len(),
            });
        }
        let sum = self.trees.iter().fold(T::zero(), |acc, t| acc + t.proba(row));
        Ok(sum / T::from_usize(self.trees.len()).expect("count"))
    }

    pub fn predict_matrix(&self, x: &Matrix<T>) -> Result<Vec<T>, ForestError> {
        if x.cols != self.n_features {
            return Err(ForestError::FeatureMismatch {
                expected: self.n_features,
                got: x.cols,
            });
        }
        (0..x.rows())
            .into_par_iter()
            .map(|i| self.predict_proba(x.row(i)))
            .collect()
    }

    /// Number of splits using each feature, over all trees.
    pub fn split_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.n_features];
        for t in &self.trees {
            for n in &t.nodes {
                if let Node::Split { feature, .. } = n {
                    counts[*feature as usize] += 1;
                }
            }
        }
        counts
    }

    pub fn require_variant(&self, variant: Variant) -> Result<(), ForestError> {
        if self.variant != variant {
            return Err(ForestError::VariantMismatch {
                expected: variant.name(),
                got: self.variant.name(),
            });
        }
        Ok(())
    }

    pub fn roc(&self, x: &Matrix<T>, y: &[bool]) -> Result<RocCurve<T>, ForestError> {
        let scores = self.predict_matrix(x)?;
        Ok(roc_auc(&scores, y)?)
    }
}
