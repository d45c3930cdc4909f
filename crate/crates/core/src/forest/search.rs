use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::split::group_sizes;
use super::{ForestError, ForestModel, ForestParams, Matrix, Variant};
use crate::roc::roc_auc;
use crate::Scalar;

/// (max_features, min_samples_split) pairs searched by default.
pub const DEFAULT_GRID: [(usize, usize); 9] = [
    (3, 50),
    (3, 100),
    (3, 200),
    (5, 50),
    (5, 100),
    (5, 200),
    (7, 50),
    (7, 100),
    (7, 200),
];

/// Assigns each row a fold in `0..k`; whole groups go to the least-filled fold,
/// largest groups first.
pub fn group_folds(groups: &[u32], k: usize, seed: u64) -> Vec<usize> {
    assert!(k >= 1);
    let mut sizes = group_sizes(groups);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    sizes.shuffle(&mut rng);
    sizes.sort_by(|a, b| b.1.cmp(&a.1));
    let mut fill = vec![0usize; k];
    let mut fold_of: BTreeMap<u32, usize> = BTreeMap::new();
    for (g, n) in sizes {
        let f = (0..k).min_by_key(|&f| (fill[f], f)).expect("k >= 1");
        fill[f] += n;
        fold_of.insert(g, f);
    }
    groups.iter().map(|g| fold_of[g]).collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct SearchRound {
    pub round: usize,
    pub rows: usize,
    /// (max_features, min_samples_split, mean cross-validated AUC)
    pub scores: Vec<(usize, usize, f64)>,
}

fn subset<T: Scalar>(x: &Matrix<T>, rows: &[usize]) -> Matrix<T> {
    let mut data = Vec::with_capacity(rows.len() * x.cols);
    for &r in rows {
        data.extend_from_slice(x.row(r));
    }
    Matrix { cols: x.cols, data }
}

/// Mean AUC over the group folds of `rows`; folds whose train or test side
/// lacks a class are skipped. `None` if every fold was skipped.
fn cv_auc<T: Scalar>(
    x: &Matrix<T>,
    y: &[bool],
    groups: &[u32],
    rows: &[usize],
    params: ForestParams,
    variant: Variant,
    folds: usize,
) -> Result<Option<f64>, ForestError> {
    let sub_groups: Vec<u32> = rows.iter().map(|&r| groups[r]).collect();
    let fold = group_folds(&sub_groups, folds, params.seed);
    let mut total = 0.0;
    let mut used = 0;
    for f in 0..folds {
        let train: Vec<usize> = (0..rows.len()).filter(|&i| fold[i] != f).map(|i| rows[i]).collect();
        let test: Vec<usize> = (0..rows.len()).filter(|&i| fold[i] == f).map(|i| rows[i]).collect();
        let ytr: Vec<bool> = train.iter().map(|&r| y[r]).collect();
        let yte: Vec<bool> = test.iter().map(|&r| y[r]).collect();
        let two_class = |v: &[bool]| v.iter().any(|&l| l) && v.iter().any(|&l| !l);
        if !two_class(&ytr) || !two_class(&yte) || train.len() < params.min_samples_split.max(2) {
            continue;
        }
        let model = ForestModel::fit(&subset(x, &train), &ytr, params, variant)?;
        let scores = model.predict_matrix(&subset(x, &test))?;
        total += roc_auc(&scores, &yte)?.auc.to_f64_lossy();
        used += 1;
    }
    Ok((used > 0).then(|| total / used as f64))
}

/// Successive halving over `grid`: every round scores the surviving configurations
/// by group-fold cross-validated AUC on a growing share of the rows and keeps the
/// better half, ties going to the earlier grid entry. The last round uses all rows.
pub fn halving_search<T: Scalar>(
    x: &Matrix<T>,
    y: &[bool],
    groups: &[u32],
    grid: &[(usize, usize)],
    base: ForestParams,
    variant: Variant,
    folds: usize,
) -> Result<(ForestParams, Vec<SearchRound>), ForestError> {
    if grid.is_empty() {
        return Err(ForestError::EmptyGrid);
    }
    if folds < 2 {
        return Err(ForestError::Params("need at least two folds".into()));
    }
    if x.rows() != y.len() || groups.len() != y.len() {
        return Err(ForestError::FeatureMismatch {
            expected: x.rows(),
            got: y.len().min(groups.len()),
        });
    }
    let mut rounds = 1;
    while (1usize << rounds) < grid.len() {
        rounds += 1;
    }
    // groups in a seeded order; each budget takes whole groups from the front
    let mut order = group_sizes(groups);
    let mut rng = ChaCha8Rng::seed_from_u64(base.seed ^ 0x5eed);
    order.shuffle(&mut rng);
    let mut rank: BTreeMap<u32, usize> = BTreeMap::new();
    for (i, (g, _)) in order.iter().enumerate() {
        rank.insert(*g, i);
    }
    let mut by_rank: Vec<usize> = (0..y.len()).collect();
    by_rank.sort_by_key(|&r| (rank[&groups[r]], r));

    let mut survivors: Vec<usize> = (0..grid.len()).collect();
    let mut log = Vec::new();
    for round in 0..rounds {
        let budget = y.len().div_ceil(1 << (rounds - 1 - round));
        let mut cut = budget.min(by_rank.len());
        while cut < by_rank.len() && cut > 0 && groups[by_rank[cut]] == groups[by_rank[cut - 1]] {
            cut += 1;
        }
        let mut rows = by_rank[..cut].to_vec();
        rows.sort_unstable();
        let mut scored = Vec::new();
        for &c in &survivors {
            let (mf, mss) = grid[c];
            let params = ForestParams {
                max_features: mf,
                min_samples_split: mss,
                ..base
            };
            let auc = cv_auc(x, y, groups, &rows, params, variant, folds)?;
            scored.push((c, auc.unwrap_or(f64::NEG_INFINITY)));
        }
        log.push(SearchRound {
            round,
            rows: rows.len(),
            scores: scored.iter().map(|&(c, a)| (grid[c].0, grid[c].1, a)).collect(),
        });
        scored.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
        let keep = if round + 1 == rounds { 1 } else { scored.len().div_ceil(2) };
        survivors = scored[..keep].iter().map(|&(c, _)| c).collect();
        survivors.sort_unstable();
    }
    let (mf, mss) = grid[survivors[0]];
    Ok((
        ForestParams {
            max_features: mf,
            min_samples_split: mss,
            ..base
        },
        log,
    ))
}
