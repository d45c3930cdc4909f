use rand::seq::index::sample;
use rand::Rng;

use super::features::Matrix;
use crate::Scalar;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Node<T> {
    /// Rows with `x[feature] <= threshold` go left.
    Split {
        feature: u32,
        threshold: T,
        left: u32,
        right: u32,
    },
    Leaf {
        pos: u32,
        neg: u32,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Tree<T> {
    pub nodes: Vec<Node<T>>,
}

impl<T: Scalar> Tree<T> {
    pub fn leaf_for(&self, x: &[T]) -> (u32, u32) {
        let mut i = 0usize;
        loop {
            match self.nodes[i] {
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    i = if x[feature as usize] <= threshold {
                        left as usize
                    } else {
                        right as usize
                    };
                }
                Node::Leaf { pos, neg } => return (pos, neg),
            }
        }
    }

    /// Positive fraction of the leaf reached by `x`.
    pub fn proba(&self, x: &[T]) -> T {
        let (pos, neg) = self.leaf_for(x);
        T::from_u32(pos).expect("count") / T::from_u32(pos + neg).expect("count")
    }

    pub fn depth(&self) -> usize {
        fn walk<T>(nodes: &[Node<T>], i: usize) -> usize {
            match nodes[i] {
                Node::Split { left, right, .. } => {
                    1 + walk(nodes, left as usize).max(walk(nodes, right as usize))
                }
                Node::Leaf { .. } => 0,
            }
        }
        walk(&self.nodes, 0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitChoice<T> {
    pub feature: usize,
    pub threshold: T,
    pub gain: T,
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct TreeParams {
    pub max_features: usize,
    pub min_samples_split: usize,
    pub max_thresholds: usize,
}

/// Gini impurity of a node with `pos` positives out of `n`.
pub fn gini<T: Scalar>(pos: usize, n: usize) -> T {
    if n == 0 {
        return T::zero();
    }
    let n = T::from_usize(n).expect("count");
    let p = T::from_usize(pos).expect("count") / n;
    let two = T::one() + T::one();
    two * p * (T::one() - p)
}

/// Decrease in size-weighted Gini impurity when `n` rows split into `(nl, pl)` and the rest.
pub fn gini_gain<T: Scalar>(pos: usize, n: usize, pl: usize, nl: usize) -> T {
    let nt = T::from_usize(n).expect("count");
    let wl = T::from_usize(nl).expect("count") / nt;
    let wr = T::from_usize(n - nl).expect("count") / nt;
    gini::<T>(pos, n) - wl * gini::<T>(pl, nl) - wr * gini::<T>(pos - pl, n - nl)
}

fn tolerance<T: Scalar>() -> T {
    T::epsilon() * T::of(64.0)
}

fn midpoint<T: Scalar>(a: T, b: T) -> T {
    let two = T::one() + T::one();
    let m = a + (b - a) / two;
    if m >= b {
        a
    } else {
        m
    }
}

/// Indexes `j` (into the sorted unique values) whose gap `u[j-1]..u[j]` is a candidate.
fn candidate_gaps(unique: usize, max_thresholds: usize) -> Vec<usize> {
    let gaps = unique.saturating_sub(1);
    if gaps <= max_thresholds {
        return (1..unique).collect();
    }
    let mut out: Vec<usize> = (1..=max_thresholds)
        .map(|q| (q * unique / (max_thresholds + 1)).clamp(1, unique - 1))
        .collect();
    out.dedup();
    out
}

/// Best Gini split of `rows` over `features`: highest gain, then lowest feature
/// index, then lowest threshold. `None` when no split reduces impurity.
pub fn best_split<T: Scalar>(
    x: &Matrix<T>,
    y: &[bool],
    rows: &[u32],
    features: &[usize],
    max_thresholds: usize,
) -> Option<SplitChoice<T>> {
    let n = rows.len();
    let pos = rows.iter().filter(|&&r| y[r as usize]).count();
    let tol = tolerance::<T>();
    let mut best: Option<SplitChoice<T>> = None;
    let mut pairs: Vec<(T, bool)> = Vec::with_capacity(n);
    let mut sorted_features = features.to_vec();
    sorted_features.sort_unstable();
    for &f in &sorted_features {
        pairs.clear();
        pairs.extend(rows.iter().map(|&r| (x.get(r as usize, f), y[r as usize])));
        pairs.sort_unstable_by(|a, b| a.0.partial_cmp(&b.0).expect("finite features"));
        // end (exclusive) and positives up to the end of each run of equal values
        let mut ends: Vec<(T, usize, usize)> = Vec::new();
        let mut p = 0usize;
        for (i, (v, l)) in pairs.iter().enumerate() {
            p += *l as usize;
            if i + 1 == pairs.len() || pairs[i + 1].0 != *v {
                ends.push((*v, i + 1, p));
            }
        }
        for j in candidate_gaps(ends.len(), max_thresholds) {
            let (lo, nl, pl) = ends[j - 1];
            let hi = ends[j].0;
            let gain = gini_gain::<T>(pos, n, pl, nl);
            let better = match best {
                None => gain > tol,
                Some(b) => gain > b.gain + tol,
            };
            if better {
                best = Some(SplitChoice {
                    feature: f,
                    threshold: midpoint(lo, hi),
                    gain,
                });
            }
        }
    }
    best
}

/// Grows one tree on `rows` (which may repeat indexes).
pub(crate) fn grow<T: Scalar, R: Rng>(
    x: &Matrix<T>,
    y: &[bool],
    mut rows: Vec<u32>,
    params: TreeParams,
    rng: &mut R,
) -> Tree<T> {
    let mut nodes = vec![Node::Leaf { pos: 0, neg: 0 }];
    let mut stack = vec![(0usize, 0usize, rows.len())];
    let n_features = x.cols;
    let k = params.max_features.clamp(1, n_features.max(1));
    while let Some((id, lo, hi)) = stack.pop() {
        let slice = &mut rows[lo..hi];
        let n = slice.len();
        let pos = slice.iter().filter(|&&r| y[r as usize]).count();
        let leaf = Node::Leaf {
            pos: pos as u32,
            neg: (n - pos) as u32,
        };
        if pos == 0 || pos == n || n < params.min_samples_split {
            nodes[id] = leaf;
            continue;
        }
        let features: Vec<usize> = if k >= n_features {
            (0..n_features).collect()
        } else {
            sample(rng, n_features, k).into_vec()
        };
        let Some(choice) = best_split(x, y, slice, &features, params.max_thresholds) else {
            nodes[id] = leaf;
            continue;
        };
        let mut split = 0;
        for i in 0..n {
            if x.get(slice[i] as usize, choice.feature) <= choice.threshold {
                slice.swap(i, split);
                split += 1;
            }
        }
        let left = nodes.len();
        nodes.push(Node::Leaf { pos: 0, neg: 0 });
        nodes.push(Node::Leaf { pos: 0, neg: 0 });
        nodes[id] = Node::Split {
            feature: choice.feature as u32,
            threshold: choice.threshold,
            left: left as u32,
            right: left as u32 + 1,
        };
        // right first so the left subtree is expanded first
        stack.push((left + 1, lo + split, hi));
        stack.push((left, lo, lo + split));
    }
    Tree { nodes }
}
