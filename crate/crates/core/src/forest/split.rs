use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::ForestError;

/// Row counts per group key, in key order.
pub(crate) fn group_sizes(groups: &[u32]) -> Vec<(u32, usize)> {
    let mut sizes: BTreeMap<u32, usize> = BTreeMap::new();
    for g in groups {
        *sizes.entry(*g).or_default() += 1;
    }
    sizes.into_iter().collect()
}

/// Splits row indexes into (train, test) so that every group lands on one side
/// and the test share approaches `test_fraction`.
pub fn grouped_split(
    groups: &[u32],
    test_fraction: f64,
    seed: u64,
) -> Result<(Vec<usize>, Vec<usize>), ForestError> {
    if groups.is_empty() {
        return Err(ForestError::Empty);
    }
    if !(test_fraction > 0.0 && test_fraction < 1.0) {
        return Err(ForestError::Params(format!("test fraction {test_fraction} outside (0, 1)")));
    }
    let mut sizes = group_sizes(groups);
    if sizes.len() < 2 {
        return Err(ForestError::SingleGroup);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    sizes.shuffle(&mut rng);
    let target = test_fraction * groups.len() as f64;
    let mut in_test: BTreeMap<u32, bool> = BTreeMap::new();
    let mut test = 0usize;
    for &(g, n) in &sizes {
        let take = (test as f64) + (n as f64) / 2.0 < target;
        if take {
            test += n;
        }
        in_test.insert(g, take);
    }
    if test == 0 {
        let &(g, _) = sizes.iter().min_by_key(|(g, n)| (*n, *g)).expect("two groups");
        in_test.insert(g, true);
    } else if test == groups.len() {
        let &(g, _) = sizes.iter().max_by_key(|(g, n)| (*n, std::cmp::Reverse(*g))).expect("two groups");
        in_test.insert(g, false);
    }
    let (mut train, mut test_rows) = (Vec::new(), Vec::new());
    for (i, g) in groups.iter().enumerate() {
        if in_test[g] {
            test_rows.push(i);
        } else {
            train.push(i);
        }
    }
    Ok((train, test_rows))
}
