use super::ClusterError;

/// Union-find over dense ids with union by size and path compression.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct DisjointSet {
    parent: Vec<u32>,
    size: Vec<u32>,
}

impl DisjointSet {
    /// `n` singletons with ids `0..n`.
    pub fn new(n: usize) -> Self {
        DisjointSet {
            parent: (0..n as u32).collect(),
            size: vec![1; n],
        }
    }

    /// Start from an existing partition given as `element -> representative`.
    ///
    /// Representatives must map to themselves.
    pub fn from_roots(roots: &[u32]) -> Result<Self, ClusterError> {
        let mut size = vec![0u32; roots.len()];
        for (i, &r) in roots.iter().enumerate() {
            let r = r as usize;
            if r >= roots.len() || roots[r] as usize != r {
                return Err(ClusterError::NotARoot(i as u32));
            }
            size[r] += 1;
        }
        for (i, s) in size.iter_mut().enumerate() {
            if roots[i] as usize != i {
                *s = 1;
            }
        }
        Ok(DisjointSet {
            parent: roots.to_vec(),
            size,
        })
    }

    pub fn len(&self) -> usize {
        self.parent.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parent.is_empty()
    }

    /// Register a new singleton and return its id.
    pub fn add(&mut self) -> u32 {
        let id = self.parent.len() as u32;
        self.parent.push(id);
        self.size.push(1);
        id
    }

    fn check(&self, a: u32) -> Result<(), ClusterError> {
        if (a as usize) < self.parent.len() {
            Ok(())
        } else {
            Err(ClusterError::UnknownId(a))
        }
    }

    pub fn find(&mut self, a: u32) -> Result<u32, ClusterError> {
        self.check(a)?;
        Ok(self.find_unchecked(a))
    }

    pub(crate) fn find_unchecked(&mut self, a: u32) -> u32 {
        let mut root = a;
        while self.parent[root as usize] != root {
            root = self.parent[root as usize];
        }
        let mut cur = a;
        while self.parent[cur as usize] != root {
            let next = self.parent[cur as usize];
            self.parent[cur as usize] = root;
            cur = next;
        }
        root
    }

    /// Root lookup without compression, for shared references.
    pub fn find_root(&self, a: u32) -> Result<u32, ClusterError> {
        self.check(a)?;
        let mut root = a;
        while self.parent[root as usize] != root {
            root = self.parent[root as usize];
        }
        Ok(root)
    }

    /// Merge the sets of `a` and `b`. The larger root survives; on a size tie the
    /// smaller id does.
    pub fn union(&mut self, a: u32, b: u32) -> Result<u32, ClusterError> {
        self.check(a)?;
        self.check(b)?;
        let ra = self.find_unchecked(a);
        let rb = self.find_unchecked(b);
        Ok(self.link_roots(ra, rb))
    }

    pub(crate) fn link_roots(&mut self, ra: u32, rb: u32) -> u32 {
        if ra == rb {
            return ra;
        }
        let (sa, sb) = (self.size[ra as usize], self.size[rb as usize]);
        let (winner, loser) = if sa > sb || (sa == sb && ra < rb) {
            (ra, rb)
        } else {
            (rb, ra)
        };
        self.parent[loser as usize] = winner;
        self.size[winner as usize] = sa + sb;
        winner
    }

    /// Size of the set containing `a`.
    pub fn set_size(&mut self, a: u32) -> Result<u32, ClusterError> {
        let r = self.find(a)?;
        Ok(self.size[r as usize])
    }

    pub fn same(&mut self, a: u32, b: u32) -> Result<bool, ClusterError> {
        Ok(self.find(a)? == self.find(b)?)
    }

    /// Fully compressed `element -> root` table.
    pub fn roots(&mut self) -> Vec<u32> {
        (0..self.parent.len() as u32)
            .map(|a| self.find_unchecked(a))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn singleton_and_union() {
        let mut ds = DisjointSet::new(4);
        assert_eq!(ds.find(2), Ok(2));
        ds.union(1, 2).unwrap();
        assert_eq!(ds.find(1).unwrap(), ds.find(2).unwrap());
        assert_eq!(ds.find(9), Err(ClusterError::UnknownId(9)));
        assert_eq!(ds.union(0, 9), Err(ClusterError::UnknownId(9)));
    }

    #[test]
    fn self_union_keeps_size() {
        let mut ds = DisjointSet::new(3);
        let r = ds.union(1, 1).unwrap();
        assert_eq!(r, 1);
        assert_eq!(ds.set_size(1), Ok(1));
    }

    #[test]
    fn larger_root_survives() {
        let mut ds = DisjointSet::new(5);
        ds.union(3, 4).unwrap();
        ds.union(3, 2).unwrap();
        let big = ds.find(2).unwrap();
        assert_eq!(ds.set_size(big), Ok(3));
        assert_eq!(ds.union(0, 2).unwrap(), big);
        // tie goes to the smaller id
        let mut ds = DisjointSet::new(4);
        assert_eq!(ds.union(3, 1), Ok(1));
    }

    #[test]
    fn long_chain_matches_components() {
        let n = 2000;
        let mut ds = DisjointSet::new(n);
        for i in 0..1000u32 {
            ds.union(2 * i, 2 * i + 2 - (i % 2)).unwrap_or(0);
        }
        // brute-force labelling with the same edge list
        let mut label: Vec<usize> = (0..n).collect();
        let edges: Vec<(usize, usize)> = (0..1000usize)
            .map(|i| (2 * i, 2 * i + 2 - (i % 2)))
            .filter(|&(_, b)| b < n)
            .collect();
        loop {
            let mut changed = false;
            for &(a, b) in &edges {
                let m = label[a].min(label[b]);
                if label[a] != m || label[b] != m {
                    label[a] = m;
                    label[b] = m;
                    changed = true;
                }
            }
            if !changed {
                break;
            }
        }
        for a in 0..n {
            for b in [a / 2, a.saturating_sub(1), (a * 7) % n] {
                assert_eq!(
                    ds.find(a as u32).unwrap() == ds.find(b as u32).unwrap(),
                    label[a] == label[b]
                );
            }
        }
    }

    proptest! {
        #[test]
        fn matches_naive_partition(n in 1usize..60, ops in prop::collection::vec((0usize..60, 0usize..60), 0..120)) {
            let mut ds = DisjointSet::new(n);
            let mut naive: Vec<usize> = (0..n).collect();
            for (a, b) in ops {
                let (a, b) = (a % n, b % n);
                ds.union(a as u32, b as u32).unwrap();
                let (la, lb) = (naive[a], naive[b]);
                for l in naive.iter_mut() {
                    if *l == lb { *l = la; }
                }
            }
            let roots = ds.clone().roots();
            for a in 0..n {
                for b in 0..n {
                    prop_assert_eq!(roots[a] == roots[b], naive[a] == naive[b]);
                }
                // sizes agree with membership
                let size = ds.set_size(a as u32).unwrap() as usize;
                prop_assert_eq!(size, roots.iter().filter(|&&r| r == roots[a]).count());
                // find is idempotent
                let r = ds.find(a as u32).unwrap();
                prop_assert_eq!(ds.find(r).unwrap(), r);
            }
        }
    }
}
