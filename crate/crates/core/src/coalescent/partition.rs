use std::fmt;

use super::{CoalescenceMatrix, CoalescentError};
use crate::scalar::Real;

/// Set partition of `{1..=m}`, kept canonical: each block sorted, blocks
/// ordered by their smallest element.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Partition {
    blocks: Vec<Vec<usize>>,
}

impl Partition {
    /// Canonicalises `blocks`; returns `None` unless they partition `{1..=m}`
    /// for `m` the total number of elements.
    pub fn new(blocks: Vec<Vec<usize>>) -> Option<Self> {
        let mut blocks: Vec<Vec<usize>> = blocks.into_iter().filter(|b| !b.is_empty()).collect();
        for b in &mut blocks {
            b.sort_unstable();
        }
        blocks.sort_unstable_by_key(|b| b[0]);
        let m: usize = blocks.iter().map(Vec::len).sum();
        let mut seen = vec![false; m + 1];
        for &x in blocks.iter().flatten() {
            if x == 0 || x > m || std::mem::replace(&mut seen[x], true) {
                return None;
            }
        }
        Some(Self { blocks })
    }

    pub fn single_block(m: usize) -> Self {
        Self { blocks: vec![(1..=m).collect()] }
    }

    pub fn singletons(m: usize) -> Self {
        Self { blocks: (1..=m).map(|i| vec![i]).collect() }
    }

    /// Groups by a block id per element (element `k + 1` gets `ids[k]`).
    pub fn from_block_ids(ids: &[usize]) -> Self {
        let mut blocks: Vec<Vec<usize>> = Vec::new();
        let mut slot: Vec<(usize, usize)> = Vec::new();
        for (k, &id) in ids.iter().enumerate() {
            match slot.iter().find(|(b, _)| *b == id) {
                Some(&(_, pos)) => blocks[pos].push(k + 1),
                None => {
                    slot.push((id, blocks.len()));
                    blocks.push(vec![k + 1]);
                }
            }
        }
        Self { blocks }
    }

    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }

    pub fn num_blocks(&self) -> usize {
        self.blocks.len()
    }

    pub fn m(&self) -> usize {
        self.blocks.iter().map(Vec::len).sum()
    }

    /// True when every block of `self` lies inside a block of `coarser`.
    pub fn refines(&self, coarser: &Partition) -> bool {
        self.m() == coarser.m()
            && self
                .blocks
                .iter()
                .all(|b| coarser.blocks.iter().any(|c| b.iter().all(|x| c.binary_search(x).is_ok())))
    }

    /// Number of blocks of `self` contained in `block`.
    pub fn blocks_within(&self, block: &[usize]) -> usize {
        self.blocks.iter().filter(|b| block.contains(&b[0])).count()
    }

    /// All set partitions of `{1..=m}` in restricted-growth order.
    pub fn all(m: usize) -> Vec<Partition> {
        let mut out = Vec::new();
        let mut ids = vec![0usize; m];
        fn rec(k: usize, max: usize, ids: &mut Vec<usize>, out: &mut Vec<Partition>) {
            if k == ids.len() {
                out.push(Partition::from_block_ids(ids));
                return;
            }
            for id in 0..=max + 1 {
                ids[k] = id;
                rec(k + 1, max.max(id), ids, out);
            }
        }
        if m == 0 {
            return out;
        }
        rec(1, 0, &mut ids, &mut out);
        out
    }
}

impl fmt::Display for Partition {
    /// `{1,2}{3}` style.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in &self.blocks {
            write!(f, "{{")?;
            for (k, x) in b.iter().enumerate() {
                if k > 0 {
                    write!(f, ",")?;
                }
                write!(f, "{x}")?;
            }
            write!(f, "}}")?;
        }
        Ok(())
    }
}

/// Partition-valued coalescent of a sample: `i ~ j` at time `t` iff
/// `tau(i, j) >= t`. Only the breakpoints and the pairwise times are kept;
/// partitions are built per query.
#[derive(Clone, Debug, PartialEq)]
pub struct PartitionProcess<T> {
    m: usize,
    breakpoints: Vec<T>,
    /// `(tau, i, j)` sorted by decreasing `tau`: the order in which pairs join
    /// when time runs backwards.
    merges: Vec<(T, usize, usize)>,
    /// Pairs of identical labels, always in the same block.
    duplicates: Vec<(usize, usize)>,
}

impl<T: Real> PartitionProcess<T> {
    /// Sorted distinct coalescence times.
    pub fn breakpoints(&self) -> &[T] {
        &self.breakpoints
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn merge_order(&self) -> &[(T, usize, usize)] {
        &self.merges
    }

    pub fn partition_at(&self, t: T) -> Partition {
        let mut ids: Vec<usize> = (0..self.m).collect();
        fn find(ids: &mut [usize], mut x: usize) -> usize {
            while ids[x] != x {
                ids[x] = ids[ids[x]];
                x = ids[x];
            }
            x
        }
        let joined = self.merges.iter().take_while(|(tau, _, _)| *tau >= t).map(|&(_, i, j)| (i, j));
        for (i, j) in joined.chain(self.duplicates.iter().copied()) {
            let (a, b) = (find(&mut ids, i), find(&mut ids, j));
            ids[a.max(b)] = a.min(b);
        }
        let roots: Vec<usize> = (0..self.m).map(|k| find(&mut ids, k)).collect();
        Partition::from_block_ids(&roots)
    }
}

/// Builds the partition process of a coalescence matrix.
pub fn partition_process<T: Real>(mat: &CoalescenceMatrix<T>) -> Result<PartitionProcess<T>, CoalescentError> {
    mat.check_ultrametric()?;
    let m = mat.m();
    let mut merges: Vec<(T, usize, usize)> = mat.pairs().map(|(i, j, t)| (t, i, j)).collect();
    merges.sort_by(|a, b| b.0.partial_cmp(&a.0).expect("finite times").then((a.1, a.2).cmp(&(b.1, b.2))));
    let mut breakpoints: Vec<T> = merges.iter().map(|m| m.0).collect();
    breakpoints.reverse();
    breakpoints.dedup();
    let labels = mat.labels();
    let duplicates = mat.pairs().filter(|&(i, j, _)| labels[i] == labels[j]).map(|(i, j, _)| (i, j)).collect();
    Ok(PartitionProcess { m, breakpoints, merges, duplicates })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(blocks: &[&[usize]]) -> Partition {
        Partition::new(blocks.iter().map(|b| b.to_vec()).collect()).unwrap()
    }

    #[test]
    fn example_matrix() {
        let mat = CoalescenceMatrix::from_times(3, 2.0, |i, j| if (i, j) == (0, 1) { 0.9 } else { 0.3 });
        let pp = partition_process(&mat).unwrap();
        assert_eq!(pp.breakpoints(), &[0.3, 0.9]);
        assert_eq!(pp.partition_at(0.0), Partition::single_block(3));
        assert_eq!(pp.partition_at(0.5), p(&[&[1, 2], &[3]]));
        assert_eq!(pp.partition_at(0.9), p(&[&[1, 2], &[3]]));
        assert_eq!(pp.partition_at(1.5), Partition::singletons(3));
        assert_eq!(pp.partition_at(0.5).to_string(), "{1,2}{3}");
    }

    #[test]
    fn rejects_inconsistent_matrix() {
        let bad = CoalescenceMatrix::from_times(3, 2.0, |i, j| (i + j) as f64 * 0.1);
        assert!(matches!(partition_process(&bad), Err(CoalescentError::NotUltrametric { .. })));
    }

    #[test]
    fn refinement_and_enumeration() {
        assert!(p(&[&[1], &[2], &[3]]).refines(&p(&[&[1, 3], &[2]])));
        assert!(!p(&[&[1, 2], &[3]]).refines(&p(&[&[1, 3], &[2]])));
        let counts: Vec<usize> = (1..=5).map(|m| Partition::all(m).len()).collect();
        assert_eq!(counts, vec![1, 2, 5, 15, 52]);
        assert!(Partition::new(vec![vec![1, 2], vec![2]]).is_none());
        assert_eq!(p(&[&[3], &[2, 1]]).blocks(), &[vec![1, 2], vec![3]]);
        assert_eq!(p(&[&[1, 2], &[3]]).blocks_within(&[1, 2, 3]), 2);
    }
}
