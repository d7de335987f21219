use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Contiguous, disjoint, ordered row blocks covering `[0, n)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlockPartition {
    ranges: Vec<Range<usize>>,
}

impl BlockPartition {
    /// Validates that the ranges are nonempty, ordered and cover `[0, n)`.
    pub fn from_ranges(ranges: Vec<Range<usize>>) -> Result<Self> {
        let mut expect = 0;
        for (q, r) in ranges.iter().enumerate() {
            if r.start != expect || r.end <= r.start {
                return Err(Error::shape(format!("block {q} ({r:?}) breaks the partition")));
            }
            expect = r.end;
        }
        if ranges.is_empty() {
            return Err(Error::shape("a partition needs at least one block"));
        }
        Ok(Self { ranges })
    }

    /// Number of blocks.
    pub fn m(&self) -> usize {
        self.ranges.len()
    }

    /// Number of rows covered.
    pub fn n(&self) -> usize {
        self.ranges.last().map_or(0, |r| r.end)
    }

    pub fn ranges(&self) -> &[Range<usize>] {
        &self.ranges
    }

    pub fn range(&self, q: usize) -> Range<usize> {
        self.ranges[q].clone()
    }

    /// Owning block of each row.
    pub fn owners(&self) -> Vec<usize> {
        let mut owner = vec![0; self.n()];
        for (q, r) in self.ranges.iter().enumerate() {
            owner[r.clone()].fill(q);
        }
        owner
    }
}

/// `m` contiguous blocks of size ⌊n/m⌋ or ⌈n/m⌉, larger blocks first.
pub fn partition_uniform(n: usize, m: usize) -> Result<BlockPartition> {
    if m == 0 {
        return Err(Error::shape("block count must be at least 1"));
    }
    if m > n {
        return Err(Error::TooManyBlocks { n, m });
    }
    let (base, extra) = (n / m, n % m);
    let mut ranges = Vec::with_capacity(m);
    let mut start = 0;
    for q in 0..m {
        let len = base + usize::from(q < extra);
        ranges.push(start..start + len);
        start += len;
    }
    Ok(BlockPartition { ranges })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_examples() {
        assert_eq!(partition_uniform(10, 1).unwrap().ranges(), &[0..10]);
        assert_eq!(partition_uniform(10, 3).unwrap().ranges(), &[0..4, 4..7, 7..10]);
        let p = partition_uniform(6, 6).unwrap();
        assert!(p.ranges().iter().all(|r| r.len() == 1));
        assert!(matches!(partition_uniform(3, 4), Err(Error::TooManyBlocks { n: 3, m: 4 })));
    }

    #[test]
    fn owners_and_validation() {
        let p = partition_uniform(5, 2).unwrap();
        assert_eq!(p.owners(), vec![0, 0, 0, 1, 1]);
        assert!(BlockPartition::from_ranges(vec![0..2, 3..5]).is_err());
        assert!(BlockPartition::from_ranges(vec![0..2, 2..5]).is_ok());
    }
}
