use std::ops::Range;

use super::{Allocation, ModelError};

/// Largest search space enumerated unless the caller raises the cap.
pub const DEFAULT_ENUMERATION_CAP: u64 = 100_000_000;

/// All `n^m` ordered partitions of `m` goods among `n` agents.
///
/// Allocation number `t` gives good `g` to agent `digit_g(t)`, where the
/// digits are the base-`n` expansion of `t` with good 0 least significant.
/// The order is fixed, so maximizer sets come out in a reproducible order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AllocationSpace {
    n: usize,
    m: usize,
    len: u64,
}

/// Checks the `n^m <= cap` guard and returns the enumerable space.
pub fn enumerate_allocations(n: usize, m: usize, cap: u64) -> Result<AllocationSpace, ModelError> {
    if n == 0 {
        return Err(ModelError::TooFewAgents(0));
    }
    let mut len: u128 = 1;
    for _ in 0..m {
        len = len.saturating_mul(n as u128);
        if len > cap as u128 {
            let requested = (n as u128).checked_pow(m as u32).unwrap_or(u128::MAX);
            return Err(ModelError::Capacity { requested, cap });
        }
    }
    Ok(AllocationSpace {
        n,
        m,
        len: len as u64,
    })
}

impl AllocationSpace {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn len(&self) -> u64 {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Owner assignment of allocation number `index`.
    pub fn owners_at(&self, mut index: u64) -> Vec<usize> {
        assert!(index < self.len, "allocation index {index} out of range");
        let n = self.n as u64;
        (0..self.m)
            .map(|_| {
                let digit = (index % n) as usize;
                index /= n;
                digit
            })
            .collect()
    }

    pub fn get(&self, index: u64) -> Allocation {
        Allocation::from_owners(&self.owners_at(index), self.n).expect("digits are below n")
    }

    pub fn iter(&self) -> AllocationIter {
        self.range(0..self.len)
    }

    /// Allocations with numbers in `range`, for partitioned consumption.
    pub fn range(&self, range: Range<u64>) -> AllocationIter {
        let end = range.end.min(self.len);
        let start = range.start.min(end);
        AllocationIter {
            n: self.n,
            owners: if start < end {
                self.owners_at(start)
            } else {
                Vec::new()
            },
            next: start,
            end,
        }
    }

    /// Splits `0..len` into at most `parts` contiguous, nonempty ranges.
    pub fn partition(&self, parts: usize) -> Vec<Range<u64>> {
        let parts = (parts.max(1) as u64).min(self.len.max(1));
        let chunk = self.len.div_ceil(parts);
        (0..parts)
            .map(|p| (p * chunk)..((p + 1) * chunk).min(self.len))
            .filter(|r| !r.is_empty())
            .collect()
    }
}

impl IntoIterator for AllocationSpace {
    type Item = Allocation;
    type IntoIter = AllocationIter;

    fn into_iter(self) -> AllocationIter {
        self.iter()
    }
}

/// Odometer over owner assignments; see [`AllocationSpace`].
#[derive(Debug, Clone)]
pub struct AllocationIter {
    n: usize,
    owners: Vec<usize>,
    next: u64,
    end: u64,
}

impl AllocationIter {
    fn remaining(&self) -> u64 {
        self.end - self.next
    }
}

/// Advances an owner assignment to the next one in enumeration order and
/// records the goods whose owner changed as `(good, old_owner, new_owner)`.
pub(crate) fn advance_owners(
    owners: &mut [usize],
    n: usize,
    changed: &mut Vec<(usize, usize, usize)>,
) {
    changed.clear();
    for (g, owner) in owners.iter_mut().enumerate() {
        let old = *owner;
        if old + 1 < n {
            *owner = old + 1;
            changed.push((g, old, old + 1));
            return;
        }
        *owner = 0;
        changed.push((g, old, 0));
    }
}

impl Iterator for AllocationIter {
    type Item = Allocation;

    fn next(&mut self) -> Option<Allocation> {
        if self.next >= self.end {
            return None;
        }
        let alloc = Allocation::from_owners(&self.owners, self.n).expect("digits are below n");
        self.next += 1;
        if self.next < self.end {
            let mut scratch = Vec::new();
            advance_owners(&mut self.owners, self.n, &mut scratch);
        }
        Some(alloc)
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let left = self.remaining() as usize;
        (left, Some(left))
    }
}

impl ExactSizeIterator for AllocationIter {}

#[cfg(test)]
mod tests {
    use std::collections::HashSet;

    use super::*;

    #[test]
    fn counts() {
        assert_eq!(
            enumerate_allocations(2, 0, DEFAULT_ENUMERATION_CAP)
                .unwrap()
                .iter()
                .count(),
            1
        );
        assert_eq!(
            enumerate_allocations(2, 3, DEFAULT_ENUMERATION_CAP)
                .unwrap()
                .iter()
                .count(),
            8
        );
        let all: HashSet<Allocation> = enumerate_allocations(3, 4, DEFAULT_ENUMERATION_CAP)
            .unwrap()
            .iter()
            .collect();
        assert_eq!(all.len(), 81);
    }

    #[test]
    fn zero_goods_gives_all_empty_bundles() {
        let only = enumerate_allocations(2, 0, 10)
            .unwrap()
            .iter()
            .next()
            .unwrap();
        assert_eq!(only.bundles(), &[Vec::<usize>::new(), Vec::new()]);
    }

    #[test]
    fn base_n_digit_order() {
        let space = enumerate_allocations(2, 3, 100).unwrap();
        let owners: Vec<Vec<usize>> = space.iter().map(|a| a.owners()).collect();
        assert_eq!(owners[0], vec![0, 0, 0]);
        assert_eq!(owners[1], vec![1, 0, 0]);
        assert_eq!(owners[2], vec![0, 1, 0]);
        assert_eq!(owners[7], vec![1, 1, 1]);
        for (t, o) in owners.iter().enumerate() {
            assert_eq!(&space.owners_at(t as u64), o);
        }
    }

    #[test]
    fn cap_is_enforced() {
        assert!(matches!(
            enumerate_allocations(4, 8, 1000),
            Err(ModelError::Capacity {
                requested: 65536,
                cap: 1000
            })
        ));
        assert!(enumerate_allocations(4, 8, 65536).is_ok());
        assert!(enumerate_allocations(10, 40, DEFAULT_ENUMERATION_CAP).is_err());
    }

    #[test]
    fn ranges_cover_the_space_in_order() {
        let space = enumerate_allocations(3, 5, 1000).unwrap();
        let whole: Vec<Allocation> = space.iter().collect();
        let pieces: Vec<Allocation> = space
            .partition(7)
            .into_iter()
            .flat_map(|r| space.range(r))
            .collect();
        assert_eq!(whole, pieces);
    }
}
