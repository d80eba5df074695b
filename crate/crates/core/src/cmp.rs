//! Comparator abstraction.
//!
//! The heap and the sorters never compare items directly; they go through a
//! [`Comparator`] so that tests can count calls and back comparisons by a
//! hidden rank permutation. Any strict total order works.

use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;

pub trait Comparator<T> {
    fn compare(&mut self, a: &T, b: &T) -> Ordering;
}

impl<T, C: Comparator<T> + ?Sized> Comparator<T> for &mut C {
    fn compare(&mut self, a: &T, b: &T) -> Ordering {
        (**self).compare(a, b)
    }
}

/// Compares by the item's own `Ord`.
#[derive(Clone, Copy, Debug, Default)]
pub struct NaturalOrder;

impl<T: Ord> Comparator<T> for NaturalOrder {
    fn compare(&mut self, a: &T, b: &T) -> Ordering {
        a.cmp(b)
    }
}

/// Compares 1-indexed vertex ids by a hidden linear order, counting calls.
///
/// The hidden order is given as a sequence of ids from smallest to largest;
/// this is the only channel through which a sorting run may consult the
/// ground truth.
#[derive(Clone, Debug)]
pub struct RankOrder {
    rank: Vec<u32>,
    pub calls: u64,
}

impl RankOrder {
    /// `order[k]` is the id with rank `k` (ids are 1-indexed, ranks dense).
    pub fn from_order(order: &[u32]) -> Self {
        let n = order.len();
        let mut rank = vec![u32::MAX; n + 1];
        for (pos, &id) in order.iter().enumerate() {
            assert!(
                (1..=n as u32).contains(&id) && rank[id as usize] == u32::MAX,
                "order must list each id in 1..=n exactly once"
            );
            rank[id as usize] = pos as u32;
        }
        RankOrder { rank, calls: 0 }
    }

    pub fn rank_of(&self, id: u32) -> u32 {
        self.rank[id as usize]
    }
}

impl Comparator<u32> for RankOrder {
    fn compare(&mut self, a: &u32, b: &u32) -> Ordering {
        self.calls += 1;
        self.rank[*a as usize].cmp(&self.rank[*b as usize])
    }
}

/// Adapts a comparator on original ids to re-indexed ids via a lookup table
/// (`ids[k - 1]` is the original id of re-indexed vertex `k`).
pub struct MappedOrder<'a, C> {
    pub ids: &'a [u32],
    pub inner: &'a mut C,
}

impl<'a, C: Comparator<u32>> Comparator<u32> for MappedOrder<'a, C> {
    fn compare(&mut self, a: &u32, b: &u32) -> Ordering {
        let xa = self.ids[*a as usize - 1];
        let xb = self.ids[*b as usize - 1];
        self.inner.compare(&xa, &xb)
    }
}
