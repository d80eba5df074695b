//! Min-heap facade over the adaptive tree.
//!
//! `push` adds a leaf; the k-th pushed item always lives at leaf k. `pop`
//! reads the global minimum handle, accesses that leaf (which is what makes
//! future pops near it cheap), overwrites it with the sentinel, and returns
//! the item. Ties between equal items go to the earlier push.
//!
//! # Example
//!
//! ```
//! use unisort_core::{NaturalOrder, UnifiedHeap};
//!
//! let mut heap = UnifiedHeap::new(NaturalOrder);
//! for x in [5u64, 1, 4, 1, 3] {
//!     heap.push(x);
//! }
//! assert_eq!(heap.pop(), Some(1));
//! assert_eq!(heap.pop(), Some(1)); // equal keys pop in push order
//! assert_eq!(heap.pop(), Some(3));
//! assert!(heap.ledger().comparisons() <= heap.ledger().steps());
//! ```

use crate::cmp::Comparator;
use crate::ledger::CostLedger;
use crate::unified_tree::{CheckMode, ThresholdMode, UnifiedTree};

pub struct UnifiedHeap<T, C: Comparator<T>> {
    tree: UnifiedTree<T, C>,
    pushed: u64,
    popped: u64,
}

impl<T, C: Comparator<T>> UnifiedHeap<T, C> {
    pub fn new(cmp: C) -> Self {
        Self::with_config(0, cmp, ThresholdMode::Paper, CheckMode::Off)
    }

    pub fn with_config(
        capacity_hint: usize,
        cmp: C,
        thresholds: ThresholdMode,
        checks: CheckMode,
    ) -> Self {
        UnifiedHeap {
            tree: UnifiedTree::with_config(capacity_hint, cmp, thresholds, checks),
            pushed: 0,
            popped: 0,
        }
    }

    pub fn push(&mut self, item: T) {
        self.tree.add_leaf(item);
        self.pushed += 1;
    }

    /// Removes and returns the minimum item, or `None` on an empty heap.
    pub fn pop(&mut self) -> Option<T> {
        let leaf = self.tree.global_min()?;
        self.tree.access(leaf);
        let item = self.tree.change_key(leaf, None);
        debug_assert!(item.is_some());
        self.popped += 1;
        item
    }

    pub fn peek(&self) -> Option<&T> {
        self.tree.global_min().and_then(|leaf| self.tree.item(leaf))
    }

    pub fn len(&self) -> usize {
        (self.pushed - self.popped) as usize
    }

    pub fn is_empty(&self) -> bool {
        self.pushed == self.popped
    }

    pub fn pushed(&self) -> u64 {
        self.pushed
    }

    pub fn popped(&self) -> u64 {
        self.popped
    }

    pub fn ledger(&self) -> &CostLedger {
        self.tree.ledger()
    }

    pub fn tree(&self) -> &UnifiedTree<T, C> {
        &self.tree
    }

    pub fn tree_mut(&mut self) -> &mut UnifiedTree<T, C> {
        &mut self.tree
    }
}
