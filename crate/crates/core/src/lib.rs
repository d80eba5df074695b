//! Adaptive heap and partial-information sorting.
//!
//! This crate provides two things:
//!
//! * [`UnifiedHeap`]: a min-heap whose `pop` cost adapts to how close the
//!   popped item is (in push order and in pop order) to items popped
//!   earlier. Internally it maintains a complete binary tree with
//!   active/passive nodes and a forest of balanced index trees of doubly
//!   exponential sizes, rebalanced lazily with bulk insertions.
//! * [`sorter`]: sorting a set of items given a DAG of known order
//!   relations. Preprocessing touches only the graph; the sorting phase
//!   pushes items through a [`UnifiedHeap`] in topological order, which
//!   makes the number of comparisons track the number of linear
//!   extensions of the DAG rather than `n log n`.
//!
//! Everything is instrumented: a [`CostLedger`] counts comparisons,
//! elementary steps, and the coin/bill potential of the tree structure, so
//! the amortized claims can be replayed and checked by tests. The
//! [`oracle`] module holds the brute-force ground truth (extension
//! counting, depth budgets, a reference heap) that those tests compare
//! against.
//!
//! The crate is `no_std` (with `alloc`); IO, file formats, and the CLI
//! live in the companion `unisort-cli` crate.
#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod cmp;
pub mod gen;
pub mod graph;
pub mod index_forest;
pub mod ledger;
pub mod main_tree;
pub mod oracle;
pub mod rng;
pub mod sorter;
pub mod unified_heap;
pub mod unified_tree;

pub use cmp::{Comparator, NaturalOrder, RankOrder};
pub use graph::Dag;
pub use ledger::CostLedger;
pub use unified_heap::UnifiedHeap;
pub use unified_tree::{CheckMode, ThresholdMode, UnifiedTree};
