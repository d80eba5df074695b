//! The complete binary "main tree" over item leaves.
//!
//! Nodes live in a heap-style array: node 1 is the root, node `k` has
//! children `2k` and `2k+1`, and leaf `i` (1-indexed) sits at node
//! `m + i - 1` for `m` leaves. Level navigation and k-th ancestors are
//! index arithmetic, which is all the level-linked capabilities the
//! structure needs without storing pointers.
//!
//! Each node is active or passive. A *leader* is an active node with a
//! passive parent; leaders tile the active leaf prefix `1..=n` with
//! disjoint aligned subtrees. Active nodes cache the leaf handle of the
//! minimum item in their subtree and the maximum access time in their
//! subtree; passive nodes' caches are stale and ignored.
//!
//! Access times are stored as `s + 1` with 0 meaning "never accessed"
//! (conceptually `s = -infinity`).

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt::Write as _;

use crate::ledger::CostLedger;

/// `s1` value for a leaf that was never accessed.
pub const NEVER: u64 = 0;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

/// A leader position: main-tree node plus its cached height and key.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct LeaderCursor {
    pub node: usize,
    pub height: u32,
    /// Leftmost leaf index of the node's subtree (the index-forest key).
    pub key: u32,
}

pub struct MainTree {
    /// Leaf count; power of two.
    m: usize,
    /// Tree height (`log2 m`).
    levels: u32,
    /// Occupied leaves `1..=n`.
    n: usize,
    /// Access clock.
    t: u64,
    /// Indexed by node id `1..2m`; `active[0]` unused.
    active: Vec<bool>,
    /// Leaf handle of the minimum item in the subtree (0 = none). Valid on
    /// active nodes; leaf entries are maintained by the owner via
    /// [`MainTree::set_leaf_occupied`].
    min_leaf: Vec<u32>,
    /// Maximum `s + 1` in the subtree. Valid on active nodes.
    max_s1: Vec<u64>,
    /// Per-leaf `s + 1` (index 0 unused).
    s1: Vec<u64>,
}

impl MainTree {
    /// Starts empty with the smallest power-of-two leaf count that leaves a
    /// passive leaf after `capacity_hint` activations (at least 2).
    pub fn new(capacity_hint: usize) -> Self {
        let m = (capacity_hint + 1).next_power_of_two().max(2);
        MainTree {
            m,
            levels: m.trailing_zeros(),
            n: 0,
            t: 0,
            active: vec![false; 2 * m],
            min_leaf: vec![0; 2 * m],
            max_s1: vec![NEVER; 2 * m],
            s1: vec![NEVER; m + 1],
        }
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn t(&self) -> u64 {
        self.t
    }

    pub fn levels(&self) -> u32 {
        self.levels
    }

    pub fn node_of_leaf(&self, i: usize) -> usize {
        debug_assert!(1 <= i && i <= self.m);
        self.m + i - 1
    }

    pub fn is_leaf_node(&self, node: usize) -> bool {
        node >= self.m
    }

    pub fn height_of(&self, node: usize) -> u32 {
        self.levels - node.ilog2()
    }

    pub fn parent(&self, node: usize) -> usize {
        node >> 1
    }

    /// Leftmost leaf index of the node's subtree.
    pub fn leftmost_leaf(&self, node: usize) -> u32 {
        ((node << self.height_of(node)) - self.m + 1) as u32
    }

    pub fn rightmost_leaf(&self, node: usize) -> u32 {
        let h = self.height_of(node);
        self.leftmost_leaf(node) + (1u32 << h) - 1
    }

    pub fn cursor(&self, node: usize) -> LeaderCursor {
        LeaderCursor {
            node,
            height: self.height_of(node),
            key: self.leftmost_leaf(node),
        }
    }

    pub fn is_active(&self, node: usize) -> bool {
        self.active[node]
    }

    pub fn is_leader(&self, node: usize) -> bool {
        self.active[node] && !self.active[self.parent(node)]
    }

    pub fn min_of(&self, node: usize) -> u32 {
        self.min_leaf[node]
    }

    pub fn max_s1_of(&self, node: usize) -> u64 {
        self.max_s1[node]
    }

    pub fn s1_of_leaf(&self, i: usize) -> u64 {
        self.s1[i]
    }

    /// Per-leaf `s + 1` values for leaves `1..=n` (slot 0 unused), as
    /// consumed by the depth oracles.
    pub fn s1_snapshot(&self) -> Vec<u64> {
        self.s1[..=self.n].to_vec()
    }

    pub fn set_leaf_occupied(&mut self, i: usize, occupied: bool) {
        let node = self.node_of_leaf(i);
        self.min_leaf[node] = if occupied { i as u32 } else { 0 };
    }

    /// Records an access to leaf `i` at the current clock, then advances
    /// the clock. Leaf `i`'s parent must already be passive, so no internal
    /// caches need touching.
    pub fn record_access(&mut self, i: usize) {
        let node = self.node_of_leaf(i);
        debug_assert!(!self.active[self.parent(node)]);
        self.s1[i] = self.t + 1;
        self.max_s1[node] = self.t + 1;
        self.t += 1;
    }

    /// Activates leaf `n + 1` (making it a leader); doubles the tree when
    /// the passive-leaf reserve runs out. Returns the new leaf index.
    pub fn activate_leaf(&mut self, ledger: &CostLedger) -> usize {
        let i = self.n + 1;
        let node = self.node_of_leaf(i);
        debug_assert!(!self.active[node] && !self.active[self.parent(node)]);
        ledger.count_steps(1);
        self.active[node] = true;
        self.s1[i] = NEVER;
        self.max_s1[node] = NEVER;
        self.min_leaf[node] = 0;
        self.n += 1;
        if self.n == self.m {
            self.double(ledger);
        }
        i
    }

    /// Grows to `2m` leaves: the old tree becomes the left subtree of a new
    /// passive root. Node ids change; leaf indices and keys do not.
    fn double(&mut self, ledger: &CostLedger) {
        let m2 = self.m * 2;
        ledger.count_steps(2 * m2 as u64);
        let mut active = vec![false; 2 * m2];
        let mut min_leaf = vec![0u32; 2 * m2];
        let mut max_s1 = vec![NEVER; 2 * m2];
        for depth in 0..=self.levels {
            let start = 1usize << depth;
            let len = 1usize << depth;
            // Old depth-d nodes land at the same offset one level lower.
            let new_start = start << 1;
            active[new_start..new_start + len].copy_from_slice(&self.active[start..start + len]);
            min_leaf[new_start..new_start + len]
                .copy_from_slice(&self.min_leaf[start..start + len]);
            max_s1[new_start..new_start + len].copy_from_slice(&self.max_s1[start..start + len]);
        }
        self.active = active;
        self.min_leaf = min_leaf;
        self.max_s1 = max_s1;
        self.s1.resize(m2 + 1, NEVER);
        self.m = m2;
        self.levels += 1;
    }

    /// The unique leader whose subtree contains leaf `i`, found by walking
    /// up while the parent is active.
    pub fn leader_of(&self, i: usize, ledger: &CostLedger) -> LeaderCursor {
        debug_assert!(1 <= i && i <= self.n);
        let mut node = self.node_of_leaf(i);
        debug_assert!(self.active[node]);
        ledger.count_steps(1);
        while self.active[self.parent(node)] {
            ledger.count_steps(1);
            node = self.parent(node);
        }
        self.cursor(node)
    }

    /// The adjacent leader left or right of `c`, or `None` at the boundary.
    /// Relies on the neighbor's height being within 2 of `c.height`, which
    /// the leader-gap invariant guarantees wherever this is called; the
    /// search checks the five candidate heights in O(1).
    pub fn leader_neighbor(
        &self,
        c: LeaderCursor,
        side: Side,
        ledger: &CostLedger,
    ) -> Option<LeaderCursor> {
        let j = match side {
            Side::Left => {
                if c.key == 1 {
                    return None;
                }
                c.key - 1
            }
            Side::Right => {
                let r = self.rightmost_leaf(c.node);
                if r as usize >= self.n {
                    return None;
                }
                r + 1
            }
        };
        let leaf_node = self.node_of_leaf(j as usize);
        let lo = c.height.saturating_sub(2);
        let hi = (c.height + 2).min(self.levels);
        for h in lo..=hi {
            ledger.count_steps(1);
            let cand = leaf_node >> h;
            if self.active[cand] && !self.active[self.parent(cand)] {
                return Some(self.cursor(cand));
            }
        }
        panic!(
            "no leader within height {}±2 adjacent to node {} (leaf {})",
            c.height, c.node, j
        );
    }

    /// Marks an internal active node passive. Its children become leaders
    /// unless further deactivation follows.
    pub fn deactivate(&mut self, node: usize, ledger: &CostLedger) {
        assert!(!self.is_leaf_node(node), "cannot deactivate a leaf");
        debug_assert!(self.active[node]);
        ledger.count_steps(1);
        self.active[node] = false;
    }

    /// Activates the parent of two active children, recomputing its caches.
    pub fn activate<F: FnMut(u32, u32) -> u32>(
        &mut self,
        node: usize,
        better: &mut F,
        ledger: &CostLedger,
    ) {
        debug_assert!(!self.active[node]);
        debug_assert!(self.active[2 * node] && self.active[2 * node + 1]);
        ledger.count_steps(1);
        self.active[node] = true;
        self.min_leaf[node] = better(self.min_leaf[2 * node], self.min_leaf[2 * node + 1]);
        self.max_s1[node] = self.max_s1[2 * node].max(self.max_s1[2 * node + 1]);
    }

    /// Would activating `node` (height `h`) break the recency rule? The
    /// leaves underneath may only sit below an active height-`h` ancestor
    /// if their last access is at least `2^h` clock ticks old.
    pub fn activation_blocked_by_recency(&self, node: usize) -> bool {
        let h = self.height_of(node);
        let max_s1 = self.max_s1[2 * node].max(self.max_s1[2 * node + 1]);
        match (self.t + 1).checked_sub(1u64 << h) {
            Some(limit) => max_s1 > limit,
            None => max_s1 != NEVER,
        }
    }

    /// The parent of leaf `n` must stay passive so the next activation has
    /// a free slot.
    pub fn is_parent_of_last_leaf(&self, node: usize) -> bool {
        self.n >= 1 && node == self.parent(self.node_of_leaf(self.n))
    }

    /// Recomputes min handles from leaf `i` up to its leader. Returns the
    /// leader cursor.
    pub fn recompute_min_path<F: FnMut(u32, u32) -> u32>(
        &mut self,
        i: usize,
        better: &mut F,
        ledger: &CostLedger,
    ) -> LeaderCursor {
        let mut node = self.node_of_leaf(i);
        ledger.count_steps(1);
        while self.active[self.parent(node)] {
            ledger.count_steps(1);
            node = self.parent(node);
            self.min_leaf[node] = better(self.min_leaf[2 * node], self.min_leaf[2 * node + 1]);
        }
        self.cursor(node)
    }

    /// Debug dump: one line per node `idx height active min_leaf max_s`.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for node in 1..2 * self.m {
            let max_s = if self.max_s1[node] == NEVER {
                String::from("never")
            } else {
                let mut s = String::new();
                let _ = write!(s, "{}", self.max_s1[node] - 1);
                s
            };
            let _ = writeln!(
                out,
                "{} {} {} {} {}",
                node,
                self.height_of(node),
                self.active[node] as u8,
                self.min_leaf[node],
                max_s
            );
        }
        out
    }

    #[doc(hidden)]
    pub fn corrupt_active_flag(&mut self, node: usize) {
        self.active[node] = !self.active[node];
    }
}
