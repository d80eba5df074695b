//! Balanced index trees over leaders, with bulk insertion and deletion.
//!
//! Each level `i` holds a height-balanced search tree keyed by the leader's
//! leftmost-leaf index. Nodes carry subtree sizes and subtree minima (as
//! leaf handles), so the root of each tree knows the best item under any of
//! its leaders, and a suffix-minimum chain across levels yields the global
//! minimum in O(1).
//!
//! The trees support split, join, and linear-time build, which gives bulk
//! insertion/deletion of a presorted consecutive run of `k` leaders in
//! `O(k + log S)`: split at the run boundary, build the run in linear time,
//! join. That bulk contract is what keeps subtree-minimum maintenance cheap
//! when many leaders are created or destroyed at once.
//!
//! Item comparisons go through a caller-supplied `better(a, b) -> winner`
//! on leaf handles (`0` means "no item" and always loses), so this module
//! never sees items or comparators directly.

use alloc::boxed::Box;
use alloc::vec::Vec;

use crate::ledger::CostLedger;

/// Size-bound regime for the levels. `Paper` uses the doubly exponential
/// bounds `factor * 4^(2^(i+2))`; `Scaled` substitutes `factor * 4^(i+2)`
/// so that multi-level cascades are reachable in tests. Structural height
/// classes are unaffected by the mode.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum ThresholdMode {
    #[default]
    Paper,
    Scaled,
}

/// Bounds at or beyond this value are treated as unbounded.
pub const BOUND_SATURATED: u64 = 1 << 62;

/// `factor * 4^(2^(level+2))` (or the scaled surrogate), saturating.
pub fn size_bound(mode: ThresholdMode, level: usize, factor: u64) -> u64 {
    let shift = match mode {
        ThresholdMode::Paper => 1u64.checked_shl(level as u32 + 3).unwrap_or(u64::MAX),
        ThresholdMode::Scaled => 2 * (level as u64 + 2),
    };
    if shift >= 62 {
        return BOUND_SATURATED;
    }
    let v = (factor as u128) << shift;
    if v >= BOUND_SATURATED as u128 {
        BOUND_SATURATED
    } else {
        v as u64
    }
}

/// Pre-operation size bound (invariant entry bound).
pub fn threshold(mode: ThresholdMode, level: usize) -> u64 {
    size_bound(mode, level, 20)
}

/// One leader as stored in an index tree.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Entry {
    /// Leftmost leaf index of the leader's main-tree subtree; strictly
    /// increasing in left-to-right leader order.
    pub key: u32,
    /// Height of the leader in the main tree.
    pub height: u8,
    /// Leaf handle of the minimum item in the leader's subtree (0 if none).
    pub min_leaf: u32,
}

struct Node {
    entry: Entry,
    h: u8,
    size: u32,
    agg: u32,
    left: Link,
    right: Link,
}

type Link = Option<Box<Node>>;

fn height(l: &Link) -> i32 {
    l.as_ref().map_or(0, |n| n.h as i32)
}

fn size(l: &Link) -> u32 {
    l.as_ref().map_or(0, |n| n.size)
}

fn update<F: FnMut(u32, u32) -> u32>(n: &mut Node, better: &mut F, ledger: &CostLedger) {
    ledger.count_steps(1);
    n.h = (1 + height(&n.left).max(height(&n.right))) as u8;
    n.size = 1 + size(&n.left) + size(&n.right);
    let mut best = n.entry.min_leaf;
    if let Some(l) = &n.left {
        best = better(l.agg, best);
    }
    if let Some(r) = &n.right {
        best = better(best, r.agg);
    }
    n.agg = best;
}

fn rotate_left<F: FnMut(u32, u32) -> u32>(
    mut n: Box<Node>,
    better: &mut F,
    ledger: &CostLedger,
) -> Box<Node> {
    let mut r = n.right.take().expect("rotate_left needs a right child");
    n.right = r.left.take();
    update(&mut n, better, ledger);
    r.left = Some(n);
    update(&mut r, better, ledger);
    r
}

fn rotate_right<F: FnMut(u32, u32) -> u32>(
    mut n: Box<Node>,
    better: &mut F,
    ledger: &CostLedger,
) -> Box<Node> {
    let mut l = n.left.take().expect("rotate_right needs a left child");
    n.left = l.right.take();
    update(&mut n, better, ledger);
    l.right = Some(n);
    update(&mut l, better, ledger);
    l
}

/// Recomputes `n` and restores the AVL balance condition, assuming the
/// imbalance is at most 2.
fn balance<F: FnMut(u32, u32) -> u32>(
    mut n: Box<Node>,
    better: &mut F,
    ledger: &CostLedger,
) -> Box<Node> {
    update(&mut n, better, ledger);
    let bf = height(&n.left) - height(&n.right);
    if bf > 1 {
        let l = n.left.as_ref().unwrap();
        if height(&l.left) < height(&l.right) {
            let l = n.left.take().unwrap();
            n.left = Some(rotate_left(l, better, ledger));
        }
        rotate_right(n, better, ledger)
    } else if bf < -1 {
        let r = n.right.as_ref().unwrap();
        if height(&r.right) < height(&r.left) {
            let r = n.right.take().unwrap();
            n.right = Some(rotate_right(r, better, ledger));
        }
        rotate_left(n, better, ledger)
    } else {
        n
    }
}

/// Joins `left`, the single node `mid`, and `right`, where all keys in
/// `left` are below `mid.entry.key` and all keys in `right` above.
fn join<F: FnMut(u32, u32) -> u32>(
    left: Link,
    mid: Box<Node>,
    right: Link,
    better: &mut F,
    ledger: &CostLedger,
) -> Link {
    let (hl, hr) = (height(&left), height(&right));
    if hl > hr + 1 {
        let mut l = left.unwrap();
        l.right = join(l.right.take(), mid, right, better, ledger);
        Some(balance(l, better, ledger))
    } else if hr > hl + 1 {
        let mut r = right.unwrap();
        r.left = join(left, mid, r.left.take(), better, ledger);
        Some(balance(r, better, ledger))
    } else {
        let mut m = mid;
        m.left = left;
        m.right = right;
        update(&mut m, better, ledger);
        Some(m)
    }
}

fn split_last<F: FnMut(u32, u32) -> u32>(
    mut n: Box<Node>,
    better: &mut F,
    ledger: &CostLedger,
) -> (Link, Box<Node>) {
    match n.right.take() {
        None => {
            let l = n.left.take();
            (l, n)
        }
        Some(r) => {
            let (rest, last) = split_last(r, better, ledger);
            n.right = rest;
            (Some(balance(n, better, ledger)), last)
        }
    }
}

fn join2<F: FnMut(u32, u32) -> u32>(
    left: Link,
    right: Link,
    better: &mut F,
    ledger: &CostLedger,
) -> Link {
    match left {
        None => right,
        Some(l) => {
            let (rest, last) = split_last(l, better, ledger);
            join(rest, last, right, better, ledger)
        }
    }
}

/// Splits into (keys < key, keys >= key).
fn split_at<F: FnMut(u32, u32) -> u32>(
    t: Link,
    key: u32,
    better: &mut F,
    ledger: &CostLedger,
) -> (Link, Link) {
    match t {
        None => (None, None),
        Some(mut n) => {
            ledger.count_steps(1);
            let (l, r) = (n.left.take(), n.right.take());
            if n.entry.key < key {
                let (a, b) = split_at(r, key, better, ledger);
                (join(l, n, a, better, ledger), b)
            } else {
                let (a, b) = split_at(l, key, better, ledger);
                (a, join(b, n, r, better, ledger))
            }
        }
    }
}

fn build_link<F: FnMut(u32, u32) -> u32>(
    entries: &[Entry],
    better: &mut F,
    ledger: &CostLedger,
) -> Link {
    if entries.is_empty() {
        return None;
    }
    let mid = entries.len() / 2;
    let mut n = Box::new(Node {
        entry: entries[mid],
        h: 1,
        size: 1,
        agg: entries[mid].min_leaf,
        left: build_link(&entries[..mid], better, ledger),
        right: build_link(&entries[mid + 1..], better, ledger),
    });
    update(&mut n, better, ledger);
    Some(n)
}

fn min_key(l: &Link) -> Option<u32> {
    let mut cur = l.as_ref()?;
    while let Some(next) = cur.left.as_ref() {
        cur = next;
    }
    Some(cur.entry.key)
}

/// One balanced index tree.
#[derive(Default)]
pub struct IndexTree {
    root: Link,
}

impl IndexTree {
    pub fn new() -> Self {
        IndexTree { root: None }
    }

    pub fn len(&self) -> usize {
        size(&self.root) as usize
    }

    pub fn is_empty(&self) -> bool {
        self.root.is_none()
    }

    pub fn height(&self) -> u32 {
        height(&self.root) as u32
    }

    /// Handle of the minimum item over all stored leaders (0 if none).
    pub fn root_min(&self) -> u32 {
        self.root.as_ref().map_or(0, |n| n.agg)
    }

    /// Inserts a presorted run of leaders whose key range is contiguous
    /// relative to the current contents. A key collision indicates a
    /// structural bug and fails fast.
    pub fn bulk_insert<F: FnMut(u32, u32) -> u32>(
        &mut self,
        run: &[Entry],
        better: &mut F,
        ledger: &CostLedger,
    ) {
        if run.is_empty() {
            return;
        }
        debug_assert!(run.windows(2).all(|w| w[0].key < w[1].key));
        let (a, b) = split_at(self.root.take(), run[0].key, better, ledger);
        if let Some(k) = min_key(&b) {
            assert!(
                k > run[run.len() - 1].key,
                "bulk_insert key collision: run {}..={} overlaps existing key {}",
                run[0].key,
                run[run.len() - 1].key,
                k
            );
        }
        let built = build_link(run, better, ledger);
        let merged = join2(built, b, better, ledger);
        self.root = join2(a, merged, better, ledger);
    }

    /// Removes every leader with key in `lo..=hi`; returns how many were
    /// removed.
    pub fn bulk_delete_range<F: FnMut(u32, u32) -> u32>(
        &mut self,
        lo: u32,
        hi: u32,
        better: &mut F,
        ledger: &CostLedger,
    ) -> usize {
        let (a, rest) = split_at(self.root.take(), lo, better, ledger);
        let (gone, b) = split_at(
            rest,
            hi.checked_add(1).expect("key overflow"),
            better,
            ledger,
        );
        let removed = size(&gone) as usize;
        self.root = join2(a, b, better, ledger);
        removed
    }

    /// Replaces the stored subtree-minimum handle of the leader at `key`.
    pub fn update_min<F: FnMut(u32, u32) -> u32>(
        &mut self,
        key: u32,
        new_min: u32,
        better: &mut F,
        ledger: &CostLedger,
    ) {
        fn go<F: FnMut(u32, u32) -> u32>(
            n: &mut Box<Node>,
            key: u32,
            new_min: u32,
            better: &mut F,
            ledger: &CostLedger,
        ) {
            ledger.count_steps(1);
            if key == n.entry.key {
                n.entry.min_leaf = new_min;
            } else if key < n.entry.key {
                go(
                    n.left.as_mut().expect("update_min: key not present"),
                    key,
                    new_min,
                    better,
                    ledger,
                );
            } else {
                go(
                    n.right.as_mut().expect("update_min: key not present"),
                    key,
                    new_min,
                    better,
                    ledger,
                );
            }
            update(n, better, ledger);
        }
        go(
            self.root.as_mut().expect("update_min on empty tree"),
            key,
            new_min,
            better,
            ledger,
        );
    }

    /// In-order visit (ascending key).
    pub fn for_each(&self, f: &mut dyn FnMut(&Entry)) {
        fn go(l: &Link, f: &mut dyn FnMut(&Entry)) {
            if let Some(n) = l {
                go(&n.left, f);
                f(&n.entry);
                go(&n.right, f);
            }
        }
        go(&self.root, f);
    }

    pub fn entries(&self) -> Vec<Entry> {
        let mut out = Vec::with_capacity(self.len());
        self.for_each(&mut |e| out.push(*e));
        out
    }

    /// Drops all contents and returns the entries in order.
    pub fn take_all(&mut self) -> Vec<Entry> {
        let out = self.entries();
        self.root = None;
        out
    }

    /// Rebuilds from a sorted entry list in linear time.
    pub fn build_from_sorted<F: FnMut(u32, u32) -> u32>(
        entries: &[Entry],
        better: &mut F,
        ledger: &CostLedger,
    ) -> Self {
        debug_assert!(entries.windows(2).all(|w| w[0].key < w[1].key));
        IndexTree {
            root: build_link(entries, better, ledger),
        }
    }

    /// Structural self-check: AVL balance, key order, sizes, and aggregate
    /// minima. `better` must be side-effect free here.
    pub fn validate<F: FnMut(u32, u32) -> u32>(&self, better: &mut F) -> Result<(), &'static str> {
        fn go<F: FnMut(u32, u32) -> u32>(
            l: &Link,
            better: &mut F,
            lo: Option<u32>,
            hi: Option<u32>,
        ) -> Result<(i32, u32, u32), &'static str> {
            match l {
                None => Ok((0, 0, 0)),
                Some(n) => {
                    if lo.is_some_and(|b| n.entry.key <= b) || hi.is_some_and(|b| n.entry.key >= b)
                    {
                        return Err("key order violated");
                    }
                    let (hl, sl, al) = go(&n.left, better, lo, Some(n.entry.key))?;
                    let (hr, sr, ar) = go(&n.right, better, Some(n.entry.key), hi)?;
                    if (hl - hr).abs() > 1 {
                        return Err("AVL balance violated");
                    }
                    let h = 1 + hl.max(hr);
                    if h != n.h as i32 {
                        return Err("cached height wrong");
                    }
                    let s = 1 + sl + sr;
                    if s != n.size {
                        return Err("cached size wrong");
                    }
                    let partial = better(al, n.entry.min_leaf);
                    let agg = better(partial, ar);
                    if agg != n.agg {
                        return Err("cached subtree minimum wrong");
                    }
                    Ok((h, s, agg))
                }
            }
        }
        go(&self.root, better, None, None).map(|_| ())
    }
}

/// The forest of index trees plus the suffix-minimum chain and the
/// oversized-level list used by cleanup.
pub struct IndexForest {
    trees: Vec<IndexTree>,
    /// `chain_min[j]` = best leaf handle over levels `j..`; one extra slot
    /// at the end that is always 0.
    chain_min: Vec<u32>,
    oversized: Vec<bool>,
    mode: ThresholdMode,
}

impl IndexForest {
    pub fn new(mode: ThresholdMode) -> Self {
        IndexForest {
            trees: Vec::new(),
            chain_min: alloc::vec![0],
            oversized: Vec::new(),
            mode,
        }
    }

    pub fn mode(&self) -> ThresholdMode {
        self.mode
    }

    pub fn level_count(&self) -> usize {
        self.trees.len()
    }

    pub fn tree(&self, level: usize) -> Option<&IndexTree> {
        self.trees.get(level)
    }

    pub fn ensure_level(&mut self, level: usize) {
        while self.trees.len() <= level {
            self.trees.push(IndexTree::new());
            self.chain_min.push(0);
            self.oversized.push(false);
        }
    }

    fn refresh_oversized(&mut self, level: usize) {
        let bound = threshold(self.mode, level);
        self.oversized[level] = (self.trees[level].len() as u64) > bound;
    }

    pub fn bulk_insert<F: FnMut(u32, u32) -> u32>(
        &mut self,
        level: usize,
        run: &[Entry],
        better: &mut F,
        ledger: &CostLedger,
    ) {
        self.ensure_level(level);
        self.trees[level].bulk_insert(run, better, ledger);
        self.refresh_oversized(level);
    }

    pub fn bulk_delete_range<F: FnMut(u32, u32) -> u32>(
        &mut self,
        level: usize,
        lo: u32,
        hi: u32,
        better: &mut F,
        ledger: &CostLedger,
    ) -> usize {
        self.ensure_level(level);
        let removed = self.trees[level].bulk_delete_range(lo, hi, better, ledger);
        self.refresh_oversized(level);
        removed
    }

    pub fn update_min<F: FnMut(u32, u32) -> u32>(
        &mut self,
        level: usize,
        key: u32,
        new_min: u32,
        better: &mut F,
        ledger: &CostLedger,
    ) {
        self.trees[level].update_min(key, new_min, better, ledger);
    }

    pub fn take_all(&mut self, level: usize) -> Vec<Entry> {
        self.ensure_level(level);
        let out = self.trees[level].take_all();
        self.refresh_oversized(level);
        out
    }

    pub fn replace_level<F: FnMut(u32, u32) -> u32>(
        &mut self,
        level: usize,
        entries: &[Entry],
        better: &mut F,
        ledger: &CostLedger,
    ) {
        self.ensure_level(level);
        self.trees[level] = IndexTree::build_from_sorted(entries, better, ledger);
        self.refresh_oversized(level);
    }

    /// Recomputes `chain_min[from..=0]` after the root minimum of level
    /// `from` (or anything above it) changed. Cost O(from + 1), so levels
    /// near the front of the chain are cheap to refresh.
    pub fn refresh_chain<F: FnMut(u32, u32) -> u32>(
        &mut self,
        from: usize,
        better: &mut F,
        ledger: &CostLedger,
    ) {
        if self.trees.is_empty() {
            return;
        }
        let from = from.min(self.trees.len() - 1);
        for j in (0..=from).rev() {
            ledger.count_steps(1);
            self.chain_min[j] = better(self.trees[j].root_min(), self.chain_min[j + 1]);
        }
    }

    /// Best leaf handle over all leaders (0 if none).
    pub fn global_min(&self) -> u32 {
        self.chain_min.first().copied().unwrap_or(0)
    }

    /// Highest level whose size exceeds its pre-operation bound.
    pub fn max_oversized(&self) -> Option<usize> {
        self.oversized.iter().rposition(|&b| b)
    }

    pub fn sizes(&self) -> Vec<usize> {
        self.trees.iter().map(|t| t.len()).collect()
    }

    /// Debug dump: one line per level `level size height min`.
    pub fn dump(&self) -> alloc::string::String {
        use core::fmt::Write as _;
        let mut out = alloc::string::String::new();
        for (j, tree) in self.trees.iter().enumerate() {
            let _ = writeln!(
                out,
                "{} {} {} {}",
                j,
                tree.len(),
                tree.height(),
                tree.root_min()
            );
        }
        out
    }
}
