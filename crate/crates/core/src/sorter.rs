//! Sorting under partial information.
//!
//! Two entry points:
//!
//! * [`uni_top_sort`]: preprocessing computes only a topological order of
//!   the DAG; the sorting phase pushes every vertex into a [`UnifiedHeap`]
//!   in that order and pops them all. The heap's adaptivity is what makes
//!   the comparison count track `log2` of the number of linear extensions
//!   (plus O(n)) instead of `n log n`.
//! * [`sort_under_partial_info`]: removes the additive O(n): sparse inputs
//!   (`m < n/3`) fall back to plain mergesort, everything else shortcuts a
//!   longest path, sorts the small remainder with [`uni_top_sort`], and
//!   galloping-merges it back into the path.
//!
//! A run is split into a preprocessing phase (graph work only, zero
//! comparator calls) and a sorting phase; the stats record the comparison
//! counter at the phase boundary so tests can verify the separation.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::fmt;

use crate::cmp::{Comparator, MappedOrder};
use crate::graph::Dag;
use crate::unified_heap::UnifiedHeap;
use crate::unified_tree::{CheckMode, ThresholdMode};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Algo {
    UniTopSort,
    Full,
    MergeSort,
}

impl fmt::Display for Algo {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Algo::UniTopSort => write!(f, "unitopsort"),
            Algo::Full => write!(f, "full"),
            Algo::MergeSort => write!(f, "mergesort"),
        }
    }
}

#[derive(Clone, Copy, Debug, Default)]
pub struct SortOptions {
    pub thresholds: ThresholdMode,
    pub checks: CheckMode,
    /// Record push/pop ranks and the derived interval endpoints (quadratic
    /// post-processing; meant for test-sized runs).
    pub record_analysis: bool,
}

#[derive(Clone, Debug)]
pub struct SortStats {
    pub n: usize,
    pub m: usize,
    pub algorithm: Algo,
    pub comparisons: u64,
    pub steps: u64,
    /// Comparator calls observed before the sorting phase began (must be 0).
    pub pre_phase_comparisons: u64,
    /// Filled by callers with oracle access; the sorter never computes it.
    pub log2_extensions: Option<f64>,
    /// For `Full` runs this describes the inner run on the reduced graph.
    pub analysis: Option<RunAnalysis>,
}

#[derive(Clone, Debug)]
pub struct SortOutcome {
    /// Vertex ids from smallest to largest under the hidden order.
    pub order: Vec<u32>,
    pub stats: SortStats,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SortError {
    /// The pop order contradicted a graph edge: the comparator cannot be a
    /// linear order compatible with the input graph.
    InconsistentComparator { edge: (u32, u32) },
}

impl fmt::Display for SortError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SortError::InconsistentComparator { edge: (u, v) } => write!(
                f,
                "comparator inconsistent with the graph: edge {u} -> {v} \
                 but {v} sorted before {u}"
            ),
        }
    }
}

/// Push/pop ranks of one heap run and the derived per-item intervals.
/// All vectors are indexed by vertex id (slot 0 unused). `r = a + b`;
/// `ell` is the largest `r(y)` over items dominated in both ranks.
#[derive(Clone, Debug)]
pub struct RunAnalysis {
    pub a: Vec<u32>,
    pub b: Vec<u32>,
    pub r: Vec<u32>,
    pub ell: Vec<u32>,
}

impl RunAnalysis {
    fn from_ranks(a: Vec<u32>, b: Vec<u32>) -> Self {
        let n = a.len() - 1;
        let mut r = vec![0u32; n + 1];
        for x in 1..=n {
            r[x] = a[x] + b[x];
        }
        let mut ell = vec![0u32; n + 1];
        for x in 1..=n {
            let mut best = 0u32;
            for y in 1..=n {
                if a[y] < a[x] && b[y] < b[x] {
                    best = best.max(r[y]);
                }
            }
            ell[x] = best;
        }
        RunAnalysis { a, b, r, ell }
    }

    /// For every edge `y -> x`: `a(y) < a(x)`, `b(y) < b(x)`, and
    /// consequently `r(y) <= ell(x)`.
    pub fn check_edges(&self, g: &Dag) -> Result<(), String> {
        for &(y, x) in g.edges() {
            let (y, x) = (y as usize, x as usize);
            if self.a[y] >= self.a[x] {
                return Err(alloc::format!("edge {y}->{x}: a({y}) >= a({x})"));
            }
            if self.b[y] >= self.b[x] {
                return Err(alloc::format!("edge {y}->{x}: b({y}) >= b({x})"));
            }
            if self.r[y] > self.ell[x] {
                return Err(alloc::format!("edge {y}->{x}: r({y}) > ell({x})"));
            }
        }
        Ok(())
    }

    /// `sum over items of log2(max(1, r - ell))`.
    pub fn interval_log_sum(&self) -> f64 {
        let mut total = 0.0;
        for x in 1..self.a.len() {
            let width = (self.r[x] - self.ell[x]).max(1);
            total += libm::log2(width as f64);
        }
        total
    }
}

fn verify_compatible(g: &Dag, order: &[u32]) -> Result<(), SortError> {
    let mut pos = vec![u32::MAX; g.n() + 1];
    for (p, &v) in order.iter().enumerate() {
        pos[v as usize] = p as u32;
    }
    for &(u, v) in g.edges() {
        if pos[u as usize] >= pos[v as usize] {
            return Err(SortError::InconsistentComparator { edge: (u, v) });
        }
    }
    Ok(())
}

/// Heap phase shared by both sorters: push `ids` in the given order into a
/// fresh heap and pop everything. Returns the pop order and the run stats
/// (ranks indexed by the pushed ids).
fn heap_phase<C: Comparator<u32>>(
    ids: &[u32],
    max_id: usize,
    cmp: &mut C,
    opts: SortOptions,
) -> (Vec<u32>, u64, u64, u64, Option<RunAnalysis>) {
    let mut heap: UnifiedHeap<u32, &mut C> =
        UnifiedHeap::with_config(ids.len(), cmp, opts.thresholds, opts.checks);
    // The sorting phase starts here; nothing before this line compares.
    heap.ledger().mark_phase(1);
    let pre_phase = heap.ledger().comparisons_at_phase();
    for &v in ids {
        heap.push(v);
    }
    let mut order = Vec::with_capacity(ids.len());
    while let Some(v) = heap.pop() {
        order.push(v);
    }
    let comparisons = heap.ledger().comparisons();
    let steps = heap.ledger().steps();
    let analysis = if opts.record_analysis {
        let mut a = vec![0u32; max_id + 1];
        let mut b = vec![0u32; max_id + 1];
        for (idx, &v) in ids.iter().enumerate() {
            a[v as usize] = idx as u32 + 1;
        }
        for (idx, &v) in order.iter().enumerate() {
            b[v as usize] = idx as u32 + 1;
        }
        Some(RunAnalysis::from_ranks(a, b))
    } else {
        None
    };
    (order, comparisons, steps, pre_phase, analysis)
}

/// Topological order as the only preprocessing, then one heap pass.
///
/// ```
/// use unisort_core::graph::parse_dag;
/// use unisort_core::sorter::{uni_top_sort, SortOptions};
/// use unisort_core::RankOrder;
///
/// // Two 2-chains: 1 -> 2 and 3 -> 4; hidden order interleaves them.
/// let g = parse_dag("4 2\n1 2\n3 4").unwrap();
/// let mut cmp = RankOrder::from_order(&[1, 3, 2, 4]);
/// let out = uni_top_sort(&g, &mut cmp, SortOptions::default()).unwrap();
/// assert_eq!(out.order, vec![1, 3, 2, 4]);
/// assert_eq!(out.stats.pre_phase_comparisons, 0);
/// ```
pub fn uni_top_sort<C: Comparator<u32>>(
    g: &Dag,
    cmp: &mut C,
    opts: SortOptions,
) -> Result<SortOutcome, SortError> {
    let topo = g.topological_order();
    let (order, comparisons, steps, pre_phase, analysis) = heap_phase(&topo, g.n(), cmp, opts);
    verify_compatible(g, &order)?;
    Ok(SortOutcome {
        order,
        stats: SortStats {
            n: g.n(),
            m: g.m(),
            algorithm: Algo::UniTopSort,
            comparisons,
            steps,
            pre_phase_comparisons: pre_phase,
            log2_extensions: None,
            analysis,
        },
    })
}

/// Merges `rest` into `path` (both sorted, insertion positions monotone)
/// with doubling search from the previous insertion point. Returns the
/// merged order and the number of comparisons.
pub fn galloping_merge<C: Comparator<u32>>(
    path: &[u32],
    rest: &[u32],
    cmp: &mut C,
) -> (Vec<u32>, u64) {
    let mut comps = 0u64;
    let mut out = Vec::with_capacity(path.len() + rest.len());
    let mut p = 0usize;
    for &x in rest {
        let mut less = |idx: usize, comps: &mut u64| {
            *comps += 1;
            cmp.compare(&path[idx], &x) == Ordering::Less
        };
        if p < path.len() && less(p, &mut comps) {
            let mut bound = 1usize;
            while p + bound < path.len() && less(p + bound, &mut comps) {
                bound <<= 1;
            }
            let mut lo = p + bound / 2; // known < x
            let mut hi = (p + bound).min(path.len()); // first known >= x (or end)
            while lo + 1 < hi {
                let mid = lo + (hi - lo) / 2;
                if less(mid, &mut comps) {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            out.extend_from_slice(&path[p..hi]);
            p = hi;
        }
        out.push(x);
    }
    out.extend_from_slice(&path[p..]);
    (out, comps)
}

/// Comparison-counting top-down mergesort over ids `1..=n`.
pub fn merge_sort_ids<C: Comparator<u32>>(n: usize, cmp: &mut C) -> (Vec<u32>, u64, u64) {
    fn sort<C: Comparator<u32>>(
        xs: &[u32],
        cmp: &mut C,
        comps: &mut u64,
        steps: &mut u64,
    ) -> Vec<u32> {
        if xs.len() <= 1 {
            return xs.to_vec();
        }
        let mid = xs.len() / 2;
        let left = sort(&xs[..mid], cmp, comps, steps);
        let right = sort(&xs[mid..], cmp, comps, steps);
        let mut out = Vec::with_capacity(xs.len());
        let (mut i, mut j) = (0, 0);
        while i < left.len() && j < right.len() {
            *comps += 1;
            *steps += 1;
            if cmp.compare(&left[i], &right[j]) == Ordering::Less {
                out.push(left[i]);
                i += 1;
            } else {
                out.push(right[j]);
                j += 1;
            }
        }
        *steps += (left.len() - i + right.len() - j) as u64;
        out.extend_from_slice(&left[i..]);
        out.extend_from_slice(&right[j..]);
        out
    }
    let ids: Vec<u32> = (1..=n as u32).collect();
    let mut comps = 0;
    let mut steps = 0;
    let order = sort(&ids, cmp, &mut comps, &mut steps);
    (order, comps, steps)
}

/// The full pipeline: mergesort when the graph is too sparse to help,
/// otherwise longest-path shortcutting, an inner [`uni_top_sort`] on the
/// reduced graph, and a galloping merge back into the path.
pub fn sort_under_partial_info<C: Comparator<u32>>(
    g: &Dag,
    cmp: &mut C,
    opts: SortOptions,
) -> Result<SortOutcome, SortError> {
    let n = g.n();
    if g.m() < n / 3 {
        let (order, comparisons, steps) = {
            let (order, comps, steps) = merge_sort_ids(n, cmp);
            (order, comps, steps)
        };
        verify_compatible(g, &order)?;
        return Ok(SortOutcome {
            order,
            stats: SortStats {
                n,
                m: g.m(),
                algorithm: Algo::MergeSort,
                comparisons,
                steps,
                pre_phase_comparisons: 0,
                log2_extensions: None,
                analysis: None,
            },
        });
    }

    // Preprocessing: longest path and the shortcut graph. No comparator
    // access happens in this phase (the reduction never sees it).
    let red = g.reduce();

    let mut comparisons = 0u64;
    let mut steps = 0u64;
    let mut analysis = None;
    let sorted_rest: Vec<u32> = if red.y_len() == 0 {
        Vec::new()
    } else {
        let mut mapped = MappedOrder {
            ids: &red.y_ids,
            inner: cmp,
        };
        let inner = uni_top_sort(&red.h, &mut mapped, opts)?;
        comparisons += inner.stats.comparisons;
        steps += inner.stats.steps;
        analysis = inner.stats.analysis;
        inner
            .order
            .iter()
            .map(|&hid| red.y_ids[hid as usize - 1])
            .filter(|&x| !red.on_path[x as usize])
            .collect()
    };

    let (order, merge_comps) = galloping_merge(&red.path, &sorted_rest, cmp);
    comparisons += merge_comps;
    steps += merge_comps + order.len() as u64;
    verify_compatible(g, &order)?;
    Ok(SortOutcome {
        order,
        stats: SortStats {
            n,
            m: g.m(),
            algorithm: Algo::Full,
            comparisons,
            steps,
            pre_phase_comparisons: 0,
            log2_extensions: None,
            analysis,
        },
    })
}
