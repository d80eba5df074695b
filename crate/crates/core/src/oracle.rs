//! Brute-force ground truth for tests: exact linear-extension counts,
//! extension enumeration, the naive depth budget `d(i)`, per-pop cost
//! budgets, and a reference binary heap.
//!
//! Nothing here shares code with the structures it checks; these are the
//! independent oracles the acceptance suite compares against.

use alloc::collections::BinaryHeap;
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Reverse;
use core::fmt;

use crate::graph::Dag;

/// Counting is exact up to this vertex count; `24! < 2^128`, so a `u128`
/// accumulator never overflows within the supported range.
pub const COUNT_LIMIT: usize = 24;
/// Enumeration is restricted to graphs small enough to list extensions.
pub const ENUMERATE_LIMIT: usize = 10;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum OracleError {
    TooLarge { n: usize, limit: usize },
    PopOnEmpty { op_index: usize },
}

impl fmt::Display for OracleError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OracleError::TooLarge { n, limit } => {
                write!(f, "n = {n} exceeds the oracle limit {limit}")
            }
            OracleError::PopOnEmpty { op_index } => {
                write!(f, "trace op {op_index}: pop on empty heap")
            }
        }
    }
}

/// Exact number of linear extensions of `g`, by dynamic programming over
/// downsets: a set `S` can be written as prefix-orderings ending in any
/// vertex of `S` without out-edges inside `S`.
pub fn count_linear_extensions(g: &Dag) -> Result<u128, OracleError> {
    let n = g.n();
    if n > COUNT_LIMIT {
        return Err(OracleError::TooLarge {
            n,
            limit: COUNT_LIMIT,
        });
    }
    if n == 0 {
        return Ok(1);
    }
    let mut out_mask = vec![0u32; n];
    for &(u, v) in g.edges() {
        out_mask[u as usize - 1] |= 1 << (v - 1);
    }
    let mut f = vec![0u128; 1 << n];
    f[0] = 1;
    for s in 1usize..1 << n {
        let mut acc = 0u128;
        let mut rest = s as u32;
        while rest != 0 {
            let v = rest.trailing_zeros() as usize;
            rest &= rest - 1;
            if out_mask[v] & s as u32 == 0 {
                acc += f[s & !(1 << v)];
            }
        }
        f[s] = acc;
    }
    Ok(f[(1 << n) - 1])
}

/// `log2 e(G)`, or `None` when the graph is too large for exact counting.
pub fn log2_extensions(g: &Dag) -> Option<f64> {
    count_linear_extensions(g)
        .ok()
        .map(|c| libm::log2(c as f64))
}

/// All linear extensions of `g`, in lexicographic order.
pub fn enumerate_linear_extensions(g: &Dag) -> Result<Vec<Vec<u32>>, OracleError> {
    let n = g.n();
    if n > ENUMERATE_LIMIT {
        return Err(OracleError::TooLarge {
            n,
            limit: ENUMERATE_LIMIT,
        });
    }
    let mut indeg = vec![0usize; n + 1];
    for &(_, v) in g.edges() {
        indeg[v as usize] += 1;
    }
    let mut used = vec![false; n + 1];
    let mut prefix = Vec::with_capacity(n);
    let mut result = Vec::new();
    fn go(
        g: &Dag,
        indeg: &mut [usize],
        used: &mut [bool],
        prefix: &mut Vec<u32>,
        result: &mut Vec<Vec<u32>>,
    ) {
        if prefix.len() == g.n() {
            result.push(prefix.clone());
            return;
        }
        for v in 1..=g.n() as u32 {
            if used[v as usize] || indeg[v as usize] != 0 {
                continue;
            }
            used[v as usize] = true;
            for &w in g.out_neighbors(v) {
                indeg[w as usize] -= 1;
            }
            prefix.push(v);
            go(g, indeg, used, prefix, result);
            prefix.pop();
            for &w in g.out_neighbors(v) {
                indeg[w as usize] += 1;
            }
            used[v as usize] = false;
        }
    }
    go(g, &mut indeg, &mut used, &mut prefix, &mut result);
    Ok(result)
}

/// Naive depth budget for leaf `i`: `1 + min_j (log2(1 + |i - j|) +
/// log2(1 + t - s(j)))`, scanning all leaves. Leaves that were never
/// accessed contribute nothing; if no leaf was ever accessed the budget is
/// undefined and `None` is returned.
///
/// `s1` holds `s + 1` per leaf with `s1[0]` unused and `0` meaning "never";
/// this matches the encoding the tree itself uses.
pub fn d_naive(s1: &[u64], t: u64, i: usize) -> Option<f64> {
    let mut best: Option<f64> = None;
    for (j, &sj1) in s1.iter().enumerate().skip(1) {
        if sj1 == 0 {
            continue;
        }
        let dist = (i as i64 - j as i64).unsigned_abs();
        let age = t + 2 - sj1; // 1 + t - s(j)
        let term = libm::log2((1 + dist) as f64) + libm::log2(age as f64);
        best = Some(best.map_or(term, |b: f64| b.min(term)));
    }
    best.map(|b| 1.0 + b)
}

/// Exact check `height <= d(i) + 3` in integer arithmetic, avoiding float
/// rounding: `log2 a + log2 b >= c` iff `a * b >= 2^c`.
pub fn d_supports_height(s1: &[u64], t: u64, i: usize, height: u32) -> bool {
    if height <= 4 {
        return true;
    }
    let need = 1u128 << (height - 4);
    let mut any = false;
    for (j, &sj1) in s1.iter().enumerate().skip(1) {
        if sj1 == 0 {
            continue;
        }
        any = true;
        let dist = (i as i64 - j as i64).unsigned_abs() as u128;
        let age = (t + 2 - sj1) as u128;
        if (1 + dist) * age < need {
            return false;
        }
    }
    // No access yet: d is undefined and the bound is vacuous.
    let _ = any;
    true
}

/// One operation of a heap trace.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HeapOp {
    Push(u64),
    Pop,
}

/// Replays a trace on a textbook binary heap and returns the pop sequence.
/// Ties between equal keys go to the earlier push.
pub fn reference_heap_replay(trace: &[HeapOp]) -> Result<Vec<u64>, OracleError> {
    let mut heap: BinaryHeap<Reverse<(u64, u64)>> = BinaryHeap::new();
    let mut seq = 0u64;
    let mut pops = Vec::new();
    for (idx, &op) in trace.iter().enumerate() {
        match op {
            HeapOp::Push(key) => {
                heap.push(Reverse((key, seq)));
                seq += 1;
            }
            HeapOp::Pop => match heap.pop() {
                Some(Reverse((key, _))) => pops.push(key),
                None => return Err(OracleError::PopOnEmpty { op_index: idx }),
            },
        }
    }
    Ok(pops)
}

/// Per-pop cost budgets for a trace: the first pop gets budget 1; a later
/// pop of `x` gets `1 + min over earlier-popped y of (log2 |a(x) - a(y)| +
/// log2 (b(x) - b(y)))`, where `a` and `b` are 1-indexed push and pop
/// ranks. Quadratic in the number of pops; intended for test-sized traces.
pub fn unified_bound_terms(trace: &[HeapOp]) -> Result<Vec<f64>, OracleError> {
    let mut heap: BinaryHeap<Reverse<(u64, u64)>> = BinaryHeap::new();
    let mut push_rank = 0u64;
    // (a-rank, b-rank) of already-popped items.
    let mut popped: Vec<(u64, u64)> = Vec::new();
    let mut budgets = Vec::new();
    for (idx, &op) in trace.iter().enumerate() {
        match op {
            HeapOp::Push(key) => {
                push_rank += 1;
                heap.push(Reverse((key, push_rank)));
            }
            HeapOp::Pop => {
                let Reverse((_, a_x)) = heap
                    .pop()
                    .ok_or(OracleError::PopOnEmpty { op_index: idx })?;
                let b_x = popped.len() as u64 + 1;
                if popped.is_empty() {
                    budgets.push(1.0);
                } else {
                    let mut best = f64::INFINITY;
                    for &(a_y, b_y) in &popped {
                        let da = a_x.abs_diff(a_y).max(1);
                        let db = b_x - b_y;
                        let term = libm::log2(da as f64) + libm::log2(db as f64);
                        if term < best {
                            best = term;
                        }
                    }
                    budgets.push(1.0 + best);
                }
                popped.push((a_x, b_x));
            }
        }
    }
    Ok(budgets)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::parse_dag;
    use crate::rng::SplitMix64;
    use alloc::collections::BTreeSet;

    #[test]
    fn count_examples() {
        assert_eq!(
            count_linear_extensions(&parse_dag("3 0").unwrap()).unwrap(),
            6
        );
        assert_eq!(
            count_linear_extensions(&parse_dag("5 4\n1 2\n2 3\n3 4\n4 5").unwrap()).unwrap(),
            1
        );
        let diamond = parse_dag("4 4\n1 2\n1 3\n2 4\n3 4").unwrap();
        assert_eq!(count_linear_extensions(&diamond).unwrap(), 2);
    }

    #[test]
    fn count_two_chains_is_binomial() {
        // Two disjoint 4-chains: C(8, 4) = 70 interleavings.
        let g = parse_dag("8 6\n1 2\n2 3\n3 4\n5 6\n6 7\n7 8").unwrap();
        assert_eq!(count_linear_extensions(&g).unwrap(), 70);
    }

    #[test]
    fn count_rejects_oversized() {
        let g = Dag::new(25, Vec::new()).unwrap();
        assert!(matches!(
            count_linear_extensions(&g),
            Err(OracleError::TooLarge { .. })
        ));
    }

    #[test]
    fn enumerate_examples() {
        let diamond = parse_dag("4 4\n1 2\n1 3\n2 4\n3 4").unwrap();
        assert_eq!(
            enumerate_linear_extensions(&diamond).unwrap(),
            vec![vec![1, 2, 3, 4], vec![1, 3, 2, 4]]
        );
        let chain = parse_dag("3 2\n1 2\n2 3").unwrap();
        assert_eq!(
            enumerate_linear_extensions(&chain).unwrap(),
            vec![vec![1, 2, 3]]
        );
        assert_eq!(
            enumerate_linear_extensions(&parse_dag("3 0").unwrap())
                .unwrap()
                .len(),
            6
        );
    }

    #[test]
    fn dp_agrees_with_enumeration() {
        let mut rng = SplitMix64::new(99);
        for _ in 0..500 {
            let n = 1 + rng.below(8) as usize;
            let mut edges = Vec::new();
            for u in 1..=n as u32 {
                for v in u + 1..=n as u32 {
                    if rng.chance(0.3) {
                        edges.push((u, v));
                    }
                }
            }
            let g = Dag::new(n, edges).unwrap();
            let count = count_linear_extensions(&g).unwrap();
            let listed = enumerate_linear_extensions(&g).unwrap();
            assert_eq!(count, listed.len() as u128);
            let distinct: BTreeSet<_> = listed.iter().collect();
            assert_eq!(distinct.len(), listed.len());
        }
    }

    #[test]
    fn d_naive_examples() {
        // t = 5, s(i) = 4, everything else never: the j = i term gives
        // 1 + log2(1) + log2(2) = 2.
        let mut s1 = vec![0u64; 6];
        s1[2] = 5;
        let d = d_naive(&s1, 5, 2).unwrap();
        assert!((d - 2.0).abs() < 1e-12);

        // i = 10, s(9) = t - 1, s(10) never: the j = 9 term gives
        // 1 + log2(2) + log2(2) = 3.
        let mut s1 = vec![0u64; 11];
        let t = 7;
        s1[9] = t; // s = t - 1
        let d = d_naive(&s1, t, 10).unwrap();
        assert!((d - 3.0).abs() < 1e-12);

        // Near-but-old against far-but-fresh: take the smaller term.
        let mut s1 = vec![0u64; 20];
        let t = 100;
        s1[11] = 20; // distance 1, age 82: log2(2) + log2(82)
        s1[18] = 100; // distance 8, age 2: log2(9) + log2(2)
        let d = d_naive(&s1, t, 10).unwrap();
        let expected = 1.0 + libm::log2(9.0) + libm::log2(2.0);
        assert!((d - expected).abs() < 1e-12);

        assert_eq!(d_naive(&vec![0u64; 8], 0, 3), None);
    }

    #[test]
    fn d_supports_height_matches_float_formula() {
        let mut rng = SplitMix64::new(5);
        for _ in 0..200 {
            let n = 1 + rng.below(20) as usize;
            let t = rng.below(50);
            let mut s1 = vec![0u64; n + 1];
            for j in 1..=n {
                if rng.chance(0.5) {
                    s1[j] = 1 + rng.below(t + 1);
                }
            }
            let i = 1 + rng.below(n as u64) as usize;
            for height in 0..12u32 {
                let exact = d_supports_height(&s1, t, i, height);
                let float = match d_naive(&s1, t, i) {
                    None => true,
                    Some(d) => (height as f64) <= d + 3.0 + 1e-9,
                };
                assert_eq!(exact, float, "height {height} t {t} i {i} s1 {s1:?}");
            }
        }
    }

    #[test]
    fn reference_heap_pops_sorted_with_stable_ties() {
        let trace = vec![
            HeapOp::Push(3),
            HeapOp::Push(1),
            HeapOp::Push(2),
            HeapOp::Pop,
            HeapOp::Pop,
            HeapOp::Pop,
        ];
        assert_eq!(reference_heap_replay(&trace).unwrap(), vec![1, 2, 3]);
        assert!(matches!(
            reference_heap_replay(&[HeapOp::Pop]),
            Err(OracleError::PopOnEmpty { op_index: 0 })
        ));
    }

    #[test]
    fn unified_terms_for_sequential_pops() {
        // Push 5 items, pop them in push order: every pop after the first
        // has an adjacent finger, so each budget is exactly 1.
        let mut trace: Vec<HeapOp> = (1..=5).map(HeapOp::Push).collect();
        trace.extend([HeapOp::Pop; 5]);
        let budgets = unified_bound_terms(&trace).unwrap();
        assert_eq!(budgets.len(), 5);
        for b in budgets {
            assert!((b - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn unified_terms_interleaved_instance_is_linear() {
        // Push 1, n+1, 2, n+2, ..., n, 2n; pop all. Consecutive pops are 2
        // apart in push order and adjacent in pop order, so the total
        // budget is linear in n.
        let n = 64u64;
        let mut trace = Vec::new();
        for i in 1..=n {
            trace.push(HeapOp::Push(i));
            trace.push(HeapOp::Push(n + i));
        }
        trace.extend(core::iter::repeat(HeapOp::Pop).take(2 * n as usize));
        let budgets = unified_bound_terms(&trace).unwrap();
        let total: f64 = budgets.iter().sum();
        assert!(total <= 6.0 * n as f64, "total {total} not linear in n");
    }

    #[test]
    fn unified_terms_reverse_pops_have_adjacent_fingers() {
        // Keys pushed descending, so pops walk the push order backwards:
        // |a(x) - a(y)| = 1 and b(x) - b(y) = 1 after the first pop.
        let n = 32u64;
        let mut trace: Vec<HeapOp> = (0..n).map(|i| HeapOp::Push(n - i)).collect();
        trace.extend(core::iter::repeat(HeapOp::Pop).take(n as usize));
        let budgets = unified_bound_terms(&trace).unwrap();
        for b in &budgets[1..] {
            assert!((b - 1.0).abs() < 1e-12);
        }
    }
}
