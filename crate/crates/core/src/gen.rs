//! Instance generators: DAG families with known extension structure, and a
//! near-uniform sampler of compatible linear orders.
//!
//! The order sampler repeatedly picks a uniformly random source of the
//! remaining graph. That is not uniform over linear extensions (sources
//! that unlock many continuations are under-weighted), but correctness
//! tests only need *some* compatible hidden order, and this scheme is
//! simple and seed-stable.

use alloc::vec;
use alloc::vec::Vec;

use crate::graph::Dag;
use crate::rng::SplitMix64;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum GenKind {
    Edgeless,
    Chain,
    /// `k` disjoint chains of near-equal length over contiguous id blocks.
    KChains {
        k: usize,
    },
    /// Each forward pair (i, j), i < j, becomes an edge with probability `p`.
    RandomEdges {
        p: f64,
    },
    /// A Hamiltonian path `1 -> 2 -> ... -> n` plus random forward noise
    /// edges with probability `q` per pair.
    HamiltonianPlusNoise {
        q: f64,
    },
    /// Vertices get random intervals of width `w` in [0, 1]; `i -> j` when
    /// `i`'s interval ends before `j`'s begins.
    IntervalInduced {
        w: f64,
    },
}

/// Builds the DAG for `kind` over `n` vertices.
pub fn generate(kind: GenKind, n: usize, rng: &mut SplitMix64) -> Dag {
    let mut edges: Vec<(u32, u32)> = Vec::new();
    match kind {
        GenKind::Edgeless => {}
        GenKind::Chain => {
            for i in 1..n as u32 {
                edges.push((i, i + 1));
            }
        }
        GenKind::KChains { k } => {
            let k = k.max(1).min(n.max(1));
            let base = n / k;
            let extra = n % k;
            let mut start = 1u32;
            for c in 0..k {
                let len = base + usize::from(c < extra);
                for i in 0..len.saturating_sub(1) {
                    edges.push((start + i as u32, start + i as u32 + 1));
                }
                start += len as u32;
            }
        }
        GenKind::RandomEdges { p } => {
            for i in 1..=n as u32 {
                for j in i + 1..=n as u32 {
                    if rng.chance(p) {
                        edges.push((i, j));
                    }
                }
            }
        }
        GenKind::HamiltonianPlusNoise { q } => {
            for i in 1..n as u32 {
                edges.push((i, i + 1));
            }
            for i in 1..=n as u32 {
                for j in i + 2..=n as u32 {
                    if rng.chance(q) {
                        edges.push((i, j));
                    }
                }
            }
        }
        GenKind::IntervalInduced { w } => {
            let starts: Vec<f64> = (0..n).map(|_| rng.unit_f64()).collect();
            for i in 0..n {
                for j in 0..n {
                    if i != j && starts[i] + w < starts[j] {
                        edges.push((i as u32 + 1, j as u32 + 1));
                    }
                }
            }
        }
    }
    Dag::new(n, edges).expect("generated graphs are acyclic by construction")
}

/// A random linear order compatible with `g` (near-uniform source
/// sampling), as a sequence of ids from smallest to largest.
pub fn random_linear_extension(g: &Dag, rng: &mut SplitMix64) -> Vec<u32> {
    let n = g.n();
    let mut indeg = vec![0usize; n + 1];
    for &(_, v) in g.edges() {
        indeg[v as usize] += 1;
    }
    let mut sources: Vec<u32> = (1..=n as u32).filter(|&v| indeg[v as usize] == 0).collect();
    let mut order = Vec::with_capacity(n);
    while !sources.is_empty() {
        let pick = rng.below(sources.len() as u64) as usize;
        let v = sources.swap_remove(pick);
        order.push(v);
        for &w in g.out_neighbors(v) {
            indeg[w as usize] -= 1;
            if indeg[w as usize] == 0 {
                sources.push(w);
            }
        }
    }
    debug_assert_eq!(order.len(), n);
    order
}
