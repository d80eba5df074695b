//! DAG representation, topological ordering, longest paths, and the
//! path-shortcutting reduction used by the full sorting pipeline.
//!
//! Vertices are 1-indexed. Parallel edges are accepted (they carry no extra
//! order information and are deduplicated where it matters); self-loops and
//! cycles are rejected at construction time so every downstream operation
//! can assume acyclicity.

use alloc::collections::{BTreeSet, VecDeque};
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum DagError {
    VertexOutOfRange {
        edge_index: usize,
        id: u64,
        n: usize,
    },
    SelfLoop {
        edge_index: usize,
        id: u32,
    },
    Cycle {
        witness: u32,
    },
}

impl fmt::Display for DagError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DagError::VertexOutOfRange { edge_index, id, n } => write!(
                f,
                "edge {}: vertex id {} out of range 1..={}",
                edge_index + 1,
                id,
                n
            ),
            DagError::SelfLoop { edge_index, id } => {
                write!(f, "edge {}: self-loop at vertex {}", edge_index + 1, id)
            }
            DagError::Cycle { witness } => {
                write!(f, "graph contains a cycle through vertex {witness}")
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ParseError {
    MissingHeader,
    MalformedLine { line: usize, content: String },
    EdgeCountMismatch { declared: usize, found: usize },
    Dag(DagError),
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParseError::MissingHeader => write!(f, "missing \"n m\" header line"),
            ParseError::MalformedLine { line, content } => {
                write!(f, "line {line}: malformed \"{content}\"")
            }
            ParseError::EdgeCountMismatch { declared, found } => {
                write!(f, "header declares {declared} edges, found {found}")
            }
            ParseError::Dag(e) => write!(f, "{e}"),
        }
    }
}

impl From<DagError> for ParseError {
    fn from(e: DagError) -> Self {
        ParseError::Dag(e)
    }
}

/// Directed acyclic graph over vertices `1..=n`; edges `u -> v` mean `u`
/// precedes `v` in every compatible linear order.
#[derive(Clone, Debug)]
pub struct Dag {
    n: usize,
    edges: Vec<(u32, u32)>,
    out: Vec<Vec<u32>>,
    inn: Vec<Vec<u32>>,
}

impl Dag {
    pub fn new(n: usize, edges: Vec<(u32, u32)>) -> Result<Self, DagError> {
        let mut out = vec![Vec::new(); n + 1];
        let mut inn = vec![Vec::new(); n + 1];
        for (idx, &(u, v)) in edges.iter().enumerate() {
            for id in [u, v] {
                if id == 0 || id as usize > n {
                    return Err(DagError::VertexOutOfRange {
                        edge_index: idx,
                        id: id as u64,
                        n,
                    });
                }
            }
            if u == v {
                return Err(DagError::SelfLoop {
                    edge_index: idx,
                    id: u,
                });
            }
            out[u as usize].push(v);
            inn[v as usize].push(u);
        }
        let g = Dag { n, edges, out, inn };
        match g.try_topological_order() {
            Some(_) => Ok(g),
            None => {
                let witness = g.cycle_witness();
                Err(DagError::Cycle { witness })
            }
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of edges (parallel edges counted individually).
    pub fn m(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[(u32, u32)] {
        &self.edges
    }

    pub fn out_neighbors(&self, v: u32) -> &[u32] {
        &self.out[v as usize]
    }

    pub fn in_neighbors(&self, v: u32) -> &[u32] {
        &self.inn[v as usize]
    }

    /// Kahn's algorithm with a FIFO queue seeded in ascending id order, so
    /// the result is deterministic (`[1, 2, .., n]` on an edgeless graph).
    pub fn topological_order(&self) -> Vec<u32> {
        self.try_topological_order()
            .expect("construction verified acyclicity")
    }

    fn try_topological_order(&self) -> Option<Vec<u32>> {
        let mut indeg = vec![0usize; self.n + 1];
        for &(_, v) in &self.edges {
            indeg[v as usize] += 1;
        }
        let mut queue: VecDeque<u32> = (1..=self.n as u32)
            .filter(|&v| indeg[v as usize] == 0)
            .collect();
        let mut order = Vec::with_capacity(self.n);
        while let Some(u) = queue.pop_front() {
            order.push(u);
            for &v in &self.out[u as usize] {
                indeg[v as usize] -= 1;
                if indeg[v as usize] == 0 {
                    queue.push_back(v);
                }
            }
        }
        if order.len() == self.n {
            Some(order)
        } else {
            None
        }
    }

    /// Some vertex on a cycle (for error reporting): any vertex never drained
    /// by Kahn's algorithm.
    fn cycle_witness(&self) -> u32 {
        let mut indeg = vec![0usize; self.n + 1];
        for &(_, v) in &self.edges {
            indeg[v as usize] += 1;
        }
        let mut queue: VecDeque<u32> = (1..=self.n as u32)
            .filter(|&v| indeg[v as usize] == 0)
            .collect();
        let mut drained = vec![false; self.n + 1];
        while let Some(u) = queue.pop_front() {
            drained[u as usize] = true;
            for &v in &self.out[u as usize] {
                indeg[v as usize] -= 1;
                if indeg[v as usize] == 0 {
                    queue.push_back(v);
                }
            }
        }
        (1..=self.n as u32)
            .find(|&v| !drained[v as usize])
            .unwrap_or(0)
    }

    /// A maximum-length directed path, computed by dynamic programming over
    /// a topological order. Ties are broken toward the smallest predecessor
    /// id (and the smallest end vertex), so the result is deterministic.
    pub fn longest_path(&self) -> Vec<u32> {
        if self.n == 0 {
            return Vec::new();
        }
        let order = self.topological_order();
        let mut len = vec![1u32; self.n + 1];
        let mut pred = vec![0u32; self.n + 1];
        for &v in &order {
            for &u in &self.inn[v as usize] {
                let cand = len[u as usize] + 1;
                if cand > len[v as usize]
                    || (cand == len[v as usize] && pred[v as usize] != 0 && u < pred[v as usize])
                {
                    len[v as usize] = cand;
                    pred[v as usize] = u;
                }
            }
        }
        let mut end = 1u32;
        for v in 2..=self.n as u32 {
            if len[v as usize] > len[end as usize] {
                end = v;
            }
        }
        let mut path = Vec::with_capacity(len[end as usize] as usize);
        let mut cur = end;
        while cur != 0 {
            path.push(cur);
            cur = pred[cur as usize];
        }
        path.reverse();
        path
    }

    /// Shortcuts a longest path `P` down to the vertex set `Y` that still
    /// carries all order information: `Y` is `X - P` plus, for each such
    /// vertex, the last path vertex with an edge into it and the first path
    /// vertex with an edge out of it. `H` is the graph induced on `Y` plus
    /// edges chaining consecutive `Y ∩ P` vertices in path order.
    pub fn reduce(&self) -> Reduction {
        let path = self.longest_path();
        let mut path_pos = vec![usize::MAX; self.n + 1];
        for (pos, &v) in path.iter().enumerate() {
            path_pos[v as usize] = pos;
        }
        let on_path: Vec<bool> = (0..=self.n).map(|v| path_pos[v] != usize::MAX).collect();

        let mut in_y = vec![false; self.n + 1];
        for v in 1..=self.n as u32 {
            if on_path[v as usize] {
                continue;
            }
            in_y[v as usize] = true;
            // Last path vertex with an edge into v.
            let mut best_pred: Option<usize> = None;
            for &u in &self.inn[v as usize] {
                let pos = path_pos[u as usize];
                if pos != usize::MAX && best_pred.is_none_or(|b| pos > b) {
                    best_pred = Some(pos);
                }
            }
            if let Some(pos) = best_pred {
                in_y[path[pos] as usize] = true;
            }
            // First path vertex with an edge out of v.
            let mut best_succ: Option<usize> = None;
            for &w in &self.out[v as usize] {
                let pos = path_pos[w as usize];
                if pos != usize::MAX && best_succ.is_none_or(|b| pos < b) {
                    best_succ = Some(pos);
                }
            }
            if let Some(pos) = best_succ {
                in_y[path[pos] as usize] = true;
            }
        }

        // Re-index Y as 1..|Y| following a topological order of G restricted
        // to Y; downstream consumers assume dense 1-indexed ids.
        let mut y_ids = Vec::new();
        let mut h_id = vec![0u32; self.n + 1];
        for &v in &self.topological_order() {
            if in_y[v as usize] {
                y_ids.push(v);
                h_id[v as usize] = y_ids.len() as u32;
            }
        }

        let mut h_edges: BTreeSet<(u32, u32)> = BTreeSet::new();
        for &(u, v) in &self.edges {
            if in_y[u as usize] && in_y[v as usize] {
                h_edges.insert((h_id[u as usize], h_id[v as usize]));
            }
        }
        let mut prev_on_path: Option<u32> = None;
        for &v in &path {
            if !in_y[v as usize] {
                continue;
            }
            if let Some(p) = prev_on_path {
                h_edges.insert((h_id[p as usize], h_id[v as usize]));
            }
            prev_on_path = Some(v);
        }

        let h = Dag::new(y_ids.len(), h_edges.into_iter().collect())
            .expect("H inherits acyclicity from G");
        Reduction {
            path,
            y_ids,
            h,
            on_path,
            in_y,
        }
    }
}

/// Output of [`Dag::reduce`]: a longest path `P`, the shortcut vertex set
/// `Y` (with an id map back to the original graph), and the graph `H` on
/// the re-indexed `Y`.
#[derive(Clone, Debug)]
pub struct Reduction {
    /// Longest path of the original graph, in path order.
    pub path: Vec<u32>,
    /// Original id of re-indexed vertex `k` is `y_ids[k - 1]`; the order is
    /// topological for the original graph restricted to `Y`.
    pub y_ids: Vec<u32>,
    /// Graph on `1..=|Y|`.
    pub h: Dag,
    /// `on_path[v]` for original ids `v` (index 0 unused).
    pub on_path: Vec<bool>,
    /// `in_y[v]` for original ids `v` (index 0 unused).
    pub in_y: Vec<bool>,
}

impl Reduction {
    pub fn y_len(&self) -> usize {
        self.y_ids.len()
    }
}

/// Parses the DAG file format: line 1 is `n m`, followed by `m` lines `u v`.
pub fn parse_dag(text: &str) -> Result<Dag, ParseError> {
    let mut lines = text
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty());
    let (_, header) = lines.next().ok_or(ParseError::MissingHeader)?;
    let mut it = header.split_whitespace();
    let n: usize = it
        .next()
        .and_then(|s| s.parse().ok())
        .filter(|&n| n < u32::MAX as usize)
        .ok_or(ParseError::MissingHeader)?;
    let m: usize = it
        .next()
        .and_then(|s| s.parse().ok())
        .ok_or(ParseError::MissingHeader)?;
    if it.next().is_some() {
        return Err(ParseError::MissingHeader);
    }

    let mut edges = Vec::with_capacity(m);
    for (lineno, line) in lines {
        let malformed = || ParseError::MalformedLine {
            line: lineno + 1,
            content: String::from(line.trim()),
        };
        let mut it = line.split_whitespace();
        let u: u64 = it
            .next()
            .and_then(|s| s.parse().ok())
            .ok_or_else(malformed)?;
        let v: u64 = it
            .next()
            .and_then(|s| s.parse().ok())
            .ok_or_else(malformed)?;
        if it.next().is_some() {
            return Err(malformed());
        }
        if u == 0 || u > n as u64 || v == 0 || v > n as u64 {
            return Err(DagError::VertexOutOfRange {
                edge_index: edges.len(),
                id: if u == 0 || u > n as u64 { u } else { v },
                n,
            }
            .into());
        }
        edges.push((u as u32, v as u32));
    }
    if edges.len() != m {
        return Err(ParseError::EdgeCountMismatch {
            declared: m,
            found: edges.len(),
        });
    }
    Ok(Dag::new(n, edges)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn diamond() -> Dag {
        Dag::new(4, vec![(1, 2), (1, 3), (2, 4), (3, 4)]).unwrap()
    }

    #[test]
    fn parse_chain() {
        let g = parse_dag("3 2\n1 2\n2 3").unwrap();
        assert_eq!(g.n(), 3);
        assert_eq!(g.edges(), &[(1, 2), (2, 3)]);
    }

    #[test]
    fn parse_isolated() {
        let g = parse_dag("2 0").unwrap();
        assert_eq!(g.n(), 2);
        assert_eq!(g.m(), 0);
    }

    #[test]
    fn parse_rejects_cycle() {
        match parse_dag("2 2\n1 2\n2 1") {
            Err(ParseError::Dag(DagError::Cycle { .. })) => {}
            other => panic!("expected cycle error, got {other:?}"),
        }
    }

    #[test]
    fn parse_rejects_self_loop_and_bad_ids() {
        assert!(matches!(
            parse_dag("2 1\n1 1"),
            Err(ParseError::Dag(DagError::SelfLoop { .. }))
        ));
        assert!(matches!(
            parse_dag("2 1\n1 3"),
            Err(ParseError::Dag(DagError::VertexOutOfRange { .. }))
        ));
        assert!(matches!(
            parse_dag("2 1\n1 x"),
            Err(ParseError::MalformedLine { .. })
        ));
        assert!(matches!(
            parse_dag("2 2\n1 2"),
            Err(ParseError::EdgeCountMismatch {
                declared: 2,
                found: 1
            })
        ));
    }

    #[test]
    fn topological_order_examples() {
        let chain = parse_dag("3 2\n1 2\n2 3").unwrap();
        assert_eq!(chain.topological_order(), vec![1, 2, 3]);

        let edgeless = parse_dag("3 0").unwrap();
        assert_eq!(edgeless.topological_order(), vec![1, 2, 3]);

        let order = diamond().topological_order();
        let pos = |v: u32| order.iter().position(|&x| x == v).unwrap();
        for &(u, v) in diamond().edges() {
            assert!(pos(u) < pos(v), "edge {u}->{v} out of order in {order:?}");
        }
    }

    /// Brute-force: enumerate all directed paths.
    fn longest_path_by_enumeration(g: &Dag) -> usize {
        fn extend(g: &Dag, v: u32, len: usize, best: &mut usize) {
            *best = (*best).max(len);
            for &w in g.out_neighbors(v) {
                extend(g, w, len + 1, best);
            }
        }
        let mut best = 0;
        for v in 1..=g.n() as u32 {
            extend(g, v, 1, &mut best);
        }
        best
    }

    #[test]
    fn longest_path_examples() {
        let chain = parse_dag("3 2\n1 2\n2 3").unwrap();
        assert_eq!(chain.longest_path(), vec![1, 2, 3]);

        let edgeless = parse_dag("3 0").unwrap();
        assert_eq!(edgeless.longest_path(), vec![1]);

        // Both 1-2-4 and 1-3-4 have length 3; the tie-break picks the
        // smaller predecessor of 4.
        let g = diamond();
        assert_eq!(longest_path_by_enumeration(&g), 3);
        assert_eq!(g.longest_path(), vec![1, 2, 4]);
    }

    #[test]
    fn reduce_diamond() {
        let r = diamond().reduce();
        assert_eq!(r.path, vec![1, 2, 4]);
        assert_eq!(r.y_ids, vec![1, 3, 4]);
        // In re-indexed ids: 1->3 is (1,2), 3->4 is (2,3), chain 1->4 is (1,3).
        let mut edges = r.h.edges().to_vec();
        edges.sort_unstable();
        assert_eq!(edges, vec![(1, 2), (1, 3), (2, 3)]);
    }

    #[test]
    fn reduce_chain_plus_isolated() {
        let mut edges = Vec::new();
        for i in 1..10u32 {
            edges.push((i, i + 1));
        }
        let g = Dag::new(11, edges).unwrap();
        let r = g.reduce();
        assert_eq!(r.path, (1..=10).collect::<Vec<_>>());
        assert_eq!(r.y_ids, vec![11]);
        assert_eq!(r.h.m(), 0);
    }

    #[test]
    fn reduce_hamiltonian_path_gives_empty_y() {
        let g = parse_dag("4 3\n1 2\n2 3\n3 4").unwrap();
        let r = g.reduce();
        assert_eq!(r.y_len(), 0);
        assert_eq!(r.h.n(), 0);
    }

    #[test]
    fn reduce_dedupes_parallel_edges() {
        let g = Dag::new(3, vec![(1, 3), (1, 3), (1, 2), (2, 3)]).unwrap();
        let r = g.reduce();
        // P = [1, 2, 3]; Y is empty, so H has no duplicated edges to show,
        // but the parallel edge must not break anything upstream.
        assert_eq!(r.y_len(), 0);

        let g2 = Dag::new(4, vec![(1, 2), (1, 3), (1, 3), (2, 4), (3, 4)]).unwrap();
        let r2 = g2.reduce();
        let mut edges = r2.h.edges().to_vec();
        edges.sort_unstable();
        edges.dedup();
        assert_eq!(edges.len(), r2.h.m(), "H edges must be deduplicated");
    }

    fn arb_dag() -> impl Strategy<Value = Dag> {
        (
            1usize..40,
            proptest::collection::vec((0u32..1000, 0u32..1000), 0..120),
        )
            .prop_map(|(n, raw)| {
                // Orient every pair low -> high so the graph is acyclic.
                let edges = raw
                    .into_iter()
                    .map(|(a, b)| (a % n as u32 + 1, b % n as u32 + 1))
                    .filter(|(u, v)| u != v)
                    .map(|(u, v)| if u < v { (u, v) } else { (v, u) })
                    .collect();
                Dag::new(n, edges).unwrap()
            })
    }

    proptest! {
        #[test]
        fn topological_order_respects_edges(g in arb_dag()) {
            let order = g.topological_order();
            prop_assert_eq!(order.len(), g.n());
            let mut pos = vec![usize::MAX; g.n() + 1];
            for (i, &v) in order.iter().enumerate() {
                pos[v as usize] = i;
            }
            for &(u, v) in g.edges() {
                prop_assert!(pos[u as usize] < pos[v as usize]);
            }
        }

        #[test]
        fn reduction_size_bounds(g in arb_dag()) {
            let r = g.reduce();
            let off_path = g.n() - r.path.len();
            prop_assert!(r.y_len() >= off_path);
            prop_assert!(r.y_len() <= 3 * off_path);
            // Y ∩ P, ordered by P, must form a directed path in H.
            let mut prev: Option<u32> = None;
            for &v in &r.path {
                if !r.in_y[v as usize] {
                    continue;
                }
                let hid = r.y_ids.iter().position(|&x| x == v).unwrap() as u32 + 1;
                if let Some(p) = prev {
                    prop_assert!(r.h.edges().contains(&(p, hid)));
                }
                prev = Some(hid);
            }
        }

        #[test]
        fn longest_path_is_a_real_path_of_max_length(g in arb_dag()) {
            let p = g.longest_path();
            for w in p.windows(2) {
                prop_assert!(g.out_neighbors(w[0]).contains(&w[1]));
            }
            if g.n() <= 12 && g.m() <= 20 {
                prop_assert_eq!(p.len(), longest_path_by_enumeration(&g));
            }
        }
    }
}
#[cfg(test)]
mod parse_fuzz {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        /// Arbitrary text never panics the parser; it either yields a valid
        /// DAG or a structured error.
        #[test]
        fn parse_never_panics(text in "[ -~\n]{0,200}") {
            let _ = parse_dag(&text);
        }

        /// Near-valid inputs with random whitespace and numbers.
        #[test]
        fn parse_numeric_soup_never_panics(
            nums in proptest::collection::vec(0u64..20, 0..40)
        ) {
            let mut text = String::new();
            for (i, v) in nums.iter().enumerate() {
                text.push_str(&v.to_string());
                text.push(if i % 2 == 0 { ' ' } else { '\n' });
            }
            let _ = parse_dag(&text);
        }
    }
}
