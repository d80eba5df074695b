//! File and trace formats.
//!
//! * DAG file: line 1 is `n m`, then `m` lines `u v` (1-indexed, LF).
//! * Order file: one line of `n` space-separated distinct ids; position is
//!   rank (smallest first).
//! * Heap trace: lines `push <key>` / `pop`.
//! * Structure trace: lines `addleaf <key>` / `access <i>` /
//!   `changekey <i> <key>` / `checkpoint`.

use std::fmt::Write as _;

use unisort_core::graph::{parse_dag, Dag, ParseError};
use unisort_core::oracle::HeapOp;

pub fn read_dag(path: &str) -> Result<Dag, String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("{path}: {e}"))?;
    parse_dag(&text).map_err(|e: ParseError| format!("{path}: {e}"))
}

pub fn write_dag(path: &str, g: &Dag) -> Result<(), String> {
    let mut out = String::new();
    let _ = writeln!(out, "{} {}", g.n(), g.m());
    for &(u, v) in g.edges() {
        let _ = writeln!(out, "{u} {v}");
    }
    std::fs::write(path, out).map_err(|e| format!("{path}: {e}"))
}

pub fn read_order(path: &str, n: usize) -> Result<Vec<u32>, String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("{path}: {e}"))?;
    parse_order(&text, n).map_err(|e| format!("{path}: {e}"))
}

pub fn parse_order(text: &str, n: usize) -> Result<Vec<u32>, String> {
    let ids: Vec<u32> = text
        .split_whitespace()
        .map(|tok| tok.parse().map_err(|_| format!("bad id \"{tok}\"")))
        .collect::<Result<_, _>>()?;
    if ids.len() != n {
        return Err(format!("order lists {} ids, graph has {n}", ids.len()));
    }
    let mut seen = vec![false; n + 1];
    for &id in &ids {
        if id == 0 || id as usize > n || seen[id as usize] {
            return Err(format!("order id {id} out of range or repeated"));
        }
        seen[id as usize] = true;
    }
    Ok(ids)
}

pub fn write_order(path: &str, order: &[u32]) -> Result<(), String> {
    let line = order
        .iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join(" ");
    std::fs::write(path, line + "\n").map_err(|e| format!("{path}: {e}"))
}

pub fn parse_heap_trace(text: &str) -> Result<Vec<HeapOp>, String> {
    let mut ops = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let mut it = line.split_whitespace();
        match (it.next(), it.next(), it.next()) {
            (Some("push"), Some(key), None) => {
                let key: u64 = key
                    .parse()
                    .map_err(|_| format!("line {}: bad key", lineno + 1))?;
                ops.push(HeapOp::Push(key));
            }
            (Some("pop"), None, None) => ops.push(HeapOp::Pop),
            _ => return Err(format!("line {}: malformed \"{line}\"", lineno + 1)),
        }
    }
    Ok(ops)
}

/// One operation of a structure trace.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TreeOp {
    AddLeaf(u64),
    Access(usize),
    ChangeKey(usize, u64),
    Checkpoint,
}

pub fn parse_tree_trace(text: &str) -> Result<Vec<TreeOp>, String> {
    let mut ops = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let bad = || format!("line {}: malformed \"{line}\"", lineno + 1);
        let mut it = line.split_whitespace();
        match it.next() {
            Some("addleaf") => {
                let key = it.next().and_then(|s| s.parse().ok()).ok_or_else(bad)?;
                ops.push(TreeOp::AddLeaf(key));
            }
            Some("access") => {
                let i = it.next().and_then(|s| s.parse().ok()).ok_or_else(bad)?;
                ops.push(TreeOp::Access(i));
            }
            Some("changekey") => {
                let i = it.next().and_then(|s| s.parse().ok()).ok_or_else(bad)?;
                let key = it.next().and_then(|s| s.parse().ok()).ok_or_else(bad)?;
                ops.push(TreeOp::ChangeKey(i, key));
            }
            Some("checkpoint") => ops.push(TreeOp::Checkpoint),
            _ => return Err(bad()),
        }
        if it.next().is_some() {
            return Err(bad());
        }
    }
    Ok(ops)
}

pub fn tree_trace_to_string(ops: &[TreeOp]) -> String {
    let mut out = String::new();
    for op in ops {
        match op {
            TreeOp::AddLeaf(k) => {
                let _ = writeln!(out, "addleaf {k}");
            }
            TreeOp::Access(i) => {
                let _ = writeln!(out, "access {i}");
            }
            TreeOp::ChangeKey(i, k) => {
                let _ = writeln!(out, "changekey {i} {k}");
            }
            TreeOp::Checkpoint => {
                let _ = writeln!(out, "checkpoint");
            }
        }
    }
    out
}

/// Appends a CSV row, writing the header first when the file is new.
pub fn append_csv(path: &str, header: &str, row: &str) -> Result<(), String> {
    let exists = std::path::Path::new(path).exists();
    let mut contents = if exists {
        std::fs::read_to_string(path).map_err(|e| format!("{path}: {e}"))?
    } else {
        format!("{header}\n")
    };
    contents.push_str(row);
    contents.push('\n');
    std::fs::write(path, contents).map_err(|e| format!("{path}: {e}"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn order_roundtrip_checks_permutation() {
        assert_eq!(parse_order("2 1 3", 3).unwrap(), vec![2, 1, 3]);
        assert!(parse_order("1 2", 3).is_err());
        assert!(parse_order("1 1 2", 3).is_err());
        assert!(parse_order("0 1 2", 3).is_err());
    }

    #[test]
    fn heap_trace_parses() {
        let ops = parse_heap_trace("push 5\npop\n\npush 1\n").unwrap();
        assert_eq!(ops, vec![HeapOp::Push(5), HeapOp::Pop, HeapOp::Push(1)]);
        assert!(parse_heap_trace("push").is_err());
        assert!(parse_heap_trace("pop 1").is_err());
    }

    #[test]
    fn tree_trace_roundtrip() {
        let ops = vec![
            TreeOp::AddLeaf(4),
            TreeOp::Access(1),
            TreeOp::ChangeKey(1, 9),
            TreeOp::Checkpoint,
        ];
        let text = tree_trace_to_string(&ops);
        assert_eq!(parse_tree_trace(&text).unwrap(), ops);
    }
}
