//! Random operation traces against the tree structure, with invariant
//! checks at checkpoints and a shrinker that reduces failing traces to a
//! minimal witness.

use unisort_core::cmp::NaturalOrder;
use unisort_core::rng::SplitMix64;
use unisort_core::unified_tree::{CheckMode, ThresholdMode, UnifiedTree, Violation};

use crate::formats::TreeOp;

/// Optional fault injection (test hook): after executing `at_op` operations,
/// flip the active flag of `node`.
#[derive(Clone, Copy, Debug)]
pub struct Fault {
    pub at_op: usize,
    pub node: usize,
}

#[derive(Clone, Debug)]
pub struct FuzzReport {
    pub ops_run: usize,
    pub failure: Option<String>,
    /// Present when a failure was shrunk to a minimal trace.
    pub witness: Option<Vec<TreeOp>>,
}

/// Generates a random structure trace with periodic checkpoints.
pub fn random_trace(ops: usize, n_cap: usize, seed: u64) -> Vec<TreeOp> {
    let mut rng = SplitMix64::new(seed);
    let mut trace = Vec::with_capacity(ops);
    let mut n = 0usize;
    for k in 0..ops {
        if n == 0 || (n < n_cap && rng.chance(0.35)) {
            trace.push(TreeOp::AddLeaf(rng.below(1_000_000)));
            n += 1;
        } else if rng.chance(0.65) {
            trace.push(TreeOp::Access(1 + rng.below(n as u64) as usize));
        } else {
            trace.push(TreeOp::ChangeKey(
                1 + rng.below(n as u64) as usize,
                rng.below(1_000_000),
            ));
        }
        if (k + 1) % 64 == 0 {
            trace.push(TreeOp::Checkpoint);
        }
    }
    trace.push(TreeOp::Checkpoint);
    trace
}

/// Replays a trace. In tolerant mode, out-of-range indices are skipped
/// (the shrinker may remove the `addleaf` an index referred to); in strict
/// mode they are reported. Checkpoints run the given check level. Returns
/// the first violation, if any.
pub fn replay(
    trace: &[TreeOp],
    thresholds: ThresholdMode,
    check: CheckMode,
    fault: Option<Fault>,
    strict: bool,
) -> Result<(), String> {
    let run = std::panic::catch_unwind(|| replay_inner(trace, thresholds, check, fault, strict));
    match run {
        Ok(result) => result,
        Err(payload) => {
            let msg = payload
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| payload.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panic".to_string());
            Err(msg)
        }
    }
}

fn replay_inner(
    trace: &[TreeOp],
    thresholds: ThresholdMode,
    check: CheckMode,
    fault: Option<Fault>,
    strict: bool,
) -> Result<(), String> {
    let mut tree: UnifiedTree<u64, NaturalOrder> =
        UnifiedTree::with_config(0, NaturalOrder, thresholds, CheckMode::Off);
    let mut fault_pending = fault;
    for (idx, op) in trace.iter().enumerate() {
        match *op {
            TreeOp::AddLeaf(key) => {
                tree.add_leaf(key);
            }
            TreeOp::Access(i) => {
                if 1 <= i && i <= tree.n() {
                    tree.access(i);
                } else if strict {
                    return Err(format!("access index {i} out of range 1..={}", tree.n()));
                }
            }
            TreeOp::ChangeKey(i, key) => {
                if 1 <= i && i <= tree.n() {
                    tree.change_key(i, Some(key));
                } else if strict {
                    return Err(format!("changekey index {i} out of range 1..={}", tree.n()));
                }
            }
            TreeOp::Checkpoint => {
                tree.check_invariants(check)
                    .map_err(|v: Violation| v.to_string())?;
            }
        }
        if fault_pending.is_some_and(|f| f.at_op == idx + 1) {
            tree.corrupt_active_flag(fault_pending.take().unwrap().node);
        }
    }
    // A fault anchored past the end of a (shrunk) trace still fires, so the
    // witness can shrink below the original anchor position.
    if let Some(f) = fault_pending {
        tree.corrupt_active_flag(f.node);
    }
    tree.check_invariants(check)
        .map_err(|v: Violation| v.to_string())?;
    Ok(())
}

/// Shrinks a failing trace by repeatedly removing spans while the failure
/// persists; finishes with single-op removal passes.
pub fn shrink(
    trace: &[TreeOp],
    thresholds: ThresholdMode,
    check: CheckMode,
    fault: Option<Fault>,
) -> Vec<TreeOp> {
    let fails = |t: &[TreeOp]| replay(t, thresholds, check, fault, false).is_err();
    debug_assert!(fails(trace));
    let mut current: Vec<TreeOp> = trace.to_vec();
    let mut span = (current.len() / 2).max(1);
    while span >= 1 {
        let mut start = 0;
        let mut progressed = false;
        while start < current.len() {
            let end = (start + span).min(current.len());
            let mut candidate = current.clone();
            candidate.drain(start..end);
            // The failure must stay observable: keep a trailing checkpoint.
            if candidate.last() != Some(&TreeOp::Checkpoint) {
                candidate.push(TreeOp::Checkpoint);
            }
            if candidate.len() < current.len() && fails(&candidate) {
                current = candidate;
                progressed = true;
            } else {
                start += span;
            }
        }
        if span == 1 && !progressed {
            break;
        }
        if !progressed {
            span /= 2;
        }
    }
    current
}

/// Runs `seeds`-many random traces; on the first failure, shrinks it.
pub fn fuzz_run(
    ops: usize,
    n_cap: usize,
    seed: u64,
    thresholds: ThresholdMode,
    check: CheckMode,
    fault: Option<Fault>,
) -> FuzzReport {
    let trace = random_trace(ops, n_cap, seed);
    match replay(&trace, thresholds, check, fault, false) {
        Ok(()) => FuzzReport {
            ops_run: trace.len(),
            failure: None,
            witness: None,
        },
        Err(msg) => {
            let witness = shrink(&trace, thresholds, check, fault);
            FuzzReport {
                ops_run: trace.len(),
                failure: Some(msg),
                witness: Some(witness),
            }
        }
    }
}
