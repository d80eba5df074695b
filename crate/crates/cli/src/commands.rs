//! Subcommand implementations. Each returns the process exit code or a
//! usage error message.

use std::io::Write;

use unisort_core::cmp::{NaturalOrder, RankOrder};
use unisort_core::gen::{generate, random_linear_extension, GenKind};
use unisort_core::oracle::{self, HeapOp};
use unisort_core::rng::SplitMix64;
use unisort_core::sorter::{sort_under_partial_info, uni_top_sort, Algo, SortOptions};
use unisort_core::unified_heap::UnifiedHeap;
use unisort_core::unified_tree::{CheckMode, ThresholdMode};

use crate::formats;
use crate::fuzz;
use crate::{bench, Flags, EXIT_FAIL, EXIT_OK};

type CmdResult = Result<i32, String>;

fn parse_check(flags: &Flags, default: CheckMode) -> Result<CheckMode, String> {
    match flags.get("--check") {
        None => Ok(default),
        Some("off") => Ok(CheckMode::Off),
        Some("fast") => Ok(CheckMode::Fast),
        Some("full") => Ok(CheckMode::Full),
        Some(other) => Err(format!("bad --check value: {other}")),
    }
}

fn parse_thresholds(flags: &Flags) -> ThresholdMode {
    if flags.switch("--scaled-thresholds") {
        ThresholdMode::Scaled
    } else {
        ThresholdMode::Paper
    }
}

pub fn gen(args: &[String], out: &mut dyn Write) -> CmdResult {
    let Some((kind_name, rest)) = args.split_first() else {
        return Err("gen needs a kind".to_string());
    };
    let flags = Flags::parse(rest)?;
    let n: usize = flags.parse_num("--n")?;
    let seed: u64 = flags.parse_num("--seed")?;
    let probability = |name: &str, default: f64| -> Result<f64, String> {
        let v: f64 = flags.parse_num_or(name, default)?;
        if (0.0..=1.0).contains(&v) {
            Ok(v)
        } else {
            Err(format!("flag {name} must be in [0, 1], got {v}"))
        }
    };
    let kind = match kind_name.as_str() {
        "edgeless" => GenKind::Edgeless,
        "chain" => GenKind::Chain,
        "k-chains" => {
            let k: usize = flags.parse_num_or("--k", 2usize)?;
            if k == 0 || k > n.max(1) {
                return Err(format!("flag --k must be in 1..={}, got {k}", n.max(1)));
            }
            GenKind::KChains { k }
        }
        "random-edges" => GenKind::RandomEdges {
            p: probability("--p", 0.2)?,
        },
        "hamiltonian-plus-noise" => GenKind::HamiltonianPlusNoise {
            q: probability("--q", 0.05)?,
        },
        "interval-induced" => GenKind::IntervalInduced {
            w: probability("--w", 0.2)?,
        },
        other => return Err(format!("unknown generator kind: {other}")),
    };
    let dag_path = flags.required("--dag")?;
    let order_path = flags.required("--order")?;

    let mut rng = SplitMix64::new(seed);
    let g = generate(kind, n, &mut rng);
    let order = random_linear_extension(&g, &mut rng);
    formats::write_dag(dag_path, &g)?;
    formats::write_order(order_path, &order)?;
    let _ = writeln!(out, "seed: {seed}");
    let _ = writeln!(
        out,
        "wrote {} ({} vertices, {} edges)",
        dag_path,
        g.n(),
        g.m()
    );
    let _ = writeln!(out, "wrote {order_path}");
    Ok(EXIT_OK)
}

pub const SORT_CSV_HEADER: &str = "n,m,comparisons,steps,log2_eG,algorithm";

pub fn sort(args: &[String], out: &mut dyn Write) -> CmdResult {
    let flags = Flags::parse(args)?;
    let g = formats::read_dag(flags.required("--dag")?)?;
    let hidden = formats::read_order(flags.required("--order")?, g.n())?;
    let algo = match flags.get("--algo") {
        None | Some("unitopsort") => Algo::UniTopSort,
        Some("full") => Algo::Full,
        Some("mergesort") => Algo::MergeSort,
        Some(other) => return Err(format!("bad --algo value: {other}")),
    };
    let opts = SortOptions {
        thresholds: parse_thresholds(&flags),
        checks: parse_check(&flags, CheckMode::Off)?,
        record_analysis: false,
    };
    let mut cmp = RankOrder::from_order(&hidden);
    let outcome = match algo {
        Algo::UniTopSort => uni_top_sort(&g, &mut cmp, opts),
        Algo::Full => sort_under_partial_info(&g, &mut cmp, opts),
        Algo::MergeSort => {
            let (order, comparisons, steps) = unisort_core::sorter::merge_sort_ids(g.n(), &mut cmp);
            Ok(unisort_core::sorter::SortOutcome {
                order,
                stats: unisort_core::sorter::SortStats {
                    n: g.n(),
                    m: g.m(),
                    algorithm: Algo::MergeSort,
                    comparisons,
                    steps,
                    pre_phase_comparisons: 0,
                    log2_extensions: None,
                    analysis: None,
                },
            })
        }
    };
    let outcome = match outcome {
        Ok(o) => o,
        Err(e) => {
            let _ = writeln!(out, "sort failed: {e}");
            return Ok(EXIT_FAIL);
        }
    };
    if outcome.order != hidden {
        let _ = writeln!(out, "sort failed: output disagrees with the order file");
        return Ok(EXIT_FAIL);
    }
    let log2_e = if g.n() <= oracle::COUNT_LIMIT {
        oracle::log2_extensions(&g)
    } else {
        None
    };
    let result_line = outcome
        .order
        .iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join(" ");
    let row = format!(
        "{},{},{},{},{},{}",
        outcome.stats.n,
        outcome.stats.m,
        outcome.stats.comparisons,
        outcome.stats.steps,
        log2_e.map_or(String::new(), |v| format!("{v:.4}")),
        outcome.stats.algorithm
    );
    let _ = writeln!(out, "{result_line}");
    let _ = writeln!(out, "{SORT_CSV_HEADER}");
    let _ = writeln!(out, "{row}");
    if let Some(path) = flags.get("--csv") {
        formats::append_csv(path, SORT_CSV_HEADER, &row)?;
    }
    Ok(EXIT_OK)
}

pub fn count(args: &[String], out: &mut dyn Write) -> CmdResult {
    let flags = Flags::parse(args)?;
    let g = formats::read_dag(flags.required("--dag")?)?;
    match oracle::count_linear_extensions(&g) {
        Ok(count) => {
            let _ = writeln!(out, "e(G) = {count}");
            let _ = writeln!(out, "log2 e(G) = {:.6}", (count as f64).log2());
            Ok(EXIT_OK)
        }
        Err(e) => Err(e.to_string()),
    }
}

pub const HEAP_CSV_HEADER: &str = "op,comparisons,steps,coins,bills,budget_cum";

pub fn heap_replay(args: &[String], out: &mut dyn Write) -> CmdResult {
    let flags = Flags::parse(args)?;
    let path = flags.required("--trace")?;
    let text = std::fs::read_to_string(path).map_err(|e| format!("{path}: {e}"))?;
    let trace = formats::parse_heap_trace(&text)?;
    let checks = parse_check(&flags, CheckMode::Off)?;
    let thresholds = parse_thresholds(&flags);

    let mut heap: UnifiedHeap<u64, NaturalOrder> =
        UnifiedHeap::with_config(0, NaturalOrder, thresholds, checks);
    let mut rows = Vec::new();
    let mut pops = Vec::new();
    let mut budget_cum = 0.0f64;
    for (idx, &op) in trace.iter().enumerate() {
        let before = heap.ledger().snapshot();
        let label = match op {
            HeapOp::Push(key) => {
                heap.push(key);
                format!("push {key}")
            }
            HeapOp::Pop => {
                let Some(leaf) = heap.tree().global_min() else {
                    return Err(format!("trace op {}: pop on empty heap", idx + 1));
                };
                // Working-set budget term: pushes while the item was live.
                let a = leaf as u64;
                budget_cum += 1.0 + ((1 + heap.pushed() - a) as f64).log2();
                let key = heap.pop().expect("nonempty");
                pops.push(key);
                "pop".to_string()
            }
        };
        let after = heap.ledger().snapshot();
        rows.push(format!(
            "{label},{},{},{},{},{budget_cum:.4}",
            after.comparisons - before.comparisons,
            after.steps - before.steps,
            after.coins,
            after.bills,
        ));
    }
    let result_line = pops
        .iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join(" ");
    let _ = writeln!(out, "{result_line}");
    let _ = writeln!(out, "{HEAP_CSV_HEADER}");
    for row in &rows {
        let _ = writeln!(out, "{row}");
    }
    if let Some(csv_path) = flags.get("--csv") {
        for row in &rows {
            formats::append_csv(csv_path, HEAP_CSV_HEADER, row)?;
        }
    }
    Ok(EXIT_OK)
}

pub fn fuzz_cmd(args: &[String], out: &mut dyn Write) -> CmdResult {
    let flags = Flags::parse(args)?;
    let ops: usize = flags.parse_num("--ops")?;
    let n_cap: usize = flags.parse_num_or("--n-cap", 256usize)?;
    let seed: u64 = flags.parse_num("--seed")?;
    let checks = parse_check(&flags, CheckMode::Fast)?;
    let thresholds = parse_thresholds(&flags);
    let _ = writeln!(out, "seed: {seed}");
    let report = fuzz::fuzz_run(ops, n_cap, seed, thresholds, checks, None);
    match report.failure {
        None => {
            let _ = writeln!(out, "ok: {} ops, no violations", report.ops_run);
            Ok(EXIT_OK)
        }
        Some(msg) => {
            let witness = report.witness.unwrap_or_default();
            let _ = writeln!(out, "violation: {msg}");
            let _ = writeln!(out, "minimal witness: {} ops", witness.len());
            if let Some(path) = flags.get("--trace") {
                std::fs::write(path, formats::tree_trace_to_string(&witness))
                    .map_err(|e| format!("{path}: {e}"))?;
                let _ = writeln!(out, "witness written to {path}");
            }
            Ok(EXIT_FAIL)
        }
    }
}

pub fn verify(args: &[String], out: &mut dyn Write) -> CmdResult {
    let flags = Flags::parse(args)?;
    let path = flags.required("--trace")?;
    let text = std::fs::read_to_string(path).map_err(|e| format!("{path}: {e}"))?;
    let trace = formats::parse_tree_trace(&text)?;
    let checks = parse_check(&flags, CheckMode::Full)?;
    let thresholds = parse_thresholds(&flags);
    match fuzz::replay(&trace, thresholds, checks, None, true) {
        Ok(()) => {
            let _ = writeln!(out, "ok: {} ops verified", trace.len());
            Ok(EXIT_OK)
        }
        Err(msg) => {
            let _ = writeln!(out, "violation: {msg}");
            Ok(EXIT_FAIL)
        }
    }
}

pub fn bench_cmd(args: &[String], out: &mut dyn Write) -> CmdResult {
    let flags = Flags::parse(args)?;
    let suite = bench::Suite::parse(flags.required("--suite")?)
        .ok_or_else(|| "unknown suite".to_string())?;
    let parse_list = |name: &str| -> Result<Vec<u64>, String> {
        flags
            .required(name)?
            .split(',')
            .map(|tok| tok.parse().map_err(|_| format!("bad {name} entry {tok}")))
            .collect()
    };
    let sizes = parse_list("--sizes")?;
    let seeds = parse_list("--seeds")?;
    let thresholds = parse_thresholds(&flags);
    let _ = writeln!(out, "{}", bench::CSV_HEADER);
    for &n in &sizes {
        for &seed in &seeds {
            let row = bench::run_cell(suite, n as usize, seed, thresholds)?;
            let _ = writeln!(out, "{row}");
            if let Some(path) = flags.get("--csv") {
                formats::append_csv(path, bench::CSV_HEADER, &row)?;
            }
        }
    }
    Ok(EXIT_OK)
}
