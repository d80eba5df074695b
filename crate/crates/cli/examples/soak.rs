//! Extended validation run, heavier than the test suite: hundreds of
//! full-check fuzz seeds in both threshold modes, fault-injection
//! coverage, 100k heap-equivalence traces, and 10k sorter instances.
//!
//!     cargo run --release -p unisort-cli --example soak
//!
use unisort_cli::fuzz::{fuzz_run, Fault};
use unisort_core::cmp::{NaturalOrder, RankOrder};
use unisort_core::gen::{generate, random_linear_extension, GenKind};
use unisort_core::oracle::{reference_heap_replay, HeapOp};
use unisort_core::rng::SplitMix64;
use unisort_core::sorter::{sort_under_partial_info, uni_top_sort, SortOptions};
use unisort_core::unified_heap::UnifiedHeap;
use unisort_core::unified_tree::{CheckMode, ThresholdMode};

fn main() {
    let t0 = std::time::Instant::now();

    // 1. 200 structure-fuzz seeds, both threshold modes, full checks.
    for seed in 0..200u64 {
        for (mode, ncap) in [(ThresholdMode::Paper, 300), (ThresholdMode::Scaled, 900)] {
            let report = fuzz_run(4_000, ncap, 0xAA00 + seed, mode, CheckMode::Full, None);
            assert!(
                report.failure.is_none(),
                "seed {seed} {mode:?}: {:?}",
                report.failure
            );
        }
    }
    println!("structure fuzz: 400 runs clean ({:?})", t0.elapsed());

    // 2. Fault injection always caught, 40 anchors.
    for k in 0..40u64 {
        let fault = Some(Fault {
            at_op: 30 + (k as usize) * 9,
            node: 2 + (k as usize % 5),
        });
        let report = fuzz_run(600, 64, 0xBB00 + k, ThresholdMode::Paper, CheckMode::Fast, fault);
        assert!(report.failure.is_some(), "fault {k} not caught");
        let w = report.witness.unwrap();
        assert!(w.len() <= 24, "fault {k}: witness {} ops", w.len());
    }
    println!("fault injection: 40 runs caught and shrunk ({:?})", t0.elapsed());

    // 3. Heap equivalence, 100k random traces.
    let mut rng = SplitMix64::new(0xCC);
    for round in 0..100_000u64 {
        let len = 5 + rng.below(40);
        let mut trace = Vec::with_capacity(len as usize);
        let mut live = 0u32;
        for _ in 0..len {
            if live == 0 || rng.chance(0.6) {
                trace.push(HeapOp::Push(rng.below(6)));
                live += 1;
            } else {
                trace.push(HeapOp::Pop);
                live -= 1;
            }
        }
        let expected = reference_heap_replay(&trace).unwrap();
        let mut heap: UnifiedHeap<u64, NaturalOrder> = UnifiedHeap::new(NaturalOrder);
        let mut got = Vec::new();
        for &op in &trace {
            match op {
                HeapOp::Push(x) => heap.push(x),
                HeapOp::Pop => got.push(heap.pop().unwrap()),
            }
        }
        assert_eq!(got, expected, "round {round}");
    }
    println!("heap equivalence: 100k traces ({:?})", t0.elapsed());

    // 4. Sorter agreement on 10k random instances, n up to 400.
    let mut rng = SplitMix64::new(0xDD);
    for round in 0..10_000u64 {
        let n = 2 + rng.below(399) as usize;
        let kind = match rng.below(6) {
            0 => GenKind::Edgeless,
            1 => GenKind::Chain,
            2 => GenKind::KChains { k: 1 + rng.below(6) as usize },
            3 => GenKind::RandomEdges { p: rng.unit_f64() * 0.5 },
            4 => GenKind::HamiltonianPlusNoise { q: rng.unit_f64() * 0.15 },
            _ => GenKind::IntervalInduced { w: rng.unit_f64() * 0.6 },
        };
        let g = generate(kind, n, &mut rng);
        let hidden = random_linear_extension(&g, &mut rng);
        let mut c1 = RankOrder::from_order(&hidden);
        let a = uni_top_sort(&g, &mut c1, SortOptions::default()).unwrap();
        assert_eq!(a.order, hidden, "round {round} unitopsort");
        let mut c2 = RankOrder::from_order(&hidden);
        let b = sort_under_partial_info(&g, &mut c2, SortOptions::default()).unwrap();
        assert_eq!(b.order, hidden, "round {round} full");
    }
    println!("sorter agreement: 10k instances ({:?})", t0.elapsed());
}
