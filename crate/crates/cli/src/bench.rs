//! Benchmark suites over the comparison/step ledger (no wall-clock claims).
//!
//! Each suite pins one regime: `merge-regime` = two disjoint chains
//! (comparisons should stay linear in n), `hamilton-regime` = one chain
//! (near-zero informative comparisons), `heapsort-regime` = edgeless
//! (the n log n floor). The "fitted C" column divides comparisons by the
//! regime's budget so flat values across sizes mean the bound holds.

use std::fmt::Write as _;

use unisort_core::cmp::RankOrder;
use unisort_core::gen::{generate, random_linear_extension, GenKind};
use unisort_core::oracle;
use unisort_core::rng::SplitMix64;
use unisort_core::sorter::{sort_under_partial_info, uni_top_sort, Algo, SortOptions};
use unisort_core::unified_tree::ThresholdMode;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Suite {
    MergeRegime,
    HamiltonRegime,
    HeapsortRegime,
}

impl Suite {
    pub fn parse(name: &str) -> Option<Suite> {
        match name {
            "merge-regime" => Some(Suite::MergeRegime),
            "hamilton-regime" => Some(Suite::HamiltonRegime),
            "heapsort-regime" => Some(Suite::HeapsortRegime),
            _ => None,
        }
    }

    fn kind(self) -> GenKind {
        match self {
            Suite::MergeRegime => GenKind::KChains { k: 2 },
            Suite::HamiltonRegime => GenKind::Chain,
            Suite::HeapsortRegime => GenKind::Edgeless,
        }
    }

    fn label(self) -> &'static str {
        match self {
            Suite::MergeRegime => "merge-regime",
            Suite::HamiltonRegime => "hamilton-regime",
            Suite::HeapsortRegime => "heapsort-regime",
        }
    }

    /// Comparison budget the fitted constant divides by.
    fn budget(self, n: usize) -> f64 {
        let n = n.max(2) as f64;
        match self {
            Suite::MergeRegime | Suite::HamiltonRegime => n,
            Suite::HeapsortRegime => n * n.log2(),
        }
    }

    fn algo(self) -> Algo {
        match self {
            // The chain regime is where the longest-path reduction shines.
            Suite::HamiltonRegime => Algo::Full,
            _ => Algo::UniTopSort,
        }
    }
}

pub const CSV_HEADER: &str = "kind,n,m,comparisons,steps,log2_eG,fitted_c";

/// One suite cell. Deterministic given (suite, n, seed, mode).
pub fn run_cell(
    suite: Suite,
    n: usize,
    seed: u64,
    thresholds: ThresholdMode,
) -> Result<String, String> {
    let mut rng = SplitMix64::new(seed);
    let g = generate(suite.kind(), n, &mut rng);
    let hidden = random_linear_extension(&g, &mut rng);
    let mut cmp = RankOrder::from_order(&hidden);
    let opts = SortOptions {
        thresholds,
        ..SortOptions::default()
    };
    let outcome = match suite.algo() {
        Algo::Full => sort_under_partial_info(&g, &mut cmp, opts),
        _ => uni_top_sort(&g, &mut cmp, opts),
    }
    .map_err(|e| e.to_string())?;
    if outcome.order != hidden {
        return Err(format!("suite {} n {n}: wrong order", suite.label()));
    }
    let log2_e = if g.n() <= oracle::COUNT_LIMIT {
        oracle::log2_extensions(&g)
    } else {
        None
    };
    let fitted = outcome.stats.comparisons as f64 / suite.budget(n);
    let mut row = String::new();
    let _ = write!(
        row,
        "{},{},{},{},{},{},{:.4}",
        suite.label(),
        n,
        g.m(),
        outcome.stats.comparisons,
        outcome.stats.steps,
        log2_e.map_or(String::new(), |v| format!("{v:.4}")),
        fitted
    );
    Ok(row)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cells_are_deterministic() {
        let a = run_cell(Suite::MergeRegime, 64, 5, ThresholdMode::Paper).unwrap();
        let b = run_cell(Suite::MergeRegime, 64, 5, ThresholdMode::Paper).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn hamilton_regime_needs_no_comparisons() {
        let row = run_cell(Suite::HamiltonRegime, 128, 3, ThresholdMode::Paper).unwrap();
        let comparisons: u64 = row.split(',').nth(3).unwrap().parse().unwrap();
        assert_eq!(comparisons, 0);
    }

    fn fitted(suite: Suite, n: usize) -> f64 {
        let row = run_cell(suite, n, 1, ThresholdMode::Scaled).unwrap();
        row.split(',').nth(6).unwrap().parse().unwrap()
    }

    #[test]
    fn merge_regime_comparisons_per_n_stay_bounded() {
        // Two disjoint chains: once past the structure's ramp-up sizes,
        // comparisons/n must not keep growing with n.
        let small = fitted(Suite::MergeRegime, 8192);
        let large = fitted(Suite::MergeRegime, 32768);
        assert!(
            large <= small * 1.25 + 8.0,
            "small {small:.1}, large {large:.1}"
        );
    }

    #[test]
    fn heapsort_regime_comparisons_track_n_log_n() {
        let small = fitted(Suite::HeapsortRegime, 8192);
        let large = fitted(Suite::HeapsortRegime, 32768);
        assert!(
            large <= small * 1.25 + 8.0,
            "small {small:.1}, large {large:.1}"
        );
    }
}
