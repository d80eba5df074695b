//! Cost instrumentation: comparison counter, elementary-step counter, and
//! the coin/bill potential of the tree structure.
//!
//! An "elementary step" is one structural node touch (a main-tree node
//! visited, an index-tree node visited or built, a list cell scanned). The
//! unit is calibrated once by the tests that pin budget ceilings; the
//! absolute scale is meaningless on its own.
//!
//! Potential bookkeeping: every leader carries two coins, every unpromoted
//! leader one more, and every pair of consecutive leaders with height
//! difference `g` carries `max(0, g - 1)` bills. The structure updates the
//! running totals as it mutates leaders; reconciliation happens
//! in `UnifiedTree::check_invariants`, which compares a from-scratch count
//! against these running totals and reports any drift.

use core::cell::Cell;

/// Shared counters. Interior mutability so that read-mostly structures can
/// bump counts without threading `&mut` through every helper.
#[derive(Debug, Default)]
pub struct CostLedger {
    comparisons: Cell<u64>,
    steps: Cell<u64>,
    leaders: Cell<u64>,
    unpromoted: Cell<u64>,
    bills: Cell<u64>,
    phase: Cell<u32>,
    comparisons_at_phase: Cell<u64>,
}

impl CostLedger {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn count_comparison(&self) {
        self.comparisons.set(self.comparisons.get() + 1);
    }

    #[inline]
    pub fn count_steps(&self, k: u64) {
        self.steps.set(self.steps.get() + k);
    }

    pub fn comparisons(&self) -> u64 {
        self.comparisons.get()
    }

    pub fn steps(&self) -> u64 {
        self.steps.get()
    }

    /// Coins currently held: two per leader plus one per unpromoted leader.
    pub fn coins(&self) -> u64 {
        2 * self.leaders.get() + self.unpromoted.get()
    }

    pub fn leaders(&self) -> u64 {
        self.leaders.get()
    }

    pub fn unpromoted(&self) -> u64 {
        self.unpromoted.get()
    }

    pub fn bills(&self) -> u64 {
        self.bills.get()
    }

    pub fn note_leader_created(&self) {
        self.leaders.set(self.leaders.get() + 1);
    }

    pub fn note_leader_destroyed(&self) {
        self.leaders.set(
            self.leaders
                .get()
                .checked_sub(1)
                .expect("leader count underflow"),
        );
    }

    /// `delta` is +1 when a leader gains unpromoted status, -1 when it loses it.
    pub fn note_unpromoted_delta(&self, delta: i64) {
        let v = self.unpromoted.get() as i64 + delta;
        assert!(v >= 0, "unpromoted count underflow");
        self.unpromoted.set(v as u64);
    }

    pub fn note_bills_delta(&self, delta: i64) {
        let v = self.bills.get() as i64 + delta;
        assert!(v >= 0, "bill count underflow");
        self.bills.set(v as u64);
    }

    /// Marks a phase boundary (e.g. preprocessing -> sorting) and remembers
    /// the comparison count at the boundary.
    pub fn mark_phase(&self, phase: u32) {
        self.phase.set(phase);
        self.comparisons_at_phase.set(self.comparisons.get());
    }

    pub fn phase(&self) -> u32 {
        self.phase.get()
    }

    pub fn comparisons_at_phase(&self) -> u64 {
        self.comparisons_at_phase.get()
    }

    pub fn snapshot(&self) -> LedgerSnapshot {
        LedgerSnapshot {
            comparisons: self.comparisons(),
            steps: self.steps(),
            coins: self.coins(),
            bills: self.bills(),
        }
    }
}

/// Point-in-time view, used for per-operation CSV rows.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct LedgerSnapshot {
    pub comparisons: u64,
    pub steps: u64,
    pub coins: u64,
    pub bills: u64,
}

/// Result of fitting measured steps against a per-operation budget sum.
#[derive(Clone, Copy, Debug)]
pub struct BudgetReport {
    pub steps: u64,
    pub budget: f64,
    pub fitted_c: f64,
    pub ceiling: f64,
    pub pass: bool,
}

/// Least `C` with `steps <= C * (budget_sum + phi_initial - phi_final)`,
/// checked against a pinned ceiling. The potential difference lets traces
/// that build up structure early pay for it when it is consumed.
pub fn budget_check(
    steps: u64,
    budget_sum: f64,
    phi_initial: f64,
    phi_final: f64,
    ceiling: f64,
) -> BudgetReport {
    let denom = (budget_sum + phi_initial - phi_final).max(1.0);
    let fitted_c = steps as f64 / denom;
    BudgetReport {
        steps,
        budget: denom,
        fitted_c,
        ceiling,
        pass: fitted_c <= ceiling,
    }
}
