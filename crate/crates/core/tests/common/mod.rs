//! Reference oracle that runs every bit string up to a length cap.

#![allow(dead_code)]

use std::collections::BTreeMap;

use algstat::bits::BitString;
use algstat::dyadic::Dyadic;
use algstat::enumerate::ComplexityTable;
use algstat::machine::{run, Budgets, Condition, RunOutcome};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NaiveEntry {
    pub k: u32,
    pub witness: BitString,
    pub counts: BTreeMap<u32, u64>,
    pub m: Dyadic,
}

/// Every string of length at most `max_len` is run as a program; halting
/// ones are grouped by output. Strings are visited in (length,
/// lexicographic) order, so the first hit per output is its witness.
pub fn naive_table(max_len: u32, cond: &Condition, budgets: &Budgets) -> BTreeMap<BitString, NaiveEntry> {
    let mut out: BTreeMap<BitString, NaiveEntry> = BTreeMap::new();
    for p in BitString::all_up_to(max_len as usize) {
        if let RunOutcome::Halted { output, .. } = run(p.bits(), cond, budgets) {
            let l = p.len() as u32;
            let e = out.entry(output).or_insert_with(|| NaiveEntry {
                k: l,
                witness: p.clone(),
                counts: BTreeMap::new(),
                m: Dyadic::ZERO,
            });
            *e.counts.entry(l).or_insert(0) += 1;
            e.m += Dyadic::pow2_neg(l);
        }
    }
    out
}

/// First disagreement between a table and the naive oracle, if any.
pub fn disagreement(table: &ComplexityTable, naive: &BTreeMap<BitString, NaiveEntry>) -> Option<String> {
    if table.len() != naive.len() {
        return Some(format!("{} outputs in table, {} by brute force", table.len(), naive.len()));
    }
    for ((x, e), (y, n)) in table.entries().zip(naive) {
        if x != y || e.k != n.k || e.witness != n.witness || e.counts != n.counts || e.m != n.m {
            return Some(format!("table {x}: K={} w={}, brute force {y}: K={} w={}", e.k, e.witness, n.k, n.witness));
        }
    }
    None
}
