//! Complexity queries over tables and conditions: `K(x)`, `K(x | y)`,
//! shortest programs, algorithmic mutual information and the
//! symmetry-of-information audits.

pub mod audit;
pub mod codec;
pub mod search;

use std::collections::HashMap;
use std::sync::Mutex;

use crate::bits::BitString;
use crate::enumerate::ComplexityTable;
use crate::error::{Error, Result};
use crate::machine::{Budgets, Condition};

pub use codec::{bar, nat_code, pair, std_code, unpair};
pub use search::{shortest_program, Shortest};

/// Anything that can answer unconditional `K(x)` queries.
pub trait KSource {
    fn k(&self, x: &BitString) -> Option<u32>;
    fn witness(&self, x: &BitString) -> Option<BitString>;
    /// Length cap the source is exact up to (`u32::MAX` when uncapped).
    fn cap(&self) -> u32;
}

impl KSource for ComplexityTable {
    fn k(&self, x: &BitString) -> Option<u32> {
        ComplexityTable::k(self, x)
    }

    fn witness(&self, x: &BitString) -> Option<BitString> {
        ComplexityTable::witness(self, x).cloned()
    }

    fn cap(&self) -> u32 {
        self.max_len
    }
}

/// `K(x)` from a table; `None` when no program within the table cap outputs `x`.
pub fn k_of(table: &ComplexityTable, x: &BitString) -> Option<u32> {
    table.k(x)
}

/// Exact conditional complexity, `None` when it exceeds `cap`.
pub fn k_cond(x: &BitString, cond: &Condition, budgets: &Budgets, cap: u32) -> Result<Option<u32>> {
    Ok(shortest_program(x, cond, budgets)?.map(|s| s.k).filter(|&k| k <= cap))
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
enum CondKey {
    None,
    Str(BitString),
    Model(String),
}

impl From<&Condition> for CondKey {
    fn from(c: &Condition) -> Self {
        match c {
            Condition::None => CondKey::None,
            Condition::Str(s) => CondKey::Str(s.clone()),
            Condition::Model(m) => CondKey::Model(m.fingerprint().to_string()),
        }
    }
}

/// Memoizing front-end to [`shortest_program`], safe to share across threads.
/// It answers exact, uncapped queries; the memo key is the condition's
/// canonical identity, so equal conditions share entries.
#[derive(Debug, Default)]
pub struct Oracle {
    budgets: Budgets,
    memo: Mutex<HashMap<(CondKey, BitString), Option<Shortest>>>,
}

impl Oracle {
    pub fn new(budgets: Budgets) -> Self {
        Oracle { budgets, memo: Mutex::default() }
    }

    pub fn budgets(&self) -> &Budgets {
        &self.budgets
    }

    pub fn shortest(&self, x: &BitString, cond: &Condition) -> Result<Option<Shortest>> {
        let key = (CondKey::from(cond), x.clone());
        if let Some(hit) = self.memo.lock().unwrap().get(&key) {
            return Ok(hit.clone());
        }
        let found = shortest_program(x, cond, &self.budgets)?;
        self.memo.lock().unwrap().insert(key, found.clone());
        Ok(found)
    }

    /// `K(x | cond)`; errors only when `x` cannot be output at all.
    pub fn k_given(&self, x: &BitString, cond: &Condition) -> Result<u32> {
        self.shortest(x, cond)?
            .map(|s| s.k)
            .ok_or_else(|| Error::Absent { x: x.to_string(), cap: self.budgets.max_output as u32 })
    }

    /// `K(x | y*)` where `y*` is the first shortest program of `y`.
    pub fn k_given_star(&self, x: &BitString, y: &BitString) -> Result<u32> {
        let star = self.star(y)?;
        self.k_given(x, &Condition::Str(star))
    }

    pub fn star(&self, y: &BitString) -> Result<BitString> {
        self.shortest(y, &Condition::None)?
            .map(|s| s.witness)
            .ok_or_else(|| Error::Absent { x: y.to_string(), cap: self.budgets.max_output as u32 })
    }

    pub fn memo_len(&self) -> usize {
        self.memo.lock().unwrap().len()
    }
}

impl KSource for Oracle {
    fn k(&self, x: &BitString) -> Option<u32> {
        self.shortest(x, &Condition::None).ok().flatten().map(|s| s.k)
    }

    fn witness(&self, x: &BitString) -> Option<BitString> {
        self.shortest(x, &Condition::None).ok().flatten().map(|s| s.witness)
    }

    fn cap(&self) -> u32 {
        u32::MAX
    }
}

/// `I(x : y) = K(x) + K(y) − K(⟨x, y⟩)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MIRecord {
    pub x: BitString,
    pub y: BitString,
    pub kx: u32,
    pub ky: u32,
    pub kxy: u32,
    pub info: i64,
}

fn need(src: &impl KSource, x: &BitString) -> Result<u32> {
    src.k(x).ok_or_else(|| Error::Absent { x: x.to_string(), cap: src.cap() })
}

pub fn mutual_info(src: &impl KSource, x: &BitString, y: &BitString) -> Result<MIRecord> {
    let kx = need(src, x)?;
    let ky = need(src, y)?;
    let kxy = need(src, &pair(x, y))?;
    Ok(MIRecord { x: x.clone(), y: y.clone(), kx, ky, kxy, info: kx as i64 + ky as i64 - kxy as i64 })
}

/// Both argument orders; the pairing is not symmetric.
pub fn mutual_info_both(src: &impl KSource, x: &BitString, y: &BitString) -> Result<(MIRecord, MIRecord)> {
    Ok((mutual_info(src, x, y)?, mutual_info(src, y, x)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bits::bs;
    use crate::enumerate::build_table;

    #[test]
    fn mi_of_empties() {
        let t = build_table(7, &Condition::None, &Budgets::default()).unwrap();
        let r = mutual_info(&t, &bs(""), &bs("")).unwrap();
        assert_eq!((r.kx, r.ky, r.kxy, r.info), (3, 3, 5, 1));
    }

    #[test]
    fn absent_propagates() {
        let t = build_table(5, &Condition::None, &Budgets::default()).unwrap();
        assert!(matches!(mutual_info(&t, &bs("0"), &bs("0")), Err(Error::Absent { .. })));
    }

    #[test]
    fn conditional_examples() {
        let b = Budgets::default();
        assert_eq!(k_cond(&bs("1011"), &Condition::Str(bs("1011")), &b, 10).unwrap(), Some(8));
        assert_eq!(k_cond(&bs("1011"), &Condition::None, &b, 10).unwrap(), None);
        assert_eq!(k_cond(&bs("1011"), &Condition::None, &b, 22).unwrap(), Some(11));
        assert_eq!(k_cond(&bs("01"), &Condition::Str(bs("01")), &b, 22).unwrap(), Some(7));
    }

    #[test]
    fn oracle_agrees_with_table() {
        let t = build_table(17, &Condition::None, &Budgets::default()).unwrap();
        let o = Oracle::new(Budgets::default());
        for (x, e) in t.entries() {
            let s = o.shortest(x, &Condition::None).unwrap().unwrap();
            assert_eq!(s.k, e.k, "K({x})");
            assert_eq!(s.witness, e.witness, "witness of {x}");
        }
    }
}
