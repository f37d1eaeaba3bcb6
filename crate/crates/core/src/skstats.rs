//! The sets `S^k = {y : K(y) <= k}`, their padded index codes and the
//! counting bounds built on them.
//!
//! Members of `S^k` are indexed from 0 in canonical order. Indices and the
//! count `N_k` are written in plain binary at the common width
//! `bitlen(N_k)`, so every index is strictly below the `N_k` word and the
//! two always differ somewhere.

use std::fmt::Write as _;

use crate::bits::BitString;
use crate::complexity::KSource;
use crate::dyadic::Dyadic;
use crate::enumerate::ComplexityTable;
use crate::error::{Error, Result};

fn bitlen(n: u64) -> usize {
    (u64::BITS - n.leading_zeros()) as usize
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SkIndex {
    pub k: u32,
    /// Members with their complexity, in canonical order.
    pub members: Vec<(BitString, u32)>,
    pub n_k: u64,
    pub width: usize,
    /// `|S^k \ S^{k-1}|`.
    pub t_k: u64,
}

impl SkIndex {
    pub fn position(&self, x: &BitString) -> Option<u64> {
        self.members.binary_search_by(|(y, _)| y.cmp(x)).ok().map(|i| i as u64)
    }

    pub fn index_word(&self, i: u64) -> BitString {
        BitString::binary_padded(i, self.width)
    }

    pub fn count_word(&self) -> BitString {
        BitString::binary_padded(self.n_k, self.width)
    }

    pub fn contains(&self, x: &BitString) -> bool {
        self.position(x).is_some()
    }
}

fn check_k(table: &ComplexityTable, k: u32) -> Result<()> {
    if k > table.max_len {
        return Err(Error::CapExceeded { what: format!("k = {k} above the table length"), cap: table.max_len as u64 });
    }
    Ok(())
}

pub fn sk(table: &ComplexityTable, k: u32) -> Result<SkIndex> {
    check_k(table, k)?;
    let members: Vec<(BitString, u32)> =
        table.entries().filter(|(_, e)| e.k <= k).map(|(x, e)| (x.clone(), e.k)).collect();
    let n_k = members.len() as u64;
    let t_k = members.iter().filter(|(_, kx)| *kx == k).count() as u64;
    Ok(SkIndex { k, width: bitlen(n_k), members, n_k, t_k })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MxRecord {
    pub x: BitString,
    pub k: u32,
    pub index: BitString,
    pub count_word: BitString,
    /// Longest common prefix of the index and the count word.
    pub m: BitString,
    /// Index continuation after `m 0`.
    pub i_rest: BitString,
    /// Count-word continuation after `m 1`.
    pub n_rest: BitString,
}

pub fn mx_in(s: &SkIndex, x: &BitString) -> Result<MxRecord> {
    let pos = s.position(x).ok_or_else(|| Error::NotMember(format!("{x} is not in S^{}", s.k)))?;
    let index = s.index_word(pos);
    let count_word = s.count_word();
    let common = index.bits().iter().zip(count_word.bits()).take_while(|(a, b)| a == b).count();
    debug_assert!(common < s.width, "indices are below the count");
    Ok(MxRecord {
        x: x.clone(),
        k: s.k,
        m: index.slice(0, common),
        i_rest: index.slice(common + 1, s.width),
        n_rest: count_word.slice(common + 1, s.width),
        index,
        count_word,
    })
}

pub fn mx(table: &ComplexityTable, k: u32, x: &BitString) -> Result<MxRecord> {
    mx_in(&sk(table, k)?, x)
}

/// Members of `S^k` whose index starts with `m_x 0`.
pub fn sk_mx_in(s: &SkIndex, x: &BitString) -> Result<Vec<BitString>> {
    let r = mx_in(s, x)?;
    let mut prefix = r.m.clone();
    prefix.push(false);
    Ok(s.members
        .iter()
        .enumerate()
        .filter(|(i, _)| s.index_word(*i as u64).starts_with(prefix.bits()))
        .map(|(_, (y, _))| y.clone())
        .collect())
}

pub fn sk_mx(table: &ComplexityTable, k: u32, x: &BitString) -> Result<Vec<BitString>> {
    sk_mx_in(&sk(table, k)?, x)
}

/// `X(r)` restricted to the table, with `m_x` taken at `k = K(x)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct XrReport {
    pub r: usize,
    pub members: Vec<BitString>,
    /// Per `k`: `(k, |X(r) ∩ (S^k \ S^{k-1})|, N_k, slice bound holds)`.
    pub slices: Vec<(u32, u64, u64, bool)>,
}

impl XrReport {
    pub fn slices_hold(&self) -> bool {
        self.slices.iter().all(|s| s.3)
    }
}

/// `l(m_x)` at `k = K(x)` for every table string, in canonical order.
pub fn prefix_lengths(table: &ComplexityTable) -> Result<Vec<(BitString, u32, usize)>> {
    let mut out = Vec::with_capacity(table.len());
    for k in 0..=table.max_len {
        let s = sk(table, k)?;
        for (x, kx) in &s.members {
            if *kx == k {
                out.push((x.clone(), k, mx_in(&s, x)?.m.len()));
            }
        }
    }
    out.sort();
    Ok(out)
}

pub fn xr(table: &ComplexityTable, r: usize) -> Result<XrReport> {
    xr_from(table, &prefix_lengths(table)?, r)
}

fn xr_from(table: &ComplexityTable, lengths: &[(BitString, u32, usize)], r: usize) -> Result<XrReport> {
    let members: Vec<BitString> = lengths.iter().filter(|e| e.2 >= r).map(|e| e.0.clone()).collect();
    let mut slices = Vec::new();
    for k in 0..=table.max_len {
        let n_k = sk(table, k)?.n_k;
        let count = lengths.iter().filter(|e| e.1 == k && e.2 >= r).count() as u64;
        // count <= 2^{1-r} N_k, i.e. count 2^r <= 2 N_k.
        let holds = (count as u128) << r.min(100) <= 2 * n_k as u128;
        slices.push((k, count, n_k, holds));
    }
    Ok(XrReport { r, members, slices })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct XrBoundRow {
    pub r: usize,
    pub size: u64,
    /// `Σ_{x ∈ X(r)} 2^{-K(x)}`.
    pub sum: Dyadic,
    /// `2^{2-r}`.
    pub bound: Dyadic,
    pub slices_hold: bool,
}

impl XrBoundRow {
    pub fn pass(&self) -> bool {
        self.sum <= self.bound && self.slices_hold
    }

    pub fn ratio(&self) -> f64 {
        self.sum.to_f64() / self.bound.to_f64()
    }
}

/// One row per `r` from 0 to one past the widest index.
pub fn xr_bound_check(table: &ComplexityTable) -> Result<Vec<XrBoundRow>> {
    let lengths = prefix_lengths(table)?;
    let top = bitlen(table.len() as u64) + 1;
    let mut rows = Vec::new();
    for r in 0..=top {
        let report = xr_from(table, &lengths, r)?;
        let sum: Dyadic = lengths.iter().filter(|e| e.2 >= r).map(|e| Dyadic::pow2_neg(e.1)).sum();
        rows.push(XrBoundRow {
            r,
            size: report.members.len() as u64,
            sum,
            bound: Dyadic::ONE.mul_pow2(2 - r as i32),
            slices_hold: report.slices_hold(),
        });
    }
    Ok(rows)
}

/// `Σ_k 2^{-k} t_k`.
pub fn kraft_over_levels(table: &ComplexityTable) -> Result<Dyadic> {
    let mut total = Dyadic::ZERO;
    for k in 0..=table.max_len {
        let t = sk(table, k)?.t_k;
        total += Dyadic::pow2_neg(k).times(t);
    }
    Ok(total)
}

/// `log2 N_k` against `k − K(b(k))` for every level with `N_k > 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct LevelRow {
    pub k: u32,
    pub n_k: u64,
    pub log_n_k: f64,
    pub k_of_k: Option<u32>,
    pub predicted: Option<f64>,
}

pub fn level_report(table: &ComplexityTable, src: &impl KSource) -> Result<Vec<LevelRow>> {
    let mut rows = Vec::new();
    for k in 0..=table.max_len {
        let n_k = sk(table, k)?.n_k;
        if n_k == 0 {
            continue;
        }
        let k_of_k = src.k(&BitString::from_nat(k as u64));
        rows.push(LevelRow {
            k,
            n_k,
            log_n_k: (n_k as f64).log2(),
            k_of_k,
            predicted: k_of_k.map(|c| k as f64 - c as f64),
        });
    }
    Ok(rows)
}

/// Largest `|log2 N_k − (k − K(b(k)))|` over the levels where both are known.
pub fn level_gap(rows: &[LevelRow]) -> f64 {
    rows.iter().filter_map(|r| r.predicted.map(|p| (r.log_n_k - p).abs())).fold(0.0, f64::max)
}

pub fn sk_csv(s: &SkIndex) -> String {
    let mut out = String::from("member,K,index\n");
    for (i, (x, kx)) in s.members.iter().enumerate() {
        writeln!(out, "{},{},{}", x.token(), kx, s.index_word(i as u64).token()).unwrap();
    }
    out
}

pub fn xr_csv(rows: &[XrBoundRow]) -> String {
    let mut out = String::from("r,size,sum,bound,pass\n");
    for row in rows {
        writeln!(out, "{},{},{},{},{}", row.r, row.size, row.sum, row.bound, row.pass()).unwrap();
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bits::bs;
    use crate::enumerate::build_table;
    use crate::machine::{Budgets, Condition};

    fn table(l: u32) -> ComplexityTable {
        build_table(l, &Condition::None, &Budgets::default()).unwrap()
    }

    #[test]
    fn small_levels() {
        let t = table(9);
        let s3 = sk(&t, 3).unwrap();
        assert_eq!(s3.members, vec![(bs(""), 3)]);
        assert_eq!(s3.n_k, 1);
        let s5 = sk(&t, 5).unwrap();
        assert_eq!(s5.members.iter().map(|m| m.0.clone()).collect::<Vec<_>>(), vec![bs(""), bs("0"), bs("1")]);
        assert_eq!((s5.n_k, s5.t_k, s5.width), (3, 2, 2));
        assert!(sk(&t, 10).is_err());
    }

    #[test]
    fn nested_levels_and_counts() {
        let t = table(15);
        let mut running = 0;
        for k in 0..=15 {
            let s = sk(&t, k).unwrap();
            running += s.t_k;
            assert_eq!(s.n_k, running);
            if k > 0 {
                let prev = sk(&t, k - 1).unwrap();
                assert!(prev.members.iter().all(|(x, _)| s.contains(x)));
            }
        }
    }

    #[test]
    fn mx_decomposition() {
        let t = table(15);
        let s = sk(&t, 15).unwrap();
        for (x, _) in &s.members {
            let r = mx_in(&s, x).unwrap();
            let mut idx = r.m.clone();
            idx.push(false);
            idx.extend_from(r.i_rest.bits());
            assert_eq!(idx, r.index);
            let mut cw = r.m.clone();
            cw.push(true);
            cw.extend_from(r.n_rest.bits());
            assert_eq!(cw, r.count_word);
            let sub = sk_mx_in(&s, x).unwrap();
            assert!(sub.contains(x));
            assert_eq!(sub.len() as u64, 1 << (s.width - r.m.len() - 1));
        }
        // The last member shares the longest prefix with the count.
        let last = &s.members.last().unwrap().0;
        let longest = s.members.iter().map(|(x, _)| mx_in(&s, x).unwrap().m.len()).max().unwrap();
        assert_eq!(mx_in(&s, last).unwrap().m.len(), longest);
        assert!(mx(&t, 5, &bs("0110")).is_err());
    }

    #[test]
    fn x_r_bounds() {
        let t = table(17);
        let all = xr(&t, 0).unwrap();
        assert_eq!(all.members.len(), t.len());
        let rows = xr_bound_check(&t).unwrap();
        assert!(rows.iter().all(XrBoundRow::pass));
        assert!(rows.last().unwrap().size == 0);
        assert_eq!(rows[1].bound, Dyadic::new(2, 0));
        assert!(kraft_over_levels(&t).unwrap() <= Dyadic::ONE);

        let single = table(3);
        let rows = xr_bound_check(&single).unwrap();
        assert!(rows.iter().all(|r| r.sum <= Dyadic::pow2_neg(3)));
    }
}
