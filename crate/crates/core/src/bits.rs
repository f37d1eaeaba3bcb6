//! Finite binary strings and the canonical string/number correspondence.
//!
//! Naturals and strings are identified through the enumeration
//! ε, 0, 1, 00, 01, 10, 11, 000, … so that `b(0) = ε`, `b(1) = "0"`,
//! `b(3) = "00"`. Strings order canonically by length first, then
//! lexicographically, which is the same order as their natural numbers.

use std::borrow::Borrow;
use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use crate::error::Error;

/// A finite binary string. The empty string is valid.
#[derive(Clone, Default, PartialEq, Eq, Hash)]
pub struct BitString(Vec<bool>);

impl BitString {
    pub fn new() -> Self {
        BitString(Vec::new())
    }

    pub fn from_bits(bits: &[bool]) -> Self {
        BitString(bits.to_vec())
    }

    pub fn from_vec(bits: Vec<bool>) -> Self {
        BitString(bits)
    }

    /// The canonical string `b(n)`: binary of `n + 1` without its leading one.
    pub fn from_nat(n: u64) -> Self {
        let v = n + 1;
        let width = 63 - v.leading_zeros();
        BitString((0..width).rev().map(|i| (v >> i) & 1 == 1).collect())
    }

    /// Inverse of [`BitString::from_nat`]. Returns `None` past 63 bits.
    pub fn to_nat(&self) -> Option<u64> {
        if self.0.len() > 63 {
            return None;
        }
        let mut v: u64 = 1;
        for &b in &self.0 {
            v = (v << 1) | b as u64;
        }
        Some(v - 1)
    }

    /// All strings of exactly `len` bits in lexicographic order.
    pub fn all_of_len(len: usize) -> impl Iterator<Item = BitString> {
        assert!(len < 64, "string length {len} too large to enumerate");
        let start = (1u64 << len) - 1;
        (start..start + (1u64 << len)).map(BitString::from_nat)
    }

    /// All strings of length at most `len` in canonical order.
    pub fn all_up_to(len: usize) -> impl Iterator<Item = BitString> {
        (0..=len).flat_map(BitString::all_of_len)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn bits(&self) -> &[bool] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<bool> {
        self.0
    }

    pub fn push(&mut self, bit: bool) {
        self.0.push(bit);
    }

    pub fn extend_from(&mut self, other: &[bool]) {
        self.0.extend_from_slice(other);
    }

    pub fn concat(&self, other: &BitString) -> BitString {
        let mut v = Vec::with_capacity(self.len() + other.len());
        v.extend_from_slice(&self.0);
        v.extend_from_slice(&other.0);
        BitString(v)
    }

    /// Number of one bits.
    pub fn weight(&self) -> usize {
        self.0.iter().filter(|&&b| b).count()
    }

    pub fn complement(&self) -> BitString {
        BitString(self.0.iter().map(|b| !b).collect())
    }

    pub fn starts_with(&self, prefix: &[bool]) -> bool {
        self.0.starts_with(prefix)
    }

    pub fn slice(&self, from: usize, to: usize) -> BitString {
        BitString(self.0[from..to].to_vec())
    }

    /// `n` written in plain binary, left-padded with zeros to `width` bits.
    pub fn binary_padded(n: u64, width: usize) -> BitString {
        BitString((0..width).rev().map(|i| i < 64 && (n >> i) & 1 == 1).collect())
    }

    /// Token used in files and reports; the empty string renders as `-`.
    pub fn token(&self) -> String {
        self.to_string()
    }
}

/// Canonical order: shorter strings first, then lexicographic.
pub fn canonical_cmp(a: &[bool], b: &[bool]) -> Ordering {
    a.len().cmp(&b.len()).then_with(|| a.cmp(b))
}

impl Ord for BitString {
    fn cmp(&self, other: &Self) -> Ordering {
        canonical_cmp(&self.0, &other.0)
    }
}

impl PartialOrd for BitString {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Borrow<[bool]> for BitString {
    fn borrow(&self) -> &[bool] {
        &self.0
    }
}

impl From<&[bool]> for BitString {
    fn from(bits: &[bool]) -> Self {
        BitString(bits.to_vec())
    }
}

impl FromStr for BitString {
    type Err = Error;

    /// Parses ASCII `0`/`1`. The empty string, `-` and `ε` denote ε.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if s.is_empty() || s == "-" || s == "ε" {
            return Ok(BitString::new());
        }
        s.chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                _ => Err(Error::Parse(format!("not a bit string: {s:?}"))),
            })
            .collect::<Result<Vec<_>, _>>()
            .map(BitString)
    }
}

impl fmt::Display for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("-");
        }
        for &b in &self.0 {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitString({self})")
    }
}

/// Shorthand for tests and examples. Panics on malformed input.
pub fn bs(s: &str) -> BitString {
    s.parse().expect("valid bit string literal")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nat_correspondence_matches_enumeration() {
        let expect = ["-", "0", "1", "00", "01", "10", "11", "000"];
        for (n, e) in expect.iter().enumerate() {
            assert_eq!(BitString::from_nat(n as u64).to_string(), *e);
        }
        assert_eq!(BitString::from_nat(8), bs("001"));
        assert_eq!(BitString::from_nat(4), bs("01"));
    }

    #[test]
    fn nat_round_trip() {
        for n in 0..5000u64 {
            assert_eq!(BitString::from_nat(n).to_nat(), Some(n));
        }
    }

    #[test]
    fn canonical_order_is_nat_order() {
        let all: Vec<_> = BitString::all_up_to(6).collect();
        for (i, w) in all.windows(2).enumerate() {
            assert!(w[0] < w[1], "order broken at {i}");
            assert_eq!(w[0].to_nat(), Some(i as u64));
        }
    }

    #[test]
    fn parse_and_display() {
        assert_eq!(bs("-"), BitString::new());
        assert_eq!(bs("0110").to_string(), "0110");
        assert!("012".parse::<BitString>().is_err());
        assert_eq!(BitString::binary_padded(5, 5), bs("00101"));
    }
}
