//! SetLang: a prefix-free description language for finite sets of strings.
//!
//! | tag   | form               | payload                              |
//! |-------|--------------------|--------------------------------------|
//! | `00`  | `Singleton(x)`     | `std(x)`                             |
//! | `01`  | `All(n)`           | `nat(n)`                             |
//! | `100` | `Cyl(prefix, n)`   | `std(prefix) nat(n)`                 |
//! | `101` | `Hamming(n, s)`    | `nat(n) nat(s)`                      |
//! | `110` | `Union(parts)`     | `nat(count)` then each part's code   |
//! | `111` | `List(elements)`   | `nat(count)` then `std(e)` per element |
//!
//! `nat(n) = bar(b(n))`. Union parts appear in strictly increasing canonical
//! order of their codes and List elements in strictly increasing canonical
//! order, so each set expression has exactly one code.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};

use crate::bits::BitString;
use crate::complexity::codec::{nat_code, nat_code_len, read_nat, read_std, std_code, std_code_len};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum SetDescription {
    Singleton(BitString),
    /// All strings of length `n`.
    All(u64),
    /// Strings of length `n` starting with `prefix`.
    Cyl { prefix: BitString, n: u64 },
    /// Strings of length `n` with exactly `s` ones.
    Hamming { n: u64, s: u64 },
    Union(Vec<SetDescription>),
    List(Vec<BitString>),
}

use SetDescription::*;

pub(crate) fn binomial(n: u64, k: u64) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigUint::one();
    for i in 0..k {
        acc = acc * BigUint::from(n - i) / BigUint::from(i + 1);
    }
    acc
}

/// `⌈log2 v⌉` for `v >= 1`.
pub fn ceil_log2(v: &BigUint) -> u64 {
    if v.is_zero() {
        return 0;
    }
    (v - 1u32).bits()
}

/// `log2 v` as a real.
pub fn log2_real(v: &BigUint) -> f64 {
    let bits = v.bits();
    if bits <= 64 {
        return (v.to_u64().expect("fits") as f64).log2();
    }
    let shift = bits - 64;
    let top = (v >> shift).to_u64().expect("fits");
    (top as f64).log2() + shift as f64
}

impl SetDescription {
    /// Checks the grammar's side conditions.
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidModel(m));
        match self {
            Singleton(_) | All(_) => Ok(()),
            Cyl { prefix, n } if prefix.len() as u64 > *n => bad(format!("cylinder prefix longer than {n}")),
            Hamming { n, s } if s > n => bad(format!("hamming weight {s} exceeds length {n}")),
            Cyl { .. } | Hamming { .. } => Ok(()),
            Union(parts) => {
                if parts.len() < 2 {
                    return bad("union needs at least two parts".into());
                }
                for p in parts {
                    p.validate()?;
                }
                let codes: Vec<BitString> = parts.iter().map(|p| p.encode()).collect();
                if codes.windows(2).any(|w| w[0] >= w[1]) {
                    return bad("union parts must be distinct and in canonical code order".into());
                }
                Ok(())
            }
            List(elems) => {
                if elems.is_empty() {
                    return bad("empty list".into());
                }
                if elems.windows(2).any(|w| w[0] >= w[1]) {
                    return bad("list elements must be distinct and in canonical order".into());
                }
                Ok(())
            }
        }
    }

    /// Builds a union with parts sorted into canonical code order and
    /// duplicates removed; a single remaining part is returned as is.
    pub fn union_of(parts: Vec<SetDescription>) -> SetDescription {
        let mut keyed: Vec<(BitString, SetDescription)> = parts.into_iter().map(|p| (p.encode(), p)).collect();
        keyed.sort_by(|a, b| a.0.cmp(&b.0));
        keyed.dedup_by(|a, b| a.0 == b.0);
        if keyed.len() == 1 {
            return keyed.pop().unwrap().1;
        }
        Union(keyed.into_iter().map(|(_, p)| p).collect())
    }

    /// Builds a list with elements sorted and deduplicated.
    pub fn list_of(mut elems: Vec<BitString>) -> SetDescription {
        elems.sort();
        elems.dedup();
        List(elems)
    }

    pub fn encode(&self) -> BitString {
        let mut out = BitString::new();
        self.encode_into(&mut out);
        out
    }

    fn encode_into(&self, out: &mut BitString) {
        let tag = |out: &mut BitString, t: &[bool]| out.extend_from(t);
        match self {
            Singleton(x) => {
                tag(out, &[false, false]);
                out.extend_from(std_code(x.bits()).bits());
            }
            All(n) => {
                tag(out, &[false, true]);
                out.extend_from(nat_code(*n).bits());
            }
            Cyl { prefix, n } => {
                tag(out, &[true, false, false]);
                out.extend_from(std_code(prefix.bits()).bits());
                out.extend_from(nat_code(*n).bits());
            }
            Hamming { n, s } => {
                tag(out, &[true, false, true]);
                out.extend_from(nat_code(*n).bits());
                out.extend_from(nat_code(*s).bits());
            }
            Union(parts) => {
                tag(out, &[true, true, false]);
                out.extend_from(nat_code(parts.len() as u64).bits());
                for p in parts {
                    p.encode_into(out);
                }
            }
            List(elems) => {
                tag(out, &[true, true, true]);
                out.extend_from(nat_code(elems.len() as u64).bits());
                for e in elems {
                    out.extend_from(std_code(e.bits()).bits());
                }
            }
        }
    }

    /// Code length in bits, computed without building the code.
    pub fn len(&self) -> usize {
        match self {
            Singleton(x) => 2 + std_code_len(x.len()),
            All(n) => 2 + nat_code_len(*n),
            Cyl { prefix, n } => 3 + std_code_len(prefix.len()) + nat_code_len(*n),
            Hamming { n, s } => 3 + nat_code_len(*n) + nat_code_len(*s),
            Union(parts) => 3 + nat_code_len(parts.len() as u64) + parts.iter().map(|p| p.len()).sum::<usize>(),
            List(elems) => {
                3 + nat_code_len(elems.len() as u64) + elems.iter().map(|e| std_code_len(e.len())).sum::<usize>()
            }
        }
    }

    /// Decodes a complete code; trailing bits are an error.
    pub fn decode(bits: &BitString) -> Result<SetDescription> {
        let mut pos = 0;
        let d = Self::decode_at(bits.bits(), &mut pos)?;
        if pos != bits.len() {
            return Err(Error::Malformed(format!("{} trailing bits", bits.len() - pos)));
        }
        Ok(d)
    }

    /// Decodes one description starting at `*pos`.
    pub fn decode_at(bits: &[bool], pos: &mut usize) -> Result<SetDescription> {
        let short = || Error::Malformed("code ends early".into());
        let bit = |p: &mut usize| -> Result<bool> {
            let b = *bits.get(*p).ok_or_else(short)?;
            *p += 1;
            Ok(b)
        };
        let nat = |p: &mut usize| read_nat(bits, p).ok_or_else(short);
        let string = |p: &mut usize| read_std(bits, p).ok_or_else(short);
        let d = match (bit(pos)?, bit(pos)?) {
            (false, false) => Singleton(string(pos)?),
            (false, true) => All(nat(pos)?),
            (true, second) => match (second, bit(pos)?) {
                (false, false) => {
                    let prefix = string(pos)?;
                    Cyl { prefix, n: nat(pos)? }
                }
                (false, true) => {
                    let n = nat(pos)?;
                    Hamming { n, s: nat(pos)? }
                }
                (true, false) => {
                    let count = nat(pos)?;
                    if count < 2 {
                        return Err(Error::Malformed("union needs at least two parts".into()));
                    }
                    let mut parts = Vec::new();
                    for _ in 0..count {
                        parts.push(Self::decode_at(bits, pos)?);
                    }
                    Union(parts)
                }
                (true, true) => {
                    let count = nat(pos)?;
                    let mut elems = Vec::new();
                    for _ in 0..count {
                        elems.push(string(pos)?);
                    }
                    List(elems)
                }
            },
        };
        d.validate().map_err(|e| Error::Malformed(e.to_string()))?;
        Ok(d)
    }

    /// Union nesting depth: 0 for base sets and lists.
    pub fn union_depth(&self) -> usize {
        match self {
            Union(parts) => 1 + parts.iter().map(|p| p.union_depth()).max().unwrap_or(0),
            _ => 0,
        }
    }

    pub fn member(&self, x: &[bool]) -> bool {
        match self {
            Singleton(y) => y.bits() == x,
            All(n) => x.len() as u64 == *n,
            Cyl { prefix, n } => x.len() as u64 == *n && x.starts_with(prefix.bits()),
            Hamming { n, s } => x.len() as u64 == *n && x.iter().filter(|&&b| b).count() as u64 == *s,
            Union(parts) => parts.iter().any(|p| p.member(x)),
            List(elems) => elems.binary_search_by(|e| crate::bits::canonical_cmp(e.bits(), x)).is_ok(),
        }
    }

    /// Exact cardinality.
    pub fn size(&self) -> BigUint {
        match self {
            Singleton(_) => BigUint::one(),
            All(n) => BigUint::one() << *n,
            Cyl { prefix, n } => BigUint::one() << (*n - prefix.len() as u64),
            Hamming { n, s } => binomial(*n, *s),
            List(elems) => BigUint::from(elems.len()),
            Union(_) => union_size(self),
        }
    }

    /// `⌈log2 |S|⌉`.
    pub fn log_size(&self) -> u64 {
        ceil_log2(&self.size())
    }

    pub fn log_size_real(&self) -> f64 {
        log2_real(&self.size())
    }

    /// Members in canonical order. Fails when the set is larger than `cap`.
    pub fn denote(&self, cap: u64) -> Result<Vec<BitString>> {
        let size = self.size();
        if size > BigUint::from(cap) {
            return Err(Error::CapExceeded { what: format!("|{self}| = {size}"), cap });
        }
        let mut out = Vec::with_capacity(size.to_usize().unwrap_or(0));
        self.collect_into(&mut out);
        if matches!(self, Union(_)) {
            out.sort();
            out.dedup();
        }
        Ok(out)
    }

    fn collect_into(&self, out: &mut Vec<BitString>) {
        match self {
            Singleton(x) => out.push(x.clone()),
            All(n) => out.extend(BitString::all_of_len(*n as usize)),
            Cyl { prefix, n } => {
                out.extend(BitString::all_of_len((*n as usize) - prefix.len()).map(|t| prefix.concat(&t)))
            }
            Hamming { n, s } => {
                let mut cur = Vec::with_capacity(*n as usize);
                hamming_lex(*n as usize, *s as usize, &mut cur, out);
            }
            Union(parts) => parts.iter().for_each(|p| p.collect_into(out)),
            List(elems) => out.extend(elems.iter().cloned()),
        }
    }
}

fn hamming_lex(n: usize, ones: usize, cur: &mut Vec<bool>, out: &mut Vec<BitString>) {
    let left = n - cur.len();
    if left == 0 {
        out.push(BitString::from_bits(cur));
        return;
    }
    if ones < left {
        cur.push(false);
        hamming_lex(n, ones, cur, out);
        cur.pop();
    }
    if ones > 0 {
        cur.push(true);
        hamming_lex(n, ones - 1, cur, out);
        cur.pop();
    }
}

/// Constraint form of a base family over strings of one length.
#[derive(Clone)]
struct Family {
    n: u64,
    prefix: BitString,
    weight: Option<u64>,
}

impl Family {
    fn meet(&self, other: &Family) -> Option<Family> {
        if self.n != other.n {
            return None;
        }
        let (short, long) = if self.prefix.len() <= other.prefix.len() {
            (&self.prefix, &other.prefix)
        } else {
            (&other.prefix, &self.prefix)
        };
        if !long.starts_with(short.bits()) {
            return None;
        }
        let weight = match (self.weight, other.weight) {
            (Some(a), Some(b)) if a != b => return None,
            (a, b) => a.or(b),
        };
        Some(Family { n: self.n, prefix: long.clone(), weight })
    }

    fn count(&self) -> BigUint {
        let free = self.n - self.prefix.len() as u64;
        match self.weight {
            None => BigUint::one() << free,
            Some(s) => {
                let w = self.prefix.weight() as u64;
                if s < w {
                    BigUint::zero()
                } else {
                    binomial(free, s - w)
                }
            }
        }
    }

    fn contains(&self, x: &BitString) -> bool {
        x.len() as u64 == self.n
            && x.starts_with(self.prefix.bits())
            && self.weight.is_none_or(|s| x.weight() as u64 == s)
    }
}

fn flatten(d: &SetDescription, families: &mut Vec<Family>, explicit: &mut Vec<BitString>) {
    match d {
        Singleton(x) => explicit.push(x.clone()),
        List(elems) => explicit.extend(elems.iter().cloned()),
        All(n) => families.push(Family { n: *n, prefix: BitString::new(), weight: None }),
        Cyl { prefix, n } => families.push(Family { n: *n, prefix: prefix.clone(), weight: None }),
        Hamming { n, s } => families.push(Family { n: *n, prefix: BitString::new(), weight: Some(*s) }),
        Union(parts) => parts.iter().for_each(|p| flatten(p, families, explicit)),
    }
}

/// Exact size of a union by inclusion–exclusion over base families of equal
/// length; explicit elements are counted when no family covers them.
fn union_size(d: &SetDescription) -> BigUint {
    let mut families = Vec::new();
    let mut explicit = Vec::new();
    flatten(d, &mut families, &mut explicit);
    explicit.sort();
    explicit.dedup();

    let mut total = BigUint::zero();
    let mut lengths: Vec<u64> = families.iter().map(|f| f.n).collect();
    lengths.sort_unstable();
    lengths.dedup();
    for n in lengths {
        let group: Vec<&Family> = families.iter().filter(|f| f.n == n).collect();
        assert!(group.len() < 24, "union has too many same-length parts for inclusion-exclusion");
        let mut plus = BigUint::zero();
        let mut minus = BigUint::zero();
        for mask in 1u32..(1 << group.len()) {
            let mut meet: Option<Family> = None;
            for (i, f) in group.iter().enumerate() {
                if mask & (1 << i) == 0 {
                    continue;
                }
                meet = match meet {
                    None => Some((*f).clone()),
                    Some(m) => m.meet(f),
                };
                if meet.is_none() {
                    break;
                }
            }
            let Some(meet) = meet else { continue };
            let c = meet.count();
            if mask.count_ones() % 2 == 1 {
                plus += c;
            } else {
                minus += c;
            }
        }
        total += plus - minus;
    }
    let uncovered = explicit.iter().filter(|x| !families.iter().any(|f| f.contains(x))).count();
    total + BigUint::from(uncovered)
}

impl fmt::Display for SetDescription {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Singleton(x) => write!(f, "singleton:{x}"),
            All(n) => write!(f, "all:{n}"),
            Cyl { prefix, n } => write!(f, "cyl:{prefix}/{n}"),
            Hamming { n, s } => write!(f, "ham:{n},{s}"),
            Union(parts) => {
                f.write_str("union(")?;
                for (i, p) in parts.iter().enumerate() {
                    if i > 0 {
                        f.write_str(",")?;
                    }
                    write!(f, "{p}")?;
                }
                f.write_str(")")
            }
            List(elems) => {
                f.write_str("list{")?;
                for (i, e) in elems.iter().enumerate() {
                    if i > 0 {
                        f.write_str(",")?;
                    }
                    write!(f, "{e}")?;
                }
                f.write_str("}")
            }
        }
    }
}

pub(crate) struct Cursor<'a> {
    pub s: &'a str,
    pub pos: usize,
}

impl<'a> Cursor<'a> {
    pub fn new(s: &'a str) -> Self {
        Cursor { s, pos: 0 }
    }

    pub fn err(&self, what: &str) -> Error {
        Error::Parse(format!("{what} at offset {} in {:?}", self.pos, self.s))
    }

    pub fn rest(&self) -> &'a str {
        &self.s[self.pos..]
    }

    pub fn eat(&mut self, lit: &str) -> bool {
        if self.rest().starts_with(lit) {
            self.pos += lit.len();
            true
        } else {
            false
        }
    }

    pub fn expect(&mut self, lit: &str) -> Result<()> {
        if self.eat(lit) {
            Ok(())
        } else {
            Err(self.err(&format!("expected {lit:?}")))
        }
    }

    /// Longest run of characters in `allowed`.
    pub fn take_while(&mut self, allowed: impl Fn(char) -> bool) -> &'a str {
        let start = self.pos;
        while let Some(c) = self.rest().chars().next() {
            if !allowed(c) {
                break;
            }
            self.pos += c.len_utf8();
        }
        &self.s[start..self.pos]
    }

    pub fn nat(&mut self) -> Result<u64> {
        let t = self.take_while(|c| c.is_ascii_digit());
        t.parse().map_err(|_| self.err("expected a natural number"))
    }

    pub fn bits(&mut self) -> Result<BitString> {
        let t = self.take_while(|c| c == '0' || c == '1' || c == '-');
        t.parse()
    }

    pub fn done(&self) -> bool {
        self.pos == self.s.len()
    }
}

pub(crate) fn parse_set(c: &mut Cursor<'_>) -> Result<SetDescription> {
    let d = if c.eat("singleton:") {
        Singleton(c.bits()?)
    } else if c.eat("all:") {
        All(c.nat()?)
    } else if c.eat("cyl:") {
        let prefix = c.bits()?;
        c.expect("/")?;
        Cyl { prefix, n: c.nat()? }
    } else if c.eat("ham:") {
        let n = c.nat()?;
        c.expect(",")?;
        Hamming { n, s: c.nat()? }
    } else if c.eat("union(") {
        let mut parts = vec![parse_set(c)?];
        while c.eat(",") {
            parts.push(parse_set(c)?);
        }
        c.expect(")")?;
        SetDescription::union_of(parts)
    } else if c.eat("list{") {
        let mut elems = vec![c.bits()?];
        while c.eat(",") {
            elems.push(c.bits()?);
        }
        c.expect("}")?;
        SetDescription::list_of(elems)
    } else {
        return Err(c.err("unknown set form"));
    };
    d.validate()?;
    Ok(d)
}

impl FromStr for SetDescription {
    type Err = Error;

    /// Parses `singleton:1011`, `all:8`, `cyl:10/4`, `ham:8,4`,
    /// `union(a,b,...)` and `list{x,y,...}`. Unions and lists are put into
    /// canonical order.
    fn from_str(s: &str) -> Result<Self> {
        let compact: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        let mut c = Cursor::new(&compact);
        let d = parse_set(&mut c)?;
        if !c.done() {
            return Err(c.err("trailing input"));
        }
        Ok(d)
    }
}
