//! DistLang: prefix-free descriptions of finite distributions.
//!
//! | tag  | form                | payload                                         |
//! |------|---------------------|-------------------------------------------------|
//! | `00` | `UniformOn(S)`      | the SetLang code of `S`                          |
//! | `01` | `Bernoulli(n, p)`   | `nat(n) nat(num p) nat(den p)`                   |
//! | `10` | `Table(entries)`    | `nat(count)` then `std(x) nat(num) nat(den)` each |
//!
//! Rationals are in lowest terms. Bernoulli `p` is the probability of a 1
//! and lies strictly between 0 and 1. Table entries are in strictly
//! increasing canonical order with positive masses summing to at most 1.

use std::fmt;
use std::str::FromStr;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::bits::BitString;
use crate::codebook::{shannon_length, Codebook};
use crate::complexity::codec::{nat_code, nat_code_len, read_nat, read_std, std_code, std_code_len};
use crate::error::{Error, Result};
use crate::machine::Condition;
use crate::models_set::desc::{log2_real, parse_set, Cursor};
use crate::models_set::SetDescription;

/// A rational with natural numerator and positive denominator, in lowest terms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Ratio {
    pub num: u64,
    pub den: u64,
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

impl Ratio {
    pub fn new(num: u64, den: u64) -> Result<Ratio> {
        if den == 0 {
            return Err(Error::InvalidModel("zero denominator".into()));
        }
        let g = gcd(num, den).max(1);
        Ok(Ratio { num: num / g, den: den / g })
    }

    pub fn is_reduced(&self) -> bool {
        self.den > 0 && gcd(self.num, self.den) == 1
    }

    pub fn to_big(self) -> BigRational {
        BigRational::new(BigInt::from(self.num), BigInt::from(self.den))
    }

    pub(crate) fn code_len(&self) -> usize {
        nat_code_len(self.num) + nat_code_len(self.den)
    }
}

impl fmt::Display for Ratio {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.num, self.den)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum DistDescription {
    UniformOn(SetDescription),
    Bernoulli { n: u64, p: Ratio },
    Table(Vec<(BitString, Ratio)>),
}

use DistDescription::*;

impl DistDescription {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidModel(m));
        match self {
            UniformOn(s) => s.validate(),
            Bernoulli { p, .. } => {
                if !p.is_reduced() || p.num == 0 || p.num >= p.den {
                    return bad(format!("bernoulli parameter {p} must be a reduced fraction in (0, 1)"));
                }
                Ok(())
            }
            Table(entries) => {
                if entries.is_empty() {
                    return bad("empty table".into());
                }
                if entries.windows(2).any(|w| w[0].0 >= w[1].0) {
                    return bad("table entries must be distinct and in canonical order".into());
                }
                if entries.iter().any(|(_, m)| !m.is_reduced() || m.num == 0) {
                    return bad("table masses must be positive reduced fractions".into());
                }
                let total: BigRational = entries.iter().map(|(_, m)| m.to_big()).sum();
                if total > BigRational::one() {
                    return bad(format!("table masses sum to {total}"));
                }
                Ok(())
            }
        }
    }

    /// Builds a table with entries sorted into canonical order.
    pub fn table_of(mut entries: Vec<(BitString, Ratio)>) -> Result<DistDescription> {
        entries.sort();
        let t = Table(entries);
        t.validate()?;
        Ok(t)
    }

    pub fn encode(&self) -> BitString {
        let mut out = BitString::new();
        let nat = |out: &mut BitString, n: u64| out.extend_from(nat_code(n).bits());
        match self {
            UniformOn(s) => {
                out.extend_from(&[false, false]);
                out.extend_from(s.encode().bits());
            }
            Bernoulli { n, p } => {
                out.extend_from(&[false, true]);
                nat(&mut out, *n);
                nat(&mut out, p.num);
                nat(&mut out, p.den);
            }
            Table(entries) => {
                out.extend_from(&[true, false]);
                nat(&mut out, entries.len() as u64);
                for (x, m) in entries {
                    out.extend_from(std_code(x.bits()).bits());
                    nat(&mut out, m.num);
                    nat(&mut out, m.den);
                }
            }
        }
        out
    }

    pub fn len(&self) -> usize {
        match self {
            UniformOn(s) => 2 + s.len(),
            Bernoulli { n, p } => 2 + nat_code_len(*n) + p.code_len(),
            Table(entries) => {
                2 + nat_code_len(entries.len() as u64)
                    + entries.iter().map(|(x, m)| std_code_len(x.len()) + m.code_len()).sum::<usize>()
            }
        }
    }

    pub fn decode(bits: &BitString) -> Result<DistDescription> {
        let b = bits.bits();
        let short = || Error::Malformed("code ends early".into());
        let mut pos = 2;
        let tag = b.get(..2).ok_or_else(short)?;
        let d = match (tag[0], tag[1]) {
            (false, false) => UniformOn(SetDescription::decode_at(b, &mut pos)?),
            (false, true) => {
                let n = read_nat(b, &mut pos).ok_or_else(short)?;
                let num = read_nat(b, &mut pos).ok_or_else(short)?;
                let den = read_nat(b, &mut pos).ok_or_else(short)?;
                Bernoulli { n, p: Ratio { num, den } }
            }
            (true, false) => {
                let count = read_nat(b, &mut pos).ok_or_else(short)?;
                let mut entries = Vec::new();
                for _ in 0..count {
                    let x = read_std(b, &mut pos).ok_or_else(short)?;
                    let num = read_nat(b, &mut pos).ok_or_else(short)?;
                    let den = read_nat(b, &mut pos).ok_or_else(short)?;
                    entries.push((x, Ratio { num, den }));
                }
                Table(entries)
            }
            (true, true) => return Err(Error::Malformed("reserved distribution tag 11".into())),
        };
        if pos != b.len() {
            return Err(Error::Malformed(format!("{} trailing bits", b.len() - pos)));
        }
        d.validate().map_err(|e| Error::Malformed(e.to_string()))?;
        Ok(d)
    }

    /// Exact probability of `x`; zero outside the support.
    pub fn mass(&self, x: &BitString) -> BigRational {
        match self {
            UniformOn(s) => {
                if s.member(x.bits()) {
                    BigRational::new(BigInt::one(), BigInt::from(s.size()))
                } else {
                    BigRational::zero()
                }
            }
            Bernoulli { n, p } => {
                if x.len() as u64 != *n {
                    return BigRational::zero();
                }
                let one = p.to_big();
                let zero = BigRational::one() - &one;
                let w = x.weight();
                num_traits::pow(one, w) * num_traits::pow(zero, x.len() - w)
            }
            Table(entries) => entries
                .binary_search_by(|(y, _)| y.cmp(x))
                .map(|i| entries[i].1.to_big())
                .unwrap_or_else(|_| BigRational::zero()),
        }
    }

    /// `−log2 P(x)`; `f64::INFINITY` marks zero mass.
    pub fn neglog(&self, x: &BitString) -> f64 {
        neglog_of(&self.mass(x))
    }

    /// Number of strings with positive mass.
    pub fn support_size(&self) -> BigUint {
        match self {
            UniformOn(s) => s.size(),
            Bernoulli { n, .. } => BigUint::one() << *n,
            Table(entries) => BigUint::from(entries.len()),
        }
    }

    /// The support in canonical order with masses.
    pub fn support(&self, cap: u64) -> Result<Vec<(BitString, BigRational)>> {
        let size = self.support_size();
        if size > BigUint::from(cap) {
            return Err(Error::CapExceeded { what: format!("support of {self} has {size} strings"), cap });
        }
        Ok(match self {
            UniformOn(s) => {
                let m = BigRational::new(BigInt::one(), BigInt::from(size));
                s.denote(cap)?.into_iter().map(|x| (x, m.clone())).collect()
            }
            Bernoulli { n, .. } => BitString::all_of_len(*n as usize).map(|x| (self.mass(&x), x)).map(|(m, x)| (x, m)).collect(),
            Table(entries) => entries.iter().map(|(x, m)| (x.clone(), m.to_big())).collect(),
        })
    }

    pub fn codebook(&self, cap: u64) -> Result<Codebook> {
        match self {
            // Same construction as the set model so both give one condition.
            UniformOn(s) => Codebook::uniform(s.denote(cap)?),
            _ => Codebook::new(self.support(cap)?),
        }
    }

    pub fn condition(&self, cap: u64) -> Result<Condition> {
        Ok(Condition::model(self.codebook(cap)?))
    }
}

pub fn neglog_of(mass: &BigRational) -> f64 {
    if !mass.is_positive() {
        return f64::INFINITY;
    }
    let num = mass.numer().magnitude();
    let den = mass.denom().magnitude();
    log2_real(den) - log2_real(num)
}

/// `⌈−log2 P⌉` for positive `P`.
pub fn ceil_neglog(mass: &BigRational) -> u64 {
    shannon_length(mass) as u64
}

impl fmt::Display for DistDescription {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            UniformOn(s) => write!(f, "unif({s})"),
            Bernoulli { n, p } => write!(f, "bern:{n},{p}"),
            Table(entries) => {
                f.write_str("table{")?;
                for (i, (x, m)) in entries.iter().enumerate() {
                    if i > 0 {
                        f.write_str(",")?;
                    }
                    write!(f, "{x}:{m}")?;
                }
                f.write_str("}")
            }
        }
    }
}

fn parse_ratio(c: &mut Cursor<'_>) -> Result<Ratio> {
    let num = c.nat()?;
    c.expect("/")?;
    let den = c.nat()?;
    if den == 0 {
        return Err(c.err("zero denominator"));
    }
    Ratio::new(num, den)
}

impl FromStr for DistDescription {
    type Err = Error;

    /// Parses `unif(<set>)`, `bern:8,1/4` and `table{0:1/2,1:1/2}`.
    /// Fractions are reduced and table entries sorted.
    fn from_str(s: &str) -> Result<Self> {
        let compact: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        let mut c = Cursor::new(&compact);
        let d = if c.eat("unif(") {
            let set = parse_set(&mut c)?;
            c.expect(")")?;
            UniformOn(set)
        } else if c.eat("bern:") {
            let n = c.nat()?;
            c.expect(",")?;
            Bernoulli { n, p: parse_ratio(&mut c)? }
        } else if c.eat("table{") {
            let mut entries = Vec::new();
            loop {
                let x = c.bits()?;
                c.expect(":")?;
                entries.push((x, parse_ratio(&mut c)?));
                if !c.eat(",") {
                    break;
                }
            }
            c.expect("}")?;
            DistDescription::table_of(entries)?
        } else {
            return Err(c.err("unknown distribution form"));
        };
        if !c.done() {
            return Err(c.err("trailing input"));
        }
        d.validate()?;
        Ok(d)
    }
}

/// Float view of a rational, for reports.
pub fn ratio_f64(r: &BigRational) -> f64 {
    r.numer().to_f64().unwrap_or(f64::NAN) / r.denom().to_f64().unwrap_or(f64::NAN)
}
