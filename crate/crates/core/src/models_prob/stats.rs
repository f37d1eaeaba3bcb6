//! Typicality, two-part codes and sufficient statistics for distribution
//! models, and the restricted-class Bernoulli demonstration.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed};
use rayon::prelude::*;

use crate::bits::BitString;
use crate::complexity::codec::{nat_code_len, std_code_len};
use crate::complexity::{shortest_program, KSource, Oracle};
use crate::enumerate::ComplexityTable;
use crate::error::{Error, Result};
use crate::models_set::{enumerate_models, two_part, ModelOptions, SetDescription};
use crate::skstats::sk;

use super::dist::{ceil_neglog, neglog_of, DistDescription, Ratio};

/// Grammar restrictions for distribution enumeration.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DistOptions {
    pub sets: ModelOptions,
    /// Largest enumerated table; only 0 and 1 are supported.
    pub table_cap: usize,
}

impl Default for DistOptions {
    fn default() -> Self {
        DistOptions { sets: ModelOptions::default(), table_cap: 1 }
    }
}

impl DistOptions {
    pub fn admits(&self, d: &DistDescription) -> bool {
        match d {
            DistDescription::UniformOn(s) => self.sets.admits(s),
            DistDescription::Bernoulli { .. } => true,
            DistDescription::Table(entries) => entries.len() <= self.table_cap,
        }
    }
}

/// Reduced fractions `num/den` with `0 < num <= den`, or `num < den` when
/// `proper`, whose codes fit in `budget` bits.
fn fractions(budget: usize, proper: bool) -> Vec<Ratio> {
    let mut out = Vec::new();
    let mut den = 1u64;
    while nat_code_len(1) + nat_code_len(den) <= budget {
        let top = if proper { den - 1 } else { den };
        for num in 1..=top {
            let r = Ratio { num, den };
            if r.code_len() > budget {
                break;
            }
            if r.is_reduced() {
                out.push(r);
            }
        }
        den += 1;
    }
    out
}

/// All distribution descriptions in the restricted grammar with code
/// length below `alpha_max` that give `x` positive mass, ordered by code.
pub fn enumerate_dists(x: &BitString, alpha_max: u32, opts: &DistOptions) -> Result<Vec<DistDescription>> {
    if opts.table_cap > 1 {
        return Err(Error::InvalidModel("tables with more than one entry are not enumerated".into()));
    }
    let mut out: Vec<DistDescription> = enumerate_models(x, alpha_max.saturating_sub(2), &opts.sets)?
        .into_iter()
        .map(DistDescription::UniformOn)
        .collect();
    let Some(budget) = (alpha_max as usize).checked_sub(1) else {
        return Ok(out);
    };
    let n = x.len() as u64;
    let head = 2 + nat_code_len(n);
    if head <= budget {
        out.extend(fractions(budget - head, true).into_iter().map(|p| DistDescription::Bernoulli { n, p }));
    }
    let head = 2 + nat_code_len(1) + std_code_len(x.len());
    if opts.table_cap == 1 && head <= budget {
        out.extend(fractions(budget - head, false).into_iter().map(|m| DistDescription::Table(vec![(x.clone(), m)])));
    }
    let mut keyed: Vec<(BitString, DistDescription)> = out.into_iter().map(|d| (d.encode(), d)).collect();
    keyed.sort_by(|a, b| a.0.cmp(&b.0));
    Ok(keyed.into_iter().map(|(_, d)| d).collect())
}

/// `len(P) + ⌈−log2 P(x)⌉`.
pub fn two_part_p(x: &BitString, dist: &DistDescription) -> Result<u64> {
    let mass = dist.mass(x);
    if !mass.is_positive() {
        return Err(Error::NotMember(format!("{x} has zero mass under {dist}")));
    }
    Ok(dist.len() as u64 + ceil_neglog(&mass))
}

#[derive(Debug, Clone, PartialEq)]
pub struct DistDeficiency {
    pub x: BitString,
    pub dist: DistDescription,
    pub mass: BigRational,
    pub neglog: f64,
    /// `K(x | P)`.
    pub k_cond: u32,
    /// `−log2 P(x) − K(x | P)`.
    pub raw: f64,
    /// `raw(x) − min_y raw(y)` over the support.
    pub norm: f64,
    /// Support element attaining the minimum.
    pub argmin: BitString,
    /// `mass(argmin) · 2^{K(argmin | P)}`, used for exact typicality tests.
    min_weight: BigRational,
}

fn pow2(k: u64) -> BigRational {
    BigRational::from_integer(BigInt::one() << k)
}

impl DistDeficiency {
    /// `norm <= beta`, decided on exact rationals.
    pub fn typical(&self, beta: u64) -> bool {
        // raw(x) − raw(y) <= beta  ⇔  P(y) 2^{K(y)} <= P(x) 2^{K(x) + beta}
        self.min_weight <= &self.mass * pow2(self.k_cond as u64 + beta)
    }
}

/// Deficiency of `x` under a distribution. Support elements are scanned in
/// full, so `cap` bounds the support size.
pub fn deficiency_p(oracle: &Oracle, x: &BitString, dist: &DistDescription, cap: u64) -> Result<DistDeficiency> {
    let mass = dist.mass(x);
    if !mass.is_positive() {
        return Err(Error::NotMember(format!("{x} has zero mass under {dist}")));
    }
    let cond = dist.condition(cap)?;
    let support = dist.support(cap)?;
    let budgets = oracle.budgets();
    let weights: Vec<(BigRational, usize)> = support
        .par_iter()
        .enumerate()
        .map(|(i, (y, m))| {
            let k = shortest_program(y, &cond, budgets)?
                .ok_or_else(|| Error::Absent { x: y.to_string(), cap: budgets.max_output as u32 })?
                .k;
            Ok((m * pow2(k as u64), i))
        })
        .collect::<Result<_>>()?;
    // Largest weight is the smallest raw deficiency; ties go to the first.
    let (min_weight, at) = weights
        .into_iter()
        .reduce(|a, b| if b.0 > a.0 { b } else { a })
        .expect("nonempty support");
    let argmin = support[at].0.clone();
    let k_cond = oracle.k_given(x, &cond)?;
    let neglog = neglog_of(&mass);
    let raw = neglog - k_cond as f64;
    let min_raw = neglog_of(&support[at].1) - oracle.k_given(&argmin, &cond)? as f64;
    Ok(DistDeficiency { x: x.clone(), dist: dist.clone(), mass, neglog, k_cond, raw, norm: raw - min_raw, argmin, min_weight })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DistClass {
    #[default]
    Any,
    BernoulliOnly,
    UniformOnly,
}

impl DistClass {
    pub fn contains(&self, d: &DistDescription) -> bool {
        match self {
            DistClass::Any => true,
            DistClass::BernoulliOnly => matches!(d, DistDescription::Bernoulli { .. }),
            DistClass::UniformOnly => matches!(d, DistDescription::UniformOn(_)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SuffStatP {
    pub lambda_min: u64,
    pub class_lambda_min: Option<u64>,
    pub optimal: Vec<DistDescription>,
    pub minimal: Option<DistDescription>,
}

impl SuffStatP {
    pub fn found(&self) -> bool {
        self.minimal.is_some()
    }
}

pub fn suffstat_p(x: &BitString, beta: u64, alpha_max: u32, class: DistClass, opts: &DistOptions) -> Result<SuffStatP> {
    let dists = enumerate_dists(x, alpha_max, opts)?;
    let totals: Vec<u64> = dists.iter().map(|d| two_part_p(x, d)).collect::<Result<_>>()?;
    let lambda_min = *totals
        .iter()
        .min()
        .ok_or_else(|| Error::InvalidModel(format!("no distribution for {x} shorter than {alpha_max} bits")))?;
    let class_lambda_min = dists.iter().zip(&totals).filter(|(d, _)| class.contains(d)).map(|(_, t)| *t).min();
    let optimal: Vec<DistDescription> = dists
        .iter()
        .zip(&totals)
        .filter(|(d, t)| class.contains(d) && **t <= lambda_min + beta)
        .map(|(d, _)| d.clone())
        .collect();
    let minimal = optimal.first().cloned();
    Ok(SuffStatP { lambda_min, class_lambda_min, optimal, minimal })
}

/// Whether some distribution of at most `alpha` bits has
/// `K(x) >= −log2 P(x) − beta`, compared exactly as `P(x) 2^{K(x)+beta} >= 1`.
pub fn quasistochastic(src: &impl KSource, x: &BitString, alpha: u32, beta: u64, opts: &DistOptions) -> Result<bool> {
    let kx = src.k(x).ok_or_else(|| Error::Absent { x: x.to_string(), cap: src.cap() })? as u64;
    let dists = enumerate_dists(x, alpha + 1, opts)?;
    Ok(dists.iter().any(|d| d.mass(x) * pow2(kx + beta) >= BigRational::one()))
}

/// The uniform distribution on `S^k`.
pub fn pk(table: &ComplexityTable, k: u32) -> Result<DistDescription> {
    let s = sk(table, k)?;
    if s.members.is_empty() {
        return Err(Error::InvalidModel(format!("S^{k} is empty")));
    }
    Ok(DistDescription::UniformOn(SetDescription::list_of(s.members.into_iter().map(|(x, _)| x).collect())))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BernoulliRow {
    pub x: BitString,
    pub weight: u64,
    pub k: u32,
    /// Two-part length with the Hamming set of the string's weight.
    pub hamming_total: u64,
    /// Two-part length with `Bernoulli(n, w/n)`, absent at weight 0 or n.
    pub bernoulli_total: Option<u64>,
    /// Least two-part length over all set models.
    pub lambda_min: u64,
    /// `hamming_total > K(x) + beta`: no sufficient statistic in the class.
    pub flagged: bool,
}

pub fn bernoulli_demo(src: &impl KSource, n: usize, beta: u64, alpha_max: u32, opts: &ModelOptions) -> Result<Vec<BernoulliRow>> {
    if !n.is_multiple_of(2) || n > 12 {
        return Err(Error::InvalidModel(format!("demo length {n} must be even and at most 12")));
    }
    BitString::all_of_len(n)
        .map(|x| {
            let k = src.k(&x).ok_or_else(|| Error::Absent { x: x.to_string(), cap: src.cap() })?;
            let weight = x.weight() as u64;
            let hamming_total = two_part(&SetDescription::Hamming { n: n as u64, s: weight });
            let bernoulli_total = (weight > 0 && weight < n as u64)
                .then(|| two_part_p(&x, &DistDescription::Bernoulli { n: n as u64, p: Ratio::new(weight, n as u64)? }))
                .transpose()?;
            let lambda_min = enumerate_models(&x, alpha_max, opts)?.iter().map(two_part).min().unwrap_or(u64::MAX);
            let flagged = hamming_total > k as u64 + beta;
            Ok(BernoulliRow { x, weight, k, hamming_total, bernoulli_total, lambda_min, flagged })
        })
        .collect()
}

/// `⌈log2⌉` of a support size, for reports.
pub fn support_log(d: &DistDescription) -> u64 {
    crate::models_set::desc::ceil_log2(&d.support_size())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bits::bs;
    use crate::enumerate::build_table;
    use crate::machine::{Budgets, Condition};
    use crate::models_set::SetAnalyzer;
    use std::collections::BTreeSet;

    const CAP: u64 = 1 << 16;

    fn d(s: &str) -> DistDescription {
        s.parse().unwrap()
    }

    #[test]
    fn uniform_matches_set_deficiency() {
        let o = Oracle::new(Budgets::default());
        let a = SetAnalyzer::new(&o, ModelOptions::default());
        for (x, set) in [("01100111", "all:8"), ("0110", "ham:4,2"), ("11", "list{0,11,101}"), ("000", "cyl:0/3")] {
            let x = bs(x);
            let s: SetDescription = set.parse().unwrap();
            let by_set = a.deficiency(&x, &s).unwrap();
            let by_dist = deficiency_p(&o, &x, &DistDescription::UniformOn(s), CAP).unwrap();
            assert_eq!(by_dist.k_cond, by_set.k_cond_set);
            assert!((by_dist.norm - by_set.delta_norm as f64).abs() < 1e-9, "{x} in {set}");
        }
    }

    #[test]
    fn bernoulli_typicality() {
        let o = Oracle::new(Budgets::default());
        let dist = d("bern:8,1/4");
        let zeros = deficiency_p(&o, &bs("00000000"), &dist, CAP).unwrap();
        // The SFDECODE path: 4 + ⌈3.32⌉ + 3.
        assert_eq!(zeros.k_cond, 11);
        assert!(zeros.typical(1));
        let ones = deficiency_p(&o, &bs("11111111"), &dist, CAP).unwrap();
        assert_eq!(ones.k_cond, 15);
        assert!(ones.norm > 8.0 && !ones.typical(8));
        let single = deficiency_p(&o, &bs("0110"), &d("table{0110:1/1}"), CAP).unwrap();
        assert_eq!((single.neglog, single.norm), (0.0, 0.0));
    }

    #[test]
    fn sfdecode_ceiling() {
        let o = Oracle::new(Budgets::default());
        for dist in ["bern:6,1/3", "table{0:1/2,01:1/8,111:1/5}", "unif(ham:6,2)"] {
            let dist = d(dist);
            let cond = dist.condition(CAP).unwrap();
            for (y, m) in dist.support(CAP).unwrap() {
                assert!(o.k_given(&y, &cond).unwrap() as u64 <= 7 + ceil_neglog(&m), "{y} under {dist}");
            }
        }
    }

    #[test]
    fn enumeration_matches_blind() {
        let opts = DistOptions::default();
        for (x, alpha) in [("", 16), ("1", 16), ("01", 15)] {
            let x = bs(x);
            let got: Vec<BitString> = enumerate_dists(&x, alpha, &opts).unwrap().iter().map(|d| d.encode()).collect();
            assert!(got.windows(2).all(|w| w[0] < w[1]));
            let blind: BTreeSet<BitString> = BitString::all_up_to(alpha as usize - 1)
                .filter_map(|c| DistDescription::decode(&c).ok().map(|d| (c, d)))
                .filter(|(_, d)| opts.admits(d) && d.mass(&x).is_positive())
                .map(|(c, _)| c)
                .collect();
            assert_eq!(got.into_iter().collect::<BTreeSet<_>>(), blind, "{x}");
        }
    }

    #[test]
    fn two_part_and_suffstat() {
        let x = bs("01100111");
        let set_total = two_part(&SetDescription::All(8));
        assert_eq!(two_part_p(&x, &d("unif(all:8)")).unwrap(), set_total + 2);
        let s = suffstat_p(&x, 0, 24, DistClass::Any, &DistOptions::default()).unwrap();
        assert_eq!(s.lambda_min, 19);
        assert_eq!(s.minimal, Some(d("unif(all:8)")));
        let b = suffstat_p(&bs("01010101"), 0, 24, DistClass::BernoulliOnly, &DistOptions::default()).unwrap();
        assert!(!b.found());
        assert_eq!(b.class_lambda_min, Some(23));
        let all = suffstat_p(&x, 1000, 20, DistClass::Any, &DistOptions::default()).unwrap();
        assert_eq!(all.optimal.len(), enumerate_dists(&x, 20, &DistOptions::default()).unwrap().len());
    }

    #[test]
    fn uniform_on_levels() {
        let t = build_table(9, &Condition::None, &Budgets::default()).unwrap();
        let p5 = pk(&t, 5).unwrap();
        for x in ["", "0", "1"] {
            assert_eq!(p5.mass(&bs(x)), BigRational::new(1.into(), 3.into()));
            assert!((p5.neglog(&bs(x)) - 3f64.log2()).abs() < 1e-9);
        }
        assert!(pk(&t, 2).is_err());
    }

    #[test]
    fn stochastic_implies_quasistochastic() {
        let t = build_table(21, &Condition::None, &Budgets::default()).unwrap();
        let x = bs("01100111");
        let sets = ModelOptions::default();
        assert!(crate::models_set::stochastic(&t, &x, 9, 0, &sets).unwrap());
        assert!(quasistochastic(&t, &x, 11, 0, &DistOptions::default()).unwrap());
    }

    #[test]
    fn demo_flags() {
        let t = build_table(23, &Condition::None, &Budgets::default()).unwrap();
        let rows = bernoulli_demo(&t, 8, 3, 20, &ModelOptions::default()).unwrap();
        let regular = rows.iter().find(|r| r.x == bs("01010101")).unwrap();
        assert_eq!((regular.k, regular.hamming_total), (15, 22));
        assert!(regular.flagged);
        let worst = rows.iter().filter(|r| r.weight == 4).max_by_key(|r| r.k).unwrap();
        assert!(!worst.flagged);
        let tiny = bernoulli_demo(&t, 2, 3, 20, &ModelOptions::default()).unwrap();
        assert_eq!(tiny.len(), 4);
    }
}
