//! Algorithmic information audits: expected mutual information against the
//! classical one, non-increase under processing, and θ-sufficiency.

use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use rayon::prelude::*;

use crate::bits::BitString;
use crate::complexity::{mutual_info, KSource, Oracle};
use crate::error::{Error, Result};
use crate::machine::{assemble, run, Condition, Opcode};
use crate::models_prob::dist::ratio_f64;

use super::joint::{JointModel, Statistic};
use super::prob::{prior_sweep, prob_mi, prob_suff_check, SufficiencyRow};

fn info(src: &impl KSource, x: &BitString, y: &BitString) -> Result<i64> {
    Ok(mutual_info(src, x, y)?.info)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExpectedMiReport {
    /// `Σ p(θ, x) I(θ : x)`.
    pub expected: f64,
    /// `I(Θ; X)`.
    pub classical: f64,
    /// `expected − classical`.
    pub slack: f64,
    /// Code length of the joint, standing in for its complexity.
    pub model_len: usize,
}

impl ExpectedMiReport {
    /// `I − K(p) <= E <= I + 2 K(p)`.
    pub fn within_model_bounds(&self) -> bool {
        let k = self.model_len as f64;
        self.expected >= self.classical - k && self.expected <= self.classical + 2.0 * k
    }
}

pub fn expected_mi_audit(joint: &JointModel, src: &(impl KSource + Sync), cap: u64) -> Result<ExpectedMiReport> {
    let cells = joint.cells(cap)?;
    let terms: Vec<BigRational> = cells
        .par_iter()
        .map(|c| Ok(&c.p * BigRational::from_integer(info(src, &joint.thetas[c.theta].label, &c.x)?.into())))
        .collect::<Result<_>>()?;
    let expected = ratio_f64(&terms.into_iter().fold(BigRational::zero(), |a, b| a + b));
    let classical = prob_mi(joint, cap)?.mi;
    Ok(ExpectedMiReport { expected, classical, slack: expected - classical, model_len: joint.encoding_len() })
}

/// Data transforms realized as programs that read their input from a
/// `Str` condition.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Transform {
    /// Outputs the empty string.
    Constant,
    Copy,
    DropLast,
}

impl Transform {
    pub const ALL: [Transform; 3] = [Transform::Constant, Transform::Copy, Transform::DropLast];

    pub fn name(&self) -> &'static str {
        match self {
            Transform::Constant => "constant",
            Transform::Copy => "copy",
            Transform::DropLast => "drop-last",
        }
    }

    /// The program for inputs of length `len`: COPYIN blocks for the bits to
    /// keep, largest block first, then HALT.
    pub fn program(&self, len: usize) -> BitString {
        let keep = match self {
            Transform::Constant => 0,
            Transform::Copy => len,
            Transform::DropLast => len.saturating_sub(1),
        };
        let mut ops = Vec::new();
        let mut left = keep;
        for cc in (0..4u8).rev() {
            let block = Opcode::CopyIn(cc).copy_len();
            while left >= block {
                ops.push(Opcode::CopyIn(cc));
                left -= block;
            }
        }
        ops.push(Opcode::Halt);
        assemble(&ops)
    }

    /// Runs the transform program on `x`.
    pub fn apply(&self, x: &BitString) -> Result<(BitString, usize)> {
        let program = self.program(x.len());
        let out = run(program.bits(), &Condition::Str(x.clone()), &Default::default());
        let y = out.output().cloned().ok_or_else(|| Error::Budget(format!("{} on {x}: {out:?}", self.name())))?;
        Ok((y, program.len()))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NonincreaseRow {
    pub transform: Transform,
    /// `max I(q(x) : y) − I(x : y) − l(q)` over the sweep.
    pub max_deficit: i64,
    pub argmax: (BitString, BitString),
}

/// Sweeps every pair `(x, y)` of strings up to `len_cap` bits.
pub fn nonincrease_audit(src: &(impl KSource + Sync), transforms: &[Transform], len_cap: usize) -> Result<Vec<NonincreaseRow>> {
    let strings: Vec<BitString> = BitString::all_up_to(len_cap).collect();
    transforms
        .iter()
        .map(|&t| {
            let best = strings
                .par_iter()
                .map(|x| {
                    let (qx, qlen) = t.apply(x)?;
                    let mut best: Option<(i64, BitString, BitString)> = None;
                    for y in &strings {
                        let d = info(src, &qx, y)? - info(src, x, y)? - qlen as i64;
                        if best.as_ref().is_none_or(|b| d > b.0) {
                            best = Some((d, x.clone(), y.clone()));
                        }
                    }
                    Ok(best.expect("nonempty sweep"))
                })
                .collect::<Result<Vec<_>>>()?
                .into_iter()
                .reduce(|a, b| if b.0 > a.0 { b } else { a })
                .expect("nonempty sweep");
            Ok(NonincreaseRow { transform: t, max_deficit: best.0, argmax: (best.1, best.2) })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct ThetaRow {
    pub theta: BitString,
    pub x: BitString,
    pub p: BigRational,
    /// `I(θ : x) − I(θ : S(x))`.
    pub deficiency: i64,
    /// `[K(x | θ*) + d] − [K(S(x) | θ*) + ⌈log2 |S^{-1}(S(x))|⌉]`.
    pub claim_gap: i64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ThetaReport {
    pub rows: Vec<ThetaRow>,
    pub threshold: i64,
    /// Total mass of cells with `d <= threshold`.
    pub mass_within: f64,
    pub expected_deficiency: f64,
    pub max_abs_claim_gap: i64,
    pub sufficiency: Vec<SufficiencyRow>,
}

impl ThetaReport {
    pub fn probabilistically_sufficient(&self) -> bool {
        self.sufficiency.iter().all(|r| r.sufficient)
    }
}

pub fn theta_suff_audit(joint: &JointModel, stat: &Statistic, oracle: &Oracle, threshold: i64, cap: u64) -> Result<ThetaReport> {
    let cells = joint.cells(cap)?;
    let mut domain: Vec<BitString> = cells.iter().map(|c| c.x.clone()).collect();
    domain.sort();
    domain.dedup();
    let images: Vec<BitString> = domain.iter().map(|x| stat.apply(x)).collect::<Result<_>>()?;
    let preimage_log = |t: &BitString| -> i64 {
        let n = images.iter().filter(|s| *s == t).count() as u64;
        (u64::BITS - (n - 1).leading_zeros()) as i64
    };
    let rows: Vec<ThetaRow> = cells
        .par_iter()
        .map(|c| {
            let theta = &joint.thetas[c.theta].label;
            let s = stat.apply(&c.x)?;
            let deficiency = info(oracle, theta, &c.x)? - info(oracle, theta, &s)?;
            let kx = oracle.k_given_star(&c.x, theta)? as i64;
            let ks = oracle.k_given_star(&s, theta)? as i64;
            let claim_gap = kx + deficiency - (ks + preimage_log(&s));
            Ok(ThetaRow { theta: theta.clone(), x: c.x.clone(), p: c.p.clone(), deficiency, claim_gap })
        })
        .collect::<Result<_>>()?;
    let mass = |pred: &dyn Fn(&ThetaRow) -> bool| -> BigRational {
        rows.iter().filter(|r| pred(r)).fold(BigRational::zero(), |a, r| a + &r.p)
    };
    let mass_within = ratio_f64(&mass(&|r| r.deficiency <= threshold));
    let expected = rows.iter().fold(BigRational::zero(), |a, r| a + &r.p * BigRational::from_integer(r.deficiency.into()));
    let max_abs_claim_gap = rows.iter().map(|r| r.claim_gap.abs()).max().unwrap_or(0);
    let sufficiency = prob_suff_check(joint, stat, &prior_sweep(&joint.prior()), cap)?;
    Ok(ThetaReport {
        rows,
        threshold,
        mass_within,
        expected_deficiency: expected.to_f64().unwrap_or(f64::NAN),
        max_abs_claim_gap,
        sufficiency,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bits::bs;
    use crate::infolaws::joint::JointFile;
    use crate::machine::Budgets;

    const CAP: u64 = 1 << 12;
    const BERNOULLI: &str = "theta 0 1/2\ntheta 1 1/2\ndist 0 bern:2,1/4\ndist 1 bern:2,3/4\n";

    fn joint(text: &str) -> JointModel {
        text.parse::<JointFile>().unwrap().joint
    }

    #[test]
    fn transform_programs() {
        for len in 0..=12 {
            let x = BitString::all_of_len(len).last().unwrap();
            assert_eq!(Transform::Copy.apply(&x).unwrap().0, x);
            assert_eq!(Transform::DropLast.apply(&x).unwrap().0, x.slice(0, len.saturating_sub(1)));
            assert_eq!(Transform::Constant.apply(&x).unwrap(), (bs(""), 3));
        }
        // 4 + 2 + 1 bits: three COPYIN ops and HALT.
        assert_eq!(Transform::Copy.program(7).len(), 18);
    }

    #[test]
    fn nonincrease_small() {
        let o = Oracle::new(Budgets::default());
        let rows = nonincrease_audit(&o, &Transform::ALL, 3).unwrap();
        // Copying is the identity, so the deficit is exactly −l(q), largest at x = ε.
        assert_eq!(rows[1].max_deficit, -3);
        for r in &rows {
            let (x, y) = &r.argmax;
            let (qx, qlen) = r.transform.apply(x).unwrap();
            assert_eq!(r.max_deficit, info(&o, &qx, y).unwrap() - info(&o, x, y).unwrap() - qlen as i64);
        }
    }

    #[test]
    fn expected_mi_cases() {
        let o = Oracle::new(Budgets::default());
        let single = expected_mi_audit(&joint("theta 0 1/1\ndist 0 table{1:1/1}\n"), &o, CAP).unwrap();
        assert_eq!(single.classical, 0.0);
        let copy = expected_mi_audit(&joint("theta 0 1/2\ntheta 1 1/2\ndist 0 table{0:1/1}\ndist 1 table{1:1/1}\n"), &o, CAP).unwrap();
        assert!((copy.classical - 1.0).abs() < 1e-9);
        assert!(copy.within_model_bounds() && single.within_model_bounds());
    }

    #[test]
    fn theta_identity_and_weight() {
        let o = Oracle::new(Budgets::default());
        let j = joint(BERNOULLI);
        let id = theta_suff_audit(&j, &Statistic::Identity, &o, 0, CAP).unwrap();
        assert!(id.rows.iter().all(|r| r.deficiency == 0));
        assert_eq!(id.mass_within, 1.0);
        assert!(id.probabilistically_sufficient());
        let w = theta_suff_audit(&j, &Statistic::Weight, &o, 0, CAP).unwrap();
        assert!(w.probabilistically_sufficient());
        let c = theta_suff_audit(&j, &Statistic::Constant, &o, 0, CAP).unwrap();
        assert!(!c.probabilistically_sufficient());
    }
}
