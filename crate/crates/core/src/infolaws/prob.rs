//! Classical entropies and mutual information of joint models, and the
//! probabilistic sufficiency check over a sweep of priors.

use std::collections::BTreeMap;

use num_rational::BigRational;
use num_traits::Zero;

use crate::bits::BitString;
use crate::error::Result;
use crate::models_prob::{neglog_of, Ratio};

use super::joint::{JointModel, Statistic};

/// Agreement tolerance for real-valued information quantities.
pub const TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MiReport {
    pub h_theta: f64,
    pub h_x: f64,
    pub h_joint: f64,
    pub mi: f64,
}

fn entropy<'a>(masses: impl Iterator<Item = &'a BigRational>) -> f64 {
    masses.filter(|p| !p.is_zero()).map(|p| crate::models_prob::dist::ratio_f64(p) * neglog_of(p)).sum()
}

/// Information between the parameter and a function of the data, from a
/// table of `(θ, t) -> p` cells.
fn mi_of_cells(cells: &BTreeMap<(usize, BitString), BigRational>) -> MiReport {
    let mut p_theta: BTreeMap<usize, BigRational> = BTreeMap::new();
    let mut p_t: BTreeMap<&BitString, BigRational> = BTreeMap::new();
    for ((theta, t), p) in cells {
        *p_theta.entry(*theta).or_insert_with(BigRational::zero) += p;
        *p_t.entry(t).or_insert_with(BigRational::zero) += p;
    }
    // Σ p log2(p / (p1 p2)) term by term on exact ratios.
    let mi = cells
        .iter()
        .filter(|(_, p)| !p.is_zero())
        .map(|((theta, t), p)| {
            let ratio = &p_theta[theta] * &p_t[t] / p;
            crate::models_prob::dist::ratio_f64(p) * neglog_of(&ratio)
        })
        .sum();
    MiReport { h_theta: entropy(p_theta.values()), h_x: entropy(p_t.values()), h_joint: entropy(cells.values()), mi }
}

fn cells_under(joint: &JointModel, stat: &Statistic, cap: u64) -> Result<BTreeMap<(usize, BitString), BigRational>> {
    let mut out = BTreeMap::new();
    for c in joint.cells(cap)? {
        *out.entry((c.theta, stat.apply(&c.x)?)).or_insert_with(BigRational::zero) += c.p;
    }
    Ok(out)
}

/// `I(Θ; X)` with the entropies behind it.
pub fn prob_mi(joint: &JointModel, cap: u64) -> Result<MiReport> {
    Ok(mi_of_cells(&cells_under(joint, &Statistic::Identity, cap)?))
}

/// `I(Θ; T(X))`.
pub fn prob_mi_of(joint: &JointModel, stat: &Statistic, cap: u64) -> Result<MiReport> {
    Ok(mi_of_cells(&cells_under(joint, stat, cap)?))
}

/// The given prior followed by nine grid priors `w_j ∝ i^j (10 − i)^{m−1−j}`
/// for `i = 1..=9`.
pub fn prior_sweep(given: &[Ratio]) -> Vec<Vec<Ratio>> {
    let m = given.len() as u32;
    let mut out = vec![given.to_vec()];
    for i in 1..=9u64 {
        let w: Vec<u64> = (0..m).map(|j| i.pow(j) * (10 - i).pow(m - 1 - j)).collect();
        let total: u64 = w.iter().sum();
        out.push(w.iter().map(|&v| Ratio::new(v, total).expect("positive total")).collect());
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct SufficiencyRow {
    pub prior: Vec<Ratio>,
    pub mi_data: f64,
    pub mi_stat: f64,
    pub sufficient: bool,
}

/// `I(Θ; X) = I(Θ; T(X))` within [`TOLERANCE`] for each prior of the sweep.
pub fn prob_suff_check(joint: &JointModel, stat: &Statistic, priors: &[Vec<Ratio>], cap: u64) -> Result<Vec<SufficiencyRow>> {
    priors
        .iter()
        .map(|prior| {
            let j = joint.with_prior(prior)?;
            let mi_data = prob_mi(&j, cap)?.mi;
            let mi_stat = prob_mi_of(&j, stat, cap)?.mi;
            Ok(SufficiencyRow { prior: prior.clone(), mi_data, mi_stat, sufficient: (mi_data - mi_stat).abs() <= TOLERANCE })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::infolaws::joint::JointFile;

    fn joint(text: &str) -> JointModel {
        text.parse::<JointFile>().unwrap().joint
    }

    const CAP: u64 = 1 << 12;

    #[test]
    fn independent_and_copied() {
        let ind = joint("theta 0 1/2\ntheta 1 1/2\ndist 0 bern:2,1/3\ndist 1 bern:2,1/3\n");
        assert!(prob_mi(&ind, CAP).unwrap().mi.abs() < TOLERANCE);
        let copy = joint("theta 0 1/2\ntheta 1 1/2\ndist 0 table{0:1/1}\ndist 1 table{1:1/1}\n");
        let r = prob_mi(&copy, CAP).unwrap();
        assert!((r.mi - 1.0).abs() < TOLERANCE);
        assert!((r.h_theta - 1.0).abs() < TOLERANCE && (r.h_joint - 1.0).abs() < TOLERANCE);
    }

    #[test]
    fn bernoulli_pair_closed_form() {
        let j = joint("theta 0 1/2\ntheta 1 1/2\ndist 0 bern:2,1/4\ndist 1 bern:2,3/4\n");
        // H(X) − H(X | Θ): X is uniform-mixed over weights, each θ gives
        // masses 9/16, 3/16, 3/16, 1/16.
        let h = |ps: &[f64]| -ps.iter().map(|p| p * p.log2()).sum::<f64>();
        let cond = h(&[9.0 / 16.0, 3.0 / 16.0, 3.0 / 16.0, 1.0 / 16.0]);
        let mix = h(&[5.0 / 16.0, 3.0 / 16.0, 3.0 / 16.0, 5.0 / 16.0]);
        assert!((prob_mi(&j, CAP).unwrap().mi - (mix - cond)).abs() < TOLERANCE);
    }

    #[test]
    fn sufficiency_sweep() {
        let j = joint("theta 0 1/2\ntheta 1 1/2\ndist 0 bern:2,1/4\ndist 1 bern:2,3/4\n");
        let sweep = prior_sweep(&j.prior());
        assert_eq!(sweep.len(), 10);
        assert!(prob_suff_check(&j, &Statistic::Identity, &sweep, CAP).unwrap().iter().all(|r| r.sufficient));
        assert!(prob_suff_check(&j, &Statistic::Weight, &sweep, CAP).unwrap().iter().all(|r| r.sufficient));
        assert!(prob_suff_check(&j, &Statistic::Constant, &sweep, CAP).unwrap().iter().all(|r| !r.sufficient));
        for r in prob_suff_check(&j, &"map{00:0,01:0,10:1,11:1}".parse().unwrap(), &sweep, CAP).unwrap() {
            assert!(r.mi_stat <= r.mi_data + TOLERANCE);
        }
    }
}
