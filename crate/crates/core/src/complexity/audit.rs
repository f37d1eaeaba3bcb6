//! Measured-constant audits of additivity and the directed triangle
//! inequality over all strings up to a length cap.

use rayon::prelude::*;

use super::{pair, Oracle};
use crate::bits::BitString;
use crate::error::Result;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SoiReport {
    pub len_cap: usize,
    /// `max |K(⟨x,y⟩) − K(x) − K(y | x*)|`.
    pub max_slack: i64,
    pub argmax: (BitString, BitString),
    /// Least `c >= 0` with `K(x|y*) <= K(z|y*) + K(x|z*) + c` on every triple.
    pub triangle_c: i64,
    pub triangle_argmax: (BitString, BitString, BitString),
}

/// `K(a | b*)` for every pair of strings up to the cap, row `a`, column `b`.
fn star_matrix(oracle: &Oracle, strings: &[BitString]) -> Result<Vec<Vec<u32>>> {
    strings
        .par_iter()
        .map(|a| strings.iter().map(|b| oracle.k_given_star(a, b)).collect::<Result<Vec<_>>>())
        .collect()
}

pub fn soi_audit(oracle: &Oracle, len_cap: usize) -> Result<SoiReport> {
    let strings: Vec<BitString> = BitString::all_up_to(len_cap).collect();
    let k: Vec<u32> = strings.iter().map(|x| oracle.k_given(x, &Default::default())).collect::<Result<_>>()?;
    let given_star = star_matrix(oracle, &strings)?;

    let pair_k: Vec<Vec<u32>> = strings
        .par_iter()
        .map(|x| strings.iter().map(|y| oracle.k_given(&pair(x, y), &Default::default())).collect())
        .collect::<Result<_>>()?;

    let mut max_slack = -1i64;
    let mut argmax = (BitString::new(), BitString::new());
    for (ix, x) in strings.iter().enumerate() {
        for (iy, y) in strings.iter().enumerate() {
            // K(y | x*) is row y, column x.
            let slack = (pair_k[ix][iy] as i64 - k[ix] as i64 - given_star[iy][ix] as i64).abs();
            if slack > max_slack {
                max_slack = slack;
                argmax = (x.clone(), y.clone());
            }
        }
    }

    let n = strings.len();
    let mut triangle_c = 0i64;
    let mut triangle_argmax = (strings[0].clone(), strings[0].clone(), strings[0].clone());
    for xi in 0..n {
        for yi in 0..n {
            for zi in 0..n {
                let deficit = given_star[xi][yi] as i64 - given_star[zi][yi] as i64 - given_star[xi][zi] as i64;
                if deficit > triangle_c {
                    triangle_c = deficit;
                    triangle_argmax = (strings[xi].clone(), strings[yi].clone(), strings[zi].clone());
                }
            }
        }
    }
    Ok(SoiReport { len_cap, max_slack, argmax, triangle_c, triangle_argmax })
}

/// Range of `I(x:x) − (K(x) − K(x | x*))` over all strings up to the cap.
pub fn self_information_gap(oracle: &Oracle, len_cap: usize) -> Result<(i64, i64)> {
    let mut lo = i64::MAX;
    let mut hi = i64::MIN;
    for x in BitString::all_up_to(len_cap) {
        let kx = oracle.k_given(&x, &Default::default())? as i64;
        let kxx = oracle.k_given(&pair(&x, &x), &Default::default())? as i64;
        let info = 2 * kx - kxx;
        let gap = info - (kx - oracle.k_given_star(&x, &x)? as i64);
        lo = lo.min(gap);
        hi = hi.max(gap);
    }
    Ok((lo, hi))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::machine::Budgets;

    #[test]
    fn empty_string_only() {
        let o = Oracle::new(Budgets::default());
        let r = soi_audit(&o, 0).unwrap();
        // |K(⟨ε,ε⟩) − K(ε) − K(ε | "100")| = |5 − 3 − 3|
        assert_eq!(r.max_slack, 1);
        assert!(r.triangle_c >= 0);
    }
}
