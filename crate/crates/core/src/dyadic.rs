//! Exact dyadic rationals `num / 2^exp`, kept in lowest terms.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, AddAssign};
use std::str::FromStr;

use crate::error::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct Dyadic {
    num: u128,
    exp: u32,
}

impl Dyadic {
    pub const ZERO: Dyadic = Dyadic { num: 0, exp: 0 };
    pub const ONE: Dyadic = Dyadic { num: 1, exp: 0 };

    pub fn new(num: u128, exp: u32) -> Self {
        Dyadic { num, exp }.normalized()
    }

    /// `2^-k`.
    pub fn pow2_neg(k: u32) -> Self {
        Dyadic { num: 1, exp: k }
    }

    pub fn numerator(&self) -> u128 {
        self.num
    }

    pub fn exponent(&self) -> u32 {
        self.exp
    }

    fn normalized(mut self) -> Self {
        if self.num == 0 {
            self.exp = 0;
        }
        while self.exp > 0 && self.num & 1 == 0 {
            self.num >>= 1;
            self.exp -= 1;
        }
        self
    }

    fn aligned(self, exp: u32) -> u128 {
        let shift = exp - self.exp;
        self.num.checked_shl(shift).filter(|v| v >> shift == self.num).expect("dyadic overflow")
    }

    pub fn mul_pow2(self, k: i32) -> Self {
        if k >= 0 {
            let shift = k as u32;
            if shift <= self.exp {
                Dyadic { num: self.num, exp: self.exp - shift }
            } else {
                Dyadic { num: self.num << (shift - self.exp), exp: 0 }
            }
        } else {
            Dyadic { num: self.num, exp: self.exp + (-k) as u32 }
        }
        .normalized()
    }

    /// Multiplication by a natural number.
    pub fn times(self, n: u64) -> Self {
        Dyadic { num: self.num.checked_mul(n as u128).expect("dyadic overflow"), exp: self.exp }.normalized()
    }

    pub fn to_f64(&self) -> f64 {
        self.num as f64 / 2f64.powi(self.exp as i32)
    }
}

impl Add for Dyadic {
    type Output = Dyadic;

    fn add(self, rhs: Dyadic) -> Dyadic {
        let exp = self.exp.max(rhs.exp);
        Dyadic { num: self.aligned(exp) + rhs.aligned(exp), exp }.normalized()
    }
}

impl AddAssign for Dyadic {
    fn add_assign(&mut self, rhs: Dyadic) {
        *self = *self + rhs;
    }
}

impl std::iter::Sum for Dyadic {
    fn sum<I: Iterator<Item = Dyadic>>(iter: I) -> Self {
        iter.fold(Dyadic::ZERO, |a, b| a + b)
    }
}

impl Ord for Dyadic {
    fn cmp(&self, other: &Self) -> Ordering {
        let exp = self.exp.max(other.exp);
        self.aligned(exp).cmp(&other.aligned(exp))
    }
}

impl PartialOrd for Dyadic {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Dyadic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/2^{}", self.num, self.exp)
    }
}

impl FromStr for Dyadic {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        let bad = || Error::Format(format!("bad dyadic {s:?}"));
        let (n, e) = s.split_once("/2^").ok_or_else(bad)?;
        let d = Dyadic { num: n.parse().map_err(|_| bad())?, exp: e.parse().map_err(|_| bad())? };
        if d.normalized() != d {
            return Err(bad());
        }
        Ok(d)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sums_reduce() {
        let s = Dyadic::pow2_neg(3) + Dyadic::pow2_neg(5) + Dyadic::pow2_neg(5);
        assert_eq!(s, Dyadic::new(3, 4));
        assert_eq!(s.to_string(), "3/2^4");
        assert_eq!("3/2^4".parse::<Dyadic>().unwrap(), s);
        assert!("6/2^5".parse::<Dyadic>().is_err());
    }

    #[test]
    fn ordering_and_scaling() {
        assert!(Dyadic::pow2_neg(2) < Dyadic::pow2_neg(1));
        assert!(Dyadic::new(4, 2) <= Dyadic::ONE);
        assert_eq!(Dyadic::pow2_neg(3).mul_pow2(3), Dyadic::ONE);
        assert_eq!(Dyadic::ONE.mul_pow2(-2), Dyadic::pow2_neg(2));
        assert_eq!(Dyadic::new(0, 7), Dyadic::ZERO);
    }
}
