//! Canonical Shannon–Fano codebooks over finite, possibly defective,
//! distributions with exact rational masses.
//!
//! Each element `x` gets a codeword of length `⌈−log2 P(x)⌉`. Codewords are
//! assigned canonically: elements sorted by (codeword length, domain order)
//! receive consecutive binary values, shifted left whenever the length grows.
//! The lengths satisfy Kraft, so the result is prefix-free.

use std::collections::HashMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::bits::BitString;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CodebookEntry {
    pub element: BitString,
    pub mass: BigRational,
    pub codeword: BitString,
}

/// Outcome of matching a codeword against the head of a bit stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Decoded {
    /// Entry index and codeword length consumed.
    Hit(usize, usize),
    /// The stream ends inside a codeword.
    NeedMore,
    /// No codeword is compatible with the stream.
    Mismatch,
}

#[derive(Debug, Clone)]
pub struct Codebook {
    entries: Vec<CodebookEntry>,
    by_codeword: HashMap<BitString, usize>,
    by_element: HashMap<BitString, usize>,
    codeword_lengths: Vec<usize>,
    element_lengths: Vec<usize>,
}

/// Smallest `l >= 0` with `2^-l <= mass`, i.e. `⌈−log2 mass⌉` for `0 < mass <= 1`.
pub fn shannon_length(mass: &BigRational) -> usize {
    let num = mass.numer().clone();
    let den = mass.denom().clone();
    let mut l = 0usize;
    let mut scaled = num;
    while scaled < den {
        scaled <<= 1;
        l += 1;
    }
    l
}

fn increment(code: &mut Vec<bool>) {
    for b in code.iter_mut().rev() {
        if *b {
            *b = false;
        } else {
            *b = true;
            return;
        }
    }
    // All ones overflowed: only reachable when Kraft is violated.
    code.insert(0, true);
}

impl Codebook {
    /// Builds the canonical codebook. The domain is sorted canonically;
    /// duplicate elements, non-positive masses and total mass above one are
    /// rejected.
    pub fn new(mut domain: Vec<(BitString, BigRational)>) -> Result<Self> {
        if domain.is_empty() {
            return Err(Error::InvalidModel("empty domain".into()));
        }
        domain.sort_by(|a, b| a.0.cmp(&b.0));
        let mut total = BigRational::zero();
        for w in domain.windows(2) {
            if w[0].0 == w[1].0 {
                return Err(Error::InvalidModel(format!("duplicate element {}", w[0].0)));
            }
        }
        for (x, m) in &domain {
            if !m.is_positive() {
                return Err(Error::InvalidModel(format!("non-positive mass for {x}")));
            }
            total += m;
        }
        if total > BigRational::one() {
            return Err(Error::InvalidModel(format!("total mass {total} exceeds 1")));
        }

        let lengths: Vec<usize> = domain.iter().map(|(_, m)| shannon_length(m)).collect();
        let mut order: Vec<usize> = (0..domain.len()).collect();
        order.sort_by_key(|&i| (lengths[i], i));

        let mut codewords = vec![BitString::new(); domain.len()];
        let mut code: Vec<bool> = Vec::new();
        let mut first = true;
        for &i in &order {
            if first {
                code = vec![false; lengths[i]];
                first = false;
            } else {
                increment(&mut code);
                while code.len() < lengths[i] {
                    code.push(false);
                }
            }
            codewords[i] = BitString::from_bits(&code);
        }

        let entries: Vec<CodebookEntry> = domain
            .into_iter()
            .zip(codewords)
            .map(|((element, mass), codeword)| CodebookEntry { element, mass, codeword })
            .collect();
        let by_codeword = entries.iter().enumerate().map(|(i, e)| (e.codeword.clone(), i)).collect();
        let by_element = entries.iter().enumerate().map(|(i, e)| (e.element.clone(), i)).collect();
        let mut codeword_lengths: Vec<usize> = entries.iter().map(|e| e.codeword.len()).collect();
        codeword_lengths.sort_unstable();
        codeword_lengths.dedup();
        let mut element_lengths: Vec<usize> = entries.iter().map(|e| e.element.len()).collect();
        element_lengths.sort_unstable();
        element_lengths.dedup();
        Ok(Codebook { entries, by_codeword, by_element, codeword_lengths, element_lengths })
    }

    /// Uniform masses `1/|domain|` over the given elements.
    pub fn uniform(elements: Vec<BitString>) -> Result<Self> {
        let n = BigInt::from(elements.len());
        let mass = BigRational::new(BigInt::one(), n);
        Codebook::new(elements.into_iter().map(|e| (e, mass.clone())).collect())
    }

    pub fn entries(&self) -> &[CodebookEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Distinct element lengths, ascending.
    pub fn element_lengths(&self) -> &[usize] {
        &self.element_lengths
    }

    pub fn index_of(&self, element: &[bool]) -> Option<usize> {
        self.by_element.get(element).copied()
    }

    pub fn codeword_len_of(&self, element: &[bool]) -> Option<usize> {
        self.index_of(element).map(|i| self.entries[i].codeword.len())
    }

    /// Kraft sum of the codeword lengths as an exact rational.
    pub fn kraft_sum(&self) -> BigRational {
        self.entries
            .iter()
            .map(|e| BigRational::new(BigInt::one(), BigInt::one() << e.codeword.len()))
            .fold(BigRational::zero(), |a, b| a + b)
    }

    /// Matches the unique codeword that prefixes `stream`.
    pub fn decode_prefix(&self, stream: &[bool]) -> Decoded {
        for &l in &self.codeword_lengths {
            if l > stream.len() {
                break;
            }
            if let Some(&i) = self.by_codeword.get(&stream[..l]) {
                return Decoded::Hit(i, l);
            }
        }
        let longest = *self.codeword_lengths.last().unwrap_or(&0);
        if stream.len() < longest
            && self.entries.iter().any(|e| e.codeword.len() > stream.len() && e.codeword.starts_with(stream))
        {
            Decoded::NeedMore
        } else {
            Decoded::Mismatch
        }
    }

    /// Canonical serialization, used for fingerprints.
    pub fn canonical(&self) -> String {
        let mut s = String::from("model:");
        for e in &self.entries {
            s.push_str(&format!("{}={};", e.element, e.mass));
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bits::bs;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn bernoulli_quarter_lengths() {
        let cb = Codebook::new(vec![
            (bs("00"), q(9, 16)),
            (bs("01"), q(3, 16)),
            (bs("10"), q(3, 16)),
            (bs("11"), q(1, 16)),
        ])
        .unwrap();
        let words: Vec<String> = cb.entries().iter().map(|e| e.codeword.to_string()).collect();
        assert_eq!(words, ["0", "100", "101", "1100"]);
    }

    #[test]
    fn uniform_eight_three_bit_words() {
        let cb = Codebook::uniform(BitString::all_of_len(3).collect()).unwrap();
        for (i, e) in cb.entries().iter().enumerate() {
            assert_eq!(e.codeword, BitString::binary_padded(i as u64, 3));
        }
    }

    #[test]
    fn half_half_table() {
        let cb = Codebook::new(vec![(bs("0"), q(1, 2)), (bs("1"), q(1, 2))]).unwrap();
        assert_eq!(cb.entries()[0].codeword, bs("0"));
        assert_eq!(cb.entries()[1].codeword, bs("1"));
    }

    #[test]
    fn singleton_has_empty_codeword() {
        let cb = Codebook::new(vec![(bs("101"), q(1, 1))]).unwrap();
        assert!(cb.entries()[0].codeword.is_empty());
        assert_eq!(cb.decode_prefix(&[]), Decoded::Hit(0, 0));
    }

    #[test]
    fn decode_reports_need_more_and_mismatch() {
        let cb = Codebook::new(vec![(bs("0"), q(1, 2)), (bs("1"), q(1, 8))]).unwrap();
        // codewords "0" and "100"
        assert_eq!(cb.decode_prefix(&[true, false]), Decoded::NeedMore);
        assert_eq!(cb.decode_prefix(&[true, true]), Decoded::Mismatch);
        assert_eq!(cb.decode_prefix(&[true, false, false, true]), Decoded::Hit(1, 3));
    }

    #[test]
    fn rejects_excess_mass() {
        assert!(Codebook::new(vec![(bs("0"), q(2, 3)), (bs("1"), q(2, 3))]).is_err());
        assert!(Codebook::new(vec![(bs("0"), q(0, 1))]).is_err());
    }
}
