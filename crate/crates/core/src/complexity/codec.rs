//! Self-delimiting codes and pairing.
//!
//! * `bar(x) = 1^l(x) 0 x`
//! * `std(x) = bar(b(l(x))) x`
//! * `pair(x, y) = std(x) y`

use crate::bits::BitString;

pub fn bar(x: &[bool]) -> BitString {
    let mut v = vec![true; x.len()];
    v.push(false);
    v.extend_from_slice(x);
    BitString::from_vec(v)
}

/// `bar(b(n))`, the self-delimiting code of a natural number.
pub fn nat_code(n: u64) -> BitString {
    bar(BitString::from_nat(n).bits())
}

pub fn std_code(x: &[bool]) -> BitString {
    let mut s = nat_code(x.len() as u64);
    s.extend_from(x);
    s
}

pub fn pair(x: &BitString, y: &BitString) -> BitString {
    std_code(x.bits()).concat(y)
}

/// Length of `bar(b(n))` without building it.
pub fn nat_code_len(n: u64) -> usize {
    2 * BitString::from_nat(n).len() + 1
}

pub fn std_code_len(len: usize) -> usize {
    nat_code_len(len as u64) + len
}

/// Reads a `bar` code at `*pos`, advancing past it.
pub fn read_bar(bits: &[bool], pos: &mut usize) -> Option<BitString> {
    let mut n = 0;
    while *bits.get(*pos + n)? {
        n += 1;
    }
    let start = *pos + n + 1;
    let body = bits.get(start..start + n)?;
    *pos = start + n;
    Some(BitString::from_bits(body))
}

pub fn read_nat(bits: &[bool], pos: &mut usize) -> Option<u64> {
    read_bar(bits, pos)?.to_nat()
}

pub fn read_std(bits: &[bool], pos: &mut usize) -> Option<BitString> {
    let len = usize::try_from(read_nat(bits, pos)?).ok()?;
    let body = bits.get(*pos..pos.checked_add(len)?)?;
    *pos += len;
    Some(BitString::from_bits(body))
}

pub fn unpair(z: &BitString) -> Option<(BitString, BitString)> {
    let mut pos = 0;
    let x = read_std(z.bits(), &mut pos)?;
    Some((x, z.slice(pos, z.len())))
}
