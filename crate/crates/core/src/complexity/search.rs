//! Shortest programs for a single target string.
//!
//! Every opcode appends to the buffer, so a program that outputs `x` keeps
//! its buffer a prefix of `x` at every step. The reachable machine states for
//! target `x` are therefore just `(i, j)`: `i` bits of `x` produced and `j`
//! condition bits consumed. Each opcode is an edge weighted by its codeword
//! length, and `K(x | cond)` is a shortest path to `(l(x), ·)` followed by
//! HALT. Edges never decrease `i`, and edges that keep `i` fixed are
//! self-loops, so distances come from one backward sweep over `i`.

use crate::bits::BitString;
use crate::error::{Error, Result};
use crate::machine::{run, Budgets, Condition, Opcode};

const UNREACHABLE: u32 = u32::MAX;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Shortest {
    pub k: u32,
    /// First shortest program in lexicographic order.
    pub witness: BitString,
}

struct Edge {
    code: BitString,
    to: (usize, usize),
}

struct Graph<'a> {
    x: &'a [bool],
    cond: &'a Condition,
    m: usize,
}

impl Graph<'_> {
    fn edges(&self, i: usize, j: usize, out: &mut Vec<Edge>) {
        out.clear();
        let x = self.x;
        let n = x.len();
        if i == n {
            out.push(Edge { code: BitString::from_bits(Opcode::Halt.codeword()), to: (n + 1, 0) });
            return;
        }
        let emit = if x[i] { Opcode::Emit1 } else { Opcode::Emit0 };
        out.push(Edge { code: BitString::from_bits(emit.codeword()), to: (i + 1, j) });
        if let Condition::Str(c) = self.cond {
            for cc in 0..4u8 {
                let op = Opcode::CopyIn(cc);
                let len = op.copy_len();
                if j + len <= self.m && i + len <= n && x[i..i + len] == c.bits()[j..j + len] {
                    out.push(Edge { code: BitString::from_bits(op.codeword()), to: (i + len, j + len) });
                }
            }
        }
        if i > 0 && 2 * i <= n {
            if x[i..2 * i] == x[..i] {
                out.push(Edge { code: BitString::from_bits(Opcode::Double.codeword()), to: (2 * i, j) });
            }
            if x[i..2 * i].iter().zip(&x[..i]).all(|(a, b)| a != b) {
                out.push(Edge { code: BitString::from_bits(Opcode::Flip.codeword()), to: (2 * i, j) });
            }
        }
        if let Condition::Model(model) = self.cond {
            let cb = model.codebook();
            for &len in cb.element_lengths() {
                if len == 0 || i + len > n {
                    continue;
                }
                if let Some(idx) = cb.index_of(&x[i..i + len]) {
                    let mut code = BitString::from_bits(Opcode::SfDecode.codeword());
                    code.extend_from(cb.entries()[idx].codeword.bits());
                    out.push(Edge { code, to: (i + len, j) });
                }
            }
        }
    }
}

/// The exact shortest program for `x` under `cond`, or `None` when `x` is
/// longer than the output budget. Errors if the step budget is too small
/// for the found program, which the default budgets never are.
pub fn shortest_program(x: &BitString, cond: &Condition, budgets: &Budgets) -> Result<Option<Shortest>> {
    let n = x.len();
    if n > budgets.max_output {
        return Ok(None);
    }
    let m = cond.as_str().map_or(0, BitString::len);
    let g = Graph { x: x.bits(), cond, m };
    let width = m + 1;
    let mut dist = vec![UNREACHABLE; (n + 1) * width];
    let mut edges = Vec::new();
    for i in (0..=n).rev() {
        for j in 0..=m {
            g.edges(i, j, &mut edges);
            let best = edges
                .iter()
                .filter_map(|e| {
                    let tail = if e.to.0 > n { 0 } else { dist[e.to.0 * width + e.to.1] };
                    (tail != UNREACHABLE).then(|| tail + e.code.len() as u32)
                })
                .min();
            dist[i * width + j] = best.unwrap_or(UNREACHABLE);
        }
    }
    let k = dist[0];
    if k == UNREACHABLE {
        return Ok(None);
    }

    // Walk tight edges, taking the lexicographically smallest codeword each time.
    let mut witness = BitString::new();
    let (mut i, mut j) = (0usize, 0usize);
    while i <= n {
        g.edges(i, j, &mut edges);
        let here = dist[i * width + j];
        let next = edges
            .iter()
            .filter(|e| {
                let tail = if e.to.0 > n { 0 } else { dist[e.to.0 * width + e.to.1] };
                tail != UNREACHABLE && tail + e.code.len() as u32 == here
            })
            .min_by(|a, b| a.code.bits().cmp(b.code.bits()))
            .expect("a tight edge leaves every reachable state");
        witness.extend_from(next.code.bits());
        (i, j) = next.to;
    }

    match run(witness.bits(), cond, budgets) {
        ref o if o.output() == Some(x) => Ok(Some(Shortest { k, witness })),
        other => Err(Error::Budget(format!("shortest program for {x} does not run within budgets: {other:?}"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bits::bs;

    fn k(x: &str, cond: &Condition) -> u32 {
        shortest_program(&bs(x), cond, &Budgets::default()).unwrap().unwrap().k
    }

    #[test]
    fn hand_checked_values() {
        assert_eq!(k("", &Condition::None), 3);
        assert_eq!(k("0", &Condition::None), 5);
        assert_eq!(k("0000", &Condition::None), 11);
        assert_eq!(k("01010101", &Condition::None), 15);
        assert_eq!(k("1011", &Condition::Str(bs("1011"))), 8);
        assert_eq!(k("01", &Condition::Str(bs("01"))), 7);
    }

    #[test]
    fn witness_is_lexicographically_first() {
        let s = shortest_program(&bs("0110"), &Condition::None, &Budgets::default()).unwrap().unwrap();
        assert_eq!(s.k, 11);
        // Both 00 01 01 00 100 and 00 01 1101 100 have 11 bits; the emit-only one sorts first.
        assert_eq!(s.witness, bs("00010100100"));
    }

    #[test]
    fn over_output_budget_is_absent() {
        let b = Budgets::new(100, 2).unwrap();
        assert_eq!(shortest_program(&bs("000"), &Condition::None, &b).unwrap(), None);
    }
}
