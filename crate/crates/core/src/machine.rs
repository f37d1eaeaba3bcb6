//! The reference machine `tpm1-v1`: a total, self-delimiting machine with a
//! fixed prefix opcode code.
//!
//! | codeword | opcode   | effect                                              | steps            |
//! |----------|----------|-----------------------------------------------------|------------------|
//! | `00`     | EMIT0    | append 0                                            | 1                |
//! | `01`     | EMIT1    | append 1                                            | 1                |
//! | `100`    | HALT     | stop; the program must end here                     | 1                |
//! | `101cc`  | COPYIN   | copy `2^cc` bits from a string condition            | bits copied      |
//! | `1100`   | DOUBLE   | buffer := buffer ‖ buffer                           | max(1, \|buf\|)  |
//! | `1101`   | FLIP     | buffer := buffer ‖ complement(buffer)               | max(1, \|buf\|)  |
//! | `1110`   | SFDECODE | read a codeword of the model condition's codebook   | codeword length  |
//! | `1111`   | reserved | always diverges                                     | –                |
//!
//! Every opcode only appends to the output buffer, so the buffer after any
//! prefix of a run is a prefix of the final output.

use std::fmt;
use std::sync::Arc;

use sha2::{Digest, Sha256};

use crate::bits::BitString;
use crate::codebook::{Codebook, Decoded};
use crate::error::{Error, Result};

pub const MACHINE_VERSION: &str = "tpm1-v1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Opcode {
    Emit0,
    Emit1,
    Halt,
    /// Copies `2^cc` condition bits.
    CopyIn(u8),
    Double,
    Flip,
    SfDecode,
    Reserved,
}

impl Opcode {
    /// Every opcode in codeword order.
    pub const ALL: [Opcode; 11] = [
        Opcode::Emit0,
        Opcode::Emit1,
        Opcode::Halt,
        Opcode::CopyIn(0),
        Opcode::CopyIn(1),
        Opcode::CopyIn(2),
        Opcode::CopyIn(3),
        Opcode::Double,
        Opcode::Flip,
        Opcode::SfDecode,
        Opcode::Reserved,
    ];

    pub fn codeword(self) -> &'static [bool] {
        const F: bool = false;
        const T: bool = true;
        match self {
            Opcode::Emit0 => &[F, F],
            Opcode::Emit1 => &[F, T],
            Opcode::Halt => &[T, F, F],
            Opcode::CopyIn(0) => &[T, F, T, F, F],
            Opcode::CopyIn(1) => &[T, F, T, F, T],
            Opcode::CopyIn(2) => &[T, F, T, T, F],
            Opcode::CopyIn(_) => &[T, F, T, T, T],
            Opcode::Double => &[T, T, F, F],
            Opcode::Flip => &[T, T, F, T],
            Opcode::SfDecode => &[T, T, T, F],
            Opcode::Reserved => &[T, T, T, T],
        }
    }

    pub fn copy_len(self) -> usize {
        match self {
            Opcode::CopyIn(cc) => 1 << cc,
            _ => 0,
        }
    }
}

/// The stream ended before a complete opcode could be read.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct InvalidPrefix;

/// Decodes the opcode starting at `offset`, returning it and its codeword length.
pub fn opcode_decode(stream: &[bool], offset: usize) -> Result<(Opcode, usize), InvalidPrefix> {
    let rest = stream.get(offset..).ok_or(InvalidPrefix)?;
    let bit = |i: usize| rest.get(i).copied().ok_or(InvalidPrefix);
    if !bit(0)? {
        return Ok((if bit(1)? { Opcode::Emit1 } else { Opcode::Emit0 }, 2));
    }
    if !bit(1)? {
        if !bit(2)? {
            return Ok((Opcode::Halt, 3));
        }
        let cc = (bit(3)? as u8) << 1 | bit(4)? as u8;
        return Ok((Opcode::CopyIn(cc), 5));
    }
    let op = match (bit(2)?, bit(3)?) {
        (false, false) => Opcode::Double,
        (false, true) => Opcode::Flip,
        (true, false) => Opcode::SfDecode,
        (true, true) => Opcode::Reserved,
    };
    Ok((op, 4))
}

/// Resource bounds: at most `max_steps` steps and `max_output` output bits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Budgets {
    pub max_steps: u64,
    pub max_output: usize,
}

impl Default for Budgets {
    fn default() -> Self {
        Budgets { max_steps: 100_000, max_output: 4096 }
    }
}

impl Budgets {
    pub fn new(max_steps: u64, max_output: usize) -> Result<Self> {
        if max_steps == 0 {
            return Err(Error::Budget("step budget must be at least 1".into()));
        }
        Ok(Budgets { max_steps, max_output })
    }
}

/// A finite model made available to SFDECODE, with its canonical codebook.
#[derive(Clone)]
pub struct ModelCondition {
    codebook: Codebook,
    fingerprint: String,
}

impl ModelCondition {
    pub fn new(codebook: Codebook) -> Self {
        let fingerprint = fingerprint_of(&codebook.canonical());
        ModelCondition { codebook, fingerprint }
    }

    pub fn codebook(&self) -> &Codebook {
        &self.codebook
    }

    pub fn fingerprint(&self) -> &str {
        &self.fingerprint
    }
}

impl fmt::Debug for ModelCondition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ModelCondition({} elements, {})", self.codebook.len(), self.fingerprint)
    }
}

/// Auxiliary input available to a run.
#[derive(Debug, Clone, Default)]
pub enum Condition {
    #[default]
    None,
    Str(BitString),
    Model(Arc<ModelCondition>),
}

pub(crate) fn fingerprint_of(canonical: &str) -> String {
    let digest = Sha256::digest(canonical.as_bytes());
    digest.iter().take(8).map(|b| format!("{b:02x}")).collect()
}

impl Condition {
    pub fn model(codebook: Codebook) -> Self {
        Condition::Model(Arc::new(ModelCondition::new(codebook)))
    }

    /// Stable short hash of the condition's canonical serialization.
    pub fn fingerprint(&self) -> String {
        match self {
            Condition::None => fingerprint_of("none"),
            Condition::Str(s) => fingerprint_of(&format!("str:{s}")),
            Condition::Model(m) => m.fingerprint.clone(),
        }
    }

    pub fn as_str(&self) -> Option<&BitString> {
        match self {
            Condition::Str(s) => Some(s),
            _ => None,
        }
    }
}

impl PartialEq for Condition {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (Condition::None, Condition::None) => true,
            (Condition::Str(a), Condition::Str(b)) => a == b,
            (Condition::Model(a), Condition::Model(b)) => a.fingerprint == b.fingerprint,
            _ => false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum RunOutcome {
    Halted { output: BitString, steps: u64, consumed: usize },
    OutOfSteps,
    OutOfOutput,
    Diverged,
    /// The bits end inside an opcode, end without reaching HALT, or run on
    /// past HALT; in every case they are not a program.
    InvalidPrefix,
}

impl RunOutcome {
    pub fn output(&self) -> Option<&BitString> {
        match self {
            RunOutcome::Halted { output, .. } => Some(output),
            _ => None,
        }
    }

    pub fn is_halted(&self) -> bool {
        matches!(self, RunOutcome::Halted { .. })
    }
}

/// Machine registers shared by [`run`] and the enumerator.
#[derive(Debug, Clone, Default)]
pub(crate) struct Registers {
    pub buffer: Vec<bool>,
    pub cond_ptr: usize,
    pub steps: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Fault {
    Diverged,
    OutOfSteps,
    OutOfOutput,
}

impl From<Fault> for RunOutcome {
    fn from(f: Fault) -> Self {
        match f {
            Fault::Diverged => RunOutcome::Diverged,
            Fault::OutOfSteps => RunOutcome::OutOfSteps,
            Fault::OutOfOutput => RunOutcome::OutOfOutput,
        }
    }
}

impl Registers {
    fn charge(&mut self, steps: u64, budgets: &Budgets) -> Result<(), Fault> {
        self.steps += steps;
        if self.steps > budgets.max_steps {
            Err(Fault::OutOfSteps)
        } else {
            Ok(())
        }
    }

    fn check_output(&self, extra: usize, budgets: &Budgets) -> Result<(), Fault> {
        if self.buffer.len() + extra > budgets.max_output {
            Err(Fault::OutOfOutput)
        } else {
            Ok(())
        }
    }

    /// Executes every opcode except SFDECODE, whose operand lives in the
    /// program stream. HALT only charges its step.
    pub fn exec(&mut self, op: Opcode, cond: &Condition, budgets: &Budgets) -> Result<(), Fault> {
        match op {
            Opcode::Emit0 | Opcode::Emit1 => {
                self.charge(1, budgets)?;
                self.check_output(1, budgets)?;
                self.buffer.push(op == Opcode::Emit1);
            }
            Opcode::Halt => self.charge(1, budgets)?,
            Opcode::CopyIn(_) => {
                let n = op.copy_len();
                let src = match cond {
                    Condition::Str(s) if self.cond_ptr + n <= s.len() => s,
                    _ => return Err(Fault::Diverged),
                };
                self.charge(n as u64, budgets)?;
                self.check_output(n, budgets)?;
                self.buffer.extend_from_slice(&src.bits()[self.cond_ptr..self.cond_ptr + n]);
                self.cond_ptr += n;
            }
            Opcode::Double | Opcode::Flip => {
                let len = self.buffer.len();
                self.charge(len.max(1) as u64, budgets)?;
                self.check_output(len, budgets)?;
                if op == Opcode::Double {
                    self.buffer.extend_from_within(..);
                } else {
                    for i in 0..len {
                        let b = !self.buffer[i];
                        self.buffer.push(b);
                    }
                }
            }
            Opcode::SfDecode => unreachable!("SFDECODE needs its codeword operand"),
            Opcode::Reserved => return Err(Fault::Diverged),
        }
        Ok(())
    }

    /// Appends a decoded model element after consuming a codeword of `cw_len` bits.
    pub fn exec_decoded(&mut self, element: &[bool], cw_len: usize, budgets: &Budgets) -> Result<(), Fault> {
        self.charge(cw_len as u64, budgets)?;
        self.check_output(element.len(), budgets)?;
        self.buffer.extend_from_slice(element);
        Ok(())
    }
}

/// Runs `program` on the machine. Deterministic; every failure mode is a
/// [`RunOutcome`] variant.
pub fn run(program: &[bool], cond: &Condition, budgets: &Budgets) -> RunOutcome {
    let mut regs = Registers::default();
    let mut offset = 0usize;
    loop {
        let (op, used) = match opcode_decode(program, offset) {
            Ok(v) => v,
            Err(InvalidPrefix) => return RunOutcome::InvalidPrefix,
        };
        offset += used;
        match op {
            Opcode::SfDecode => {
                let Condition::Model(model) = cond else {
                    return RunOutcome::Diverged;
                };
                let cb = model.codebook();
                match cb.decode_prefix(&program[offset..]) {
                    Decoded::Hit(i, l) => {
                        offset += l;
                        if let Err(f) = regs.exec_decoded(cb.entries()[i].element.bits(), l, budgets) {
                            return f.into();
                        }
                    }
                    Decoded::NeedMore => return RunOutcome::InvalidPrefix,
                    Decoded::Mismatch => return RunOutcome::Diverged,
                }
            }
            Opcode::Halt => {
                if let Err(f) = regs.exec(op, cond, budgets) {
                    return f.into();
                }
                if offset != program.len() {
                    return RunOutcome::InvalidPrefix;
                }
                return RunOutcome::Halted {
                    output: BitString::from_vec(regs.buffer),
                    steps: regs.steps,
                    consumed: offset,
                };
            }
            _ => {
                if let Err(f) = regs.exec(op, cond, budgets) {
                    return f.into();
                }
            }
        }
    }
}

/// Concatenates opcode codewords into a program.
pub fn assemble(ops: &[Opcode]) -> BitString {
    let mut p = BitString::new();
    for op in ops {
        p.extend_from(op.codeword());
    }
    p
}
