//! Exhaustive enumeration of halting programs and exact complexity tables.
//!
//! The enumerator walks the opcode decode tree instead of raw bit strings:
//! every node is a valid opcode prefix with live machine registers, so
//! diverging or over-budget branches are cut as soon as they appear. The
//! tree is split at a shallow depth for parallel work and the results are
//! merged in canonical (length, lexicographic) program order, which makes
//! the output independent of the schedule.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex};

use rayon::prelude::*;

use crate::bits::{canonical_cmp, BitString};
use crate::dyadic::Dyadic;
use crate::error::{Error, Result};
use crate::machine::{Budgets, Condition, Fault, Opcode, Registers, MACHINE_VERSION};

/// Shortest program length on this machine (HALT alone).
pub const MIN_PROGRAM_LEN: u32 = 3;
const HALT_LEN: usize = 3;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HaltingProgram {
    pub program: BitString,
    pub output: BitString,
    pub steps: u64,
}

#[derive(Debug, Clone, Copy)]
pub struct BuildOptions {
    /// Worker threads; 0 uses the global rayon pool.
    pub workers: usize,
    /// Resource limit on distinct outputs.
    pub max_entries: usize,
}

impl Default for BuildOptions {
    fn default() -> Self {
        BuildOptions { workers: 0, max_entries: 20_000_000 }
    }
}

#[derive(Clone)]
struct Node {
    prefix: Vec<bool>,
    regs: Registers,
}

struct Walker<'a> {
    max_len: usize,
    cond: &'a Condition,
    budgets: &'a Budgets,
}

impl Walker<'_> {
    /// Children of `node` that can still be completed by a HALT within the cap,
    /// plus the halting program if HALT fits here.
    fn expand(&self, node: &Node, children: &mut Vec<Node>, halted: &mut Vec<HaltingProgram>) {
        let len = node.prefix.len();
        if len + HALT_LEN <= self.max_len {
            let mut regs = node.regs.clone();
            if regs.exec(Opcode::Halt, self.cond, self.budgets).is_ok() {
                let mut program = node.prefix.clone();
                program.extend_from_slice(Opcode::Halt.codeword());
                halted.push(HaltingProgram {
                    program: BitString::from_vec(program),
                    output: BitString::from_vec(regs.buffer),
                    steps: regs.steps,
                });
            }
        }
        for op in Opcode::ALL {
            match op {
                Opcode::Halt | Opcode::Reserved => continue,
                Opcode::SfDecode => self.expand_sfdecode(node, children),
                _ => {
                    let cw = op.codeword();
                    if len + cw.len() + HALT_LEN > self.max_len {
                        continue;
                    }
                    let mut regs = node.regs.clone();
                    if regs.exec(op, self.cond, self.budgets).is_ok() {
                        let mut prefix = node.prefix.clone();
                        prefix.extend_from_slice(cw);
                        children.push(Node { prefix, regs });
                    }
                }
            }
        }
    }

    fn expand_sfdecode(&self, node: &Node, children: &mut Vec<Node>) {
        let Condition::Model(model) = self.cond else { return };
        let head = Opcode::SfDecode.codeword();
        for entry in model.codebook().entries() {
            let total = node.prefix.len() + head.len() + entry.codeword.len();
            if total + HALT_LEN > self.max_len {
                continue;
            }
            let mut regs = node.regs.clone();
            let step: Result<(), Fault> =
                regs.exec_decoded(entry.element.bits(), entry.codeword.len(), self.budgets);
            if step.is_ok() {
                let mut prefix = node.prefix.clone();
                prefix.extend_from_slice(head);
                prefix.extend_from_slice(entry.codeword.bits());
                children.push(Node { prefix, regs });
            }
        }
    }

    fn walk(&self, root: Node, out: &mut Vec<HaltingProgram>) {
        let mut stack = vec![root];
        let mut children = Vec::new();
        while let Some(node) = stack.pop() {
            children.clear();
            self.expand(&node, &mut children, out);
            stack.append(&mut children);
        }
    }
}

fn sort_canonical(programs: &mut [HaltingProgram]) {
    programs.sort_by(|a, b| canonical_cmp(a.program.bits(), b.program.bits()));
}

fn with_pool<T: Send>(workers: usize, f: impl FnOnce() -> T + Send) -> T {
    if workers == 0 {
        return f();
    }
    let pool = rayon::ThreadPoolBuilder::new().num_threads(workers).build().expect("thread pool");
    pool.install(f)
}

/// All halting programs of length at most `max_len`, each once, in canonical
/// (length, lexicographic) order.
pub fn enumerate_halting(max_len: u32, cond: &Condition, budgets: &Budgets) -> Vec<HaltingProgram> {
    enumerate_halting_with(max_len, cond, budgets, 0)
}

pub fn enumerate_halting_with(
    max_len: u32,
    cond: &Condition,
    budgets: &Budgets,
    workers: usize,
) -> Vec<HaltingProgram> {
    let walker = Walker { max_len: max_len as usize, cond, budgets };
    let mut halted = Vec::new();
    let mut frontier = vec![Node { prefix: Vec::new(), regs: Registers::default() }];
    // Split the tree a few levels down so there is enough independent work.
    for _ in 0..3 {
        let mut next = Vec::new();
        for node in &frontier {
            walker.expand(node, &mut next, &mut halted);
        }
        frontier = next;
        if frontier.is_empty() {
            break;
        }
    }
    let parts: Vec<Vec<HaltingProgram>> = with_pool(workers, || {
        frontier
            .into_par_iter()
            .map(|node| {
                let mut out = Vec::new();
                walker.walk(node, &mut out);
                out
            })
            .collect()
    });
    halted.extend(parts.into_iter().flatten());
    sort_canonical(&mut halted);
    halted
}

/// Per-output record of a complexity table.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TableEntry {
    /// Length of the shortest program.
    pub k: u32,
    /// First shortest program in (length, lexicographic) order.
    pub witness: BitString,
    /// Number of halting programs per program length.
    pub counts: BTreeMap<u32, u64>,
    /// `Σ 2^-l(p)` over halting programs with this output.
    pub m: Dyadic,
}

/// Exact complexities for one (machine, condition, caps) triple.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ComplexityTable {
    pub machine_version: String,
    pub condition: String,
    pub max_len: u32,
    pub budgets: Budgets,
    entries: BTreeMap<BitString, TableEntry>,
}

impl ComplexityTable {
    pub fn get(&self, x: &BitString) -> Option<&TableEntry> {
        self.entries.get(x)
    }

    /// `K(x)`, or `None` when no program within the cap outputs `x`.
    pub fn k(&self, x: &BitString) -> Option<u32> {
        self.entries.get(x).map(|e| e.k)
    }

    pub fn witness(&self, x: &BitString) -> Option<&BitString> {
        self.entries.get(x).map(|e| &e.witness)
    }

    /// Entries in canonical order of their outputs.
    pub fn entries(&self) -> impl Iterator<Item = (&BitString, &TableEntry)> {
        self.entries.iter()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn program_count(&self) -> u64 {
        self.entries.values().flat_map(|e| e.counts.values()).sum()
    }
}

/// Builds the exact table of halting programs up to `max_len`.
pub fn build_table(max_len: u32, cond: &Condition, budgets: &Budgets) -> Result<ComplexityTable> {
    build_table_with(max_len, cond, budgets, &BuildOptions::default())
}

pub fn build_table_with(
    max_len: u32,
    cond: &Condition,
    budgets: &Budgets,
    opts: &BuildOptions,
) -> Result<ComplexityTable> {
    let programs = enumerate_halting_with(max_len, cond, budgets, opts.workers);
    table_from_programs(max_len, cond, budgets, programs, opts.max_entries)
}

pub(crate) fn table_from_programs(
    max_len: u32,
    cond: &Condition,
    budgets: &Budgets,
    programs: Vec<HaltingProgram>,
    max_entries: usize,
) -> Result<ComplexityTable> {
    let mut entries: BTreeMap<BitString, TableEntry> = BTreeMap::new();
    // Programs arrive in canonical order, so the first one seen per output is the witness.
    for hp in programs {
        let l = hp.program.len() as u32;
        match entries.get_mut(&hp.output) {
            Some(e) => {
                *e.counts.entry(l).or_insert(0) += 1;
                e.m += Dyadic::pow2_neg(l);
            }
            None => {
                if entries.len() >= max_entries {
                    return Err(Error::CapExceeded { what: "table entry count".into(), cap: max_entries as u64 });
                }
                entries.insert(
                    hp.output,
                    TableEntry { k: l, witness: hp.program, counts: BTreeMap::from([(l, 1)]), m: Dyadic::pow2_neg(l) },
                );
            }
        }
    }
    Ok(ComplexityTable {
        machine_version: MACHINE_VERSION.to_string(),
        condition: cond.fingerprint(),
        max_len,
        budgets: *budgets,
        entries,
    })
}

/// `Σ_x m(x)`: the exact Kraft sum over all halting programs in the table.
pub fn kraft_sum(table: &ComplexityTable) -> Dyadic {
    table.entries.values().map(|e| e.m).sum()
}

const FORMAT_MAGIC: &str = "algstat-table v1";

/// Renders the line-oriented text format.
pub fn table_to_string(table: &ComplexityTable) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "{FORMAT_MAGIC}");
    let _ = writeln!(s, "machine {}", table.machine_version);
    let _ = writeln!(s, "max_len {}", table.max_len);
    let _ = writeln!(s, "max_steps {}", table.budgets.max_steps);
    let _ = writeln!(s, "max_output {}", table.budgets.max_output);
    let _ = writeln!(s, "condition {}", table.condition);
    let _ = writeln!(s, "entries {}", table.entries.len());
    for (x, e) in &table.entries {
        let hist: Vec<String> = e.counts.iter().map(|(l, c)| format!("{l}:{c}")).collect();
        let _ = writeln!(s, "{} {} {} {} {}", x, e.k, e.witness, e.m, hist.join(","));
    }
    s.push_str("end\n");
    s
}

pub fn export_table(table: &ComplexityTable, path: &Path) -> Result<()> {
    std::fs::write(path, table_to_string(table))?;
    Ok(())
}

pub fn import_table(path: &Path) -> Result<ComplexityTable> {
    table_from_str(&std::fs::read_to_string(path)?)
}

/// Parses and validates a table file: machine version, caps, per-entry
/// consistency and the Kraft bound.
pub fn table_from_str(text: &str) -> Result<ComplexityTable> {
    let fmt_err = |m: String| Error::Format(m);
    let mut lines = text.lines();
    let mut header = |key: &str| -> Result<String> {
        let line = lines.next().ok_or_else(|| fmt_err(format!("missing {key} line")))?;
        if key == FORMAT_MAGIC {
            return if line == FORMAT_MAGIC { Ok(String::new()) } else { Err(fmt_err("not a table file".into())) };
        }
        match line.split_once(' ') {
            Some((k, v)) if k == key => Ok(v.to_string()),
            _ => Err(fmt_err(format!("expected `{key} ...`, got {line:?}"))),
        }
    };
    header(FORMAT_MAGIC)?;
    let machine = header("machine")?;
    if machine != MACHINE_VERSION {
        return Err(Error::Version { expected: MACHINE_VERSION.into(), found: machine });
    }
    let num = |v: String| v.parse::<u64>().map_err(|_| fmt_err(format!("bad number {v:?}")));
    let max_len = num(header("max_len")?)? as u32;
    let max_steps = num(header("max_steps")?)?;
    let max_output = num(header("max_output")?)? as usize;
    let budgets = Budgets::new(max_steps, max_output).map_err(|e| fmt_err(e.to_string()))?;
    let condition = header("condition")?;
    let count = num(header("entries")?)? as usize;

    let mut entries = BTreeMap::new();
    for i in 0..count {
        let line = lines.next().ok_or_else(|| fmt_err(format!("truncated after {i} of {count} entries")))?;
        let f: Vec<&str> = line.split(' ').collect();
        if f.len() != 5 {
            return Err(fmt_err(format!("bad record {line:?}")));
        }
        let x: BitString = f[0].parse()?;
        let k = num(f[1].to_string())? as u32;
        let witness: BitString = f[2].parse()?;
        let m: Dyadic = f[3].parse()?;
        let mut counts = BTreeMap::new();
        for item in f[4].split(',') {
            let (l, c) = item.split_once(':').ok_or_else(|| fmt_err(format!("bad histogram {item:?}")))?;
            counts.insert(num(l.to_string())? as u32, num(c.to_string())?);
        }
        let implied: Dyadic = counts.iter().map(|(&l, &c)| Dyadic::new(c as u128, l)).sum();
        if witness.len() as u32 != k
            || counts.keys().next() != Some(&k)
            || k > max_len
            || implied != m
        {
            return Err(fmt_err(format!("inconsistent record for {x}")));
        }
        if entries.insert(x.clone(), TableEntry { k, witness, counts, m }).is_some() {
            return Err(fmt_err(format!("duplicate output {x}")));
        }
    }
    if lines.next() != Some("end") {
        return Err(fmt_err("missing end marker".into()));
    }
    let table = ComplexityTable { machine_version: machine, condition, max_len, budgets, entries };
    if kraft_sum(&table) > Dyadic::ONE {
        return Err(fmt_err("Kraft sum exceeds 1".into()));
    }
    Ok(table)
}

/// File name used by the on-disk cache for a given configuration.
pub fn cache_file_name(max_len: u32, cond: &Condition, budgets: &Budgets) -> String {
    format!(
        "table-{}-L{}-T{}-O{}-{}.txt",
        MACHINE_VERSION,
        max_len,
        budgets.max_steps,
        budgets.max_output,
        cond.fingerprint()
    )
}

type CacheKey = (u32, Budgets, String);

/// Insert-or-get cache of tables keyed by caps and condition fingerprint,
/// optionally persisted to a directory.
#[derive(Debug, Default)]
pub struct TableCache {
    dir: Option<PathBuf>,
    opts: BuildOptions,
    tables: Mutex<HashMap<CacheKey, Arc<ComplexityTable>>>,
}

impl TableCache {
    pub fn in_memory() -> Self {
        TableCache::default()
    }

    pub fn with_dir(dir: impl Into<PathBuf>, opts: BuildOptions) -> Self {
        TableCache { dir: Some(dir.into()), opts, tables: Mutex::default() }
    }

    pub fn path_for(&self, max_len: u32, cond: &Condition, budgets: &Budgets) -> Option<PathBuf> {
        self.dir.as_ref().map(|d| d.join(cache_file_name(max_len, cond, budgets)))
    }

    /// Table if already in memory or on disk; never builds.
    pub fn lookup(&self, max_len: u32, cond: &Condition, budgets: &Budgets) -> Result<Option<Arc<ComplexityTable>>> {
        let key = (max_len, *budgets, cond.fingerprint());
        if let Some(t) = self.tables.lock().unwrap().get(&key) {
            return Ok(Some(t.clone()));
        }
        if let Some(path) = self.path_for(max_len, cond, budgets) {
            if path.exists() {
                let t = Arc::new(import_table(&path)?);
                self.tables.lock().unwrap().insert(key, t.clone());
                return Ok(Some(t));
            }
        }
        Ok(None)
    }

    /// Returns the cached table or builds (and persists) it. The second
    /// element is `true` when a build happened.
    pub fn get_or_build(
        &self,
        max_len: u32,
        cond: &Condition,
        budgets: &Budgets,
    ) -> Result<(Arc<ComplexityTable>, bool)> {
        if let Some(t) = self.lookup(max_len, cond, budgets)? {
            return Ok((t, false));
        }
        let table = Arc::new(build_table_with(max_len, cond, budgets, &self.opts)?);
        if let Some(path) = self.path_for(max_len, cond, budgets) {
            if let Some(parent) = path.parent() {
                std::fs::create_dir_all(parent)?;
            }
            export_table(&table, &path)?;
        }
        let key = (max_len, *budgets, cond.fingerprint());
        let mut map = self.tables.lock().unwrap();
        let entry = map.entry(key).or_insert(table);
        Ok((entry.clone(), true))
    }
}
