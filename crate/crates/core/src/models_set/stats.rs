//! Deficiency, two-part codes and the structure functions of set models.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;
use std::sync::Mutex;

use num_bigint::BigUint;
use rayon::prelude::*;

use crate::bits::BitString;
use crate::codebook::Codebook;
use crate::complexity::{pair, shortest_program, KSource, Oracle};
use crate::error::{Error, Result};
use crate::machine::Condition;

use super::desc::SetDescription;
use super::search::{enumerate_models, ModelOptions};

/// `Model` condition carrying the uniform distribution on the set.
pub fn uniform_condition(desc: &SetDescription, cap: u64) -> Result<Condition> {
    Ok(Condition::model(Codebook::uniform(desc.denote(cap)?)?))
}

/// `Str` condition carrying the model's code and its length.
pub fn star_condition(desc: &SetDescription) -> Condition {
    let code = desc.encode();
    let len = BitString::from_nat(code.len() as u64);
    Condition::Str(pair(&code, &len))
}

/// `len(desc) + ⌈log2 |S|⌉`.
pub fn two_part(desc: &SetDescription) -> u64 {
    desc.len() as u64 + desc.log_size()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DeficiencyRecord {
    pub x: BitString,
    pub desc: SetDescription,
    pub log_size: u64,
    /// `K(x | uniform on S)`.
    pub k_cond_set: u32,
    pub delta_raw: i64,
    /// `max_{y ∈ S} K(y | S) − K(x | S)`.
    pub delta_norm: i64,
    /// `K(x | ⟨code, len(code)⟩)`.
    pub k_cond_star: u32,
    pub delta_star_raw: i64,
    pub delta_star_norm: i64,
}

/// Per-model maxima `max_{y ∈ S} K(y | S)` and `max_{y ∈ S} K(y | code)`.
#[derive(Debug, Clone, Copy)]
struct SetMaxima {
    model: u32,
    star: u32,
}

/// Deficiency queries with the per-set maxima cached by model code.
pub struct SetAnalyzer<'a> {
    oracle: &'a Oracle,
    opts: ModelOptions,
    maxima: Mutex<HashMap<BitString, SetMaxima>>,
}

impl<'a> SetAnalyzer<'a> {
    pub fn new(oracle: &'a Oracle, opts: ModelOptions) -> Self {
        SetAnalyzer { oracle, opts, maxima: Mutex::default() }
    }

    pub fn options(&self) -> &ModelOptions {
        &self.opts
    }

    fn maxima(&self, desc: &SetDescription, model: &Condition, star: &Condition) -> Result<SetMaxima> {
        let code = desc.encode();
        if let Some(m) = self.maxima.lock().unwrap().get(&code) {
            return Ok(*m);
        }
        let members = desc.denote(self.opts.denote_cap)?;
        let budgets = self.oracle.budgets();
        let k = |y: &BitString, cond: &Condition| -> Result<u32> {
            shortest_program(y, cond, budgets)?
                .map(|s| s.k)
                .ok_or_else(|| Error::Absent { x: y.to_string(), cap: budgets.max_output as u32 })
        };
        // SFDECODE, the element's codeword, HALT.
        let cw = match model {
            Condition::Model(m) => m.codebook().entries()[0].codeword.len() as u32,
            _ => unreachable!("uniform condition"),
        };
        let model_ceiling = 7 + cw;
        let star_ceiling = 2 * members.iter().map(BitString::len).max().unwrap_or(0) as u32 + 3;
        let mut found = SetMaxima { model: 0, star: 0 };
        for y in &members {
            if found.model < model_ceiling {
                found.model = found.model.max(k(y, model)?);
            }
            if found.star < star_ceiling {
                found.star = found.star.max(k(y, star)?);
            }
            if found.model >= model_ceiling && found.star >= star_ceiling {
                break;
            }
        }
        self.maxima.lock().unwrap().insert(code, found);
        Ok(found)
    }

    pub fn deficiency(&self, x: &BitString, desc: &SetDescription) -> Result<DeficiencyRecord> {
        if !desc.member(x.bits()) {
            return Err(Error::NotMember(format!("{x} is not in {desc}")));
        }
        let model = uniform_condition(desc, self.opts.denote_cap)?;
        let star = star_condition(desc);
        let max = self.maxima(desc, &model, &star)?;
        let log_size = desc.log_size();
        let k_cond_set = self.oracle.k_given(x, &model)?;
        let k_cond_star = self.oracle.k_given(x, &star)?;
        Ok(DeficiencyRecord {
            x: x.clone(),
            desc: desc.clone(),
            log_size,
            k_cond_set,
            delta_raw: log_size as i64 - k_cond_set as i64,
            delta_norm: max.model as i64 - k_cond_set as i64,
            k_cond_star,
            delta_star_raw: log_size as i64 - k_cond_star as i64,
            delta_star_norm: max.star as i64 - k_cond_star as i64,
        })
    }

    /// Deficiency when the set is small enough to materialize.
    fn deficiency_within_cap(&self, x: &BitString, desc: &SetDescription) -> Result<Option<DeficiencyRecord>> {
        if desc.size() > BigUint::from(self.opts.denote_cap) {
            return Ok(None);
        }
        self.deficiency(x, desc).map(Some)
    }

    pub fn structfn(&self, x: &BitString, alpha_max: u32) -> Result<StructureCurve> {
        let models = enumerate_models(x, alpha_max, &self.opts)?;
        let scored: Vec<ScoredModel> = models
            .par_iter()
            .map(|d| {
                Ok(ScoredModel {
                    len: d.len() as u32,
                    log_real: d.log_size_real(),
                    deficiency: self.deficiency_within_cap(x, d)?,
                })
            })
            .collect::<Result<_>>()?;
        let skipped = scored.iter().filter(|s| s.deficiency.is_none()).count();
        let mut rows = Vec::new();
        for alpha in 1..=alpha_max {
            let within: Vec<&ScoredModel> = scored.iter().filter(|s| s.len < alpha).collect();
            if within.is_empty() {
                continue;
            }
            let h = within.iter().map(|s| s.log_real).fold(f64::INFINITY, f64::min);
            let defs = within.iter().filter_map(|s| s.deficiency.as_ref());
            let beta = defs.clone().map(|d| d.delta_norm).min();
            let beta_star = defs.map(|d| d.delta_star_norm).min();
            rows.push(CurveRow { alpha, h, beta, beta_star, lambda: h + alpha as f64 });
        }
        Ok(StructureCurve { x: x.clone(), rows, models: models.len(), skipped })
    }

    /// For every string of length `n`, the least `alpha` in the grid with
    /// `beta_star(alpha) <= beta`.
    pub fn nonstoch_scan(&self, n: usize, alpha_grid: &[u32], beta: i64) -> Result<ScanReport> {
        if n > 12 {
            return Err(Error::CapExceeded { what: format!("scan length {n}"), cap: 12 });
        }
        let mut grid = alpha_grid.to_vec();
        grid.sort_unstable();
        grid.dedup();
        let top = *grid.last().ok_or_else(|| Error::Parse("empty alpha grid".into()))?;
        let strings: Vec<BitString> = BitString::all_of_len(n).collect();
        let minimal: Vec<Option<u32>> = strings
            .par_iter()
            .map(|x| {
                let mut best: Option<u32> = None;
                for d in enumerate_models(x, top, &self.opts)? {
                    if let Some(r) = self.deficiency_within_cap(x, &d)? {
                        if r.delta_star_norm <= beta {
                            let len = d.len() as u32;
                            let alpha = grid.iter().copied().find(|&a| len < a);
                            best = match (best, alpha) {
                                (Some(b), Some(a)) => Some(b.min(a)),
                                (b, a) => b.or(a),
                            };
                        }
                    }
                }
                Ok(best)
            })
            .collect::<Result<_>>()?;
        let mut histogram = BTreeMap::new();
        for m in &minimal {
            *histogram.entry(*m).or_insert(0u64) += 1;
        }
        let worst = minimal.iter().flatten().max().copied();
        let argmax = strings.iter().zip(&minimal).filter(|(_, m)| m.is_some() && **m == worst).map(|(x, _)| x.clone()).collect();
        let per_string = strings.into_iter().zip(minimal).collect();
        Ok(ScanReport { n, beta, grid, per_string, histogram, argmax })
    }
}

struct ScoredModel {
    len: u32,
    log_real: f64,
    deficiency: Option<DeficiencyRecord>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CurveRow {
    pub alpha: u32,
    /// Least `log2 |S|` over models with `len < alpha`.
    pub h: f64,
    /// Least normalized deficiency over those models; `None` when every set was too large to materialize.
    pub beta: Option<i64>,
    pub beta_star: Option<i64>,
    pub lambda: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StructureCurve {
    pub x: BitString,
    pub rows: Vec<CurveRow>,
    /// Number of enumerated models.
    pub models: usize,
    /// Models above the materialization cap, counted for `h` only.
    pub skipped: usize,
}

impl StructureCurve {
    pub fn row(&self, alpha: u32) -> Option<&CurveRow> {
        self.rows.iter().find(|r| r.alpha == alpha)
    }

    pub fn to_csv(&self) -> String {
        let opt = |v: Option<i64>| v.map_or("nan".to_string(), |v| format!("{:.9}", v as f64));
        let mut s = String::from("alpha,h,beta,beta_star,lambda\n");
        for r in &self.rows {
            writeln!(s, "{},{:.9},{},{},{:.9}", r.alpha, r.h, opt(r.beta), opt(r.beta_star), r.lambda).unwrap();
        }
        s
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScanReport {
    pub n: usize,
    pub beta: i64,
    pub grid: Vec<u32>,
    /// Least qualifying grid point per string, `None` if no grid point qualifies.
    pub per_string: Vec<(BitString, Option<u32>)>,
    pub histogram: BTreeMap<Option<u32>, u64>,
    /// Strings attaining the largest least `alpha`.
    pub argmax: Vec<BitString>,
}

/// Which descriptions count as candidates for a sufficient statistic.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ModelClass {
    #[default]
    Any,
    HammingOnly,
}

impl ModelClass {
    pub fn contains(&self, d: &SetDescription) -> bool {
        match self {
            ModelClass::Any => true,
            ModelClass::HammingOnly => matches!(d, SetDescription::Hamming { .. }),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SuffStat {
    /// Least two-part length over all enumerated models.
    pub lambda_min: u64,
    /// Least two-part length within the class.
    pub class_lambda_min: Option<u64>,
    /// Class members with `two_part <= lambda_min + beta`, in code order.
    pub optimal: Vec<SetDescription>,
    /// Shortest optimal description, ties broken by code.
    pub minimal: Option<SetDescription>,
}

impl SuffStat {
    /// False when the class holds no description within `beta` of `lambda_min`.
    pub fn found(&self) -> bool {
        self.minimal.is_some()
    }
}

pub fn suffstat(x: &BitString, beta: u64, alpha_max: u32, class: ModelClass, opts: &ModelOptions) -> Result<SuffStat> {
    let models = enumerate_models(x, alpha_max, opts)?;
    let lambda_min = models
        .iter()
        .map(two_part)
        .min()
        .ok_or_else(|| Error::InvalidModel(format!("no model of {x} shorter than {alpha_max} bits")))?;
    let in_class: Vec<&SetDescription> = models.iter().filter(|d| class.contains(d)).collect();
    let class_lambda_min = in_class.iter().map(|d| two_part(d)).min();
    let optimal: Vec<SetDescription> =
        in_class.into_iter().filter(|d| two_part(d) <= lambda_min + beta).cloned().collect();
    // Models come in code order, which is (len, lexicographic).
    let minimal = optimal.first().cloned();
    Ok(SuffStat { lambda_min, class_lambda_min, optimal, minimal })
}

/// Whether some model of at most `alpha` bits contains `x` with
/// `K(x) >= ⌈log2 |S|⌉ − beta`. Models are those of the restricted grammar.
pub fn stochastic(src: &impl KSource, x: &BitString, alpha: u32, beta: u64, opts: &ModelOptions) -> Result<bool> {
    let kx = src.k(x).ok_or_else(|| Error::Absent { x: x.to_string(), cap: src.cap() })? as u64;
    let models = enumerate_models(x, alpha + 1, opts)?;
    Ok(models.iter().any(|d| d.log_size() <= kx + beta))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bits::bs;
    use crate::enumerate::build_table;
    use crate::machine::Budgets;
    use crate::models_set::desc::SetDescription::*;

    fn analyzer_parts() -> (Oracle, ModelOptions) {
        (Oracle::new(Budgets::default()), ModelOptions::default())
    }

    #[test]
    fn two_part_examples() {
        assert_eq!(two_part(&All(8)), 17);
        assert_eq!(two_part(&Singleton(bs("01100111"))), 17);
        assert_eq!(two_part(&Hamming { n: 8, s: 4 }), 22);
    }

    #[test]
    fn singleton_deficiency_is_zero() {
        let (o, opts) = analyzer_parts();
        let a = SetAnalyzer::new(&o, opts);
        let r = a.deficiency(&bs("0110"), &Singleton(bs("0110"))).unwrap();
        assert_eq!((r.log_size, r.delta_norm, r.delta_star_norm), (0, 0, 0));
        assert!(a.deficiency(&bs("0111"), &Singleton(bs("0110"))).is_err());
    }

    #[test]
    fn model_condition_closed_form() {
        // Every program using SFDECODE is at least 7 + c bits, so
        // K(y | S) = min(K(y), 7 + c) for members y.
        let (o, opts) = analyzer_parts();
        for desc in [All(5), Hamming { n: 6, s: 2 }, "list{0,11,101}".parse().unwrap()] {
            let cond = uniform_condition(&desc, opts.denote_cap).unwrap();
            let c = desc.log_size() as u32;
            for y in desc.denote(1 << 10).unwrap() {
                let k = o.k_given(&y, &Condition::None).unwrap();
                assert_eq!(o.k_given(&y, &cond).unwrap(), k.min(7 + c), "{y} in {desc}");
            }
        }
    }

    #[test]
    fn deficiency_is_nonnegative() {
        let (o, opts) = analyzer_parts();
        let a = SetAnalyzer::new(&o, opts);
        for x in BitString::all_of_len(5) {
            for d in enumerate_models(&x, 14, &opts).unwrap() {
                let r = a.deficiency(&x, &d).unwrap();
                assert!(r.delta_norm >= 0 && r.delta_star_norm >= 0, "{x} in {d}");
            }
        }
    }

    #[test]
    fn regular_string_is_atypical_only_under_star_condition() {
        let (o, opts) = analyzer_parts();
        let a = SetAnalyzer::new(&o, opts);
        assert_eq!(o.k_given(&bs("01100111"), &Condition::None).unwrap(), 19);
        let regular = a.deficiency(&bs("01010101"), &All(8)).unwrap();
        let random = a.deficiency(&bs("01100111"), &All(8)).unwrap();
        // Under the Model condition both costs saturate at 7 + 8.
        assert_eq!((regular.k_cond_set, random.k_cond_set), (15, 15));
        assert_eq!(regular.delta_norm, 0);
        assert_eq!(random.delta_norm, 0);
        assert!(regular.delta_star_norm >= random.delta_star_norm + 4);
    }

    #[test]
    fn structure_function_shape() {
        let (o, opts) = analyzer_parts();
        let a = SetAnalyzer::new(&o, opts);
        let x = bs("01100111");
        let curve = a.structfn(&x, 20).unwrap();
        assert_eq!(curve.row(10).unwrap().h, 8.0);
        assert_eq!(curve.row(18).unwrap().h, 0.0);
        assert!(curve.row(9).is_none());
        for w in curve.rows.windows(2) {
            assert!(w[1].h <= w[0].h);
            assert!(w[1].beta <= w[0].beta || w[0].beta.is_none());
            assert!(w[1].beta_star <= w[0].beta_star || w[0].beta_star.is_none());
        }
        let csv = curve.to_csv();
        assert!(csv.starts_with("alpha,h,beta,beta_star,lambda\n10,8.000000000,"));
    }

    #[test]
    fn lambda_tracks_two_part() {
        let (o, opts) = analyzer_parts();
        let a = SetAnalyzer::new(&o, opts);
        let x = bs("0110");
        let curve = a.structfn(&x, 16).unwrap();
        let models = enumerate_models(&x, 16, &opts).unwrap();
        for r in &curve.rows {
            let best = models.iter().filter(|d| (d.len() as u32) < r.alpha).map(|d| d.log_size_real()).fold(f64::INFINITY, f64::min);
            assert_eq!(r.h, best);
        }
    }

    #[test]
    fn sufficient_statistics() {
        let opts = ModelOptions::default();
        let s = suffstat(&bs("01100111"), 0, 24, ModelClass::Any, &opts).unwrap();
        assert_eq!(s.lambda_min, 17);
        assert!(s.optimal.contains(&All(8)) && s.optimal.contains(&Singleton(bs("01100111"))));
        assert_eq!(s.minimal, Some(All(8)));

        let h = suffstat(&bs("01010101"), 0, 24, ModelClass::HammingOnly, &opts).unwrap();
        assert_eq!(h.class_lambda_min, Some(22));
        assert!(!h.found());

        let wide = suffstat(&bs("0110"), 1000, 24, ModelClass::Any, &opts).unwrap();
        assert_eq!(wide.optimal.len(), enumerate_models(&bs("0110"), 24, &opts).unwrap().len());
    }

    #[test]
    fn stochasticity() {
        let t = build_table(21, &Condition::None, &Budgets::default()).unwrap();
        let opts = ModelOptions::default();
        let x = bs("01100111");
        assert!(stochastic(&t, &x, 17, 0, &opts).unwrap());
        assert!(stochastic(&t, &x, 9, 0, &opts).unwrap());
        assert!(!stochastic(&t, &x, 3, 100, &opts).unwrap());
        let short = build_table(9, &Condition::None, &Budgets::default()).unwrap();
        assert!(matches!(stochastic(&short, &x, 9, 0, &opts), Err(Error::Absent { .. })));
    }

    #[test]
    fn scan_small() {
        let (o, opts) = analyzer_parts();
        let a = SetAnalyzer::new(&o, opts);
        let grid: Vec<u32> = (1..=12).collect();
        let r = a.nonstoch_scan(4, &grid, 0).unwrap();
        for (x, m) in &r.per_string {
            let singleton = Singleton(x.clone()).len() as u32;
            assert!(m.is_some_and(|m| m <= singleton + 1), "{x}: {m:?}");
        }
        assert_eq!(r, a.nonstoch_scan(4, &grid, 0).unwrap());
    }
}
