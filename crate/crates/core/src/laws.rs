//! Law audits against a file of frozen constants.
//!
//! Constants file: one `key = value` per line, `#` starts a comment. An
//! audit passes when its measured value is at most the frozen value plus
//! [`MARGIN`]. Exact checks carry no constant and pass or fail outright.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use rayon::prelude::*;

use crate::bits::BitString;
use crate::complexity::audit::{self_information_gap, soi_audit};
use crate::complexity::Oracle;
use crate::enumerate::TableCache;
use crate::error::{Error, Result};
use crate::infolaws::{
    expected_mi_audit, nonincrease_audit, theta_suff_audit, JointFile, JointModel, Statistic, ThetaReport, Transform,
};
use crate::machine::Condition;
use crate::models_prob::{bernoulli_demo, deficiency_p, pk};
use crate::models_set::{suffstat, two_part, ModelClass, ModelOptions, SetAnalyzer, SetDescription};
use crate::skstats::{level_gap, level_report, xr_bound_check};

/// Allowed regression over a frozen value, in bits.
pub const MARGIN: f64 = 1.0;

/// The constants file shipped with the crate.
pub const DEFAULT_CONSTANTS: &str = include_str!("../data/constants.txt");

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Constants {
    values: BTreeMap<String, f64>,
}

impl Constants {
    pub fn builtin() -> Constants {
        DEFAULT_CONSTANTS.parse().expect("shipped constants file parses")
    }

    pub fn get(&self, key: &str) -> Option<f64> {
        self.values.get(key).copied()
    }

    pub fn set(&mut self, key: &str, value: f64) {
        self.values.insert(key.to_string(), value);
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

impl FromStr for Constants {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        let mut values = BTreeMap::new();
        for (no, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap().trim();
            if line.is_empty() {
                continue;
            }
            let bad = || Error::Parse(format!("constants line {}: {raw:?}", no + 1));
            let (k, v) = line.split_once('=').ok_or_else(bad)?;
            let v: f64 = v.trim().parse().map_err(|_| bad())?;
            if values.insert(k.trim().to_string(), v).is_some() {
                return Err(Error::Parse(format!("constants line {}: duplicate key {}", no + 1, k.trim())));
            }
        }
        Ok(Constants { values })
    }
}

impl fmt::Display for Constants {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, v) in &self.values {
            writeln!(f, "{k} = {}", fmt_num(*v))?;
        }
        Ok(())
    }
}

fn fmt_num(v: f64) -> String {
    if v.fract() == 0.0 && v.abs() < 1e15 {
        format!("{}", v as i64)
    } else {
        format!("{v:.9}")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Check {
    /// A measured constant regressed against `frozen + MARGIN`.
    Frozen { measured: f64, frozen: Option<f64> },
    Exact { holds: bool },
}

#[derive(Debug, Clone, PartialEq)]
pub struct AuditLine {
    pub key: String,
    pub check: Check,
    pub detail: String,
}

impl AuditLine {
    fn frozen(key: &str, measured: f64, detail: String) -> AuditLine {
        AuditLine { key: key.to_string(), check: Check::Frozen { measured, frozen: None }, detail }
    }

    fn exact(key: impl Into<String>, holds: bool, detail: String) -> AuditLine {
        AuditLine { key: key.into(), check: Check::Exact { holds }, detail }
    }

    pub fn pass(&self) -> bool {
        match self.check {
            Check::Frozen { measured, frozen: Some(f) } => measured <= f + MARGIN,
            Check::Frozen { frozen: None, .. } => false,
            Check::Exact { holds } => holds,
        }
    }
}

impl fmt::Display for AuditLine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let verdict = if self.pass() { "PASS" } else { "FAIL" };
        write!(f, "{verdict} {}", self.key)?;
        match &self.check {
            Check::Frozen { measured, frozen } => {
                let frozen = frozen.map_or("unset".to_string(), fmt_num);
                write!(f, " measured={} frozen={frozen}", fmt_num(*measured))?;
            }
            Check::Exact { holds } => write!(f, " holds={holds}")?,
        }
        if !self.detail.is_empty() {
            write!(f, " {}", self.detail)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Audit {
    Soi,
    Triangle,
    SelfInfo,
    Nonincrease,
    ExpectedMi,
    Theta,
    Xr,
    Levels,
    BetaCal,
    Typical,
    Pk,
    Bernoulli,
}

impl Audit {
    pub const ALL: [Audit; 12] = [
        Audit::Soi,
        Audit::Triangle,
        Audit::SelfInfo,
        Audit::Nonincrease,
        Audit::ExpectedMi,
        Audit::Theta,
        Audit::Xr,
        Audit::Levels,
        Audit::BetaCal,
        Audit::Typical,
        Audit::Pk,
        Audit::Bernoulli,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Audit::Soi => "soi",
            Audit::Triangle => "triangle",
            Audit::SelfInfo => "self-info",
            Audit::Nonincrease => "nonincrease",
            Audit::ExpectedMi => "expected-mi",
            Audit::Theta => "theta",
            Audit::Xr => "xr",
            Audit::Levels => "levels",
            Audit::BetaCal => "beta-cal",
            Audit::Typical => "typical",
            Audit::Pk => "pk",
            Audit::Bernoulli => "bernoulli",
        }
    }
}

impl FromStr for Audit {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Audit::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| Error::Parse(format!("unknown audit {s:?}")))
    }
}

/// Sweep sizes for the audits.
#[derive(Debug, Clone, PartialEq)]
pub struct LawParams {
    pub soi_len_cap: usize,
    pub self_info_len_cap: usize,
    pub nonincrease_len_cap: usize,
    /// Length cap of the table behind the `S^k` audits.
    pub table_len: u32,
    /// Largest `k` whose `P^k` members are audited.
    pub pk_max_k: u32,
    /// Strings up to this length for the optimal-set audit.
    pub typical_len_cap: usize,
    pub alpha_max: u32,
    pub model_cap: u64,
}

impl Default for LawParams {
    fn default() -> Self {
        LawParams {
            soi_len_cap: 4,
            self_info_len_cap: 6,
            nonincrease_len_cap: 6,
            table_len: 22,
            pk_max_k: 15,
            typical_len_cap: 5,
            alpha_max: 24,
            model_cap: 1 << 16,
        }
    }
}

/// Joint models audited by the expected-information and θ audits.
pub const JOINTS: [(&str, &str); 4] = [
    ("singleton", "theta 0 1/1\ndist 0 table{1:1/1}\n"),
    ("correlated", "theta 0 1/2\ntheta 1 1/2\ndist 0 bern:1,1/4\ndist 1 bern:1,3/4\n"),
    ("independent", "theta 0 1/2\ntheta 1 1/2\ndist 0 bern:2,1/3\ndist 1 bern:2,1/3\n"),
    ("bernoulli", "theta 0 1/2\ntheta 1 1/2\ndist 0 bern:2,1/4\ndist 1 bern:2,3/4\n"),
];

fn joint(name: &str) -> JointModel {
    let text = JOINTS.iter().find(|(n, _)| *n == name).expect("known joint").1;
    text.parse::<JointFile>().expect("built-in joint parses").joint
}

/// Least `τ` such that cells with `θ`-deficiency at most `τ` carry at
/// least 0.9 of the mass.
pub fn theta_tau(report: &ThetaReport) -> i64 {
    let mut rows: Vec<_> = report.rows.iter().collect();
    rows.sort_by_key(|r| r.deficiency);
    let target = BigRational::new(9.into(), 10.into());
    let mut mass = BigRational::zero();
    for r in rows {
        mass += &r.p;
        if mass >= target {
            return r.deficiency;
        }
    }
    i64::MAX
}

pub struct LawRunner<'a> {
    pub oracle: &'a Oracle,
    pub cache: &'a TableCache,
    pub params: LawParams,
    pub models: ModelOptions,
}

impl LawRunner<'_> {
    /// Measures one audit; frozen values are filled in by [`apply_constants`].
    pub fn run(&self, audit: Audit) -> Result<Vec<AuditLine>> {
        let p = &self.params;
        let o = self.oracle;
        Ok(match audit {
            Audit::Soi => {
                let r = soi_audit(o, p.soi_len_cap)?;
                vec![AuditLine::frozen("soi.slack", r.max_slack as f64, format!("argmax=({},{})", r.argmax.0, r.argmax.1))]
            }
            Audit::Triangle => {
                let r = soi_audit(o, p.soi_len_cap)?;
                let (x, y, z) = &r.triangle_argmax;
                vec![AuditLine::frozen("triangle.c", r.triangle_c as f64, format!("argmax=({x},{y},{z})"))]
            }
            Audit::SelfInfo => {
                let (lo, hi) = self_information_gap(o, p.self_info_len_cap)?;
                vec![AuditLine::frozen("self-info.gap", lo.abs().max(hi.abs()) as f64, format!("range=[{lo},{hi}]"))]
            }
            Audit::Nonincrease => nonincrease_audit(o, &Transform::ALL, p.nonincrease_len_cap)?
                .into_iter()
                .map(|r| {
                    let (x, y) = r.argmax;
                    AuditLine::frozen(&format!("nonincrease.{}", r.transform.name()), r.max_deficit as f64, format!("argmax=({x},{y})"))
                })
                .collect(),
            Audit::ExpectedMi => {
                let mut lines = Vec::new();
                for (name, _) in JOINTS {
                    let r = expected_mi_audit(&joint(name), o, p.model_cap)?;
                    let detail = format!("expected={:.9} classical={:.9} model_len={}", r.expected, r.classical, r.model_len);
                    lines.push(AuditLine::frozen(&format!("expected-mi.{name}"), r.slack.abs(), detail));
                    lines.push(AuditLine::exact(format!("expected-mi.{name}.model-bounds"), r.within_model_bounds(), String::new()));
                }
                lines
            }
            Audit::Theta => self.theta_lines()?,
            Audit::Xr => {
                let table = self.table()?;
                xr_bound_check(&table)?
                    .into_iter()
                    .map(|r| {
                        let detail = format!("size={} sum={} bound={} slices={}", r.size, r.sum, r.bound, r.slices_hold);
                        AuditLine::exact(format!("xr.r{}", r.r), r.pass(), detail)
                    })
                    .collect()
            }
            Audit::Levels => {
                let table = self.table()?;
                let rows = level_report(&table, o)?;
                vec![AuditLine::frozen("levels.gap", level_gap(&rows), format!("L={}", table.max_len))]
            }
            Audit::BetaCal => self.beta_cal()?,
            Audit::Typical => self.typical()?,
            Audit::Pk => self.pk_lines()?,
            Audit::Bernoulli => Vec::new(),
        })
    }

    fn table(&self) -> Result<std::sync::Arc<crate::enumerate::ComplexityTable>> {
        Ok(self.cache.get_or_build(self.params.table_len, &Condition::None, self.oracle.budgets())?.0)
    }

    fn theta_lines(&self) -> Result<Vec<AuditLine>> {
        let o = self.oracle;
        let cap = self.params.model_cap;
        let bern = joint("bernoulli");
        let id = theta_suff_audit(&bern, &Statistic::Identity, o, 0, cap)?;
        let weight = theta_suff_audit(&bern, &Statistic::Weight, o, 0, cap)?;
        let corr = joint("correlated");
        let constant = theta_suff_audit(&corr, &Statistic::Constant, o, 0, cap)?;
        let worst = |r: &ThetaReport| r.sufficiency.iter().map(|s| (s.mi_data - s.mi_stat).abs()).fold(0.0, f64::max);
        Ok(vec![
            AuditLine::exact("theta.identity-zero", id.rows.iter().all(|r| r.deficiency == 0), String::new()),
            AuditLine::exact(
                "theta.weight-sufficient",
                weight.probabilistically_sufficient(),
                format!("priors={} max_gap={:.3e}", weight.sufficiency.len(), worst(&weight)),
            ),
            AuditLine::frozen("theta.tau", theta_tau(&weight) as f64, format!("expected_d={:.9}", weight.expected_deficiency)),
            AuditLine::frozen(
                "theta.claim-gap",
                id.max_abs_claim_gap.max(weight.max_abs_claim_gap) as f64,
                format!("identity={} weight={}", id.max_abs_claim_gap, weight.max_abs_claim_gap),
            ),
            AuditLine::exact(
                "theta.constant-insufficient",
                !constant.probabilistically_sufficient(),
                format!("tau={}", theta_tau(&constant)),
            ),
        ])
    }

    /// Normalized deficiency in `All(8)` of the length-8 strings of maximal K.
    fn beta_cal(&self) -> Result<Vec<AuditLine>> {
        let a = SetAnalyzer::new(self.oracle, self.models);
        let strings: Vec<BitString> = BitString::all_of_len(8).collect();
        let ks: Vec<u32> = strings.iter().map(|x| self.oracle.k_given(x, &Condition::None)).collect::<Result<_>>()?;
        let top = *ks.iter().max().expect("nonempty");
        let randoms: Vec<&BitString> = strings.iter().zip(&ks).filter(|(_, &k)| k == top).map(|(x, _)| x).collect();
        let norms: Vec<i64> = randoms
            .par_iter()
            .map(|x| Ok(a.deficiency(x, &SetDescription::All(8))?.delta_norm))
            .collect::<Result<_>>()?;
        let max = norms.iter().copied().max().unwrap_or(0);
        Ok(vec![AuditLine::frozen("beta-cal", max as f64, format!("strings={} K={top}", randoms.len()))])
    }

    /// Largest normalized deficiency of a model achieving the least
    /// two-part length.
    fn typical(&self) -> Result<Vec<AuditLine>> {
        let a = SetAnalyzer::new(self.oracle, self.models);
        let strings: Vec<BitString> = BitString::all_up_to(self.params.typical_len_cap).collect();
        let worst = strings
            .par_iter()
            .map(|x| {
                let s = suffstat(x, 0, self.params.alpha_max, ModelClass::Any, &self.models)?;
                let mut best: Option<(i64, SetDescription)> = None;
                for d in s.optimal.iter().filter(|d| two_part(d) == s.lambda_min) {
                    let n = a.deficiency(x, d)?.delta_norm;
                    if best.as_ref().is_none_or(|b| n > b.0) {
                        best = Some((n, d.clone()));
                    }
                }
                Ok(best.map(|(n, d)| (n, x.clone(), d)))
            })
            .collect::<Result<Vec<_>>>()?
            .into_iter()
            .flatten()
            .reduce(|a, b| if b.0 > a.0 { b } else { a });
        Ok(match worst {
            Some((n, x, d)) => vec![AuditLine::frozen("typical.optimal", n as f64, format!("argmax=({x},{d})"))],
            None => Vec::new(),
        })
    }

    fn pk_lines(&self) -> Result<Vec<AuditLine>> {
        let table = self.table()?;
        let ks: Vec<u32> = (0..=self.params.pk_max_k).collect();
        let mut worst: Option<(f64, u32, BitString)> = None;
        for k in ks {
            let Ok(dist) = pk(&table, k) else { continue };
            let members = dist.support(self.params.model_cap)?;
            let norms: Vec<(f64, BitString)> = members
                .par_iter()
                .map(|(x, _)| Ok((deficiency_p(self.oracle, x, &dist, self.params.model_cap)?.norm, x.clone())))
                .collect::<Result<_>>()?;
            for (n, x) in norms {
                if worst.as_ref().is_none_or(|w| n > w.0) {
                    worst = Some((n, k, x));
                }
            }
        }
        Ok(match worst {
            Some((n, k, x)) => vec![AuditLine::frozen("pk.norm", n, format!("argmax=(k={k},{x})"))],
            None => Vec::new(),
        })
    }

    /// Flags at `β = margin`: `(01)^4` flagged, some maximal-K weight-4
    /// string not flagged.
    pub fn bernoulli(&self, margin: u64) -> Result<Vec<AuditLine>> {
        let rows = bernoulli_demo(self.oracle, 8, margin, self.params.alpha_max, &self.models)?;
        let alt = BitString::from_vec([false, true].repeat(4));
        let alt_flagged = rows.iter().any(|r| r.x == alt && r.flagged);
        let top = rows.iter().filter(|r| r.weight == 4).map(|r| r.k).max().unwrap_or(0);
        let free: Vec<&BitString> = rows.iter().filter(|r| r.weight == 4 && r.k == top && !r.flagged).map(|r| &r.x).collect();
        Ok(vec![
            AuditLine::exact("bernoulli.alternating-flagged", alt_flagged, format!("beta={margin}")),
            AuditLine::exact(
                "bernoulli.random-unflagged",
                !free.is_empty(),
                format!("beta={margin} K={top} unflagged={}", free.len()),
            ),
        ])
    }
}

/// Fills the frozen values of measured lines from `constants`.
pub fn apply_constants(lines: &mut [AuditLine], constants: &Constants) {
    for l in lines {
        if let Check::Frozen { frozen, .. } = &mut l.check {
            *frozen = constants.get(&l.key);
        }
    }
}

/// Records measured values as the new frozen constants.
pub fn bless(lines: &[AuditLine], constants: &mut Constants) {
    for l in lines {
        if let Check::Frozen { measured, .. } = l.check {
            constants.set(&l.key, measured);
        }
    }
}

/// Runs audits and checks them against `constants`. The Bernoulli audit
/// reads its margin from the `bernoulli.margin` constant.
pub fn run_audits(runner: &LawRunner<'_>, audits: &[Audit], constants: &Constants) -> Result<Vec<AuditLine>> {
    let mut lines = Vec::new();
    for &a in audits {
        if a == Audit::Bernoulli {
            let margin = constants.get("bernoulli.margin").ok_or_else(|| Error::Parse("constants lack bernoulli.margin".into()))?;
            let margin = margin.to_u64().filter(|_| margin >= 0.0 && margin.fract() == 0.0);
            let margin = margin.ok_or_else(|| Error::Parse("bernoulli.margin must be a natural".into()))?;
            lines.extend(runner.bernoulli(margin)?);
        } else {
            lines.extend(runner.run(a)?);
        }
    }
    apply_constants(&mut lines, constants);
    Ok(lines)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::machine::Budgets;

    #[test]
    fn constants_round_trip() {
        let c: Constants = "# frozen\nsoi.slack = 4\n\ntheta.tau=1 # note\npk.norm = 0.5\n".parse().unwrap();
        assert_eq!(c.get("soi.slack"), Some(4.0));
        assert_eq!(c.get("pk.norm"), Some(0.5));
        assert_eq!(c.to_string().parse::<Constants>().unwrap(), c);
        assert!("a = 1\na = 2\n".parse::<Constants>().is_err());
        assert!("a 1\n".parse::<Constants>().is_err());
    }

    #[test]
    fn builtin_constants_parse() {
        let c = Constants::builtin();
        assert!(c.get("bernoulli.margin").is_some());
    }

    #[test]
    fn verdicts() {
        let mut line = AuditLine::frozen("k", 5.0, String::new());
        assert!(!line.pass());
        let mut c = Constants::default();
        c.set("k", 4.0);
        apply_constants(std::slice::from_mut(&mut line), &c);
        assert!(line.pass());
        c.set("k", 3.0);
        apply_constants(std::slice::from_mut(&mut line), &c);
        assert!(!line.pass());
        assert!(line.to_string().starts_with("FAIL k measured=5 frozen=3"));
    }

    #[test]
    fn audit_names_round_trip() {
        for a in Audit::ALL {
            assert_eq!(a.name().parse::<Audit>().unwrap(), a);
        }
    }

    #[test]
    fn small_audits_measure() {
        let o = Oracle::new(Budgets::default());
        let cache = TableCache::in_memory();
        let params = LawParams { soi_len_cap: 1, nonincrease_len_cap: 2, self_info_len_cap: 2, ..LawParams::default() };
        let r = LawRunner { oracle: &o, cache: &cache, params, models: ModelOptions::default() };
        let lines = r.run(Audit::Soi).unwrap();
        assert_eq!(lines.len(), 1);
        let theta = r.run(Audit::Theta).unwrap();
        for key in ["theta.identity-zero", "theta.weight-sufficient", "theta.constant-insufficient"] {
            assert!(theta.iter().find(|l| l.key == key).unwrap().pass(), "{key}");
        }
    }
}
