//! Joint parameter/data models `p(θ, x) = p1(θ) f_θ(x)` and statistics.
//!
//! Text format, one directive per line, `#` starts a comment:
//!
//! ```text
//! theta 0 1/2
//! theta 1 1/2
//! dist 0 bern:2,1/4
//! dist 1 bern:2,3/4
//! statistic weight
//! ```

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_rational::BigRational;
use num_traits::{One, Signed};

use crate::bits::BitString;
use crate::complexity::codec::{nat_code_len, std_code_len};
use crate::error::{Error, Result};
use crate::models_prob::{DistDescription, Ratio};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Theta {
    pub label: BitString,
    pub prior: Ratio,
    pub dist: DistDescription,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct JointModel {
    pub thetas: Vec<Theta>,
}

/// One positive-mass cell of the joint.
#[derive(Debug, Clone, PartialEq)]
pub struct JointCell {
    pub theta: usize,
    pub x: BitString,
    pub p: BigRational,
}

impl JointModel {
    pub fn new(thetas: Vec<Theta>) -> Result<JointModel> {
        let j = JointModel { thetas };
        j.validate()?;
        Ok(j)
    }

    pub fn validate(&self) -> Result<()> {
        if self.thetas.is_empty() {
            return Err(Error::InvalidModel("joint model has no parameters".into()));
        }
        let mut labels: Vec<&BitString> = self.thetas.iter().map(|t| &t.label).collect();
        labels.sort();
        if labels.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidModel("duplicate parameter label".into()));
        }
        let total: BigRational = self.thetas.iter().map(|t| t.prior.to_big()).sum();
        if total != BigRational::one() {
            return Err(Error::InvalidModel(format!("priors sum to {total}, not 1")));
        }
        Ok(())
    }

    /// Same parameters and distributions under another prior.
    pub fn with_prior(&self, prior: &[Ratio]) -> Result<JointModel> {
        if prior.len() != self.thetas.len() {
            return Err(Error::InvalidModel("prior has the wrong number of entries".into()));
        }
        let thetas = self.thetas.iter().zip(prior).map(|(t, &p)| Theta { prior: p, ..t.clone() }).collect();
        JointModel::new(thetas)
    }

    pub fn prior(&self) -> Vec<Ratio> {
        self.thetas.iter().map(|t| t.prior).collect()
    }

    /// Positive-mass cells, by parameter then canonical data order.
    pub fn cells(&self, cap: u64) -> Result<Vec<JointCell>> {
        let mut out = Vec::new();
        for (i, t) in self.thetas.iter().enumerate() {
            let prior = t.prior.to_big();
            for (x, m) in t.dist.support(cap)? {
                let p = &prior * m;
                if p.is_positive() {
                    out.push(JointCell { theta: i, x, p });
                }
            }
        }
        Ok(out)
    }

    /// Code length of the model, used as a stand-in for its complexity:
    /// the count, then per parameter its label, prior and distribution code.
    pub fn encoding_len(&self) -> usize {
        nat_code_len(self.thetas.len() as u64)
            + self
                .thetas
                .iter()
                .map(|t| std_code_len(t.label.len()) + nat_code_len(t.prior.num) + nat_code_len(t.prior.den) + t.dist.len())
                .sum::<usize>()
    }
}

/// Data-to-label functions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Statistic {
    Identity,
    Constant,
    /// The canonical string of the number of ones.
    Weight,
    Map(BTreeMap<BitString, BitString>),
}

impl Statistic {
    pub fn apply(&self, x: &BitString) -> Result<BitString> {
        match self {
            Statistic::Identity => Ok(x.clone()),
            Statistic::Constant => Ok(BitString::new()),
            Statistic::Weight => Ok(BitString::from_nat(x.weight() as u64)),
            Statistic::Map(m) => m.get(x).cloned().ok_or_else(|| Error::InvalidModel(format!("statistic undefined on {x}"))),
        }
    }
}

impl fmt::Display for Statistic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Statistic::Identity => f.write_str("identity"),
            Statistic::Constant => f.write_str("constant"),
            Statistic::Weight => f.write_str("weight"),
            Statistic::Map(m) => {
                f.write_str("map{")?;
                for (i, (k, v)) in m.iter().enumerate() {
                    if i > 0 {
                        f.write_str(",")?;
                    }
                    write!(f, "{k}:{v}")?;
                }
                f.write_str("}")
            }
        }
    }
}

impl FromStr for Statistic {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        match s {
            "identity" => return Ok(Statistic::Identity),
            "constant" => return Ok(Statistic::Constant),
            "weight" => return Ok(Statistic::Weight),
            _ => {}
        }
        let body = s
            .strip_prefix("map{")
            .and_then(|r| r.strip_suffix('}'))
            .ok_or_else(|| Error::Parse(format!("unknown statistic {s:?}")))?;
        let mut m = BTreeMap::new();
        for item in body.split(',').map(str::trim).filter(|i| !i.is_empty()) {
            let (k, v) = item.split_once(':').ok_or_else(|| Error::Parse(format!("bad map entry {item:?}")))?;
            if m.insert(k.trim().parse()?, v.trim().parse()?).is_some() {
                return Err(Error::Parse(format!("duplicate map key {k}")));
            }
        }
        Ok(Statistic::Map(m))
    }
}

/// A joint model with an optional statistic, as read from a file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct JointFile {
    pub joint: JointModel,
    pub statistic: Option<Statistic>,
}

fn parse_ratio(s: &str) -> Result<Ratio> {
    let (n, d) = s.split_once('/').unwrap_or((s, "1"));
    let bad = || Error::Parse(format!("bad fraction {s:?}"));
    Ratio::new(n.trim().parse().map_err(|_| bad())?, d.trim().parse().map_err(|_| bad())?)
}

impl FromStr for JointFile {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        let mut priors: Vec<(BitString, Ratio)> = Vec::new();
        let mut dists: BTreeMap<BitString, DistDescription> = BTreeMap::new();
        let mut statistic = None;
        for (no, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap().trim();
            if line.is_empty() {
                continue;
            }
            let at = |e: Error| Error::Parse(format!("line {}: {e}", no + 1));
            let (word, rest) = line.split_once(char::is_whitespace).unwrap_or((line, ""));
            let rest = rest.trim();
            match word {
                "theta" => {
                    let (label, prior) = rest.split_once(char::is_whitespace).ok_or_else(|| at(Error::Parse("expected label and prior".into())))?;
                    priors.push((label.parse().map_err(at)?, parse_ratio(prior.trim()).map_err(at)?));
                }
                "dist" => {
                    let (label, dist) = rest.split_once(char::is_whitespace).ok_or_else(|| at(Error::Parse("expected label and distribution".into())))?;
                    let label: BitString = label.parse().map_err(at)?;
                    if dists.insert(label.clone(), dist.parse().map_err(at)?).is_some() {
                        return Err(at(Error::Parse(format!("second distribution for {label}"))));
                    }
                }
                "statistic" => statistic = Some(rest.parse().map_err(at)?),
                other => return Err(at(Error::Parse(format!("unknown directive {other:?}")))),
            }
        }
        let mut thetas = Vec::new();
        for (label, prior) in priors {
            let dist = dists.remove(&label).ok_or_else(|| Error::Parse(format!("no distribution for parameter {label}")))?;
            thetas.push(Theta { label, prior, dist });
        }
        if let Some(extra) = dists.keys().next() {
            return Err(Error::Parse(format!("distribution for undeclared parameter {extra}")));
        }
        Ok(JointFile { joint: JointModel::new(thetas)?, statistic })
    }
}
