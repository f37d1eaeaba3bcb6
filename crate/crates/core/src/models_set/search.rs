//! Exhaustive enumeration of SetLang models containing a string.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use crate::bits::BitString;
use crate::complexity::codec::{nat_code_len, std_code_len};
use crate::error::{Error, Result};

use super::desc::SetDescription::{self, *};

/// Grammar restrictions for model enumeration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ModelOptions {
    /// Maximum union nesting depth.
    pub union_depth: usize,
    /// Maximum number of parts per union.
    pub union_width: usize,
    /// Maximum number of elements per list.
    pub list_cap: usize,
    /// Largest accepted `alpha_max`.
    pub bound: u32,
    /// Largest set that is materialized for deficiency queries.
    pub denote_cap: u64,
}

impl Default for ModelOptions {
    fn default() -> Self {
        ModelOptions { union_depth: 1, union_width: 3, list_cap: 4, bound: 40, denote_cap: 1 << 20 }
    }
}

impl ModelOptions {
    /// Whether a description lies in the restricted grammar.
    pub fn admits(&self, d: &SetDescription) -> bool {
        match d {
            Union(parts) => {
                parts.len() <= self.union_width
                    && d.union_depth() <= self.union_depth
                    && parts.iter().all(|p| !matches!(p, List(_)) && self.admits(p))
            }
            List(elems) => elems.len() <= self.list_cap,
            _ => true,
        }
    }
}

type CatalogKey = (usize, usize, ModelOptions);

/// [`non_list_sets`] memoized per process; the catalogue does not depend on
/// the string being modelled.
fn catalog(budget: usize, depth: usize, opts: &ModelOptions) -> Arc<Vec<SetDescription>> {
    static CATALOGS: OnceLock<Mutex<HashMap<CatalogKey, Arc<Vec<SetDescription>>>>> = OnceLock::new();
    let map = CATALOGS.get_or_init(Mutex::default);
    let key = (budget, depth, *opts);
    if let Some(c) = map.lock().unwrap().get(&key) {
        return c.clone();
    }
    let built = Arc::new(non_list_sets(budget, depth, opts));
    map.lock().unwrap().entry(key).or_insert(built).clone()
}

/// Every non-list description of at most `budget` bits with union depth at
/// most `depth`, in code order.
fn non_list_sets(budget: usize, depth: usize, opts: &ModelOptions) -> Vec<SetDescription> {
    let mut out = atoms(budget);
    if depth > 0 {
        let parts = non_list_sets(budget, depth - 1, opts);
        out.extend(unions(&parts, budget, opts));
    }
    sort_by_code(&mut out);
    out
}

fn sort_by_code(v: &mut [SetDescription]) {
    let mut keyed: Vec<(BitString, SetDescription)> = v.iter().map(|d| (d.encode(), d.clone())).collect();
    keyed.sort_by(|a, b| a.0.cmp(&b.0));
    for (slot, (_, d)) in v.iter_mut().zip(keyed) {
        *slot = d;
    }
}

fn atoms(budget: usize) -> Vec<SetDescription> {
    let mut out = Vec::new();
    let mut l = 0;
    while 2 + std_code_len(l) <= budget {
        out.extend(BitString::all_of_len(l).map(Singleton));
        l += 1;
    }
    let mut n = 0u64;
    while 2 + nat_code_len(n) <= budget {
        out.push(All(n));
        n += 1;
    }
    let mut l = 0;
    while 3 + std_code_len(l) < budget {
        for prefix in BitString::all_of_len(l) {
            let mut n = l as u64;
            while 3 + std_code_len(l) + nat_code_len(n) <= budget {
                out.push(Cyl { prefix: prefix.clone(), n });
                n += 1;
            }
        }
        l += 1;
    }
    let mut n = 0u64;
    while 3 + nat_code_len(n) < budget {
        let mut s = 0;
        while s <= n && 3 + nat_code_len(n) + nat_code_len(s) <= budget {
            out.push(Hamming { n, s });
            s += 1;
        }
        n += 1;
    }
    out
}

/// Unions of 2..=width parts drawn in code order from `parts`.
fn unions(parts: &[SetDescription], budget: usize, opts: &ModelOptions) -> Vec<SetDescription> {
    let lens: Vec<usize> = parts.iter().map(SetDescription::len).collect();
    let mut out = Vec::new();
    for count in 2..=opts.union_width {
        let overhead = 3 + nat_code_len(count as u64);
        if overhead > budget {
            break;
        }
        let mut chosen = Vec::new();
        choose(&lens, 0, count, budget - overhead, &mut chosen, &mut |idx| {
            out.push(Union(idx.iter().map(|&i| parts[i].clone()).collect()))
        });
    }
    out
}

/// Calls `emit` for every strictly increasing index tuple of size `count`
/// starting at `from` whose costs sum to at most `budget`.
fn choose(
    costs: &[usize],
    from: usize,
    count: usize,
    budget: usize,
    chosen: &mut Vec<usize>,
    emit: &mut impl FnMut(&[usize]),
) {
    if count == 0 {
        emit(chosen);
        return;
    }
    for i in from..costs.len() {
        if costs[i] > budget {
            continue;
        }
        chosen.push(i);
        choose(costs, i + 1, count - 1, budget - costs[i], chosen, emit);
        chosen.pop();
    }
}

/// Lists containing `x` of at most `budget` bits.
fn lists_with(x: &BitString, budget: usize, opts: &ModelOptions) -> Vec<SetDescription> {
    let mut out = Vec::new();
    let own = std_code_len(x.len());
    for count in 1..=opts.list_cap {
        let overhead = 3 + nat_code_len(count as u64) + own;
        if overhead > budget {
            break;
        }
        let room = budget - overhead;
        let mut pool = Vec::new();
        let mut l = 0;
        while std_code_len(l) <= room {
            pool.extend(BitString::all_of_len(l).filter(|s| s != x));
            l += 1;
        }
        let costs: Vec<usize> = pool.iter().map(|s| std_code_len(s.len())).collect();
        let mut chosen = Vec::new();
        choose(&costs, 0, count - 1, room, &mut chosen, &mut |idx| {
            let mut elems: Vec<BitString> = idx.iter().map(|&i| pool[i].clone()).collect();
            elems.push(x.clone());
            out.push(SetDescription::list_of(elems));
        });
    }
    out
}

/// All descriptions in the restricted grammar with code length below
/// `alpha_max` whose set contains `x`, ordered by code.
pub fn enumerate_models(x: &BitString, alpha_max: u32, opts: &ModelOptions) -> Result<Vec<SetDescription>> {
    if alpha_max > opts.bound {
        return Err(Error::CapExceeded { what: format!("alpha_max {alpha_max}"), cap: opts.bound as u64 });
    }
    let Some(budget) = (alpha_max as usize).checked_sub(1) else {
        return Ok(Vec::new());
    };
    let mut out: Vec<SetDescription> = catalog(budget, opts.union_depth, opts)
        .iter()
        .filter(|d| d.member(x.bits()))
        .cloned()
        .collect();
    out.extend(lists_with(x, budget, opts));
    sort_by_code(&mut out);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bits::bs;
    use std::collections::BTreeSet;

    /// Decodes every bit string shorter than `alpha_max` and keeps the
    /// admitted descriptions that contain `x`.
    fn blind(x: &BitString, alpha_max: usize, opts: &ModelOptions) -> BTreeSet<BitString> {
        BitString::all_up_to(alpha_max - 1)
            .filter_map(|code| SetDescription::decode(&code).ok().map(|d| (code, d)))
            .filter(|(_, d)| opts.admits(d) && d.member(x.bits()))
            .map(|(code, _)| code)
            .collect()
    }

    #[test]
    fn matches_blind_enumeration() {
        let opts = ModelOptions::default();
        for (x, alpha) in [("", 14), ("0", 15), ("1011", 16), ("01", 16), ("111", 13)] {
            let x = bs(x);
            let got: Vec<BitString> =
                enumerate_models(&x, alpha, &opts).unwrap().iter().map(SetDescription::encode).collect();
            let expected = blind(&x, alpha as usize, &opts);
            assert!(got.windows(2).all(|w| w[0] < w[1]), "order for {x}");
            assert_eq!(got.into_iter().collect::<BTreeSet<_>>(), expected, "x = {x}, alpha = {alpha}");
        }
    }

    #[test]
    fn examples() {
        let opts = ModelOptions::default();
        let models = enumerate_models(&bs("1011"), 12, &opts).unwrap();
        assert!(models.contains(&All(4)));
        assert!(models.contains(&Singleton(bs("1011"))));
        assert!(enumerate_models(&bs("1011"), 3, &opts).unwrap().is_empty());
        assert!(enumerate_models(&bs(""), 3, &opts).unwrap().is_empty());
        assert!(enumerate_models(&bs(""), 41, &opts).is_err());
    }

    #[test]
    fn narrower_options_shrink_the_class() {
        let x = bs("01");
        let full = enumerate_models(&x, 16, &ModelOptions::default()).unwrap();
        let plain = ModelOptions { union_depth: 0, list_cap: 0, ..Default::default() };
        let atoms_only = enumerate_models(&x, 16, &plain).unwrap();
        assert!(atoms_only.len() < full.len());
        assert!(atoms_only.iter().all(|d| !matches!(d, Union(_) | List(_))));
        assert_eq!(atoms_only.iter().map(SetDescription::encode).collect::<BTreeSet<_>>(), blind(&x, 16, &plain));
    }
}
