//! Finite probability distributions as models: DistLang descriptions,
//! exact masses, Shannon–Fano codebooks and distribution statistics.

pub mod dist;
pub mod stats;

pub use dist::{ceil_neglog, neglog_of, DistDescription, Ratio};
pub use stats::{
    bernoulli_demo, deficiency_p, enumerate_dists, pk, quasistochastic, suffstat_p, two_part_p, BernoulliRow,
    DistClass, DistDeficiency, DistOptions, SuffStatP,
};
