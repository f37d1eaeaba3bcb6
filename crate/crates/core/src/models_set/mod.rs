//! Finite-set models: the SetLang description language, deficiency,
//! two-part codes, structure functions and sufficient statistics.

pub mod desc;
pub mod search;

pub use desc::SetDescription;
pub use search::{enumerate_models, ModelOptions};
pub mod stats;
pub use stats::{
    star_condition, stochastic, suffstat, two_part, uniform_condition, CurveRow, DeficiencyRecord, ModelClass,
    ScanReport, SetAnalyzer, StructureCurve, SuffStat,
};
