//! Exact algorithmic statistics on the small total prefix machine `tpm1-v1`.

pub mod bits;
pub mod codebook;
pub mod complexity;
pub mod dyadic;
pub mod enumerate;
pub mod error;
pub mod infolaws;
pub mod laws;
pub mod machine;
pub mod models_prob;
pub mod models_set;
pub mod skstats;

pub use bits::BitString;
pub use error::{Error, Result};
