//! Information laws: classical and algorithmic mutual information of joint
//! models, sufficiency in both senses, and the measured-constant audits.

pub mod audits;
pub mod joint;
pub mod prob;

pub use audits::{
    expected_mi_audit, nonincrease_audit, theta_suff_audit, ExpectedMiReport, NonincreaseRow, ThetaReport, ThetaRow,
    Transform,
};
pub use joint::{JointCell, JointFile, JointModel, Statistic, Theta};
pub use prob::{prior_sweep, prob_mi, prob_mi_of, prob_suff_check, MiReport, SufficiencyRow, TOLERANCE};
