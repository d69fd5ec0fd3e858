//! Numeric checks of the concentration machinery behind the regret and batch
//! guarantees.
//!
//! Deterministic checks compare closed forms. Monte Carlo checks report an
//! estimate with its standard error and call a bound violated only when the
//! estimate exceeds it by more than three standard errors (the Hoeffding
//! check uses a 99% interval instead). No check asserts anything tighter than
//! the bound it tests.

use alloc::string::String;

mod martingale;
mod mgf;
mod misestimation;
mod tail;

pub use martingale::{stopped_tail_check, supermartingale_check, MartingaleEstimate};
pub use mgf::{centered_bernoulli_mgf, hoeffding_bound, hoeffding_mgf_check, hoeffding_mgf_exact};
pub use misestimation::{misestimation_check, MisestimationParams, THRESHOLD_CONSTANT};
pub use tail::{
    check_tail_sandwich, inverse_tail_threshold, q_function, q_inverse, tail_sandwich,
    TailCheckReport, TailPoint,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Verdict {
    Pass,
    Fail,
    /// The event cannot occur at this scale, so the check says nothing.
    Vacuous,
    /// Diagnostic value; no bound is claimed.
    Reported,
}

impl Verdict {
    pub fn as_str(&self) -> &'static str {
        match self {
            Verdict::Pass => "pass",
            Verdict::Fail => "fail",
            Verdict::Vacuous => "vacuous",
            Verdict::Reported => "reported",
        }
    }

    pub fn is_failure(&self) -> bool {
        *self == Verdict::Fail
    }
}

/// One line of a verification report.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckRow {
    pub check: String,
    pub parameters: String,
    pub estimate: f64,
    pub stderr: f64,
    pub bound: f64,
    pub verdict: Verdict,
    pub vacuous: bool,
}
