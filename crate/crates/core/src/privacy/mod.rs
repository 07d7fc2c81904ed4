//! Laplace noise, composition accounting and the closed-form privacy and
//! accuracy bounds used to configure and report on a run.

mod accountant;
mod bounds;
mod noise;

pub use accountant::{compose, PrivacyAccountant};
pub use bounds::{
    accuracy_bound, defense_scale, protocol_epsilon, reported_epsilon, verification_lower_bound,
    DefenseConfig, ROUNDING_INFLATION,
};
pub use noise::{sample_discrete_laplace, sample_laplace, NoiseSpec, DEGENERATE_SCALE};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PrivacyError {
    #[error("{0}")]
    Domain(String),
    #[error("privacy budget exhausted: charging round {round} would reach epsilon {attempted} > cap {cap}")]
    BudgetExhausted {
        round: u64,
        attempted: f64,
        cap: f64,
    },
    #[error("malformed accountant state: {0}")]
    Malformed(String),
}

pub type Result<T> = std::result::Result<T, PrivacyError>;

pub(crate) fn require(ok: bool, what: impl FnOnce() -> String) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(PrivacyError::Domain(what()))
    }
}
