//! Experiment configuration, built-in presets and the end-to-end runner that
//! writes report, op-count, transcript, attack and sweep artifacts.

mod config;
mod presets;
mod runner;

pub use config::{
    AttackParams, DefenseParams, ExperimentConfig, PrivacyParams, ProtocolParams, Sweep,
};
pub use presets::{preset, PRESET_NAMES, TRADEOFF_EPSILONS};
pub use runner::{
    execute, preflight, run_attack, run_experiment, run_scaling_sweep, scaling_constant,
    AdversarySummary, AttackSummary, EpsilonRow, ExperimentReport, ExperimentRun, GroundTruth,
    LowerBoundCheck, ParticipantRow, PhaseTiming, Preflight, SweepResult, TreeSummary,
    VerifiedSummary, OPS_CSV_PHASE,
};

use thiserror::Error;

use crate::crypto::CryptoError;
use crate::datagen::DatagenError;
use crate::fairness::FairnessError;
use crate::netsim::NetsimError;
use crate::privacy::PrivacyError;
use crate::protocol::ProtocolError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ExperimentError {
    #[error("invalid experiment config: {0}")]
    Config(String),
    #[error(
        "epsilon {epsilon} is below the verification lower bound {required} for tau = {tau} \
         with group sizes n0 = {n0}, n1 = {n1}"
    )]
    LowerBound {
        epsilon: f64,
        required: f64,
        tau: f64,
        n0: u64,
        n1: u64,
    },
    #[error(transparent)]
    Datagen(#[from] DatagenError),
    #[error(transparent)]
    Fairness(#[from] FairnessError),
    #[error(transparent)]
    Protocol(#[from] ProtocolError),
    #[error(transparent)]
    Netsim(#[from] NetsimError),
    #[error(transparent)]
    Privacy(#[from] PrivacyError),
    #[error(transparent)]
    Crypto(#[from] CryptoError),
    #[error("i/o error: {0}")]
    Io(String),
}

impl ExperimentError {
    /// Stable machine-readable category.
    pub fn kind(&self) -> &'static str {
        match self {
            ExperimentError::Config(_) => "config",
            ExperimentError::LowerBound { .. } => "lower_bound_violation",
            ExperimentError::Datagen(_) => "datagen",
            ExperimentError::Fairness(_) => "fairness",
            ExperimentError::Protocol(_) => "protocol",
            ExperimentError::Netsim(_) => "adversary",
            ExperimentError::Privacy(_) => "privacy",
            ExperimentError::Crypto(_) => "crypto",
            ExperimentError::Io(_) => "io",
        }
    }
}

pub type Result<T> = std::result::Result<T, ExperimentError>;
