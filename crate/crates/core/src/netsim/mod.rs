//! Simulated network, adversary hooks and the attribute-inference attack.

mod adversary;
mod attack;
mod network;

pub use adversary::{
    apply_adversary, capture_view, AdversaryConfig, CapturedView, Leak, Strategy, ThreatModel,
};
pub use attack::{
    run_attribute_inference, AttackHistory, AttackResult, AttackScenario, Hypotheses,
    LikelihoodAttacker, PublicMetadata, TrialRow, WorstCase,
};
pub use network::{schedule, Delivery, DeliveryTrace, NetworkModel};

use thiserror::Error;

use crate::fairness::FairnessError;
use crate::protocol::ProtocolError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NetsimError {
    #[error("adversary configuration rejected: {0}")]
    Rejected(String),
    #[error(transparent)]
    Protocol(#[from] ProtocolError),
    #[error(transparent)]
    Fairness(#[from] FairnessError),
}

pub type Result<T> = std::result::Result<T, NetsimError>;
