//! The aggregation protocols as explicit message flows.
//!
//! * [`run_secure_aggregation`]: noised, encrypted submissions are summed
//!   homomorphically and opened by a k-of-n committee.
//! * [`run_batched_verification`]: the same ciphertexts are summed along a
//!   binary tree over batches, every node emitting a verification token.
//! * [`run_verified_aggregation`]: participants additionally commit to their
//!   statistics and prove them in range; the coordinator aborts on the
//!   lowest-indexed offender.
//!
//! Noise is drawn once, in [`prepare_submissions`]; every path consumes the
//! same submissions. All randomness comes from seeded per-party streams, so
//! a run is a pure function of its inputs and seed.

mod counters;
mod message;
mod secure_agg;
mod submission;
mod transcript;
mod tree;
mod verified;

pub use counters::OpCounters;
pub use message::{MessageBody, MessageKind, ProtocolMessage, AGGREGATOR};
pub use secure_agg::{
    fold_ciphertexts, release_metric, run_secure_aggregation, threshold_decrypt, AggregationRun,
};
pub use submission::{prepare_submissions, Participant, Submission};
pub use transcript::Transcript;
pub use tree::{
    naive_pairwise_verification, plan_tree, run_batched_verification, verify_tree, NodeRecord,
    TreeNode, TreePlan, TreeRun, DEFAULT_BATCH_SIZE,
};
pub use verified::{run_verified_aggregation, Consistency, VerifiedOutcome, VerifiedRun};

use thiserror::Error;

use crate::codec::CodecError;
use crate::commit::CommitError;
use crate::crypto::CryptoError;
use crate::fairness::FairnessError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ProtocolError {
    #[error(transparent)]
    Crypto(#[from] CryptoError),
    #[error(transparent)]
    Fairness(#[from] FairnessError),
    #[error(transparent)]
    Commit(#[from] CommitError),
    #[error("wire format: {0}")]
    Codec(String),
    #[error("verification token mismatch at level {level}, node {node}")]
    TokenMismatch { level: u32, node: u32 },
    #[error("tree plan covers {planned} participants, got {actual}")]
    PlanMismatch { planned: usize, actual: usize },
    #[error("invalid protocol configuration: {0}")]
    Config(String),
    #[error("key material is shared among {keys} parties, federation has {participants}")]
    KeyMismatch { keys: u32, participants: usize },
}

impl From<CodecError> for ProtocolError {
    fn from(e: CodecError) -> Self {
        ProtocolError::Codec(e.0)
    }
}

pub type Result<T> = std::result::Result<T, ProtocolError>;
