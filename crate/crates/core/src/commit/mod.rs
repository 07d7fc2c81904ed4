//! Pedersen commitments over a safe-prime group and range proofs for
//! committed counts.

mod group;
mod range_proof;
mod wire;

pub use group::{Commitment, CommitmentKey, RFC2409_GROUP2_PRIME};
pub use range_proof::{
    prove_range, prove_range_unchecked, verify_range, verify_range_bytes, BitProof,
    RangeDecomposition, RangeProof, CHALLENGE_BITS,
};

use thiserror::Error;

/// Domain-separation tags hashed into every transcript. They are part of
/// the wire contract: changing one invalidates all existing proofs.
pub mod tags {
    pub const BASE_H: &[u8] = b"fairagg/pedersen/base-h/v1";
    pub const RANGE_PROOF: &[u8] = b"fairagg/range-proof/v1";
    pub const RANGE_BIT: &[u8] = b"fairagg/range-proof/bit/v1";
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CommitError {
    #[error("committed value must be below the group order")]
    ValueOutOfGroup,
    #[error("cannot aggregate an empty list of commitments")]
    EmptyAggregate,
    #[error("value {value} is outside [0, {bound}]; refusing to prove")]
    OutOfRange { value: u64, bound: u64 },
    #[error("invalid group parameters: {0}")]
    InvalidGroup(String),
    #[error("malformed proof: {0}")]
    Malformed(String),
    #[error("proof rejected: {0}")]
    Rejected(String),
}

impl CommitError {
    /// True for both flavours of verification failure.
    pub fn is_rejection(&self) -> bool {
        matches!(self, CommitError::Malformed(_) | CommitError::Rejected(_))
    }
}

pub type Result<T> = std::result::Result<T, CommitError>;
