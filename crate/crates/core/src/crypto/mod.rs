//! Additively homomorphic public-key encryption with threshold decryption.
//!
//! The scheme is Paillier with generator `N + 1`. Plaintexts are signed
//! fixed-point values packed into `Z_N`; decryption can be split across a
//! committee of k-of-n key-share holders.

mod encoding;
mod keyfile;
mod paillier;
mod threshold;

pub use encoding::{EncodedPlaintext, DEFAULT_FIXED_POINT_SCALE, HEADROOM_FACTOR};
pub use keyfile::KeyMaterial;
pub use paillier::{keygen, keygen_seeded, Ciphertext, PublicKey, SecretKey, MIN_KEY_BITS};
pub use threshold::{combine, reconstruct_exponent, KeyShare, PartialDecryption};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CryptoError {
    #[error("key size {bits} rejected: must be even and at least {min}")]
    InsecureKeySize { bits: u32, min: u32 },
    #[error("fixed-point value exceeds encoding headroom (|v|*scale must be below modulus/{HEADROOM_FACTOR})")]
    Overflow,
    #[error("plaintext wrapped around the modulus; decoded value is ambiguous")]
    Wrap,
    #[error("non-finite value cannot be encoded")]
    NonFinite,
    #[error("plaintext is not reduced modulo the public modulus")]
    InvalidPlaintext,
    #[error("ciphertext is not a unit modulo N^2")]
    InvalidCiphertext,
    #[error("ciphertexts or shares were produced under different keys")]
    KeyMismatch,
    #[error("invalid threshold: k = {k}, n = {n} (need 1 <= k <= n)")]
    InvalidThreshold { k: u32, n: u32 },
    #[error("insufficient shares: have {have}, need {need}")]
    InsufficientShares { have: usize, need: usize },
    #[error("duplicate share index {0}")]
    DuplicateIndex(u32),
    #[error("share index {index} outside 1..={n}")]
    InvalidShareIndex { index: u32, n: u32 },
    #[error("malformed key material: {0}")]
    Malformed(String),
}

pub type Result<T> = std::result::Result<T, CryptoError>;
