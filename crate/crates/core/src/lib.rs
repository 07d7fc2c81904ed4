//! Verifiable group-fairness auditing for federations of data holders.
//!
//! Participants compute confusion-style counts over their local records, add
//! Laplace noise, encrypt them under an additively homomorphic threshold
//! cryptosystem and submit them for aggregation. The aggregate is decrypted
//! by a k-of-n committee and turned into demographic-parity and
//! equalized-odds violations. Malicious submissions are caught with Pedersen
//! commitments and range proofs; released metrics can be further noised to
//! bound attribute inference.
//!
//! The crate is organised bottom-up:
//!
//! * [`crypto`]: Paillier keys, fixed-point encoding, threshold decryption.
//! * [`commit`]: Pedersen commitments and exact range proofs.
//! * [`privacy`]: Laplace sampling, composition accounting, closed-form bounds.
//! * [`fairness`]: local statistics, global metrics, brute-force oracles.
//! * [`protocol`]: the aggregation, tree-verification and verified-aggregation
//!   state machines, wire format and op counters.
//! * [`netsim`]: network scheduling, adversary hooks and the inference attack.
//! * [`datagen`]: synthetic federations and the score oracle.
//! * [`experiment`]: configuration, presets and on-disk artifacts.

pub mod bigint;
pub mod codec;
pub mod commit;
pub mod crypto;
pub mod datagen;
pub mod experiment;
pub mod fairness;
pub mod netsim;
pub mod privacy;
pub mod protocol;
pub mod rng;

pub use commit::{Commitment, CommitmentKey, RangeProof};
pub use crypto::{
    Ciphertext, EncodedPlaintext, KeyMaterial, KeyShare, PartialDecryption, PublicKey, SecretKey,
};
pub use datagen::FederationConfig;
pub use experiment::ExperimentConfig;
pub use fairness::{AggregateStatistics, Dataset, FairnessReport, LocalStatistics, Record};
pub use privacy::{DefenseConfig, NoiseSpec, PrivacyAccountant};
pub use protocol::{OpCounters, ProtocolMessage, TreePlan};
