use std::collections::BTreeSet;

use num_bigint::BigUint;
use serde::{Deserialize, Serialize};

use super::{NetsimError, Result};
use crate::commit::CommitmentKey;
use crate::crypto::PublicKey;
use crate::protocol::{MessageBody, MessageKind, Participant, ProtocolMessage};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ThreatModel {
    HonestButCurious,
    Malicious,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Strategy {
    /// Adds `amount` to one encrypted statistic; the committed value stays
    /// truthful.
    InflateCount { amount: u64, statistic: usize },
    /// Commits to and encrypts `m_i + 1` for one statistic and forges the
    /// range proof.
    OutOfRange { statistic: usize },
    /// Follows the protocol and records everything it can see.
    TranscriptCapture,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AdversaryConfig {
    pub model: ThreatModel,
    pub corrupted: BTreeSet<u32>,
    pub strategy: Strategy,
}

impl AdversaryConfig {
    pub fn new(
        model: ThreatModel,
        corrupted: impl IntoIterator<Item = u32>,
        strategy: Strategy,
    ) -> Self {
        Self {
            model,
            corrupted: corrupted.into_iter().collect(),
            strategy,
        }
    }

    /// Checks indices and the threshold `t < n/2` (honest-but-curious) or
    /// `t < n/3` (malicious).
    pub fn validate(&self, n: usize) -> Result<()> {
        if let Some(&i) = self.corrupted.iter().find(|&&i| i == 0 || i as usize > n) {
            return Err(NetsimError::Rejected(format!(
                "corrupted index {i} outside 1..={n}"
            )));
        }
        let t = self.corrupted.len();
        let (ok, bound) = match self.model {
            ThreatModel::HonestButCurious => (2 * t < n, "n/2"),
            ThreatModel::Malicious => (3 * t < n, "n/3"),
        };
        if !ok {
            return Err(NetsimError::Rejected(format!(
                "{t} corrupted parties out of {n} violates t < {bound} for the {:?} model",
                self.model
            )));
        }
        let active = !matches!(self.strategy, Strategy::TranscriptCapture);
        if active && self.model == ThreatModel::HonestButCurious {
            return Err(NetsimError::Rejected(
                "honest-but-curious parties cannot deviate from the protocol".into(),
            ));
        }
        Ok(())
    }

    pub fn is_corrupted(&self, index: u32) -> bool {
        self.corrupted.contains(&index)
    }
}

/// Rewrites the behaviour of every corrupted participant.
pub fn apply_adversary(config: &AdversaryConfig, participants: &mut [Participant]) -> Result<()> {
    config.validate(participants.len())?;
    for p in participants
        .iter_mut()
        .filter(|p| config.corrupted.contains(&p.index))
    {
        match config.strategy {
            Strategy::InflateCount { amount, statistic } => {
                let slot = p.claimed.get_mut(statistic).ok_or_else(|| {
                    NetsimError::Rejected(format!("statistic {statistic} out of range"))
                })?;
                *slot += amount;
            }
            Strategy::OutOfRange { statistic } => {
                if statistic >= p.claimed.len() {
                    return Err(NetsimError::Rejected(format!(
                        "statistic {statistic} out of range"
                    )));
                }
                let m = p.bound();
                p.claimed[statistic] = m + 1;
                p.committed[statistic] = m + 1;
                p.forge_proofs = true;
            }
            Strategy::TranscriptCapture => {}
        }
    }
    Ok(())
}

/// Everything the corrupted parties receive, send or can read from public
/// broadcasts.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CapturedView {
    pub messages: Vec<ProtocolMessage>,
}

pub fn capture_view(config: &AdversaryConfig, transcript: &[ProtocolMessage]) -> CapturedView {
    let visible = |m: &ProtocolMessage| {
        config.is_corrupted(m.sender)
            || config.is_corrupted(m.recipient)
            || matches!(
                m.body.kind(),
                MessageKind::CommitmentBroadcast | MessageKind::Abort
            )
    };
    CapturedView {
        messages: transcript.iter().filter(|m| visible(m)).cloned().collect(),
    }
}

/// A plaintext found in the clear or behind trivial randomness.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Leak {
    pub message: usize,
    pub value: BigUint,
}

impl CapturedView {
    /// Message kinds present in the view.
    pub fn kinds(&self) -> BTreeSet<MessageKind> {
        self.messages.iter().map(|m| m.body.kind()).collect()
    }

    /// Tries to recover any of `secrets` without keys: as a raw integer
    /// field, as a ciphertext with unit randomness `1 + m·N`, or as a
    /// commitment with zero blinding `g^m`.
    pub fn recover(&self, pk: &PublicKey, ck: &CommitmentKey, secrets: &[BigUint]) -> Vec<Leak> {
        let n = pk.modulus();
        let n_sq = pk.modulus_squared();
        let mut leaks = Vec::new();
        for (i, m) in self.messages.iter().enumerate() {
            let fields = integer_fields(&m.body);
            for s in secrets {
                let trivial_ct = (BigUint::from(1u32) + s * n) % n_sq;
                let trivial_com = ck.base_g().modpow(s, ck.group_modulus());
                if fields
                    .iter()
                    .any(|f| *f == s || **f == trivial_ct || **f == trivial_com)
                {
                    leaks.push(Leak {
                        message: i,
                        value: s.clone(),
                    });
                }
            }
        }
        leaks
    }
}

fn integer_fields(body: &MessageBody) -> Vec<&BigUint> {
    match body {
        MessageBody::StatSubmission { ciphertexts }
        | MessageBody::DecryptionRequest { ciphertexts }
        | MessageBody::TreeForward { ciphertexts, .. } => {
            ciphertexts.iter().map(|c| c.value()).collect()
        }
        MessageBody::CommitmentBroadcast {
            commitments,
            proofs,
            noise_commitments,
            ..
        } => {
            let mut out: Vec<&BigUint> = commitments
                .iter()
                .chain(noise_commitments)
                .map(|c| c.value())
                .collect();
            for p in proofs {
                for side in [&p.value_side, &p.complement_side] {
                    out.push(&side.consistency_blinding);
                    for b in &side.bits {
                        out.extend([&b.commitment, &b.t0, &b.t1, &b.c0, &b.z0, &b.z1]);
                    }
                }
            }
            out
        }
        MessageBody::PartialDecryption { parts, .. } => parts.iter().map(|p| &p.value).collect(),
        MessageBody::BlindingReveal { blindings } => blindings.iter().collect(),
        MessageBody::Abort { .. } => Vec::new(),
    }
}
