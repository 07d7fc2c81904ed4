//! Typed protocol messages and their binary form.
//!
//! ```text
//! message   := len:u32 kind:u8 sender:u32 recipient:u32 timestamp:u64 body
//! cts       := key:u64 count:u16 int{count}
//! 0x01 StatSubmission      cts
//! 0x02 CommitmentBroadcast bound:u64 count:u16 (commitment proof noise_commitment){count}
//! 0x03 PartialDecryption   index:u32 count:u16 int{count}
//! 0x04 Abort               accused:u32 len:u16 reason:utf8[len]
//! 0x05 TreeForward         level:u32 node:u32 token:[u8; 32] cts
//! 0x06 BlindingReveal      count:u16 int{count}
//! 0x07 DecryptionRequest   cts
//! ```
//!
//! `len` counts the bytes after itself. Participant `i` is sender `i`; the
//! aggregator is sender 0.

use num_bigint::BigUint;
use serde::{Deserialize, Serialize};

use crate::bigint::hex_biguint_vec;
use crate::codec::{CodecError, Reader, Writer};
use crate::commit::{Commitment, RangeProof};
use crate::crypto::{Ciphertext, PartialDecryption};

pub const AGGREGATOR: u32 = 0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[repr(u8)]
pub enum MessageKind {
    StatSubmission = 0x01,
    CommitmentBroadcast = 0x02,
    PartialDecryption = 0x03,
    Abort = 0x04,
    TreeForward = 0x05,
    BlindingReveal = 0x06,
    DecryptionRequest = 0x07,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MessageBody {
    StatSubmission {
        ciphertexts: Vec<Ciphertext>,
    },
    CommitmentBroadcast {
        bound: u64,
        commitments: Vec<Commitment>,
        proofs: Vec<RangeProof>,
        noise_commitments: Vec<Commitment>,
    },
    PartialDecryption {
        index: u32,
        parts: Vec<PartialDecryption>,
    },
    Abort {
        accused: u32,
        reason: String,
    },
    TreeForward {
        level: u32,
        node: u32,
        #[serde(with = "hex_token")]
        token: [u8; 32],
        ciphertexts: Vec<Ciphertext>,
    },
    BlindingReveal {
        #[serde(with = "hex_biguint_vec")]
        blindings: Vec<BigUint>,
    },
    DecryptionRequest {
        ciphertexts: Vec<Ciphertext>,
    },
}

pub(crate) mod hex_token {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(t: &[u8; 32], s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&hex::encode(t))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<[u8; 32], D::Error> {
        let s = String::deserialize(d)?;
        let bytes = hex::decode(&s).map_err(serde::de::Error::custom)?;
        bytes
            .try_into()
            .map_err(|_| serde::de::Error::custom("token must be 32 bytes"))
    }
}

impl MessageBody {
    pub fn kind(&self) -> MessageKind {
        match self {
            MessageBody::StatSubmission { .. } => MessageKind::StatSubmission,
            MessageBody::CommitmentBroadcast { .. } => MessageKind::CommitmentBroadcast,
            MessageBody::PartialDecryption { .. } => MessageKind::PartialDecryption,
            MessageBody::Abort { .. } => MessageKind::Abort,
            MessageBody::TreeForward { .. } => MessageKind::TreeForward,
            MessageBody::BlindingReveal { .. } => MessageKind::BlindingReveal,
            MessageBody::DecryptionRequest { .. } => MessageKind::DecryptionRequest,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProtocolMessage {
    pub sender: u32,
    pub recipient: u32,
    pub logical_timestamp: u64,
    #[serde(flatten)]
    pub body: MessageBody,
}

fn count(n: usize) -> u16 {
    u16::try_from(n).expect("at most 65535 entries per message")
}

fn write_cts(w: &mut Writer, cts: &[Ciphertext]) {
    w.u64(cts.first().map_or(0, |c| c.key_fingerprint()))
        .u16(count(cts.len()));
    for c in cts {
        w.int(c.value());
    }
}

fn read_cts(r: &mut Reader<'_>) -> Result<Vec<Ciphertext>, CodecError> {
    let key = r.u64()?;
    let n = r.u16()?;
    (0..n)
        .map(|_| Ok(Ciphertext::from_parts(r.int()?, key)))
        .collect()
}

fn commit_err(e: crate::commit::CommitError) -> CodecError {
    CodecError(e.to_string())
}

impl ProtocolMessage {
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut w = Writer::new();
        w.u8(self.body.kind() as u8)
            .u32(self.sender)
            .u32(self.recipient)
            .u64(self.logical_timestamp);
        match &self.body {
            MessageBody::StatSubmission { ciphertexts }
            | MessageBody::DecryptionRequest { ciphertexts } => write_cts(&mut w, ciphertexts),
            MessageBody::CommitmentBroadcast {
                bound,
                commitments,
                proofs,
                noise_commitments,
            } => {
                assert!(
                    commitments.len() == proofs.len() && proofs.len() == noise_commitments.len()
                );
                w.u64(*bound).u16(count(commitments.len()));
                for ((c, p), nc) in commitments.iter().zip(proofs).zip(noise_commitments) {
                    c.write_to(&mut w);
                    p.write_to(&mut w);
                    nc.write_to(&mut w);
                }
            }
            MessageBody::PartialDecryption { index, parts } => {
                w.u32(*index).u16(count(parts.len()));
                for p in parts {
                    w.int(&p.value);
                }
            }
            MessageBody::Abort { accused, reason } => {
                w.u32(*accused)
                    .u16(count(reason.len()))
                    .bytes(reason.as_bytes());
            }
            MessageBody::TreeForward {
                level,
                node,
                token,
                ciphertexts,
            } => {
                w.u32(*level).u32(*node).bytes(token);
                write_cts(&mut w, ciphertexts);
            }
            MessageBody::BlindingReveal { blindings } => {
                w.u16(count(blindings.len()));
                for b in blindings {
                    w.int(b);
                }
            }
        }
        let body = w.into_bytes();
        let mut out = Vec::with_capacity(body.len() + 4);
        out.extend_from_slice(&(body.len() as u32).to_le_bytes());
        out.extend_from_slice(&body);
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, CodecError> {
        let mut r = Reader::new(bytes);
        let len = r.u32()? as usize;
        if len != r.remaining() {
            return Err(CodecError(format!(
                "length prefix {len}, {} bytes follow",
                r.remaining()
            )));
        }
        let kind = r.u8()?;
        let sender = r.u32()?;
        let recipient = r.u32()?;
        let logical_timestamp = r.u64()?;
        let body = match kind {
            0x01 => MessageBody::StatSubmission {
                ciphertexts: read_cts(&mut r)?,
            },
            0x02 => {
                let bound = r.u64()?;
                let n = r.u16()?;
                let mut commitments = Vec::with_capacity(n as usize);
                let mut proofs = Vec::with_capacity(n as usize);
                let mut noise_commitments = Vec::with_capacity(n as usize);
                for _ in 0..n {
                    commitments.push(Commitment::read_from(&mut r).map_err(commit_err)?);
                    proofs.push(RangeProof::read_from(&mut r).map_err(commit_err)?);
                    noise_commitments.push(Commitment::read_from(&mut r).map_err(commit_err)?);
                }
                MessageBody::CommitmentBroadcast {
                    bound,
                    commitments,
                    proofs,
                    noise_commitments,
                }
            }
            0x03 => {
                let index = r.u32()?;
                let n = r.u16()?;
                let parts = (0..n)
                    .map(|_| {
                        Ok(PartialDecryption {
                            index,
                            value: r.int()?,
                        })
                    })
                    .collect::<Result<_, CodecError>>()?;
                MessageBody::PartialDecryption { index, parts }
            }
            0x04 => {
                let accused = r.u32()?;
                let n = r.u16()? as usize;
                let reason = String::from_utf8(r.bytes(n)?.to_vec())
                    .map_err(|_| CodecError("abort reason is not UTF-8".into()))?;
                MessageBody::Abort { accused, reason }
            }
            0x05 => {
                let level = r.u32()?;
                let node = r.u32()?;
                let token = r.bytes(32)?.try_into().unwrap();
                MessageBody::TreeForward {
                    level,
                    node,
                    token,
                    ciphertexts: read_cts(&mut r)?,
                }
            }
            0x06 => {
                let n = r.u16()?;
                MessageBody::BlindingReveal {
                    blindings: (0..n).map(|_| r.int()).collect::<Result<_, _>>()?,
                }
            }
            0x07 => MessageBody::DecryptionRequest {
                ciphertexts: read_cts(&mut r)?,
            },
            other => return Err(CodecError(format!("unknown message kind {other:#04x}"))),
        };
        r.finish()?;
        Ok(Self {
            sender,
            recipient,
            logical_timestamp,
            body,
        })
    }

    pub fn wire_len(&self) -> usize {
        self.to_bytes().len()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::commit::{prove_range, CommitmentKey};
    use crate::crypto::keygen_seeded;
    use crate::rng;
    use num_bigint::BigInt;

    pub(crate) fn sample_messages() -> Vec<ProtocolMessage> {
        let (pk, _) = keygen_seeded(256, 1).unwrap();
        let mut r = rng::stream(1, "msg", 0);
        let cts: Vec<_> = (0..3)
            .map(|v| {
                pk.encrypt(&pk.encode_fixed(&BigInt::from(v), 1).unwrap(), &mut r)
                    .unwrap()
            })
            .collect();
        let ck = CommitmentKey::rfc2409_group2();
        let b = ck.random_scalar(&mut r);
        let com = ck.commit_u64(2, &b).unwrap();
        let proof = prove_range(&ck, 2, &b, 5, &mut r).unwrap();
        let bodies = vec![
            MessageBody::StatSubmission {
                ciphertexts: cts.clone(),
            },
            MessageBody::CommitmentBroadcast {
                bound: 5,
                commitments: vec![com.clone()],
                proofs: vec![proof],
                noise_commitments: vec![com],
            },
            MessageBody::PartialDecryption {
                index: 2,
                parts: vec![PartialDecryption {
                    index: 2,
                    value: BigUint::from(77u32),
                }],
            },
            MessageBody::Abort {
                accused: 3,
                reason: "range proof rejected".into(),
            },
            MessageBody::TreeForward {
                level: 1,
                node: 0,
                token: [7; 32],
                ciphertexts: cts.clone(),
            },
            MessageBody::BlindingReveal {
                blindings: vec![BigUint::from(0u32), BigUint::from(99u32)],
            },
            MessageBody::DecryptionRequest { ciphertexts: cts },
        ];
        bodies
            .into_iter()
            .enumerate()
            .map(|(i, body)| ProtocolMessage {
                sender: i as u32,
                recipient: AGGREGATOR,
                logical_timestamp: 10 + i as u64,
                body,
            })
            .collect()
    }

    #[test]
    fn every_kind_round_trips_in_binary_and_json() {
        for m in sample_messages() {
            let bytes = m.to_bytes();
            assert_eq!(bytes[4], m.body.kind() as u8);
            assert_eq!(
                u32::from_le_bytes(bytes[..4].try_into().unwrap()) as usize,
                bytes.len() - 4
            );
            assert_eq!(ProtocolMessage::from_bytes(&bytes).unwrap(), m);
            let json = serde_json::to_string(&m).unwrap();
            assert_eq!(serde_json::from_str::<ProtocolMessage>(&json).unwrap(), m);
        }
    }

    #[test]
    fn rejects_bad_length_kind_and_trailing_data() {
        let m = &sample_messages()[3];
        let mut bytes = m.to_bytes();
        bytes.push(0);
        assert!(ProtocolMessage::from_bytes(&bytes).is_err());
        let mut bytes = m.to_bytes();
        bytes[4] = 0x7f;
        assert!(ProtocolMessage::from_bytes(&bytes).is_err());
    }
}
