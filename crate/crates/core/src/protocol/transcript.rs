use super::{MessageBody, OpCounters, ProtocolMessage};

/// Message log and counters of a run. `logical_timestamp` is the round in
/// which a message is sent.
#[derive(Clone, Debug, Default)]
pub struct Transcript {
    counters: OpCounters,
    messages: Option<Vec<ProtocolMessage>>,
}

impl Transcript {
    /// Keeps every message when `store` is set; counts only otherwise.
    pub fn new(store: bool) -> Self {
        Self {
            counters: OpCounters::default(),
            messages: store.then(Vec::new),
        }
    }

    pub fn begin_round(&mut self) {
        self.counters.rounds += 1;
    }

    pub fn round(&self) -> u64 {
        self.counters.rounds
    }

    pub fn send(&mut self, sender: u32, recipient: u32, body: MessageBody) {
        let msg = ProtocolMessage {
            sender,
            recipient,
            logical_timestamp: self.counters.rounds,
            body,
        };
        self.counters.messages_sent += 1;
        self.counters.bytes_sent += msg.wire_len() as u64;
        if let Some(log) = &mut self.messages {
            log.push(msg);
        }
    }

    pub fn counters(&self) -> OpCounters {
        self.counters
    }

    pub fn counters_mut(&mut self) -> &mut OpCounters {
        &mut self.counters
    }

    pub fn messages(&self) -> &[ProtocolMessage] {
        self.messages.as_deref().unwrap_or(&[])
    }

    /// One JSON object per line, in send order.
    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for m in self.messages() {
            out.push_str(&serde_json::to_string(m).expect("message serializes"));
            out.push('\n');
        }
        out
    }
}

impl OpCounters {
    /// Fieldwise `self - earlier`, for counters of a later snapshot.
    pub fn since(&self, earlier: &OpCounters) -> OpCounters {
        let a = self.values();
        let b = earlier.values();
        let d: Vec<u64> = a.iter().zip(&b).map(|(x, y)| x - y).collect();
        OpCounters {
            homomorphic_additions: d[0],
            encryptions: d[1],
            decryptions: d[2],
            partial_decryptions: d[3],
            proofs_generated: d[4],
            proofs_verified: d[5],
            verification_ops: d[6],
            messages_sent: d[7],
            bytes_sent: d[8],
            rounds: d[9],
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::protocol::AGGREGATOR;

    #[test]
    fn bytes_sent_is_sum_of_wire_lengths() {
        let mut t = Transcript::new(true);
        t.begin_round();
        for i in 1..=3 {
            t.send(
                i,
                AGGREGATOR,
                MessageBody::Abort {
                    accused: i,
                    reason: "x".repeat(i as usize),
                },
            );
        }
        let total: usize = t.messages().iter().map(|m| m.to_bytes().len()).sum();
        assert_eq!(t.counters().bytes_sent, total as u64);
        assert_eq!(t.counters().messages_sent, 3);
        assert!(t.messages().iter().all(|m| m.logical_timestamp == 1));
        assert_eq!(t.to_jsonl().lines().count(), 3);
    }

    #[test]
    fn counting_only_transcript_keeps_no_messages() {
        let mut t = Transcript::new(false);
        t.send(1, 0, MessageBody::BlindingReveal { blindings: vec![] });
        assert!(t.messages().is_empty());
        assert_eq!(t.counters().messages_sent, 1);
        let snap = t.counters();
        t.begin_round();
        assert_eq!(t.counters().since(&snap).rounds, 1);
    }
}
