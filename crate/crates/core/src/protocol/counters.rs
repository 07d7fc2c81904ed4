use serde::{Deserialize, Serialize};

/// Operation counts for one protocol phase. All fields only grow.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct OpCounters {
    pub homomorphic_additions: u64,
    pub encryptions: u64,
    pub decryptions: u64,
    pub partial_decryptions: u64,
    pub proofs_generated: u64,
    pub proofs_verified: u64,
    /// Inputs absorbed into verification tokens or pairwise checks.
    pub verification_ops: u64,
    pub messages_sent: u64,
    pub bytes_sent: u64,
    pub rounds: u64,
}

impl OpCounters {
    pub const CSV_HEADER: [&'static str; 10] = [
        "homomorphic_additions",
        "encryptions",
        "decryptions",
        "partial_decryptions",
        "proofs_generated",
        "proofs_verified",
        "verification_ops",
        "messages_sent",
        "bytes_sent",
        "rounds",
    ];

    pub fn values(&self) -> [u64; 10] {
        [
            self.homomorphic_additions,
            self.encryptions,
            self.decryptions,
            self.partial_decryptions,
            self.proofs_generated,
            self.proofs_verified,
            self.verification_ops,
            self.messages_sent,
            self.bytes_sent,
            self.rounds,
        ]
    }

    pub fn merge(&mut self, other: &OpCounters) {
        self.homomorphic_additions += other.homomorphic_additions;
        self.encryptions += other.encryptions;
        self.decryptions += other.decryptions;
        self.partial_decryptions += other.partial_decryptions;
        self.proofs_generated += other.proofs_generated;
        self.proofs_verified += other.proofs_verified;
        self.verification_ops += other.verification_ops;
        self.messages_sent += other.messages_sent;
        self.bytes_sent += other.bytes_sent;
        self.rounds += other.rounds;
    }

    pub fn merged(mut self, other: &OpCounters) -> Self {
        self.merge(other);
        self
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn merge_adds_fieldwise() {
        let a = OpCounters {
            homomorphic_additions: 3,
            rounds: 1,
            ..Default::default()
        };
        let b = OpCounters {
            homomorphic_additions: 4,
            bytes_sent: 9,
            ..Default::default()
        };
        let c = a.merged(&b);
        assert_eq!(c.homomorphic_additions, 7);
        assert_eq!(c.bytes_sent, 9);
        assert_eq!(c.rounds, 1);
        assert_eq!(c.values().len(), OpCounters::CSV_HEADER.len());
    }
}
