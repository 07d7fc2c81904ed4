use num_bigint::BigInt;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{ProtocolError, Result, Transcript};
use crate::crypto::{Ciphertext, PublicKey, Result as CryptoResult};
use crate::fairness::LocalStatistics;
use crate::privacy::NoiseSpec;
use crate::rng;

/// One data holder. Participant indices start at 1.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Participant {
    pub index: u32,
    /// True local statistics.
    pub stats: LocalStatistics,
    /// Statistic vector that gets encrypted and submitted.
    pub claimed: Vec<u64>,
    /// Statistic vector that gets committed and range-proved.
    pub committed: Vec<u64>,
    /// Skips the prover's range check, as a cheating party would.
    pub forge_proofs: bool,
}

impl Participant {
    pub fn honest(index: u32, stats: LocalStatistics) -> Self {
        let v = stats.to_vector();
        Self {
            index,
            stats,
            claimed: v.clone(),
            committed: v,
            forge_proofs: false,
        }
    }

    /// Public bound `m_i` on every statistic.
    pub fn bound(&self) -> u64 {
        self.stats.sample_size
    }

    pub fn is_honest(&self) -> bool {
        let v = self.stats.to_vector();
        !self.forge_proofs && self.claimed == v && self.committed == v
    }
}

/// Noised, encrypted statistic vector of one participant, plus the
/// simulator-side record of what was encrypted.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Submission {
    pub sender: u32,
    pub ciphertexts: Vec<Ciphertext>,
    /// Fixed-point noise added to each claimed count.
    pub noise_fixed: Vec<i64>,
    /// `scale · claimed + noise`, the encrypted plaintexts.
    pub noised_fixed: Vec<i128>,
}

fn check_participants(participants: &[Participant]) -> Result<usize> {
    let first = participants
        .first()
        .ok_or_else(|| ProtocolError::Config("no participants".into()))?;
    let len = first.claimed.len();
    for (pos, p) in participants.iter().enumerate() {
        if p.index as usize != pos + 1 {
            return Err(ProtocolError::Config(format!(
                "participant at position {pos} has index {}",
                p.index
            )));
        }
        if p.claimed.len() != len || p.committed.len() != len || p.stats.to_vector().len() != len {
            return Err(ProtocolError::Config(format!(
                "participant {} has a statistic vector of the wrong length",
                p.index
            )));
        }
    }
    Ok(len)
}

/// Adds Laplace noise to every claimed count and encrypts the result.
/// Participant `i` draws noise from `stream(seed, "noise", i)` and
/// encryption randomness from `stream(seed, "encrypt", i)`.
pub fn prepare_submissions(
    participants: &[Participant],
    noise: &NoiseSpec,
    pk: &PublicKey,
    seed: u64,
    transcript: &mut Transcript,
) -> Result<Vec<Submission>> {
    let len = check_participants(participants)?;
    let scale = noise.fixed_point_scale;
    let subs = participants
        .par_iter()
        .map(|p| -> CryptoResult<Submission> {
            let mut noise_rng = rng::stream(seed, "noise", p.index as u64);
            let mut enc_rng = rng::stream(seed, "encrypt", p.index as u64);
            let noise_fixed: Vec<i64> = (0..len).map(|_| noise.sample(&mut noise_rng)).collect();
            let noised_fixed: Vec<i128> = p
                .claimed
                .iter()
                .zip(&noise_fixed)
                .map(|(&c, &e)| c as i128 * scale as i128 + e as i128)
                .collect();
            let ciphertexts = noised_fixed
                .iter()
                .map(|&v| pk.encrypt(&pk.encode_fixed(&BigInt::from(v), scale)?, &mut enc_rng))
                .collect::<CryptoResult<_>>()?;
            Ok(Submission {
                sender: p.index,
                ciphertexts,
                noise_fixed,
                noised_fixed,
            })
        })
        .collect::<CryptoResult<Vec<_>>>()?;
    transcript.counters_mut().encryptions += (participants.len() * len) as u64;
    Ok(subs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::crypto::keygen_seeded;
    use crate::fairness::LocalStatistics;

    pub(crate) fn stats(counts: [u64; 8]) -> LocalStatistics {
        LocalStatistics {
            attribute_count: 1,
            counts,
            intersectional_counts: None,
            sample_size: counts.iter().sum(),
        }
    }

    #[test]
    fn noise_is_reproducible_and_recorded() {
        let (pk, sk) = keygen_seeded(256, 3).unwrap();
        let ps: Vec<_> = (1..=3)
            .map(|i| Participant::honest(i, stats([i as u64; 8])))
            .collect();
        let noise = NoiseSpec::new(1.0, 1000).unwrap();
        let mut t = Transcript::new(false);
        let a = prepare_submissions(&ps, &noise, &pk, 9, &mut t).unwrap();
        let b = prepare_submissions(&ps, &noise, &pk, 9, &mut t).unwrap();
        assert_eq!(a, b);
        assert_eq!(t.counters().encryptions, 48);
        for (p, s) in ps.iter().zip(&a) {
            for j in 0..8 {
                assert_eq!(
                    s.noised_fixed[j],
                    p.claimed[j] as i128 * 1000 + s.noise_fixed[j] as i128
                );
                let pt = sk.decrypt(&s.ciphertexts[j], 1000).unwrap();
                assert_eq!(pk.decode_i128(&pt).unwrap(), s.noised_fixed[j]);
            }
        }
        assert!(a.iter().flat_map(|s| &s.noise_fixed).any(|&e| e != 0));
    }

    #[test]
    fn rejects_misnumbered_participants() {
        let (pk, _) = keygen_seeded(256, 3).unwrap();
        let ps = vec![Participant::honest(2, stats([1; 8]))];
        let err = prepare_submissions(
            &ps,
            &NoiseSpec::noiseless(),
            &pk,
            0,
            &mut Transcript::new(false),
        );
        assert!(matches!(err, Err(ProtocolError::Config(_))));
    }
}
