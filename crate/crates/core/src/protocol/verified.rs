//! Commitment-verified aggregation.
//!
//! Every participant broadcasts, per statistic, a Pedersen commitment to its
//! claimed count with a proof that it lies in `[0, m_i]`, plus a commitment
//! to the fixed-point noise it added. The coordinator checks all proofs in
//! index order and aborts on the first failure. Otherwise the ciphertexts
//! are summed and opened, and each participant reveals
//! `ρ = scale · r + r'` so that the decrypted total `T` can be checked
//! against the commitments:
//!
//! ```text
//! g^T · h^(Σρ) == (Π Com)^scale · Π NoiseCom
//! ```

use num_bigint::BigUint;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::secure_agg::{aggregate_from_totals, check_keys};
use super::{
    fold_ciphertexts, threshold_decrypt, MessageBody, OpCounters, Participant, ProtocolError,
    Result, Submission, Transcript, AGGREGATOR,
};
use crate::commit::{
    prove_range, prove_range_unchecked, verify_range, Commitment, CommitmentKey, RangeProof,
};
use crate::crypto::KeyMaterial;
use crate::fairness::AggregateStatistics;
use crate::rng;

/// Outcome of the commitment-ciphertext consistency check.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Consistency {
    pub passed: bool,
    /// Statistic positions whose decrypted total disagrees with the
    /// commitments.
    pub mismatched: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum VerifiedOutcome {
    Success {
        aggregate: AggregateStatistics,
        consistency: Consistency,
        /// Per-statistic products of the value commitments.
        aggregate_commitments: Vec<Commitment>,
    },
    Abort {
        accused: u32,
        reason: String,
    },
}

impl VerifiedOutcome {
    pub fn accused(&self) -> Option<u32> {
        match self {
            VerifiedOutcome::Abort { accused, .. } => Some(*accused),
            VerifiedOutcome::Success { .. } => None,
        }
    }
}

#[derive(Clone, Debug)]
pub struct VerifiedRun {
    pub outcome: VerifiedOutcome,
    pub counters: OpCounters,
}

struct Broadcast {
    commitments: Vec<Commitment>,
    proofs: Vec<RangeProof>,
    noise_commitments: Vec<Commitment>,
    reveal: Vec<BigUint>,
}

fn commit_phase(
    ck: &CommitmentKey,
    p: &Participant,
    sub: &Submission,
    scale: u64,
    seed: u64,
) -> Result<Broadcast> {
    let mut r = rng::stream(seed, "commit", p.index as u64);
    let q = ck.group_order();
    let bound = p.bound();
    let len = p.committed.len();
    let mut b = Broadcast {
        commitments: Vec::with_capacity(len),
        proofs: Vec::with_capacity(len),
        noise_commitments: Vec::with_capacity(len),
        reveal: Vec::with_capacity(len),
    };
    for (&value, &noise) in p.committed.iter().zip(&sub.noise_fixed) {
        let blinding = ck.random_scalar(&mut r);
        let noise_blinding = ck.random_scalar(&mut r);
        b.commitments.push(ck.commit_u64(value, &blinding)?);
        b.proofs.push(if p.forge_proofs {
            prove_range_unchecked(ck, value, &blinding, bound, &mut r)
        } else {
            prove_range(ck, value, &blinding, bound, &mut r)?
        });
        b.noise_commitments
            .push(ck.commit_signed(noise as i128, &noise_blinding)?);
        b.reveal.push((blinding * scale + noise_blinding) % q);
    }
    Ok(b)
}

fn check_broadcast(
    ck: &CommitmentKey,
    p: &Participant,
    b: &Broadcast,
    counters: &mut OpCounters,
) -> Option<String> {
    for (j, (com, proof)) in b.commitments.iter().zip(&b.proofs).enumerate() {
        counters.proofs_verified += 1;
        if let Err(e) = verify_range(ck, com, proof, p.bound()) {
            return Some(format!("statistic {j}: {e}"));
        }
    }
    if let Some(j) = b
        .noise_commitments
        .iter()
        .position(|c| !ck.is_group_element(c.value()))
    {
        return Some(format!("noise commitment {j} is not a group element"));
    }
    None
}

/// Runs the commitment, proof and consistency phases around a flat
/// homomorphic sum of `submissions`. Bounds `m_i` are the participants'
/// public sample sizes.
pub fn run_verified_aggregation(
    participants: &[Participant],
    submissions: &[Submission],
    keys: &KeyMaterial,
    ck: &CommitmentKey,
    fixed_point_scale: u64,
    seed: u64,
    transcript: &mut Transcript,
) -> Result<VerifiedRun> {
    check_keys(keys, participants.len())?;
    if submissions.len() != participants.len() {
        return Err(ProtocolError::Config(format!(
            "{} submissions for {} participants",
            submissions.len(),
            participants.len()
        )));
    }
    let start = transcript.counters();

    let broadcasts = participants
        .par_iter()
        .zip(submissions)
        .map(|(p, s)| commit_phase(ck, p, s, fixed_point_scale, seed))
        .collect::<Result<Vec<_>>>()?;
    transcript.begin_round();
    for ((p, s), b) in participants.iter().zip(submissions).zip(&broadcasts) {
        transcript.counters_mut().proofs_generated += b.proofs.len() as u64;
        transcript.send(
            p.index,
            AGGREGATOR,
            MessageBody::StatSubmission {
                ciphertexts: s.ciphertexts.clone(),
            },
        );
        transcript.send(
            p.index,
            AGGREGATOR,
            MessageBody::CommitmentBroadcast {
                bound: p.bound(),
                commitments: b.commitments.clone(),
                proofs: b.proofs.clone(),
                noise_commitments: b.noise_commitments.clone(),
            },
        );
    }

    for (p, b) in participants.iter().zip(&broadcasts) {
        if let Some(reason) = check_broadcast(ck, p, b, transcript.counters_mut()) {
            transcript.begin_round();
            for q in participants {
                transcript.send(
                    AGGREGATOR,
                    q.index,
                    MessageBody::Abort {
                        accused: p.index,
                        reason: reason.clone(),
                    },
                );
            }
            return Ok(VerifiedRun {
                outcome: VerifiedOutcome::Abort {
                    accused: p.index,
                    reason,
                },
                counters: transcript.counters().since(&start),
            });
        }
    }

    let sum = fold_ciphertexts(&keys.public, submissions, transcript)?;
    let totals = threshold_decrypt(keys, &sum, fixed_point_scale, transcript)?;

    transcript.begin_round();
    for (p, b) in participants.iter().zip(&broadcasts) {
        transcript.send(
            p.index,
            AGGREGATOR,
            MessageBody::BlindingReveal {
                blindings: b.reveal.clone(),
            },
        );
    }
    let q = ck.group_order();
    let scale = BigUint::from(fixed_point_scale);
    let mut mismatched = Vec::new();
    let mut aggregate_commitments = Vec::with_capacity(totals.len());
    for (j, &total) in totals.iter().enumerate() {
        let coms = ck.aggregate(broadcasts.iter().map(|b| &b.commitments[j]))?;
        let noise = ck.aggregate(broadcasts.iter().map(|b| &b.noise_commitments[j]))?;
        let rho = broadcasts
            .iter()
            .fold(BigUint::default(), |acc, b| (acc + &b.reveal[j]) % q);
        let expected = ck.mul(ck.scale(&coms, &scale).value(), noise.value());
        let opened = ck.commit_signed(total, &rho)?;
        if opened.value() != &expected {
            mismatched.push(j);
        }
        aggregate_commitments.push(coms);
    }
    let aggregate = aggregate_from_totals(participants, fixed_point_scale, totals)?;
    Ok(VerifiedRun {
        outcome: VerifiedOutcome::Success {
            aggregate,
            consistency: Consistency {
                passed: mismatched.is_empty(),
                mismatched,
            },
            aggregate_commitments,
        },
        counters: transcript.counters().since(&start),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fairness::LocalStatistics;
    use crate::privacy::NoiseSpec;
    use crate::protocol::prepare_submissions;

    const SCALE: u64 = 1000;

    fn party(i: u32) -> Participant {
        let counts = [i as u64, 2, 1, 3, 2, 1, 1, i as u64 % 3];
        Participant::honest(
            i,
            LocalStatistics {
                attribute_count: 1,
                counts,
                intersectional_counts: None,
                sample_size: counts.iter().sum(),
            },
        )
    }

    fn run(ps: &[Participant], seed: u64) -> (VerifiedRun, Vec<Submission>) {
        let keys = KeyMaterial::generate(256, 2, ps.len() as u32, 1).unwrap();
        let noise = NoiseSpec::new(1.0, SCALE).unwrap();
        let subs = prepare_submissions(ps, &noise, &keys.public, seed, &mut Transcript::new(false))
            .unwrap();
        let ck = CommitmentKey::rfc2409_group2();
        let out = run_verified_aggregation(
            ps,
            &subs,
            &keys,
            &ck,
            SCALE,
            seed,
            &mut Transcript::new(false),
        )
        .unwrap();
        (out, subs)
    }

    #[test]
    fn honest_parties_succeed_with_exact_totals() {
        let ps: Vec<_> = (1..=5).map(party).collect();
        let (out, subs) = run(&ps, 3);
        let VerifiedOutcome::Success {
            aggregate,
            consistency,
            ..
        } = out.outcome
        else {
            panic!("honest run aborted");
        };
        assert!(consistency.passed);
        for j in 0..8 {
            assert_eq!(
                aggregate.noised_fixed[j],
                subs.iter().map(|s| s.noised_fixed[j]).sum::<i128>()
            );
        }
        assert_eq!(out.counters.proofs_generated, 40);
        assert_eq!(out.counters.proofs_verified, 40);
        assert_eq!(out.counters.rounds, 4);
    }

    #[test]
    fn aggregate_commitment_opens_to_summed_openings() {
        let ps: Vec<_> = (1..=3).map(party).collect();
        let (out, _) = run(&ps, 8);
        let VerifiedOutcome::Success {
            aggregate_commitments,
            ..
        } = out.outcome
        else {
            panic!("honest run aborted");
        };
        let ck = CommitmentKey::rfc2409_group2();
        for (j, com) in aggregate_commitments.iter().enumerate() {
            let mut sum_r = BigUint::default();
            for p in &ps {
                let mut r = rng::stream(8, "commit", p.index as u64);
                for _ in 0..j {
                    ck.random_scalar(&mut r);
                    ck.random_scalar(&mut r);
                    let _ = prove_range_unchecked(&ck, 0, &BigUint::default(), p.bound(), &mut r);
                }
                sum_r += ck.random_scalar(&mut r);
            }
            let sum_s: u64 = ps.iter().map(|p| p.committed[j]).sum();
            assert_eq!(
                &ck.commit_u64(sum_s, &(sum_r % ck.group_order())).unwrap(),
                com
            );
        }
    }

    #[test]
    fn out_of_range_claim_names_the_offender() {
        let mut ps: Vec<_> = (1..=5).map(party).collect();
        let m = ps[2].bound();
        ps[2].claimed[0] = m + 10;
        ps[2].committed[0] = m + 10;
        ps[2].forge_proofs = true;
        let (out, _) = run(&ps, 4);
        assert_eq!(out.outcome.accused(), Some(3));
        assert_eq!(out.counters.proofs_verified, 2 * 8 + 1);
    }

    #[test]
    fn lowest_offender_is_named() {
        let mut ps: Vec<_> = (1..=4).map(party).collect();
        for i in [3, 1] {
            let m = ps[i].bound();
            ps[i].committed[5] = m + 1;
            ps[i].forge_proofs = true;
        }
        assert_eq!(run(&ps, 5).0.outcome.accused(), Some(2));
    }

    #[test]
    fn in_range_lie_in_ciphertext_only_is_flagged() {
        let mut ps: Vec<_> = (1..=3).map(party).collect();
        ps[1].claimed[4] += 1;
        let (out, subs) = run(&ps, 6);
        let VerifiedOutcome::Success {
            aggregate,
            consistency,
            ..
        } = out.outcome
        else {
            panic!("in-range lie must not abort");
        };
        assert_eq!(consistency.mismatched, vec![4]);
        let truth = aggregate.true_counts.as_ref().unwrap()[4] as i128;
        let noise: i128 = subs.iter().map(|s| s.noise_fixed[4] as i128).sum();
        assert_eq!(
            aggregate.noised_fixed[4],
            (truth + 1) * SCALE as i128 + noise
        );
    }

    #[test]
    fn consistent_in_range_lie_passes() {
        let mut ps: Vec<_> = (1..=3).map(party).collect();
        ps[0].claimed[2] += 1;
        ps[0].committed[2] += 1;
        let (out, _) = run(&ps, 7);
        assert!(matches!(
            out.outcome,
            VerifiedOutcome::Success {
                consistency: Consistency { passed: true, .. },
                ..
            }
        ));
    }
}
