use rand::RngCore;

use super::{
    prepare_submissions, MessageBody, OpCounters, Participant, ProtocolError, Result, Submission,
    Transcript, AGGREGATOR,
};
use crate::crypto::{combine, Ciphertext, KeyMaterial, PublicKey};
use crate::fairness::{AggregateStatistics, FairnessReport, MetricInputs, ReleasedMetric};
use crate::privacy::{sample_laplace, DefenseConfig, NoiseSpec, DEGENERATE_SCALE};

/// Result of one secure aggregation.
#[derive(Clone, Debug)]
pub struct AggregationRun {
    pub submissions: Vec<Submission>,
    pub aggregate: AggregateStatistics,
    pub report: FairnessReport,
    pub counters: OpCounters,
}

pub(crate) fn check_keys(keys: &KeyMaterial, participants: usize) -> Result<()> {
    if keys.party_count_n as usize != participants {
        return Err(ProtocolError::KeyMismatch {
            keys: keys.party_count_n,
            participants,
        });
    }
    Ok(())
}

/// Left fold of each statistic's ciphertexts: `n - 1` additions per statistic.
pub fn fold_ciphertexts(
    pk: &PublicKey,
    submissions: &[Submission],
    transcript: &mut Transcript,
) -> Result<Vec<Ciphertext>> {
    let (first, rest) = submissions
        .split_first()
        .ok_or_else(|| ProtocolError::Config("no submissions".into()))?;
    let mut acc = first.ciphertexts.clone();
    for s in rest {
        if s.ciphertexts.len() != acc.len() {
            return Err(ProtocolError::Config(format!(
                "submission of party {} has {} ciphertexts, expected {}",
                s.sender,
                s.ciphertexts.len(),
                acc.len()
            )));
        }
        for (a, c) in acc.iter_mut().zip(&s.ciphertexts) {
            *a = pk.add(a, c)?;
        }
    }
    transcript.counters_mut().homomorphic_additions += (rest.len() * acc.len()) as u64;
    Ok(acc)
}

/// Opens `ciphertexts` with the committee of the `k` lowest share
/// indices. Takes two rounds: the request and the partial decryptions.
pub fn threshold_decrypt(
    keys: &KeyMaterial,
    ciphertexts: &[Ciphertext],
    fixed_point_scale: u64,
    transcript: &mut Transcript,
) -> Result<Vec<i128>> {
    let k = keys.threshold_k as usize;
    let committee = keys.shares.iter().take(k).collect::<Vec<_>>();
    if committee.len() < k {
        return Err(ProtocolError::Config(format!(
            "{} shares available for a {k}-member committee",
            committee.len()
        )));
    }
    transcript.begin_round();
    for share in &committee {
        transcript.send(
            AGGREGATOR,
            share.index,
            MessageBody::DecryptionRequest {
                ciphertexts: ciphertexts.to_vec(),
            },
        );
    }
    transcript.begin_round();
    let mut per_party = Vec::with_capacity(k);
    for share in &committee {
        let parts = ciphertexts
            .iter()
            .map(|c| share.partial_decrypt(&keys.public, c))
            .collect::<std::result::Result<Vec<_>, _>>()?;
        transcript.send(
            share.index,
            AGGREGATOR,
            MessageBody::PartialDecryption {
                index: share.index,
                parts: parts.clone(),
            },
        );
        per_party.push(parts);
    }
    let counters = transcript.counters_mut();
    counters.partial_decryptions += (k * ciphertexts.len()) as u64;
    counters.decryptions += ciphertexts.len() as u64;
    (0..ciphertexts.len())
        .map(|j| {
            let parts: Vec<_> = per_party.iter().map(|p| p[j].clone()).collect();
            let pt = combine(
                &keys.public,
                &parts,
                keys.threshold_k,
                keys.party_count_n,
                fixed_point_scale,
            )?;
            Ok(keys.public.decode_i128(&pt)?)
        })
        .collect()
}

pub(crate) fn true_totals(participants: &[Participant]) -> Vec<u64> {
    let mut total = vec![0u64; participants[0].stats.to_vector().len()];
    for p in participants {
        for (t, v) in total.iter_mut().zip(p.stats.to_vector()) {
            *t += v;
        }
    }
    total
}

/// Noised totals as an aggregate, with the true pooled counts attached.
pub(crate) fn aggregate_from_totals(
    participants: &[Participant],
    scale: u64,
    totals: Vec<i128>,
) -> Result<AggregateStatistics> {
    let k = participants[0].stats.attribute_count;
    Ok(AggregateStatistics::from_fixed(k, scale, totals)?.with_truth(true_totals(participants)))
}

/// Noising, encryption, homomorphic summation, threshold decryption and
/// metric computation.
pub fn run_secure_aggregation(
    participants: &[Participant],
    noise: &NoiseSpec,
    keys: &KeyMaterial,
    delta_fair: f64,
    seed: u64,
    transcript: &mut Transcript,
) -> Result<AggregationRun> {
    check_keys(keys, participants.len())?;
    let start = transcript.counters();
    let submissions = prepare_submissions(participants, noise, &keys.public, seed, transcript)?;
    transcript.begin_round();
    for s in &submissions {
        transcript.send(
            s.sender,
            AGGREGATOR,
            MessageBody::StatSubmission {
                ciphertexts: s.ciphertexts.clone(),
            },
        );
    }
    let sum = fold_ciphertexts(&keys.public, &submissions, transcript)?;
    let totals = threshold_decrypt(keys, &sum, noise.fixed_point_scale, transcript)?;
    let aggregate = aggregate_from_totals(participants, noise.fixed_point_scale, totals)?;
    let report = FairnessReport::compute(
        &aggregate,
        MetricInputs {
            sigma: noise.scale_sigma,
            n_participants: participants.len() as u64,
            delta_fair,
        },
    )?;
    Ok(AggregationRun {
        submissions,
        aggregate,
        report,
        counters: transcript.counters().since(&start),
    })
}

/// `Δ̂_DP + Laplace(σ_def)`, clamped to `[0, 1]`.
pub fn release_metric<R: RngCore + ?Sized>(
    report: &FairnessReport,
    defense: &DefenseConfig,
    rng: &mut R,
) -> ReleasedMetric {
    let sigma_def = defense.sigma_def;
    let raw = if sigma_def < DEGENERATE_SCALE {
        report.dp_violation
    } else {
        report.dp_violation + sample_laplace(sigma_def, rng)
    };
    ReleasedMetric {
        value: raw.clamp(0.0, 1.0),
        raw,
        sigma_def,
    }
}
