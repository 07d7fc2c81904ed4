use std::path::{Path, PathBuf};

use num_bigint::BigUint;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{ExperimentConfig, ExperimentError, PrivacyParams, Result, Sweep};
use crate::commit::CommitmentKey;
use crate::crypto::KeyMaterial;
use crate::datagen::generate_participants;
use crate::fairness::{
    brute_force_metrics, extract_local_stats, Dataset, FairnessReport, PrivacyCharge,
    ReleasedMetric,
};
use crate::netsim::{
    apply_adversary, capture_view, run_attribute_inference, schedule, AttackResult, Strategy,
    ThreatModel,
};
use crate::privacy::{
    compose, protocol_epsilon, reported_epsilon, verification_lower_bound, DefenseConfig, NoiseSpec,
};
use crate::protocol::{
    fold_ciphertexts, naive_pairwise_verification, plan_tree, prepare_submissions, release_metric,
    run_batched_verification, run_secure_aggregation, run_verified_aggregation, OpCounters,
    Participant, ProtocolMessage, Transcript, VerifiedOutcome,
};
use crate::rng;

/// First column of `ops.csv`; the counter columns follow.
pub const OPS_CSV_PHASE: &str = "phase";

/// Brute-force metrics of the pooled plaintext records.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub dp_violation: f64,
    pub eo_violation: Option<f64>,
    pub intersectional_max: Option<f64>,
    pub group_sizes: [u64; 2],
    pub records: u64,
    pub prevalences: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LowerBoundCheck {
    /// `None` without noise.
    pub epsilon: Option<f64>,
    pub required: f64,
    pub tau: f64,
    pub n0: u64,
    pub n1: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TreeSummary {
    pub batch_size: usize,
    pub levels: usize,
    pub batches: usize,
    pub nodes: usize,
    pub rounds: u64,
    pub additions: u64,
    pub verification_ops: u64,
    pub naive_verification_ops: u64,
    pub naive_ratio: f64,
    /// Root ciphertexts equal the flat homomorphic sum.
    pub root_matches_flat: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerifiedSummary {
    pub passed: bool,
    pub accused: Option<u32>,
    pub reason: Option<String>,
    pub consistency_passed: Option<bool>,
    pub rounds: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhaseTiming {
    pub phase: String,
    pub messages: u64,
    pub bytes: u64,
    pub makespan_ms: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AdversarySummary {
    pub model: ThreatModel,
    pub corrupted: Vec<u32>,
    pub captured_messages: usize,
    pub captured_kinds: Vec<String>,
    /// Honest plaintexts recoverable from the captured view.
    pub leaked_values: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AttackSummary {
    pub trials: u64,
    pub rounds: u64,
    pub sigma_def: f64,
    pub success_rate: f64,
    pub stderr: f64,
    pub bound: f64,
    pub within_bound: bool,
    pub undefended_success_rate: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParticipantRow {
    pub n: usize,
    pub batch_size: usize,
    pub levels: usize,
    pub batches: usize,
    pub rounds: u64,
    pub statistics: usize,
    pub additions: u64,
    pub additions_per_statistic: u64,
    pub verification_ops: u64,
    /// `verification_ops / (n·log₂ n)`.
    pub ops_per_n_log2_n: Option<f64>,
    pub naive_ops: u64,
    pub naive_ratio: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpsilonRow {
    pub epsilon: f64,
    pub sigma: f64,
    pub repetitions: u64,
    pub mean_abs_error: f64,
    pub max_abs_error: f64,
    pub accuracy_bound: f64,
    pub within_bound_fraction: f64,
    pub lower_bound: f64,
    pub lower_bound_satisfied: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SweepResult {
    Participants { rows: Vec<ParticipantRow> },
    Epsilon { rows: Vec<EpsilonRow> },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub name: String,
    pub seed: u64,
    pub n_participants: usize,
    pub attribute_count: u8,
    pub ground_truth: GroundTruth,
    pub lower_bound: LowerBoundCheck,
    pub fairness: FairnessReport,
    /// False when verified aggregation aborted; nothing is released then.
    pub released: bool,
    pub releases: Vec<ReleasedMetric>,
    pub tree: TreeSummary,
    pub verified: Option<VerifiedSummary>,
    pub network: Vec<PhaseTiming>,
    pub adversary: Option<AdversarySummary>,
    pub attack: Option<AttackSummary>,
    pub sweep: Option<SweepResult>,
}

/// Everything an experiment produced, before it is written out.
#[derive(Clone, Debug)]
pub struct ExperimentRun {
    pub config: ExperimentConfig,
    pub report: ExperimentReport,
    pub ops: Vec<(String, OpCounters)>,
    pub transcript: Transcript,
    pub attack: Option<AttackResult>,
}

fn io_err(path: &Path, e: impl std::fmt::Display) -> ExperimentError {
    ExperimentError::Io(format!("{}: {e}", path.display()))
}

fn csv_string<F>(f: F) -> Result<String>
where
    F: FnOnce(&mut csv::Writer<Vec<u8>>) -> csv::Result<()>,
{
    let mut w = csv::Writer::from_writer(Vec::new());
    f(&mut w).map_err(|e| ExperimentError::Io(format!("csv: {e}")))?;
    let bytes = w
        .into_inner()
        .map_err(|e| ExperimentError::Io(format!("csv: {e}")))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

impl ExperimentRun {
    pub fn ops_csv(&self) -> Result<String> {
        csv_string(|w| {
            let mut header = vec![OPS_CSV_PHASE];
            header.extend(OpCounters::CSV_HEADER);
            w.write_record(&header)?;
            for (phase, c) in &self.ops {
                let mut row = vec![phase.clone()];
                row.extend(c.values().iter().map(u64::to_string));
                w.write_record(&row)?;
            }
            Ok(())
        })
    }

    pub fn sweep_csv(&self) -> Result<Option<String>> {
        match &self.report.sweep {
            None => Ok(None),
            Some(SweepResult::Participants { rows }) => {
                csv_string(|w| rows.iter().try_for_each(|r| w.serialize(r))).map(Some)
            }
            Some(SweepResult::Epsilon { rows }) => {
                csv_string(|w| rows.iter().try_for_each(|r| w.serialize(r))).map(Some)
            }
        }
    }

    pub fn metadata_json(&self, files: &[String]) -> String {
        serde_json::to_string_pretty(&serde_json::json!({
            "name": self.config.name,
            "seed": self.config.seed,
            "crate_version": env!("CARGO_PKG_VERSION"),
            "config": self.config,
            "files": files,
        }))
        .expect("metadata serializes")
    }

    /// Writes every artifact into `dir`, returning the paths written.
    pub fn write_to(&self, dir: &Path) -> Result<Vec<PathBuf>> {
        ExperimentConfig::check_output_dir(dir)?;
        let mut files: Vec<(&str, String)> = vec![
            (
                "report.json",
                serde_json::to_string_pretty(&self.report).expect("report serializes"),
            ),
            ("ops.csv", self.ops_csv()?),
            ("transcript.jsonl", self.transcript.to_jsonl()),
        ];
        if let Some(a) = &self.attack {
            files.push(("attack.csv", a.to_csv()));
        }
        if let Some(s) = self.sweep_csv()? {
            files.push(("sweep.csv", s));
        }
        let mut names: Vec<String> = files.iter().map(|(n, _)| n.to_string()).collect();
        names.push("metadata.json".into());
        files.push(("metadata.json", self.metadata_json(&names)));
        let mut written = Vec::with_capacity(files.len());
        for (name, body) in files {
            let path = dir.join(name);
            std::fs::write(&path, body).map_err(|e| io_err(&path, e))?;
            written.push(path);
        }
        Ok(written)
    }
}

fn primary_sizes(pooled: &Dataset) -> [u64; 2] {
    let n1 = pooled.records().iter().filter(|r| r.primary() == 1).count() as u64;
    [pooled.len() as u64 - n1, n1]
}

fn lower_bound_check(privacy: &PrivacyParams, [n0, n1]: [u64; 2]) -> Result<LowerBoundCheck> {
    if n0 == 0 || n1 == 0 {
        return Err(ExperimentError::Config(format!(
            "a protected group is empty (n0 = {n0}, n1 = {n1})"
        )));
    }
    privacy.check_lower_bound(n0, n1)?;
    let epsilon = privacy.target_epsilon();
    Ok(LowerBoundCheck {
        epsilon: epsilon.is_finite().then_some(epsilon),
        required: verification_lower_bound(privacy.tau, n0, n1),
        tau: privacy.tau,
        n0,
        n1,
    })
}

fn honest_participants(datasets: &[Dataset], threshold: f64) -> Result<Vec<Participant>> {
    datasets
        .iter()
        .enumerate()
        .map(|(i, d)| {
            Ok(Participant::honest(
                i as u32 + 1,
                extract_local_stats(d, threshold)?,
            ))
        })
        .collect()
}

fn privacy_charge(cfg: &ExperimentConfig, noise: &NoiseSpec) -> Result<Option<PrivacyCharge>> {
    if noise.is_noiseless() {
        return Ok(None);
    }
    let local = noise.local_epsilon();
    let (composed_epsilon, composed_delta) =
        compose(local, 0.0, cfg.rounds, cfg.privacy.delta_prime)?;
    let protocol = protocol_epsilon(
        noise.scale_sigma,
        cfg.n() as u64,
        cfg.rounds,
        cfg.privacy.delta,
    )?;
    Ok(Some(PrivacyCharge {
        rounds: cfg.rounds,
        composed_epsilon: reported_epsilon(composed_epsilon),
        composed_delta,
        protocol_epsilon: reported_epsilon(protocol),
        local_epsilon: reported_epsilon(local),
    }))
}

fn timing(phase: &str, messages: &[ProtocolMessage], cfg: &ExperimentConfig) -> PhaseTiming {
    let trace = schedule(messages, &cfg.network);
    PhaseTiming {
        phase: phase.into(),
        messages: trace.counters.messages_sent,
        bytes: trace.counters.bytes_sent,
        makespan_ms: trace.makespan_ms,
    }
}

/// Generated data and the checks that depend on it.
#[derive(Clone, Debug)]
pub struct Preflight {
    pub datasets: Vec<Dataset>,
    pub ground_truth: GroundTruth,
    pub lower_bound: LowerBoundCheck,
}

/// Validates `cfg`, generates its federation and checks the verification
/// lower bound against the pooled group sizes.
pub fn preflight(cfg: &ExperimentConfig) -> Result<Preflight> {
    cfg.validate()?;
    let generated = generate_participants(&cfg.federation)?;
    let datasets: Vec<Dataset> = generated.iter().map(|g| g.dataset.clone()).collect();
    let pooled = Dataset::pooled(datasets.iter())?;
    let bf = brute_force_metrics(&pooled, cfg.threshold)?;
    let group_sizes = primary_sizes(&pooled);
    let lower_bound = lower_bound_check(&cfg.privacy, group_sizes)?;
    let ground_truth = GroundTruth {
        dp_violation: bf.dp_violation,
        eo_violation: bf.eo_violation,
        intersectional_max: bf.intersectional_max,
        group_sizes,
        records: pooled.len() as u64,
        prevalences: generated.iter().map(|g| g.prevalence).collect(),
    };
    Ok(Preflight {
        datasets,
        ground_truth,
        lower_bound,
    })
}

/// Runs the configured experiment in memory.
pub fn execute(cfg: &ExperimentConfig) -> Result<ExperimentRun> {
    let Preflight {
        datasets,
        ground_truth,
        lower_bound,
    } = preflight(cfg)?;
    let n = cfg.n();
    let p = &cfg.protocol;

    let keys = main_keys(cfg)?;
    let ck = CommitmentKey::rfc2409_group2();
    let mut participants = honest_participants(&datasets, cfg.threshold)?;
    if let Some(adv) = &cfg.adversary {
        apply_adversary(adv, &mut participants)?;
    }
    let noise = NoiseSpec::new(cfg.privacy.sigma(), p.fixed_point_scale)?;
    let protocol_seed = rng::child_seed(cfg.seed, "protocol", 0);

    let mut transcript = Transcript::new(true);
    let mut ops = Vec::new();
    let mut network = Vec::new();

    let agg = run_secure_aggregation(
        &participants,
        &noise,
        &keys,
        cfg.privacy.delta_fair,
        protocol_seed,
        &mut transcript,
    )?;
    ops.push(("secure_aggregation".to_string(), agg.counters));
    let mut mark = transcript.messages().len();
    network.push(timing(
        "secure_aggregation",
        &transcript.messages()[..mark],
        cfg,
    ));

    let plan = plan_tree(n, p.batch_size);
    let tree = run_batched_verification(&keys.public, &agg.submissions, &plan, &mut transcript)?;
    let flat = fold_ciphertexts(&keys.public, &agg.submissions, &mut Transcript::new(false))?;
    let naive = naive_pairwise_verification(&agg.submissions)?;
    ops.push(("batched_verification".to_string(), tree.counters));
    ops.push(("naive_pairwise".to_string(), naive));
    network.push(timing(
        "batched_verification",
        &transcript.messages()[mark..],
        cfg,
    ));
    mark = transcript.messages().len();
    let tree_summary = TreeSummary {
        batch_size: plan.batch_size,
        levels: plan.level_count(),
        batches: plan.batch_count(),
        nodes: plan.node_count(),
        rounds: tree.counters.rounds,
        additions: tree.counters.homomorphic_additions,
        verification_ops: tree.counters.verification_ops,
        naive_verification_ops: naive.verification_ops,
        naive_ratio: naive.verification_ops as f64 / tree.counters.verification_ops.max(1) as f64,
        root_matches_flat: tree.ciphertexts == flat,
    };

    let mut verified = None;
    let mut released = true;
    if p.verified {
        let run = run_verified_aggregation(
            &participants,
            &agg.submissions,
            &keys,
            &ck,
            p.fixed_point_scale,
            protocol_seed,
            &mut transcript,
        )?;
        ops.push(("verified_aggregation".to_string(), run.counters));
        network.push(timing(
            "verified_aggregation",
            &transcript.messages()[mark..],
            cfg,
        ));
        verified = Some(match run.outcome {
            VerifiedOutcome::Success { consistency, .. } => VerifiedSummary {
                passed: consistency.passed,
                accused: None,
                reason: None,
                consistency_passed: Some(consistency.passed),
                rounds: run.counters.rounds,
            },
            VerifiedOutcome::Abort { accused, reason } => {
                released = false;
                VerifiedSummary {
                    passed: false,
                    accused: Some(accused),
                    reason: Some(reason),
                    consistency_passed: None,
                    rounds: run.counters.rounds,
                }
            }
        });
    }

    let defense = cfg.defense_for(n)?;
    let mut fairness = agg.report.clone();
    fairness.privacy = privacy_charge(cfg, &noise)?;
    let releases: Vec<ReleasedMetric> = if released {
        (0..cfg.rounds)
            .map(|t| {
                release_metric(
                    &fairness,
                    &defense,
                    &mut rng::stream(cfg.seed, "release", t),
                )
            })
            .collect()
    } else {
        Vec::new()
    };
    fairness.released_dp = releases.first().copied();

    let adversary = cfg.adversary.as_ref().map(|adv| {
        let view = capture_view(adv, transcript.messages());
        let leaked_values = if adv.strategy == Strategy::TranscriptCapture {
            let secrets = honest_secrets(&participants, &agg.submissions, adv);
            view.recover(&keys.public, &ck, &secrets).len()
        } else {
            0
        };
        AdversarySummary {
            model: adv.model,
            corrupted: adv.corrupted.iter().copied().collect(),
            captured_messages: view.messages.len(),
            captured_kinds: view.kinds().iter().map(|k| format!("{k:?}")).collect(),
            leaked_values,
        }
    });

    let (attack, attack_result) = match &cfg.attack {
        Some(a) => {
            let (summary, result) = run_attack(cfg, a.trials, &a.worst_case)?;
            (Some(summary), Some(result))
        }
        None => (None, None),
    };

    let sweep = match &cfg.sweep {
        None => None,
        Some(Sweep::Participants { values }) => Some(participant_sweep(cfg, &keys, values)?),
        Some(Sweep::Epsilon {
            values,
            repetitions,
        }) => Some(epsilon_sweep(
            cfg,
            &keys,
            &participants,
            &ground_truth,
            values,
            *repetitions,
        )?),
    };

    let report = ExperimentReport {
        name: cfg.name.clone(),
        seed: cfg.seed,
        n_participants: n,
        attribute_count: cfg.federation.attribute_count,
        ground_truth,
        lower_bound,
        fairness,
        released,
        releases,
        tree: tree_summary,
        verified,
        network,
        adversary,
        attack,
        sweep,
    };
    Ok(ExperimentRun {
        config: cfg.clone(),
        report,
        ops,
        transcript,
        attack: attack_result,
    })
}

/// Runs `cfg` and writes its artifacts into `out`.
pub fn run_experiment(cfg: &ExperimentConfig, out: &Path) -> Result<ExperimentRun> {
    cfg.validate()?;
    ExperimentConfig::check_output_dir(out)?;
    let run = execute(cfg)?;
    run.write_to(out)?;
    Ok(run)
}

/// Plaintexts of honest parties that a curious coalition must not learn:
/// true counts, noised fixed-point values and their noise.
fn honest_secrets(
    participants: &[Participant],
    submissions: &[crate::protocol::Submission],
    adv: &crate::netsim::AdversaryConfig,
) -> Vec<BigUint> {
    let mut out = Vec::new();
    for (p, s) in participants.iter().zip(submissions) {
        if adv.is_corrupted(p.index) {
            continue;
        }
        out.extend(p.claimed.iter().map(|&c| BigUint::from(c)));
        out.extend(
            s.noised_fixed
                .iter()
                .filter(|v| **v > 0)
                .map(|&v| BigUint::from(v as u128)),
        );
        out.extend(
            s.noise_fixed
                .iter()
                .filter(|v| **v != 0)
                .map(|&v| BigUint::from(v.unsigned_abs())),
        );
    }
    out.sort();
    out.dedup();
    out
}

fn main_keys(cfg: &ExperimentConfig) -> Result<KeyMaterial> {
    let p = &cfg.protocol;
    Ok(KeyMaterial::generate(
        p.key_bits,
        p.threshold_k,
        cfg.n() as u32,
        rng::child_seed(cfg.seed, "keys", 0),
    )?)
}

/// The worst-case attribute-inference experiment alone, with and without
/// the configured defense.
pub fn run_attack(
    cfg: &ExperimentConfig,
    trials: u64,
    worst_case: &crate::netsim::WorstCase,
) -> Result<(AttackSummary, AttackResult)> {
    let m = worst_case.participants;
    let k = cfg.protocol.threshold_k.min(m as u32);
    let wc_keys =
        main_keys(cfg)?.reshare(k, m as u32, rng::child_seed(cfg.seed, "attack-keys", 0))?;
    let seed = rng::child_seed(cfg.seed, "attack", 0);
    let defense = cfg.defense_for(m)?;
    let scenario = worst_case.scenario(&wc_keys, defense, cfg.rounds, seed)?;
    let result = run_attribute_inference(&scenario, trials, seed);
    let undefended = crate::netsim::AttackScenario {
        defense: DefenseConfig::disabled(cfg.rounds, m as u64),
        ..scenario
    };
    let baseline = run_attribute_inference(&undefended, trials, seed);
    let summary = AttackSummary {
        trials,
        rounds: cfg.rounds,
        sigma_def: result.sigma_def,
        success_rate: result.success_rate,
        stderr: result.stderr,
        bound: result.bound,
        within_bound: result.success_rate <= result.bound,
        undefended_success_rate: baseline.success_rate,
    };
    Ok((summary, result))
}

/// Smallest `c` with `verification_ops <= c·n·log₂ n` on every row with
/// `n > 1`.
pub fn scaling_constant(rows: &[ParticipantRow]) -> Option<f64> {
    rows.iter()
        .filter_map(|r| r.ops_per_n_log2_n)
        .reduce(f64::max)
}

/// Tree verification and the naive baseline at each federation size.
pub fn run_scaling_sweep(cfg: &ExperimentConfig, values: &[usize]) -> Result<SweepResult> {
    cfg.validate()?;
    participant_sweep(cfg, &main_keys(cfg)?, values)
}

fn participant_sweep(
    cfg: &ExperimentConfig,
    keys: &KeyMaterial,
    values: &[usize],
) -> Result<SweepResult> {
    let p = &cfg.protocol;
    let noise = NoiseSpec::new(cfg.privacy.sigma(), p.fixed_point_scale)?;
    let rows = values
        .par_iter()
        .map(|&n| -> Result<ParticipantRow> {
            let fed = crate::datagen::FederationConfig {
                n_participants: n,
                ..cfg.federation.clone()
            };
            let datasets: Vec<Dataset> = generate_participants(&fed)?
                .into_iter()
                .map(|g| g.dataset)
                .collect();
            let participants = honest_participants(&datasets, cfg.threshold)?;
            let pk = &keys.public;
            let seed = rng::child_seed(cfg.seed, "sweep-participants", n as u64);
            let subs =
                prepare_submissions(&participants, &noise, pk, seed, &mut Transcript::new(false))?;
            let plan = plan_tree(n, p.batch_size);
            let tree = run_batched_verification(pk, &subs, &plan, &mut Transcript::new(false))?;
            let naive = naive_pairwise_verification(&subs)?;
            let statistics = subs[0].ciphertexts.len();
            let ops = tree.counters.verification_ops;
            let nf = n as f64;
            Ok(ParticipantRow {
                n,
                batch_size: p.batch_size,
                levels: plan.level_count(),
                batches: plan.batch_count(),
                rounds: tree.counters.rounds,
                statistics,
                additions: tree.counters.homomorphic_additions,
                additions_per_statistic: tree.counters.homomorphic_additions / statistics as u64,
                verification_ops: ops,
                ops_per_n_log2_n: (n > 1).then(|| ops as f64 / (nf * nf.log2())),
                naive_ops: naive.verification_ops,
                naive_ratio: naive.verification_ops as f64 / ops.max(1) as f64,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SweepResult::Participants { rows })
}

fn epsilon_sweep(
    cfg: &ExperimentConfig,
    keys: &KeyMaterial,
    participants: &[Participant],
    truth: &GroundTruth,
    values: &[f64],
    repetitions: u64,
) -> Result<SweepResult> {
    let honest: Vec<Participant> = participants
        .iter()
        .map(|p| Participant::honest(p.index, p.stats.clone()))
        .collect();
    let [n0, n1] = truth.group_sizes;
    let rows = values
        .par_iter()
        .map(|&epsilon| -> Result<EpsilonRow> {
            let sigma = 1.0 / epsilon;
            let noise = NoiseSpec::new(sigma, cfg.protocol.fixed_point_scale)?;
            let mut errors = Vec::with_capacity(repetitions as usize);
            let mut bound = 0.0;
            for rep in 0..repetitions {
                let seed = rng::child_seed(cfg.seed, "repetition", rep);
                let run = run_secure_aggregation(
                    &honest,
                    &noise,
                    keys,
                    cfg.privacy.delta_fair,
                    seed,
                    &mut Transcript::new(false),
                )?;
                bound = run.report.accuracy_epsilon_fair;
                errors.push((run.report.dp_violation - truth.dp_violation).abs());
            }
            let reps = repetitions as f64;
            let required = verification_lower_bound(cfg.privacy.tau, n0, n1);
            Ok(EpsilonRow {
                epsilon,
                sigma,
                repetitions,
                mean_abs_error: errors.iter().sum::<f64>() / reps,
                max_abs_error: errors.iter().cloned().fold(0.0, f64::max),
                accuracy_bound: bound,
                within_bound_fraction: errors.iter().filter(|&&e| e <= bound).count() as f64 / reps,
                lower_bound: required,
                lower_bound_satisfied: epsilon >= required,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SweepResult::Epsilon { rows })
}
