//! Attribute inference from released fairness metrics.
//!
//! The attacker watches `T` released demographic-parity values and decides
//! whether a target record carries the protected attribute. It is granted
//! the metric the pipeline produces under each hypothesis (the simulator
//! re-runs the protocol with the target's bit flipped) and the release
//! noise scale, and picks the hypothesis with the larger likelihood under
//! the clamped Laplace release model. Ties are broken by a fair coin.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{NetsimError, Result};
use crate::crypto::KeyMaterial;
use crate::fairness::{extract_local_stats, Dataset, FairnessReport, Record, DEFAULT_THRESHOLD};
use crate::privacy::{DefenseConfig, NoiseSpec, DEGENERATE_SCALE};
use crate::protocol::{release_metric, run_secure_aggregation, Participant, Transcript};
use crate::rng;

/// What the attacker knows besides the releases.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PublicMetadata {
    pub n_participants: usize,
    pub sample_sizes: Vec<u64>,
    pub rounds: u64,
}

/// Released metrics of one trial plus the simulator-only ground truth.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AttackHistory {
    pub released: Vec<f64>,
    pub target: u32,
    pub truth: bool,
    pub public: PublicMetadata,
}

impl AttackHistory {
    /// The part an attacker may look at.
    pub fn view(&self) -> (&[f64], &PublicMetadata) {
        (&self.released, &self.public)
    }
}

/// Pipeline output under each value of the target's attribute bit.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Hypotheses {
    pub report_if_absent: FairnessReport,
    pub report_if_present: FairnessReport,
}

impl Hypotheses {
    pub fn means(&self) -> [f64; 2] {
        [
            self.report_if_absent.dp_violation,
            self.report_if_present.dp_violation,
        ]
    }

    pub fn report(&self, bit: bool) -> &FairnessReport {
        if bit {
            &self.report_if_present
        } else {
            &self.report_if_absent
        }
    }
}

/// Likelihood-threshold attacker.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LikelihoodAttacker {
    pub means: [f64; 2],
    pub sigma_def: f64,
}

/// Log-density of a release `x` under `clamp(μ + Laplace(b), 0, 1)`.
fn clamped_laplace_log_density(x: f64, mu: f64, b: f64) -> f64 {
    let half = 0.5f64.ln();
    if x <= 0.0 {
        if mu >= 0.0 {
            half - mu / b
        } else {
            (1.0 - 0.5 * (mu / b).exp()).ln()
        }
    } else if x >= 1.0 {
        if mu <= 1.0 {
            half - (1.0 - mu) / b
        } else {
            (1.0 - 0.5 * ((1.0 - mu) / b).exp()).ln()
        }
    } else {
        -(x - mu).abs() / b - (2.0 * b).ln()
    }
}

impl LikelihoodAttacker {
    /// Positive values favour "attribute present".
    pub fn score(&self, released: &[f64]) -> f64 {
        let [m0, m1] = self.means;
        if self.sigma_def < DEGENERATE_SCALE {
            return released
                .iter()
                .map(|&x| (x - m0).abs() - (x - m1).abs())
                .sum();
        }
        released
            .iter()
            .map(|&x| {
                clamped_laplace_log_density(x, m1, self.sigma_def)
                    - clamped_laplace_log_density(x, m0, self.sigma_def)
            })
            .sum()
    }

    pub fn guess<R: Rng + ?Sized>(&self, released: &[f64], rng: &mut R) -> bool {
        let s = self.score(released);
        if s > 0.0 {
            true
        } else if s < 0.0 {
            false
        } else {
            rng.random_bool(0.5)
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrialRow {
    pub trial: u64,
    pub guess: bool,
    pub truth: bool,
    pub success: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AttackResult {
    pub rows: Vec<TrialRow>,
    pub success_rate: f64,
    /// Binomial standard error of `success_rate`.
    pub stderr: f64,
    pub sigma_def: f64,
    /// `0.5 + ε_inf/2`, or 1 without the defense.
    pub bound: f64,
}

impl AttackResult {
    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        for r in &self.rows {
            w.serialize(r).expect("row serializes");
        }
        String::from_utf8(w.into_inner().expect("in-memory writer")).expect("ASCII output")
    }
}

/// One attack setting: the hypotheses, the release defense and the number
/// of observed rounds.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AttackScenario {
    pub hypotheses: Hypotheses,
    pub defense: DefenseConfig,
    pub rounds: u64,
    pub target: u32,
    pub public: PublicMetadata,
}

impl AttackScenario {
    /// Trial `trial`: a uniformly random truth bit and `rounds` releases.
    pub fn history(&self, seed: u64, trial: u64) -> AttackHistory {
        let truth = rng::stream(seed, "attack-truth", trial).random_bool(0.5);
        let mut r = rng::stream(seed, "attack-release", trial);
        let report = self.hypotheses.report(truth);
        let released = (0..self.rounds)
            .map(|_| release_metric(report, &self.defense, &mut r).value)
            .collect();
        AttackHistory {
            released,
            target: self.target,
            truth,
            public: self.public.clone(),
        }
    }
}

/// Runs `trials` independent histories through the likelihood attacker.
pub fn run_attribute_inference(scenario: &AttackScenario, trials: u64, seed: u64) -> AttackResult {
    let attacker = LikelihoodAttacker {
        means: scenario.hypotheses.means(),
        sigma_def: scenario.defense.sigma_def,
    };
    let rows: Vec<TrialRow> = (0..trials)
        .into_par_iter()
        .map(|trial| {
            let h = scenario.history(seed, trial);
            let (released, _) = h.view();
            let guess = attacker.guess(released, &mut rng::stream(seed, "attack-coin", trial));
            TrialRow {
                trial,
                guess,
                truth: h.truth,
                success: guess == h.truth,
            }
        })
        .collect();
    let wins = rows.iter().filter(|r| r.success).count() as f64;
    let p = if trials == 0 {
        0.5
    } else {
        wins / trials as f64
    };
    AttackResult {
        rows,
        success_rate: p,
        stderr: if trials == 0 {
            0.0
        } else {
            (p * (1.0 - p) / trials as f64).sqrt()
        },
        sigma_def: scenario.defense.sigma_def,
        bound: scenario.defense.success_bound(),
    }
}

/// Federation where one record decides a small group's positive rate: the
/// group with the attribute has `minority` records, only the target among
/// them predicted positive, so flipping the target's bit moves `Δ_DP` by
/// about `1/minority`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WorstCase {
    pub participants: usize,
    pub minority: usize,
    pub majority: usize,
}

impl Default for WorstCase {
    fn default() -> Self {
        Self {
            participants: 50,
            minority: 10,
            majority: 990,
        }
    }
}

impl WorstCase {
    /// Datasets with the target (first record of participant 1) carrying
    /// attribute `target_bit`.
    pub fn datasets(&self, target_bit: bool) -> Result<Vec<Dataset>> {
        if self.participants == 0 || self.minority < 2 || self.majority < 2 {
            return Err(NetsimError::Rejected(format!(
                "degenerate worst case {self:?}"
            )));
        }
        let mut per_party: Vec<Vec<Record>> = vec![Vec::new(); self.participants];
        per_party[0].push(Record::new(true, target_bit as u32, 0.9));
        for j in 0..self.minority - 1 {
            per_party[(j + 1) % self.participants].push(Record::new(j % 2 == 0, 1, 0.2));
        }
        for j in 0..self.majority {
            let positive = j % 2 == 0;
            per_party[j % self.participants].push(Record::new(
                j % 3 == 0,
                0,
                if positive { 0.9 } else { 0.1 },
            ));
        }
        per_party
            .into_iter()
            .map(|recs| Dataset::new(1, recs).map_err(NetsimError::from))
            .collect()
    }

    /// Re-runs the encrypted pipeline under both hypotheses, without count
    /// noise.
    pub fn hypotheses(&self, keys: &KeyMaterial, seed: u64) -> Result<Hypotheses> {
        let run = |bit: bool| -> Result<FairnessReport> {
            let ps = self
                .datasets(bit)?
                .iter()
                .enumerate()
                .map(|(i, d)| {
                    Ok(Participant::honest(
                        i as u32 + 1,
                        extract_local_stats(d, DEFAULT_THRESHOLD)?,
                    ))
                })
                .collect::<Result<Vec<_>>>()?;
            let out = run_secure_aggregation(
                &ps,
                &NoiseSpec::noiseless(),
                keys,
                0.05,
                seed,
                &mut Transcript::new(false),
            )?;
            Ok(out.report)
        };
        Ok(Hypotheses {
            report_if_absent: run(false)?,
            report_if_present: run(true)?,
        })
    }

    pub fn scenario(
        &self,
        keys: &KeyMaterial,
        defense: DefenseConfig,
        rounds: u64,
        seed: u64,
    ) -> Result<AttackScenario> {
        let sample_sizes = self
            .datasets(true)?
            .iter()
            .map(|d| d.len() as u64)
            .collect();
        Ok(AttackScenario {
            hypotheses: self.hypotheses(keys, seed)?,
            defense,
            rounds,
            target: 1,
            public: PublicMetadata {
                n_participants: self.participants,
                sample_sizes,
                rounds,
            },
        })
    }
}
