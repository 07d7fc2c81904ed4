//! Synthetic federations with tunable group disparity.
//!
//! Each participant draws its own prevalence of the protected attributes
//! from a configured range, labels are Bernoulli with the base rate, and the
//! score oracle predicts positive with probability `0.5 ± d/2` depending on
//! the primary attribute, so the pooled demographic-parity violation is
//! close to `|d|` at threshold 0.5. `label_correlation` tilts predictions
//! towards the label without changing the group positive rates. Features
//! are Gaussian per `(a, y)` cell and do not influence the score.

use rand::Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fairness::{Dataset, FairnessError, Record, FEATURE_DIM, MAX_ATTRIBUTES};
use crate::rng;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DatagenError {
    #[error("invalid federation config: {0}")]
    Invalid(String),
    #[error(transparent)]
    Fairness(#[from] FairnessError),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FederationConfig {
    pub n_participants: usize,
    /// Inclusive range of records per participant.
    pub records_per_participant: (usize, usize),
    pub attribute_count: u8,
    /// Per-participant prevalence of each attribute is uniform on this range.
    pub attribute_prevalence: (f64, f64),
    pub base_positive_rate: f64,
    /// Positive-prediction rate of group 0 minus that of group 1.
    pub score_disparity: f64,
    /// In `[0, 1]`; 0 makes predictions independent of labels.
    pub label_correlation: f64,
    pub seed: u64,
}

impl Default for FederationConfig {
    fn default() -> Self {
        Self {
            n_participants: 10,
            records_per_participant: (200, 400),
            attribute_count: 1,
            attribute_prevalence: (0.05, 0.45),
            base_positive_rate: 0.4,
            score_disparity: 0.23,
            label_correlation: 0.5,
            seed: 0,
        }
    }
}

impl FederationConfig {
    pub fn validate(&self) -> Result<(), DatagenError> {
        let fail = |m: String| Err(DatagenError::Invalid(m));
        let (lo, hi) = self.records_per_participant;
        let (plo, phi) = self.attribute_prevalence;
        if self.n_participants == 0 {
            return fail("need at least one participant".into());
        }
        if lo == 0 || lo > hi {
            return fail(format!(
                "records per participant ({lo}, {hi}) must satisfy 1 <= min <= max"
            ));
        }
        if self.attribute_count == 0 || self.attribute_count > MAX_ATTRIBUTES {
            return fail(format!(
                "attribute count {} outside 1..={MAX_ATTRIBUTES}",
                self.attribute_count
            ));
        }
        if !(plo > 0.0 && plo <= phi && phi < 1.0) {
            return fail(format!(
                "prevalence range ({plo}, {phi}) must lie in (0, 1)"
            ));
        }
        if !(0.0..=1.0).contains(&self.base_positive_rate) {
            return fail(format!(
                "base positive rate {} outside [0, 1]",
                self.base_positive_rate
            ));
        }
        if !(-1.0..=1.0).contains(&self.score_disparity) {
            return fail(format!(
                "score disparity {} outside [-1, 1]",
                self.score_disparity
            ));
        }
        if !(0.0..=1.0).contains(&self.label_correlation) {
            return fail(format!(
                "label correlation {} outside [0, 1]",
                self.label_correlation
            ));
        }
        Ok(())
    }

    /// Positive-prediction rate of primary group `a`.
    pub fn group_rate(&self, a: usize) -> f64 {
        let half = self.score_disparity / 2.0;
        if a == 0 {
            0.5 + half
        } else {
            0.5 - half
        }
    }
}

/// Participant `i`'s dataset and the prevalence it was drawn with.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeneratedParticipant {
    pub index: u32,
    pub prevalence: f64,
    pub dataset: Dataset,
}

fn feature_means(a: usize, y: bool) -> [f64; FEATURE_DIM] {
    let (a, y) = (a as f64, y as u8 as f64);
    [a, y, a * y, 0.5 * (a + y)]
}

/// Prediction for a record in group `a` with label `y`, keeping
/// `P(ŷ = 1 | a) = rate` for every correlation.
fn predict<R: Rng + ?Sized>(rng: &mut R, rate: f64, base: f64, correlation: f64, y: bool) -> bool {
    let m = rate.min(1.0 - rate);
    let p = if y {
        rate + correlation * (1.0 - base) * m
    } else {
        rate - correlation * base * m
    };
    rng.random_bool(p.clamp(0.0, 1.0))
}

fn generate_participant(
    cfg: &FederationConfig,
    index: u32,
) -> Result<GeneratedParticipant, DatagenError> {
    let mut r = rng::stream(cfg.seed, "federation", index as u64);
    let (lo, hi) = cfg.records_per_participant;
    let (plo, phi) = cfg.attribute_prevalence;
    let size = r.random_range(lo..=hi);
    let prevalence = if plo == phi {
        plo
    } else {
        r.random_range(plo..=phi)
    };
    let unit = Normal::new(0.0, 1.0).expect("unit normal");
    let records = (0..size)
        .map(|_| {
            let attributes = (0..cfg.attribute_count).fold(0u32, |acc, bit| {
                acc | ((r.random_bool(prevalence) as u32) << bit)
            });
            let a = (attributes & 1) as usize;
            let label = r.random_bool(cfg.base_positive_rate);
            let positive = predict(
                &mut r,
                cfg.group_rate(a),
                cfg.base_positive_rate,
                cfg.label_correlation,
                label,
            );
            // Scores on either side of 0.5, never exactly on it.
            let u: f64 = r.random_range(0.0..0.5);
            let score = if positive { 1.0 - u } else { u };
            let means = feature_means(a, label);
            let mut features = [0.0; FEATURE_DIM];
            for (f, m) in features.iter_mut().zip(means) {
                *f = m + unit.sample(&mut r);
            }
            Record {
                features,
                label,
                attributes,
                score,
            }
        })
        .collect();
    Ok(GeneratedParticipant {
        index,
        prevalence,
        dataset: Dataset::new(cfg.attribute_count, records)?,
    })
}

/// Generates every participant from its own seeded stream.
pub fn generate_participants(
    cfg: &FederationConfig,
) -> Result<Vec<GeneratedParticipant>, DatagenError> {
    cfg.validate()?;
    (1..=cfg.n_participants as u32)
        .into_par_iter()
        .map(|i| generate_participant(cfg, i))
        .collect()
}

pub fn generate_federation(cfg: &FederationConfig) -> Result<Vec<Dataset>, DatagenError> {
    Ok(generate_participants(cfg)?
        .into_iter()
        .map(|p| p.dataset)
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fairness::brute_force_metrics;

    #[test]
    fn no_disparity_gives_near_zero_violation() {
        let cfg = FederationConfig {
            n_participants: 20,
            records_per_participant: (5_000, 5_000),
            score_disparity: 0.0,
            seed: 1,
            ..Default::default()
        };
        let fed = generate_federation(&cfg).unwrap();
        let bf = brute_force_metrics(&Dataset::pooled(fed.iter()).unwrap(), 0.5).unwrap();
        assert!(bf.dp_violation < 0.01, "{}", bf.dp_violation);
    }

    #[test]
    fn disparity_preset_lands_in_band() {
        let cfg = FederationConfig {
            n_participants: 100,
            records_per_participant: (10_000, 10_000),
            score_disparity: 0.23,
            seed: 2,
            ..Default::default()
        };
        let fed = generate_federation(&cfg).unwrap();
        let bf = brute_force_metrics(&Dataset::pooled(fed.iter()).unwrap(), 0.5).unwrap();
        assert!(
            (0.21..=0.25).contains(&bf.dp_violation),
            "{}",
            bf.dp_violation
        );
    }

    #[test]
    fn prevalence_and_minority_fractions_stay_in_range() {
        let cfg = FederationConfig {
            n_participants: 100,
            records_per_participant: (2_000, 3_000),
            seed: 3,
            ..Default::default()
        };
        for p in generate_participants(&cfg).unwrap() {
            assert!((0.05..=0.45).contains(&p.prevalence));
            let minority = p
                .dataset
                .records()
                .iter()
                .filter(|r| r.primary() == 1)
                .count() as f64;
            let frac = minority / p.dataset.len() as f64;
            // 4.5 binomial standard errors around the drawn prevalence.
            let se = (p.prevalence * (1.0 - p.prevalence) / p.dataset.len() as f64).sqrt();
            assert!(
                (frac - p.prevalence).abs() < 4.5 * se,
                "{frac} vs {}",
                p.prevalence
            );
            assert!((0.05 - 4.5 * se..=0.45 + 4.5 * se).contains(&frac));
        }
    }

    #[test]
    fn correlation_preserves_group_rates_and_raises_accuracy() {
        let base = FederationConfig {
            n_participants: 10,
            records_per_participant: (20_000, 20_000),
            label_correlation: 0.0,
            seed: 4,
            ..Default::default()
        };
        let corr = FederationConfig {
            label_correlation: 1.0,
            ..base.clone()
        };
        let acc = |cfg: &FederationConfig| {
            let pooled = Dataset::pooled(generate_federation(cfg).unwrap().iter()).unwrap();
            let hits = pooled
                .records()
                .iter()
                .filter(|r| r.predicted(0.5) == r.label)
                .count();
            let bf = brute_force_metrics(&pooled, 0.5).unwrap();
            (hits as f64 / pooled.len() as f64, bf.dp_violation)
        };
        let (a0, d0) = acc(&base);
        let (a1, d1) = acc(&corr);
        assert!(a1 > a0 + 0.1);
        assert!((d0 - 0.23).abs() < 0.02 && (d1 - 0.23).abs() < 0.02);
    }

    #[test]
    fn generation_is_deterministic_and_seed_sensitive() {
        let cfg = FederationConfig {
            attribute_count: 3,
            ..Default::default()
        };
        assert_eq!(
            generate_federation(&cfg).unwrap(),
            generate_federation(&cfg).unwrap()
        );
        let other = FederationConfig {
            seed: 1,
            ..cfg.clone()
        };
        assert_ne!(
            generate_federation(&cfg).unwrap(),
            generate_federation(&other).unwrap()
        );
    }

    #[test]
    fn invalid_configs_are_rejected() {
        let bad = [
            FederationConfig {
                n_participants: 0,
                ..Default::default()
            },
            FederationConfig {
                records_per_participant: (5, 4),
                ..Default::default()
            },
            FederationConfig {
                attribute_prevalence: (0.0, 0.5),
                ..Default::default()
            },
            FederationConfig {
                score_disparity: 1.5,
                ..Default::default()
            },
            FederationConfig {
                attribute_count: 9,
                ..Default::default()
            },
        ];
        for cfg in bad {
            assert!(
                matches!(generate_federation(&cfg), Err(DatagenError::Invalid(_))),
                "{cfg:?}"
            );
        }
    }
}
