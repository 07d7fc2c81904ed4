use std::collections::BTreeSet;

use super::{AttackParams, DefenseParams, ExperimentConfig, PrivacyParams, ProtocolParams, Sweep};
use crate::datagen::FederationConfig;
use crate::fairness::DEFAULT_THRESHOLD;
use crate::netsim::{AdversaryConfig, NetworkModel, Strategy, ThreatModel, WorstCase};

pub const PRESET_NAMES: [&str; 5] = ["smoke", "tree-scaling", "tradeoff", "malicious", "attack"];

pub const TRADEOFF_EPSILONS: [f64; 6] = [0.25, 0.5, 0.75, 1.0, 1.5, 2.0];

fn base(name: &str, n: usize, records: (usize, usize)) -> ExperimentConfig {
    ExperimentConfig {
        name: name.into(),
        seed: 20240611,
        federation: FederationConfig {
            n_participants: n,
            records_per_participant: records,
            seed: 20240611,
            ..Default::default()
        },
        privacy: PrivacyParams::default(),
        protocol: ProtocolParams::default(),
        defense: DefenseParams {
            epsilon_inf: Some(0.1),
        },
        adversary: None,
        network: NetworkModel::default(),
        rounds: 10,
        attack: None,
        sweep: None,
        threshold: DEFAULT_THRESHOLD,
    }
}

/// Built-in scenario by name.
pub fn preset(name: &str) -> Option<ExperimentConfig> {
    let cfg = match name {
        "smoke" => ExperimentConfig {
            adversary: Some(AdversaryConfig {
                model: ThreatModel::HonestButCurious,
                corrupted: BTreeSet::from([1, 2]),
                strategy: Strategy::TranscriptCapture,
            }),
            ..base(name, 8, (100, 200))
        },
        "tree-scaling" => ExperimentConfig {
            protocol: ProtocolParams {
                verified: false,
                ..Default::default()
            },
            sweep: Some(Sweep::Participants {
                values: vec![10, 30, 50, 100],
            }),
            ..base(name, 10, (50, 100))
        },
        "tradeoff" => ExperimentConfig {
            protocol: ProtocolParams {
                verified: false,
                ..Default::default()
            },
            sweep: Some(Sweep::Epsilon {
                values: TRADEOFF_EPSILONS.to_vec(),
                repetitions: 20,
            }),
            ..base(name, 20, (300, 500))
        },
        "malicious" => ExperimentConfig {
            adversary: Some(AdversaryConfig {
                model: ThreatModel::Malicious,
                corrupted: BTreeSet::from([3]),
                strategy: Strategy::OutOfRange { statistic: 1 },
            }),
            ..base(name, 7, (30, 60))
        },
        "attack" => ExperimentConfig {
            protocol: ProtocolParams {
                verified: false,
                ..Default::default()
            },
            rounds: 100,
            attack: Some(AttackParams {
                trials: 2000,
                worst_case: WorstCase::default(),
            }),
            ..base(name, 50, (20, 40))
        },
        _ => return None,
    };
    Some(cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_preset_validates() {
        for name in PRESET_NAMES {
            let cfg = preset(name).unwrap();
            assert_eq!(cfg.name, name);
            cfg.validate().unwrap();
        }
        assert!(preset("nope").is_none());
    }
}
