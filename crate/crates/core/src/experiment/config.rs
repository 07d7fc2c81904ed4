use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{ExperimentError, Result};
use crate::crypto::{DEFAULT_FIXED_POINT_SCALE, MIN_KEY_BITS};
use crate::datagen::FederationConfig;
use crate::fairness::DEFAULT_THRESHOLD;
use crate::netsim::{AdversaryConfig, NetworkModel, WorstCase};
use crate::privacy::{verification_lower_bound, DefenseConfig};
use crate::protocol::DEFAULT_BATCH_SIZE;

/// Noise level and the targets it is checked against. Give either the
/// per-round budget `epsilon` (then `σ = 1/ε`) or `sigma` directly.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PrivacyParams {
    #[serde(default)]
    pub epsilon: Option<f64>,
    #[serde(default)]
    pub sigma: Option<f64>,
    pub delta: f64,
    pub delta_prime: f64,
    /// Demographic-parity tolerance the audit must resolve.
    pub tau: f64,
    pub delta_fair: f64,
}

impl Default for PrivacyParams {
    fn default() -> Self {
        Self {
            epsilon: Some(1.0),
            sigma: None,
            delta: 1e-6,
            delta_prime: 1e-6,
            tau: 0.05,
            delta_fair: 0.05,
        }
    }
}

impl PrivacyParams {
    /// Per-count Laplace scale.
    pub fn sigma(&self) -> f64 {
        match (self.sigma, self.epsilon) {
            (Some(s), _) => s,
            (None, Some(e)) => 1.0 / e,
            (None, None) => 0.0,
        }
    }

    /// Per-round ε checked against the verification lower bound; infinite
    /// without noise.
    pub fn target_epsilon(&self) -> f64 {
        match self.epsilon {
            Some(e) => e,
            None if self.sigma() > 0.0 => 1.0 / self.sigma(),
            None => f64::INFINITY,
        }
    }

    /// Rejects `ε < 2/(τ·min(n₀, n₁))`.
    pub fn check_lower_bound(&self, n0: u64, n1: u64) -> Result<()> {
        let required = verification_lower_bound(self.tau, n0, n1);
        let epsilon = self.target_epsilon();
        if epsilon < required {
            return Err(ExperimentError::LowerBound {
                epsilon,
                required,
                tau: self.tau,
                n0,
                n1,
            });
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProtocolParams {
    pub threshold_k: u32,
    pub batch_size: usize,
    pub key_bits: u32,
    pub fixed_point_scale: u64,
    /// Also run commitment-verified aggregation.
    pub verified: bool,
}

impl Default for ProtocolParams {
    fn default() -> Self {
        Self {
            threshold_k: 3,
            batch_size: DEFAULT_BATCH_SIZE,
            key_bits: 512,
            fixed_point_scale: DEFAULT_FIXED_POINT_SCALE,
            verified: true,
        }
    }
}

/// Release-time defense; `epsilon_inf = None` disables it.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct DefenseParams {
    pub epsilon_inf: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AttackParams {
    pub trials: u64,
    pub worst_case: WorstCase,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Sweep {
    /// Tree aggregation and the naive baseline at several federation sizes.
    Participants { values: Vec<usize> },
    /// Metric error at several per-round budgets, `σ = 1/ε`. Every budget
    /// sees the same per-repetition seeds.
    Epsilon { values: Vec<f64>, repetitions: u64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub name: String,
    pub seed: u64,
    pub federation: FederationConfig,
    #[serde(default)]
    pub privacy: PrivacyParams,
    #[serde(default)]
    pub protocol: ProtocolParams,
    #[serde(default)]
    pub defense: DefenseParams,
    #[serde(default)]
    pub adversary: Option<AdversaryConfig>,
    #[serde(default)]
    pub network: NetworkModel,
    pub rounds: u64,
    #[serde(default)]
    pub attack: Option<AttackParams>,
    #[serde(default)]
    pub sweep: Option<Sweep>,
    #[serde(default = "default_threshold")]
    pub threshold: f64,
}

fn default_threshold() -> f64 {
    DEFAULT_THRESHOLD
}

fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(ExperimentError::Config(msg.into()))
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| ExperimentError::Config(format!("config JSON: {e}")))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn n(&self) -> usize {
        self.federation.n_participants
    }

    /// Defense for a federation of `n` parties over `rounds` releases.
    pub fn defense_for(&self, n: usize) -> Result<DefenseConfig> {
        match self.defense.epsilon_inf {
            Some(e) => Ok(DefenseConfig::new(e, self.rounds.max(1), n as u64)?),
            None => Ok(DefenseConfig::disabled(self.rounds, n as u64)),
        }
    }

    /// Structural checks that need no generated data. The lower bound is
    /// checked once group sizes are known.
    pub fn validate(&self) -> Result<()> {
        self.federation.validate()?;
        let n = self.n();
        let p = &self.protocol;
        if p.threshold_k == 0 || p.threshold_k as usize > n {
            return invalid(format!(
                "threshold k = {} must lie in 1..={n}",
                p.threshold_k
            ));
        }
        if p.batch_size == 0 {
            return invalid("batch size must be positive");
        }
        if p.key_bits < MIN_KEY_BITS || p.key_bits % 2 != 0 {
            return invalid(format!(
                "key size {} must be even and at least {MIN_KEY_BITS}",
                p.key_bits
            ));
        }
        if p.fixed_point_scale == 0 {
            return invalid("fixed-point scale must be positive");
        }
        let pr = &self.privacy;
        let sigma = pr.sigma();
        if !(sigma >= 0.0 && sigma.is_finite()) {
            return invalid(format!("sigma {sigma} must be finite and non-negative"));
        }
        if pr.epsilon.is_some_and(|e| !(e > 0.0)) {
            return invalid("epsilon must be positive");
        }
        for (name, v) in [
            ("delta", pr.delta),
            ("delta_prime", pr.delta_prime),
            ("delta_fair", pr.delta_fair),
        ] {
            if !(v > 0.0 && v < 1.0) {
                return invalid(format!("{name} = {v} must lie in (0, 1)"));
            }
        }
        if !(pr.tau > 0.0) {
            return invalid(format!("tau = {} must be positive", pr.tau));
        }
        if !(self.threshold > 0.0 && self.threshold < 1.0) {
            return invalid(format!("threshold {} must lie in (0, 1)", self.threshold));
        }
        if self.defense.epsilon_inf.is_some_and(|e| !(e > 0.0)) {
            return invalid("epsilon_inf must be positive");
        }
        self.defense_for(n)?;
        self.network.validate().map_err(ExperimentError::Config)?;
        if let Some(adv) = &self.adversary {
            adv.validate(n)?;
        }
        if let Some(a) = &self.attack {
            if a.worst_case.participants < p.threshold_k as usize {
                return invalid("attack federation is smaller than the decryption committee");
            }
        }
        match &self.sweep {
            Some(Sweep::Participants { values }) => {
                if values.is_empty() || values.iter().any(|&v| v < p.threshold_k as usize) {
                    return invalid("participant sweep values must be at least k");
                }
            }
            Some(Sweep::Epsilon {
                values,
                repetitions,
            }) => {
                if values.is_empty() || values.iter().any(|&e| !(e > 0.0)) || *repetitions == 0 {
                    return invalid("epsilon sweep needs positive values and repetitions");
                }
            }
            None => {}
        }
        Ok(())
    }

    /// Checks that `dir` exists or can be created and accepts files.
    pub fn check_output_dir(dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir)
            .map_err(|e| ExperimentError::Io(format!("{}: {e}", dir.display())))?;
        let probe = dir.join(".write-probe");
        std::fs::write(&probe, b"")
            .map_err(|e| ExperimentError::Io(format!("{}: {e}", dir.display())))?;
        std::fs::remove_file(&probe)
            .map_err(|e| ExperimentError::Io(format!("{}: {e}", probe.display())))?;
        Ok(())
    }
}
