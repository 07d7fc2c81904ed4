use serde::{Deserialize, Serialize};

use super::{require, Result};

/// Reported epsilons are inflated by this factor to absorb the fixed-point
/// rounding of sampled noise (at most half a unit of 10⁻⁶).
pub const ROUNDING_INFLATION: f64 = 1.000001;

pub fn reported_epsilon(epsilon: f64) -> f64 {
    epsilon * ROUNDING_INFLATION
}

/// ε guaranteed by `T` releases of the noised aggregate:
/// `4·√(2T·ln(2/δ))/(σn) + 4T/(σn)²`. Zero when `T = 0`.
pub fn protocol_epsilon(sigma: f64, n: u64, rounds: u64, delta: f64) -> Result<f64> {
    require(sigma > 0.0 && n > 0, || {
        format!("sigma and n must be positive, got {sigma}, {n}")
    })?;
    require(delta > 0.0 && delta < 1.0, || {
        format!("delta must lie in (0, 1), got {delta}")
    })?;
    let t = rounds as f64;
    let sn = sigma * n as f64;
    Ok(4.0 * (2.0 * t * (2.0 / delta).ln()).sqrt() / sn + 4.0 * t / (sn * sn))
}

/// Minimum ε for verifying demographic parity within `tau`:
/// `2/(τ·min(n₀, n₁))`.
pub fn verification_lower_bound(tau: f64, n0: u64, n1: u64) -> f64 {
    2.0 / (tau * n0.min(n1) as f64)
}

/// High-probability error of the noised DP estimate:
/// `4σ·√(2·ln(4/δ_fair))/min(n₀, n₁)`. The participant count does not
/// enter the closed form; it is accepted for symmetry with the other bounds.
pub fn accuracy_bound(
    sigma: f64,
    _n_participants: u64,
    n0: u64,
    n1: u64,
    delta_fair: f64,
) -> Result<f64> {
    require(sigma >= 0.0 && sigma.is_finite(), || {
        format!("sigma must be non-negative, got {sigma}")
    })?;
    require(n0 > 0 && n1 > 0, || "group sizes must be positive".into())?;
    require(delta_fair > 0.0 && delta_fair < 1.0, || {
        format!("delta_fair must lie in (0, 1), got {delta_fair}")
    })?;
    Ok(4.0 * sigma * (2.0 * (4.0 / delta_fair).ln()).sqrt() / n0.min(n1) as f64)
}

/// Metric-release noise `σ_def = 2√T/(ε_inf·n)`.
pub fn defense_scale(rounds: u64, epsilon_inf: f64, n: u64) -> Result<f64> {
    require(rounds > 0 && n > 0 && epsilon_inf > 0.0, || {
        format!("T, epsilon_inf and n must be positive, got {rounds}, {epsilon_inf}, {n}")
    })?;
    Ok(2.0 * (rounds as f64).sqrt() / (epsilon_inf * n as f64))
}

/// Release-time noise against attribute inference. `epsilon_inf = None`
/// disables the defense (`sigma_def = 0`).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DefenseConfig {
    pub epsilon_inf: Option<f64>,
    pub horizon_t: u64,
    pub participant_count_n: u64,
    pub sigma_def: f64,
}

impl DefenseConfig {
    pub fn new(epsilon_inf: f64, horizon_t: u64, participant_count_n: u64) -> Result<Self> {
        Ok(Self {
            epsilon_inf: Some(epsilon_inf),
            horizon_t,
            participant_count_n,
            sigma_def: defense_scale(horizon_t, epsilon_inf, participant_count_n)?,
        })
    }

    pub fn disabled(horizon_t: u64, participant_count_n: u64) -> Self {
        Self {
            epsilon_inf: None,
            horizon_t,
            participant_count_n,
            sigma_def: 0.0,
        }
    }

    /// Inference success bound `0.5 + ε_inf/2`, or 1 without the defense.
    pub fn success_bound(&self) -> f64 {
        self.epsilon_inf.map_or(1.0, |e| (0.5 + e / 2.0).min(1.0))
    }

    /// Re-derives `sigma_def` and checks it against the stored value.
    pub fn validate(&self) -> Result<()> {
        let expected = match self.epsilon_inf {
            Some(e) => defense_scale(self.horizon_t, e, self.participant_count_n)?,
            None => 0.0,
        };
        require(
            (self.sigma_def - expected).abs() <= 1e-12 * expected.max(1.0),
            || {
                format!(
                    "sigma_def {} disagrees with 2*sqrt(T)/(eps_inf*n) = {expected}",
                    self.sigma_def
                )
            },
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, rel: f64) -> bool {
        (a - b).abs() <= rel * b.abs().max(f64::MIN_POSITIVE)
    }

    #[test]
    fn protocol_epsilon_examples() {
        // 50-digit evaluation: 4.4694178151243354...
        assert!(close(
            protocol_epsilon(1.0, 50, 100, 1e-6).unwrap(),
            4.469417815124335,
            1e-12
        ));
        assert_eq!(protocol_epsilon(1.0, 50, 0, 1e-6).unwrap(), 0.0);
        let a = protocol_epsilon(1.0, 20, 9, 1e-3).unwrap();
        let b = protocol_epsilon(2.0, 20, 9, 1e-3).unwrap();
        let first = |s: f64| 4.0 * (18.0f64 * 2000f64.ln()).sqrt() / (s * 20.0);
        let second = |s: f64| 36.0 / (s * 20.0).powi(2);
        assert!(close(a, first(1.0) + second(1.0), 1e-14));
        assert!(close(b, first(1.0) / 2.0 + second(1.0) / 4.0, 1e-14));
        assert!(protocol_epsilon(0.0, 1, 1, 0.1).is_err());
        assert!(protocol_epsilon(1.0, 1, 1, 1.0).is_err());
    }

    #[test]
    fn lower_bound_examples() {
        assert!(close(verification_lower_bound(0.05, 100, 100), 0.4, 1e-15));
        assert!(close(
            verification_lower_bound(0.05, 1000, 1000),
            0.04,
            1e-15
        ));
        assert_eq!(
            verification_lower_bound(0.1, 30, 70),
            verification_lower_bound(0.1, 70, 30)
        );
    }

    #[test]
    fn accuracy_bound_examples() {
        // 4·sqrt(2·ln 80)/1000 = 0.011841657498406387...
        assert!(close(
            accuracy_bound(1.0, 20, 1000, 1000, 0.05).unwrap(),
            0.011841657498406387,
            1e-12
        ));
        assert_eq!(accuracy_bound(0.0, 20, 1000, 1000, 0.05).unwrap(), 0.0);
        let one = accuracy_bound(1.3, 5, 400, 900, 0.1).unwrap();
        let two = accuracy_bound(1.3, 5, 800, 900, 0.1).unwrap();
        assert!(close(two, one / 2.0, 1e-14));
        assert!(accuracy_bound(1.0, 1, 0, 5, 0.1).is_err());
    }

    #[test]
    fn defense_scale_examples() {
        assert_eq!(defense_scale(100, 0.1, 50).unwrap(), 4.0);
        assert_eq!(defense_scale(1, 2.0, 1).unwrap(), 1.0);
        let a = defense_scale(25, 0.3, 7).unwrap();
        assert!(close(defense_scale(100, 0.3, 7).unwrap(), 2.0 * a, 1e-15));
        assert!(defense_scale(0, 0.1, 1).is_err());
        let d = DefenseConfig::new(0.1, 100, 50).unwrap();
        assert_eq!(d.sigma_def, 4.0);
        d.validate().unwrap();
        assert!(close(d.success_bound(), 0.55, 1e-15));
        let mut bad = d;
        bad.sigma_def = 3.0;
        assert!(bad.validate().is_err());
        DefenseConfig::disabled(100, 50).validate().unwrap();
    }
}
