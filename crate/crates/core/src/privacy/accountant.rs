use serde::{Deserialize, Serialize};

use super::{require, PrivacyError, Result};

/// Advanced composition of `T` releases, each `(ε₀, δ₀)`-DP:
/// `ε_T = √(2T·ln(1/δ'))·ε₀ + T·ε₀·(e^ε₀ − 1)` and `δ_T = T·δ₀ + δ'`.
pub fn compose(epsilon0: f64, delta0: f64, rounds: u64, delta_prime: f64) -> Result<(f64, f64)> {
    require(epsilon0 > 0.0 && epsilon0.is_finite(), || {
        format!("epsilon0 must be positive, got {epsilon0}")
    })?;
    require((0.0..1.0).contains(&delta0), || {
        format!("delta0 must lie in [0, 1), got {delta0}")
    })?;
    require(delta_prime > 0.0 && delta_prime < 1.0, || {
        format!("delta_prime must lie in (0, 1), got {delta_prime}")
    })?;
    let t = rounds as f64;
    let epsilon =
        (2.0 * t * (1.0 / delta_prime).ln()).sqrt() * epsilon0 + t * epsilon0 * epsilon0.exp_m1();
    Ok((epsilon, t * delta0 + delta_prime))
}

/// Running privacy charge across verification rounds. Totals always equal
/// [`compose`] at the current round count.
#[derive(Clone, Debug, PartialEq)]
pub struct PrivacyAccountant {
    epsilon0: f64,
    delta0: f64,
    delta_prime: f64,
    rounds_charged: u64,
    total_epsilon: f64,
    total_delta: f64,
    epsilon_cap: Option<f64>,
}

#[derive(Serialize, Deserialize)]
struct AccountantState {
    epsilon0: String,
    delta0: String,
    delta_prime: String,
    rounds_charged: u64,
    total_epsilon: String,
    total_delta: String,
    epsilon_cap: Option<String>,
}

fn fmt12(x: f64) -> String {
    format!("{x:.11e}")
}

fn parse(field: &str, s: &str) -> Result<f64> {
    s.parse()
        .map_err(|_| PrivacyError::Malformed(format!("{field}: {s:?} is not a number")))
}

impl PrivacyAccountant {
    pub fn new(epsilon0: f64, delta0: f64, delta_prime: f64) -> Result<Self> {
        let (total_epsilon, total_delta) = compose(epsilon0, delta0, 0, delta_prime)?;
        Ok(Self {
            epsilon0,
            delta0,
            delta_prime,
            rounds_charged: 0,
            total_epsilon,
            total_delta,
            epsilon_cap: None,
        })
    }

    pub fn with_cap(mut self, cap: f64) -> Self {
        self.epsilon_cap = Some(cap);
        self
    }

    pub fn epsilon0(&self) -> f64 {
        self.epsilon0
    }

    pub fn delta0(&self) -> f64 {
        self.delta0
    }

    pub fn delta_prime(&self) -> f64 {
        self.delta_prime
    }

    pub fn rounds_charged(&self) -> u64 {
        self.rounds_charged
    }

    pub fn total_epsilon(&self) -> f64 {
        self.total_epsilon
    }

    pub fn total_delta(&self) -> f64 {
        self.total_delta
    }

    pub fn epsilon_cap(&self) -> Option<f64> {
        self.epsilon_cap
    }

    /// Charges one more round. Fails without changing state if the new
    /// total would exceed the cap.
    pub fn charge_round(&mut self) -> Result<()> {
        let round = self.rounds_charged + 1;
        let (eps, delta) = compose(self.epsilon0, self.delta0, round, self.delta_prime)?;
        if let Some(cap) = self.epsilon_cap {
            if eps > cap {
                return Err(PrivacyError::BudgetExhausted {
                    round,
                    attempted: eps,
                    cap,
                });
            }
        }
        self.rounds_charged = round;
        self.total_epsilon = eps;
        self.total_delta = delta;
        Ok(())
    }

    pub fn charge_rounds(&mut self, rounds: u64) -> Result<()> {
        (0..rounds).try_for_each(|_| self.charge_round())
    }

    /// All fields as decimal strings with 12 significant digits.
    pub fn to_json(&self) -> String {
        let state = AccountantState {
            epsilon0: fmt12(self.epsilon0),
            delta0: fmt12(self.delta0),
            delta_prime: fmt12(self.delta_prime),
            rounds_charged: self.rounds_charged,
            total_epsilon: fmt12(self.total_epsilon),
            total_delta: fmt12(self.total_delta),
            epsilon_cap: self.epsilon_cap.map(fmt12),
        };
        serde_json::to_string_pretty(&state).expect("accountant serializes")
    }

    /// Restores an exported state. Totals are recomputed from the
    /// parameters and must agree with the stored ones.
    pub fn from_json(text: &str) -> Result<Self> {
        let s: AccountantState =
            serde_json::from_str(text).map_err(|e| PrivacyError::Malformed(e.to_string()))?;
        let mut acc = Self::new(
            parse("epsilon0", &s.epsilon0)?,
            parse("delta0", &s.delta0)?,
            parse("delta_prime", &s.delta_prime)?,
        )?;
        acc.epsilon_cap = s
            .epsilon_cap
            .as_deref()
            .map(|c| parse("epsilon_cap", c))
            .transpose()?;
        acc.rounds_charged = s.rounds_charged;
        (acc.total_epsilon, acc.total_delta) = compose(
            acc.epsilon0,
            acc.delta0,
            acc.rounds_charged,
            acc.delta_prime,
        )?;
        for (field, stored, derived) in [
            ("total_epsilon", &s.total_epsilon, acc.total_epsilon),
            ("total_delta", &s.total_delta, acc.total_delta),
        ] {
            let stored = parse(field, stored)?;
            if (stored - derived).abs() > 1e-10 * derived.abs().max(1e-300) {
                return Err(PrivacyError::Malformed(format!(
                    "{field} {stored} does not match composition ({derived})"
                )));
            }
        }
        Ok(acc)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() <= 1e-12 * b.abs()
    }

    #[test]
    fn compose_examples() {
        // 50-digit evaluations of the closed form.
        let (e1, d1) = compose(0.1, 0.0, 1, 1e-6).unwrap();
        assert!(close(e1, 0.536169268783258), "{e1}");
        assert_eq!(d1, 1e-6);
        let (e10, d10) = compose(0.1, 0.0, 10, 1e-6).unwrap();
        assert!(close(e10, 1.7674290543447577), "{e10}");
        assert_eq!(d10, 1e-6);
        assert_eq!(compose(0.1, 1e-7, 0, 1e-6).unwrap(), (0.0, 1e-6));
        assert!(compose(0.0, 0.0, 1, 1e-6).is_err());
        assert!(compose(0.1, 0.0, 1, 1.0).is_err());
    }

    #[test]
    fn fresh_charge_equals_single_round_composition() {
        let mut acc = PrivacyAccountant::new(0.2, 1e-8, 1e-6).unwrap();
        assert_eq!(acc.total_epsilon(), 0.0);
        acc.charge_round().unwrap();
        assert_eq!(
            (acc.total_epsilon(), acc.total_delta()),
            compose(0.2, 1e-8, 1, 1e-6).unwrap()
        );
    }

    #[test]
    fn cap_exhausts_at_first_round_over_budget() {
        let first_over = (1..)
            .find(|&t| compose(0.1, 0.0, t, 1e-6).unwrap().0 > 1.0)
            .unwrap();
        let mut acc = PrivacyAccountant::new(0.1, 0.0, 1e-6)
            .unwrap()
            .with_cap(1.0);
        for _ in 1..first_over {
            acc.charge_round().unwrap();
        }
        let before = acc.clone();
        let err = acc.charge_round().unwrap_err();
        assert!(matches!(err, PrivacyError::BudgetExhausted { round, .. } if round == first_over));
        assert_eq!(acc, before);
        assert!(acc.charge_round().is_err());
        assert_eq!(acc, before);
        assert_eq!(first_over, 4);
    }

    #[test]
    fn json_round_trip_and_tamper_detection() {
        let mut acc = PrivacyAccountant::new(0.3, 1e-9, 1e-6)
            .unwrap()
            .with_cap(50.0);
        acc.charge_rounds(7).unwrap();
        let text = acc.to_json();
        let value: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(
            value["total_epsilon"].as_str().unwrap(),
            format!("{:.11e}", acc.total_epsilon())
        );
        let back = PrivacyAccountant::from_json(&text).unwrap();
        assert_eq!(back.rounds_charged(), 7);
        assert!(close(back.total_epsilon(), acc.total_epsilon()));
        let tampered = text.replace("\"rounds_charged\": 7", "\"rounds_charged\": 6");
        assert!(PrivacyAccountant::from_json(&tampered).is_err());
    }

    proptest! {
        #[test]
        fn compose_is_monotone(eps in 0.001f64..3.0, bump in 0.0001f64..1.0, t in 0u64..2000) {
            let a = compose(eps, 0.0, t, 1e-6).unwrap().0;
            prop_assert!(compose(eps, 0.0, t + 1, 1e-6).unwrap().0 >= a);
            prop_assert!(compose(eps + bump, 0.0, t, 1e-6).unwrap().0 >= a);
        }
    }
}
