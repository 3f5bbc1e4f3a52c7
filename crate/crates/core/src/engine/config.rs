use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::attack::AttackPolicy;
use crate::defense::DefensePolicy;
use crate::error::{Error, Result};

/// Step size for local SGD.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum LearningRate {
    Constant(f64),
    /// `η_{t,i} = 2 / (μ(γ + tI + i))` with `κ = L/μ` and `γ = max(8κ, I)`.
    Decaying {
        mu: f64,
        smoothness: f64,
    },
}

impl LearningRate {
    /// Step size at round `t`, local iteration `i`, with `iterations` nominal local steps per round.
    pub fn eta(&self, t: usize, i: usize, iterations: usize) -> f64 {
        match *self {
            LearningRate::Constant(eta) => eta,
            LearningRate::Decaying { mu, smoothness } => {
                let gamma = decay_gamma(mu, smoothness, iterations);
                2.0 / (mu * (gamma + (t * iterations + i) as f64))
            }
        }
    }

    fn validate(&self) -> Result<()> {
        match *self {
            LearningRate::Constant(eta) if eta.is_finite() && eta > 0.0 => Ok(()),
            LearningRate::Constant(eta) => Err(Error::config("learning_rate", format!("must be > 0, got {eta}"))),
            LearningRate::Decaying { mu, smoothness } => {
                if mu > 0.0 && smoothness >= mu && smoothness.is_finite() {
                    Ok(())
                } else {
                    Err(Error::config(
                        "learning_rate",
                        "decaying schedule needs smoothness >= mu > 0",
                    ))
                }
            }
        }
    }
}

/// `γ = max(8L/μ, I)`.
pub fn decay_gamma(mu: f64, smoothness: f64, iterations: usize) -> f64 {
    (8.0 * smoothness / mu).max(iterations as f64)
}

fn default_first_adversarial_round() -> usize {
    1
}

/// Every knob of one simulated federation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FederationConfig {
    pub num_devices: usize,
    pub devices_per_round: usize,
    pub local_epochs: usize,
    pub batch_size: usize,
    pub learning_rate: LearningRate,
    pub rounds: usize,
    #[serde(default)]
    pub attacker_ids: Vec<usize>,
    #[serde(default)]
    pub adversarial_prob: f64,
    #[serde(default)]
    pub adversaries_per_round: usize,
    /// Rounds before this one are never adversarial. Round 0 is always benign.
    #[serde(default = "default_first_adversarial_round")]
    pub first_adversarial_round: usize,
    #[serde(default)]
    pub attack: AttackPolicy,
    #[serde(default)]
    pub defense: DefensePolicy,
    pub seed: u64,
    #[serde(default)]
    pub capture_trajectories: bool,
}

impl FederationConfig {
    pub fn validate(&self) -> Result<()> {
        let n = self.num_devices;
        let k = self.devices_per_round;
        if n == 0 {
            return Err(Error::config("num_devices", "must be >= 1"));
        }
        if k == 0 || k > n {
            return Err(Error::config(
                "devices_per_round",
                format!("must lie in [1, num_devices = {n}], got {k}"),
            ));
        }
        if self.local_epochs == 0 {
            return Err(Error::config("local_epochs", "must be >= 1"));
        }
        if self.batch_size == 0 {
            return Err(Error::config("batch_size", "must be >= 1"));
        }
        self.learning_rate.validate()?;
        let attackers: BTreeSet<usize> = self.attacker_ids.iter().copied().collect();
        if attackers.len() != self.attacker_ids.len() {
            return Err(Error::config("attacker_ids", "duplicate id"));
        }
        if let Some(&bad) = attackers.iter().find(|&&a| a >= n) {
            return Err(Error::config("attacker_ids", format!("id {bad} >= num_devices {n}")));
        }
        if !(0.0..=1.0).contains(&self.adversarial_prob) {
            return Err(Error::config("adversarial_prob", "must lie in [0, 1]"));
        }
        let benign = n - attackers.len();
        if benign < k {
            return Err(Error::config(
                "attacker_ids",
                format!("benign rounds need {k} benign devices but only {benign} exist"),
            ));
        }
        if self.adversarial_prob > 0.0 && !attackers.is_empty() {
            let a = self.adversaries_per_round;
            if a == 0 || a > attackers.len() {
                return Err(Error::config(
                    "adversaries_per_round",
                    format!("must lie in [1, {}], got {a}", attackers.len()),
                ));
            }
            if a > k {
                return Err(Error::config(
                    "adversaries_per_round",
                    format!("{a} attackers do not fit in {k} sampled devices"),
                ));
            }
        }
        self.attack.validate()?;
        self.defense.validate()?;
        Ok(())
    }

    pub fn is_attacker(&self, id: usize) -> bool {
        self.attacker_ids.contains(&id)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base() -> FederationConfig {
        FederationConfig {
            num_devices: 10,
            devices_per_round: 4,
            local_epochs: 1,
            batch_size: 8,
            learning_rate: LearningRate::Constant(0.1),
            rounds: 5,
            attacker_ids: vec![0, 1],
            adversarial_prob: 0.5,
            adversaries_per_round: 2,
            first_adversarial_round: 1,
            attack: AttackPolicy::default(),
            defense: DefensePolicy::None,
            seed: 1,
            capture_trajectories: false,
        }
    }

    #[test]
    fn decaying_schedule_arithmetic() {
        let lr = LearningRate::Decaying {
            mu: 1.0,
            smoothness: 1.0,
        };
        assert_eq!(decay_gamma(1.0, 1.0, 4), 8.0);
        assert_eq!(lr.eta(0, 0, 4), 0.25);
        assert_eq!(lr.eta(1, 2, 4), 2.0 / 14.0);
        assert_eq!(LearningRate::Constant(0.3).eta(9, 9, 9), 0.3);
    }

    #[test]
    fn validation() {
        assert!(base().validate().is_ok());
        let mut c = base();
        c.devices_per_round = 11;
        assert!(c.validate().is_err());
        let mut c = base();
        c.attacker_ids = vec![0, 10];
        assert!(c.validate().unwrap_err().to_string().contains("attacker_ids"));
        let mut c = base();
        c.adversaries_per_round = 3;
        assert!(c.validate().is_err());
        let mut c = base();
        c.attacker_ids = (0..7).collect();
        c.adversaries_per_round = 3;
        assert!(c.validate().is_err());
        let mut c = base();
        c.defense = DefensePolicy::Ctma { beta: 0.6 };
        assert!(c.validate().unwrap_err().to_string().contains("beta"));
        let mut c = base();
        c.learning_rate = LearningRate::Constant(0.0);
        assert!(c.validate().is_err());
    }

    #[test]
    fn json_rejects_unknown_keys() {
        let mut v = serde_json::to_value(base()).unwrap();
        let back: FederationConfig = serde_json::from_value(v.clone()).unwrap();
        assert_eq!(back, base());
        v["bogus"] = serde_json::json!(1);
        assert!(serde_json::from_value::<FederationConfig>(v).is_err());
    }
}
