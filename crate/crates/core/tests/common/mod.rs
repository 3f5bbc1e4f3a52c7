#![allow(dead_code)]

use std::path::PathBuf;

use flwbc::attack::AttackPolicy;
use flwbc::data::LabelRule;
use flwbc::defense::DefensePolicy;
use flwbc::engine::{FederationConfig, LearningRate, Simulator};
use flwbc::nn::{Activation, Loss};
use flwbc::scenario::{DataSource, ExperimentConfig, ModelConfig, Partition};

pub fn repo_root() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../..")
}

pub fn load_profile(name: &str) -> ExperimentConfig {
    let path = repo_root().join("configs").join(name);
    let text = std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    ExperimentConfig::from_json(&text).unwrap()
}

pub fn desk() -> ExperimentConfig {
    load_profile("desk.json")
}

/// A federation small enough to run in milliseconds: 8 devices, 2 attackers.
pub fn tiny() -> ExperimentConfig {
    ExperimentConfig {
        federation: FederationConfig {
            num_devices: 8,
            devices_per_round: 4,
            local_epochs: 1,
            batch_size: 5,
            learning_rate: LearningRate::Constant(0.2),
            rounds: 12,
            attacker_ids: vec![0, 1],
            adversarial_prob: 0.3,
            adversaries_per_round: 2,
            first_adversarial_round: 1,
            attack: AttackPolicy::default(),
            defense: DefensePolicy::None,
            seed: 7,
            capture_trajectories: false,
        },
        model: ModelConfig {
            hidden: vec![8],
            activation: Activation::Relu,
            loss: Loss::SoftmaxCrossEntropy,
        },
        data: DataSource::Synthetic {
            classes: 3,
            dim: 5,
            per_class: 30,
            spread: 0.3,
        },
        partition: Partition::Iid,
        malicious_samples: 1,
        label_rule: LabelRule::UniformWrong,
        malicious_fraction: 0.05,
        test_fraction: 0.1,
        horizon: 5,
        output_dir: None,
    }
}

/// Single-layer least squares on one-hot targets: the loss is an exact quadratic.
pub fn linear_mse() -> ExperimentConfig {
    let mut cfg = tiny();
    cfg.model = ModelConfig {
        hidden: vec![],
        activation: Activation::Identity,
        loss: Loss::MeanSquaredError,
    };
    cfg.federation.learning_rate = LearningRate::Constant(0.05);
    cfg.federation.capture_trajectories = true;
    cfg
}

pub fn build(cfg: &ExperimentConfig) -> Simulator {
    cfg.build().unwrap()
}

/// Round-log fields as exact bit patterns, for bit-identity comparisons.
pub fn log_bits(records: &[flwbc::analysis::RoundRecord]) -> Vec<(usize, bool, u64, u64, u64)> {
    records
        .iter()
        .map(|r| {
            (
                r.round,
                r.is_adversarial,
                r.benign_accuracy.to_bits(),
                r.misclassification_confidence.to_bits(),
                r.misclassification_accuracy.to_bits(),
            )
        })
        .collect()
}
