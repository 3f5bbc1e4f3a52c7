//! FedAvg orchestration: scheduling, sampling, local training and aggregation.

mod config;
mod local;
mod plan;
mod sim;

pub use config::{decay_gamma, FederationConfig, LearningRate};
pub use local::{local_train, local_train_benign, LocalContext, LocalUpdateResult, Role, Trajectory};
pub use plan::{batch_plan, is_adversarial_round, local_iterations, sample_devices};
pub use sim::{AttackMode, FederatedData, RoundOutput, RunOutput, Simulator};
