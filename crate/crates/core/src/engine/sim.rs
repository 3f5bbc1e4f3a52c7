use std::sync::Arc;

use rayon::prelude::*;

use crate::analysis::{accuracy, attack_metrics, RoundRecord};
use crate::data::{ClientShard, Dataset, MaliciousDataset};
use crate::defense::{cdp_apply, cma_aggregate, ctma_aggregate, fedavg_aggregate, DefensePolicy};
use crate::engine::{
    is_adversarial_round, local_iterations, local_train, sample_devices, FederationConfig, LocalContext,
    LocalUpdateResult, Role,
};
use crate::error::{Error, Result};
use crate::nn::{init_params, ModelSpec, ParamVec};
use crate::rng::{derive_rng, Purpose, SERVER};

/// Training partition plus the two holdouts a federation needs.
#[derive(Debug, Clone)]
pub struct FederatedData {
    pub train: Dataset,
    pub shards: Vec<ClientShard>,
    pub malicious: MaliciousDataset,
    pub test: Dataset,
}

/// Whether attackers follow their configured objective or train honestly.
/// `Disabled` is the counterfactual used for attack-effect measurements.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AttackMode {
    Configured,
    Disabled,
}

#[derive(Debug, Clone)]
pub struct RoundOutput {
    pub round: usize,
    pub is_adversarial: bool,
    pub sampled: Vec<usize>,
    pub updates: Vec<LocalUpdateResult>,
    pub new_global: ParamVec,
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub initial: ParamVec,
    pub rounds: Vec<RoundOutput>,
    pub records: Vec<RoundRecord>,
}

impl RunOutput {
    /// Global model after the last round (the initial model when no round ran).
    pub fn final_params(&self) -> &ParamVec {
        self.rounds.last().map_or(&self.initial, |r| &r.new_global)
    }

    /// Global model entering round `t`.
    pub fn global_before(&self, t: usize) -> &ParamVec {
        if t == 0 {
            &self.initial
        } else {
            &self.rounds[t - 1].new_global
        }
    }

    /// `(round, client, batch digest)` for every local session.
    pub fn draw_log(&self) -> Vec<(usize, usize, u64)> {
        self.rounds
            .iter()
            .flat_map(|r| r.updates.iter().map(move |u| (r.round, u.client_id, u.batch_digest)))
            .collect()
    }
}

/// A configured federation over fixed data. All randomness is derived from the
/// config seed, so every method is a pure function of its arguments.
#[derive(Debug, Clone)]
pub struct Simulator {
    cfg: FederationConfig,
    spec: Arc<ModelSpec>,
    data: FederatedData,
    nominal_iterations: usize,
}

impl Simulator {
    pub fn new(cfg: FederationConfig, spec: Arc<ModelSpec>, data: FederatedData) -> Result<Self> {
        cfg.validate()?;
        if data.shards.len() != cfg.num_devices {
            return Err(Error::config(
                "num_devices",
                format!("{} shards for {} devices", data.shards.len(), cfg.num_devices),
            ));
        }
        for (k, s) in data.shards.iter().enumerate() {
            if s.client_id != k || s.is_empty() {
                return Err(Error::config("shards", format!("shard {k} is empty or mislabelled")));
            }
            if s.indices.iter().any(|&i| i >= data.train.len()) {
                return Err(Error::config(
                    "shards",
                    format!("shard {k} indexes past the training set"),
                ));
            }
        }
        for (name, dim) in [
            ("train", data.train.dim()),
            ("test", data.test.dim()),
            ("malicious", data.malicious.dim()),
        ] {
            if dim != spec.input_dim() {
                return Err(Error::config(
                    "model",
                    format!("{name} data has width {dim} but the model expects {}", spec.input_dim()),
                ));
            }
        }
        if spec.output_dim() != data.train.num_classes() {
            return Err(Error::config(
                "model",
                format!("{} outputs for {} classes", spec.output_dim(), data.train.num_classes()),
            ));
        }
        let nominal_iterations = data
            .shards
            .iter()
            .map(|s| local_iterations(s.len(), cfg.local_epochs, cfg.batch_size))
            .max()
            .unwrap_or(1);
        Ok(Self {
            cfg,
            spec,
            data,
            nominal_iterations,
        })
    }

    pub fn cfg(&self) -> &FederationConfig {
        &self.cfg
    }

    pub fn spec(&self) -> &Arc<ModelSpec> {
        &self.spec
    }

    pub fn data(&self) -> &FederatedData {
        &self.data
    }

    /// Largest per-device local step count `⌈E·n_k/B⌉`.
    pub fn nominal_iterations(&self) -> usize {
        self.nominal_iterations
    }

    pub fn initial_params(&self) -> ParamVec {
        init_params(&self.spec, &mut derive_rng(self.cfg.seed, 0, SERVER, Purpose::Init))
    }

    pub fn is_adversarial(&self, t: usize) -> bool {
        is_adversarial_round(&self.cfg, t)
    }

    pub fn adversarial_rounds(&self) -> Vec<usize> {
        (0..self.cfg.rounds).filter(|&t| self.is_adversarial(t)).collect()
    }

    pub fn sampled_devices(&self, t: usize) -> Result<Vec<usize>> {
        let mut rng = derive_rng(self.cfg.seed, t, SERVER, Purpose::Sampling);
        sample_devices(&self.cfg, t, self.is_adversarial(t), &mut rng)
    }

    fn context(&self, capture: bool) -> LocalContext<'_> {
        LocalContext {
            cfg: &self.cfg,
            train: &self.data.train,
            nominal_iterations: self.nominal_iterations,
            capture,
        }
    }

    /// One communication round from `global`: sample, train locally, aggregate.
    pub fn play_round(&self, global: &ParamVec, t: usize, mode: AttackMode, capture: bool) -> Result<RoundOutput> {
        let adversarial = self.is_adversarial(t);
        let sampled = self.sampled_devices(t)?;
        let ctx = self.context(capture);
        let benign_attacker = self.cfg.attack.benign();
        let updates: Vec<LocalUpdateResult> = sampled
            .par_iter()
            .map(|&k| {
                let shard = &self.data.shards[k];
                let role = if self.cfg.is_attacker(k) {
                    let policy = match mode {
                        AttackMode::Configured => &self.cfg.attack,
                        AttackMode::Disabled => &benign_attacker,
                    };
                    Role::Malicious {
                        policy,
                        dm: &self.data.malicious,
                    }
                } else {
                    Role::Benign {
                        defense: self.cfg.defense,
                    }
                };
                local_train(&ctx, global, shard, role, t).map_err(|e| e.in_round(t, k))
            })
            .collect::<Result<_>>()?;
        let new_global = self.aggregate(global, &updates, t).map_err(|e| e.in_round(t, SERVER))?;
        if !new_global.is_finite() {
            return Err(Error::Precondition(format!(
                "round {t}: global model diverged to non-finite values"
            )));
        }
        Ok(RoundOutput {
            round: t,
            is_adversarial: adversarial,
            sampled,
            updates,
            new_global,
        })
    }

    /// Server-side combination of the local models under the configured defense.
    pub fn aggregate(&self, prev: &ParamVec, updates: &[LocalUpdateResult], t: usize) -> Result<ParamVec> {
        let models: Vec<&ParamVec> = updates.iter().map(|u| &u.final_params).collect();
        let weights: Vec<f64> = updates.iter().map(|u| u.weight).collect();
        match self.cfg.defense {
            DefensePolicy::Cma => cma_aggregate(&models),
            DefensePolicy::Ctma { beta } => ctma_aggregate(&models, beta),
            DefensePolicy::Cdp { clip, sigma_dp } => {
                let mut rng = derive_rng(self.cfg.seed, t, SERVER, Purpose::Noise);
                cdp_apply(&models, &weights, prev, clip, sigma_dp, &mut rng)
            }
            DefensePolicy::None | DefensePolicy::Flwbc { .. } | DefensePolicy::Ldp { .. } => {
                fedavg_aggregate(&models, &weights)
            }
        }
    }

    /// Metrics of the global model produced by round `t`.
    pub fn evaluate(&self, t: usize, params: &ParamVec) -> Result<RoundRecord> {
        let benign_accuracy = accuracy(params, &self.data.test)?;
        let (conf, acc) = attack_metrics(params, &self.data.malicious)?;
        Ok(RoundRecord {
            round: t,
            is_adversarial: self.is_adversarial(t),
            benign_accuracy,
            misclassification_confidence: conf,
            misclassification_accuracy: acc,
            defense_tag: self.cfg.defense.tag(),
            delta_norm: None,
        })
    }

    /// Rounds `0..rounds`, with a record after each.
    pub fn run(&self, mode: AttackMode, capture: bool) -> Result<RunOutput> {
        self.run_rounds(self.cfg.rounds, mode, capture)
    }

    pub fn run_rounds(&self, rounds: usize, mode: AttackMode, capture: bool) -> Result<RunOutput> {
        let initial = self.initial_params();
        let mut global = initial.clone();
        let mut outs = Vec::with_capacity(rounds);
        let mut records = Vec::with_capacity(rounds);
        for t in 0..rounds {
            let out = self.play_round(&global, t, mode, capture)?;
            records.push(self.evaluate(t, &out.new_global)?);
            global = out.new_global.clone();
            outs.push(out);
        }
        Ok(RunOutput {
            initial,
            rounds: outs,
            records,
        })
    }
}
