use crate::attack::{malicious_batch_indices, malicious_gradient, rh_gradient, AttackPolicy};
use crate::data::{ClientShard, Dataset, MaliciousDataset};
use crate::defense::{flwbc_step, ldp_apply, DefensePolicy, FlwbcState};
use crate::engine::{batch_plan, FederationConfig};
use crate::error::Result;
use crate::nn::{loss_and_grad, sgd_step, ParamVec};
use crate::rng::{derive_rng, digest_batches, Purpose};

/// What a device does during local training.
#[derive(Debug, Clone, Copy)]
pub enum Role<'a> {
    /// Plain SGD plus the client-side part of `defense` (FL-WBC or LDP).
    Benign { defense: DefensePolicy },
    /// Blended malicious objective; client-side defenses are skipped.
    Malicious {
        policy: &'a AttackPolicy,
        dm: &'a MaliciousDataset,
    },
}

/// Shared, read-only inputs of a local training session.
#[derive(Debug, Clone, Copy)]
pub struct LocalContext<'a> {
    pub cfg: &'a FederationConfig,
    pub train: &'a Dataset,
    /// Local step count used by the decaying learning-rate schedule.
    pub nominal_iterations: usize,
    pub capture: bool,
}

/// Iterates `W_{t,0}..W_{t,I}` with the batch rows and step sizes that produced them.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub snapshots: Vec<ParamVec>,
    pub batches: Vec<Vec<usize>>,
    pub etas: Vec<f64>,
}

impl Trajectory {
    pub fn iterations(&self) -> usize {
        self.batches.len()
    }
}

#[derive(Debug, Clone)]
pub struct LocalUpdateResult {
    pub client_id: usize,
    pub final_params: ParamVec,
    pub weight: f64,
    pub malicious: bool,
    /// Hash of the batch plan, for checking that two runs drew the same batches.
    pub batch_digest: u64,
    /// Coordinates touched by FL-WBC over the session.
    pub perturbed: usize,
    pub trajectory: Option<Trajectory>,
}

/// Run one device's local epochs from `start`.
pub fn local_train(
    ctx: &LocalContext<'_>,
    start: &ParamVec,
    shard: &ClientShard,
    role: Role<'_>,
    round: usize,
) -> Result<LocalUpdateResult> {
    let cfg = ctx.cfg;
    let id = shard.client_id;
    let mut batch_rng = derive_rng(cfg.seed, round, id, Purpose::Batching);
    let plan = batch_plan(shard, cfg.local_epochs, cfg.batch_size, &mut batch_rng);
    let mut noise_rng = derive_rng(cfg.seed, round, id, Purpose::Noise);

    let (flwbc_s, ldp) = match role {
        Role::Benign { defense } => match defense {
            DefensePolicy::Flwbc { s } => (Some(s), None),
            DefensePolicy::Ldp { clip, sigma_dp } => (None, Some((clip, sigma_dp))),
            _ => (None, None),
        },
        Role::Malicious { .. } => (None, None),
    };
    let boost = match role {
        Role::Malicious { policy, .. } if policy.lambda_rh() > 0.0 && policy.alpha < 1.0 => {
            let first = ctx.train.batch(&plan[0])?;
            Some((policy.lambda_rh(), rh_gradient(start, &first)?))
        }
        _ => None,
    };

    let mut w = start.clone();
    let mut state = FlwbcState::new();
    let mut perturbed = 0;
    let mut snapshots = Vec::new();
    let mut etas = Vec::new();
    if ctx.capture {
        snapshots.reserve(plan.len() + 1);
        snapshots.push(w.clone());
    }
    for (i, rows) in plan.iter().enumerate() {
        let eta = cfg.learning_rate.eta(round, i, ctx.nominal_iterations);
        let batch = ctx.train.batch(rows)?;
        let grad = match role {
            Role::Benign { .. } => loss_and_grad(&w, &batch)?.1,
            Role::Malicious { policy, dm } => {
                let mal = dm.batch(&malicious_batch_indices(dm.len(), policy.malicious_batch_size, i))?;
                let mut g = malicious_gradient(&w, &batch, &mal, policy.alpha)?;
                if let Some((lambda, h1)) = &boost {
                    g.axpy(*lambda, h1);
                }
                g
            }
        };
        let stepped = sgd_step(&w, &grad, eta);
        w = match flwbc_s {
            Some(s) => {
                let out = flwbc_step(&mut state, &w, stepped, eta, s, &mut noise_rng)?;
                perturbed += out.perturbed;
                out.params
            }
            None => stepped,
        };
        if ctx.capture {
            snapshots.push(w.clone());
            etas.push(eta);
        }
    }
    if let Some((clip, sigma_dp)) = ldp {
        let update = ldp_apply(&(&w - start), clip, sigma_dp, &mut noise_rng)?;
        w = start + &update;
    }
    Ok(LocalUpdateResult {
        client_id: id,
        final_params: w,
        weight: shard.weight,
        malicious: matches!(role, Role::Malicious { .. }),
        batch_digest: digest_batches(&plan),
        perturbed,
        trajectory: ctx.capture.then_some(Trajectory {
            snapshots,
            batches: plan,
            etas,
        }),
    })
}

/// Local training of a benign device under `defense`.
pub fn local_train_benign(
    ctx: &LocalContext<'_>,
    start: &ParamVec,
    shard: &ClientShard,
    defense: DefensePolicy,
    round: usize,
) -> Result<LocalUpdateResult> {
    local_train(ctx, start, shard, Role::Benign { defense }, round)
}
