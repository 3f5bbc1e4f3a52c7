//! Targeted model poisoning: the blended malicious objective and the Hessian-kernel booster.

use serde::{Deserialize, Serialize};

use crate::data::{ClientShard, MaliciousDataset};
use crate::engine::{local_train, LocalContext, LocalUpdateResult, Role};
use crate::error::{Error, Result};
use crate::nn::{hvp, loss_and_grad, Batch, HvpMethod, ParamVec};

fn default_alpha() -> f64 {
    0.5
}

fn default_malicious_batch_size() -> usize {
    10
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum Boosting {
    #[default]
    Off,
    /// Adds `lambda_rh · H·1` to every malicious step, `H` taken at the round's first batch.
    RhRegularizer { lambda_rh: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AttackPolicy {
    /// Weight of the attacker's benign objective; `1 − alpha` goes to the malicious one.
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    #[serde(default = "default_malicious_batch_size")]
    pub malicious_batch_size: usize,
    #[serde(default)]
    pub boosting: Boosting,
}

impl Default for AttackPolicy {
    fn default() -> Self {
        Self {
            alpha: default_alpha(),
            malicious_batch_size: default_malicious_batch_size(),
            boosting: Boosting::Off,
        }
    }
}

impl AttackPolicy {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.alpha) {
            return Err(Error::config(
                "alpha",
                format!("must lie in [0, 1], got {}", self.alpha),
            ));
        }
        if self.malicious_batch_size == 0 {
            return Err(Error::config("malicious_batch_size", "must be >= 1"));
        }
        if let Boosting::RhRegularizer { lambda_rh } = self.boosting {
            if !(lambda_rh.is_finite() && lambda_rh >= 0.0) {
                return Err(Error::config("lambda_rh", "must be finite and >= 0"));
            }
        }
        Ok(())
    }

    pub fn lambda_rh(&self) -> f64 {
        match self.boosting {
            Boosting::Off => 0.0,
            Boosting::RhRegularizer { lambda_rh } => lambda_rh,
        }
    }

    /// The same policy with the malicious objective switched off.
    pub fn benign(&self) -> Self {
        Self {
            alpha: 1.0,
            boosting: Boosting::Off,
            ..*self
        }
    }
}

/// Rows of `D_M` used at local iteration `i`: all of them when they fit in one
/// batch, otherwise a window that cycles through the set.
pub fn malicious_batch_indices(m: usize, batch_size: usize, i: usize) -> Vec<usize> {
    if m <= batch_size {
        return (0..m).collect();
    }
    let start = (i * batch_size) % m;
    (0..batch_size).map(|j| (start + j) % m).collect()
}

/// `α·∇F^k(W, ξ) + (1−α)·∇F_M(W, π)`. At `α = 1` this is the benign gradient, bit for bit.
pub fn malicious_gradient(params: &ParamVec, benign: &Batch, malicious: &Batch, alpha: f64) -> Result<ParamVec> {
    let (_, g) = loss_and_grad(params, benign)?;
    if alpha == 1.0 {
        return Ok(g);
    }
    let (_, gm) = loss_and_grad(params, malicious)?;
    let mut out = g.scaled(alpha);
    out.axpy(1.0 - alpha, &gm);
    Ok(out)
}

/// Gradient of `R_H(W) = Σ_j [H(W − W_ref)]_j` with `H` frozen at the round's
/// first iterate and batch: the constant vector `H·1`.
pub fn rh_gradient(start_of_round: &ParamVec, first_batch: &Batch) -> Result<ParamVec> {
    let ones = ParamVec::filled(start_of_round.spec(), 1.0);
    hvp(start_of_round, first_batch, &ones, HvpMethod::default())
}

/// `R_H(W) = ⟨H·1, W − W_ref⟩`.
pub fn rh_value(
    start_of_round: &ParamVec,
    first_batch: &Batch,
    params: &ParamVec,
    reference: &ParamVec,
) -> Result<f64> {
    let h1 = rh_gradient(start_of_round, first_batch)?;
    Ok(h1.dot(&(params - reference)))
}

/// Local training of a malicious device: SGD on the blended objective, no client-side defense.
pub fn local_train_malicious(
    ctx: &LocalContext<'_>,
    start: &ParamVec,
    shard: &ClientShard,
    dm: &MaliciousDataset,
    policy: &AttackPolicy,
    round: usize,
) -> Result<LocalUpdateResult> {
    local_train(ctx, start, shard, Role::Malicious { policy, dm }, round)
}
