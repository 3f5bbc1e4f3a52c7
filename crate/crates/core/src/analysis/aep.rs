use rayon::prelude::*;

use crate::data::Dataset;
use crate::engine::{AttackMode, LocalUpdateResult, RunOutput, Simulator, Trajectory};
use crate::error::{Error, Result};
use crate::nn::{hvp, HvpMethod, ParamVec};

/// Attack effect on the global model after one round.
#[derive(Debug, Clone, PartialEq)]
pub struct AepReport {
    pub round: usize,
    /// `δ_t = W_t(attack-free) − W_t(attacked)`.
    pub exact_delta: ParamVec,
    pub estimated_delta: Option<ParamVec>,
    pub delta_norm: f64,
    /// `‖δ̂_t − δ_t‖ / ‖δ_t‖` (0 when both vanish).
    pub estimate_rel_error: Option<f64>,
}

/// The attacked run and its attack-free shadow. Both consume the same streams
/// and sample the same devices; only the attackers' objective differs.
#[derive(Debug, Clone)]
pub struct AepRuns {
    pub attacked: RunOutput,
    pub shadow: RunOutput,
}

impl AepRuns {
    pub fn compute(sim: &Simulator, rounds: usize, capture: bool) -> Result<Self> {
        let (attacked, shadow) = rayon::join(
            || sim.run_rounds(rounds, AttackMode::Configured, capture),
            || sim.run_rounds(rounds, AttackMode::Disabled, capture),
        );
        Ok(Self {
            attacked: attacked?,
            shadow: shadow?,
        })
    }

    /// `δ_t` for every round played.
    pub fn deltas(&self) -> Vec<ParamVec> {
        self.attacked
            .rounds
            .iter()
            .zip(&self.shadow.rounds)
            .map(|(a, s)| &s.new_global - &a.new_global)
            .collect()
    }
}

/// Exact attack effect for rounds `0..up_to_round`, from a shadow run.
pub fn exact_aep(sim: &Simulator, up_to_round: usize) -> Result<Vec<AepReport>> {
    let runs = AepRuns::compute(sim, up_to_round, false)?;
    Ok(runs
        .deltas()
        .into_iter()
        .enumerate()
        .map(|(t, d)| AepReport {
            round: t,
            delta_norm: d.norm(),
            exact_delta: d,
            estimated_delta: None,
            estimate_rel_error: None,
        })
        .collect())
}

/// Replay adversarial round `t` from `global_before` with attackers honest and
/// as configured; returns `W_t(honest) − W_t(attacked)`.
pub fn one_round_aep(sim: &Simulator, global_before: &ParamVec, t: usize) -> Result<ParamVec> {
    if !sim.is_adversarial(t) {
        return Err(Error::Precondition(format!("round {t} is not adversarial")));
    }
    let (attacked, honest) = rayon::join(
        || sim.play_round(global_before, t, AttackMode::Configured, false),
        || sim.play_round(global_before, t, AttackMode::Disabled, false),
    );
    Ok(&honest?.new_global - &attacked?.new_global)
}

/// `δ ← (I − η_i H_i) δ` along one device's trajectory. Also returns `‖δ_i‖²`
/// for `i = 0..I−1`.
pub fn propagate_client(delta: &ParamVec, traj: &Trajectory, train: &Dataset) -> Result<(ParamVec, Vec<f64>)> {
    let mut d = delta.clone();
    let mut norms = Vec::with_capacity(traj.iterations());
    for i in 0..traj.iterations() {
        norms.push(d.norm_sq());
        let batch = train.batch(&traj.batches[i])?;
        let hd = hvp(&traj.snapshots[i], &batch, &d, HvpMethod::default())?;
        d.axpy(-traj.etas[i], &hd);
    }
    Ok((d, norms))
}

/// First-order propagation of `δ̂_{t−1}` through one round's local trajectories,
/// combined with the aggregation weights.
pub fn estimate_aep(delta_prev: &ParamVec, updates: &[LocalUpdateResult], train: &Dataset) -> Result<ParamVec> {
    let per_client: Vec<(ParamVec, f64)> = updates
        .par_iter()
        .map(|u| {
            let traj = u.trajectory.as_ref().ok_or_else(|| {
                Error::Precondition(format!(
                    "client {} has no captured trajectory; enable capture_trajectories",
                    u.client_id
                ))
            })?;
            Ok((propagate_client(delta_prev, traj, train)?.0, u.weight))
        })
        .collect::<Result<_>>()?;
    let total: f64 = per_client.iter().map(|(_, w)| w).sum();
    let mut out = ParamVec::zeros(delta_prev.spec());
    for (d, w) in &per_client {
        out.axpy(w / total, d);
    }
    Ok(out)
}

/// `δ̂_t` for every round of a captured attacked run.
///
/// Benign rounds propagate the previous estimate. At an adversarial round the
/// attackers' honest replay supplies their trajectories, and the round's own
/// effect (`one_round_aep`) is added on top.
pub fn estimate_series(sim: &Simulator, attacked: &RunOutput) -> Result<Vec<ParamVec>> {
    let train = &sim.data().train;
    let mut prev = ParamVec::zeros(sim.spec());
    let mut out = Vec::with_capacity(attacked.rounds.len());
    for r in &attacked.rounds {
        let next = if r.is_adversarial {
            let before = attacked.global_before(r.round);
            let honest = sim.play_round(before, r.round, AttackMode::Disabled, true)?;
            let mut d = estimate_aep(&prev, &honest.updates, train)?;
            d.axpy(1.0, &(&honest.new_global - &r.new_global));
            d
        } else {
            estimate_aep(&prev, &r.updates, train)?
        };
        out.push(next.clone());
        prev = next;
    }
    Ok(out)
}

pub fn relative_error(estimate: &ParamVec, exact: &ParamVec) -> f64 {
    let diff = (estimate - exact).norm();
    let base = exact.norm();
    if diff == 0.0 {
        0.0
    } else if base == 0.0 {
        f64::INFINITY
    } else {
        diff / base
    }
}

/// Exact AEP per round, plus the first-order estimate when `estimate` is set.
pub fn aep_reports(sim: &Simulator, estimate: bool) -> Result<Vec<AepReport>> {
    let runs = AepRuns::compute(sim, sim.cfg().rounds, estimate)?;
    let deltas = runs.deltas();
    let estimates = if estimate {
        Some(estimate_series(sim, &runs.attacked)?)
    } else {
        None
    };
    Ok(deltas
        .into_iter()
        .enumerate()
        .map(|(t, d)| {
            let est = estimates.as_ref().map(|e| e[t].clone());
            AepReport {
                round: t,
                delta_norm: d.norm(),
                estimate_rel_error: est.as_ref().map(|e| relative_error(e, &d)),
                estimated_delta: est,
                exact_delta: d,
            }
        })
        .collect())
}
