use rayon::prelude::*;

use crate::data::Dataset;
use crate::engine::{RunOutput, Simulator, Trajectory};
use crate::error::Result;
use crate::nn::{hvp, HvpMethod, ParamVec};

use super::one_round_aep;

#[derive(Debug, Clone, PartialEq)]
pub struct PhiReport {
    pub adversarial_round: usize,
    pub mean_abs_phi: f64,
    pub phi_vector_norm: f64,
}

/// `Φ = mean_{k,i} H_{k,i} δ` over the given local trajectories.
pub fn phi_vector(delta: &ParamVec, trajectories: &[&Trajectory], train: &Dataset) -> Result<ParamVec> {
    let jobs: Vec<(&Trajectory, usize)> = trajectories
        .iter()
        .flat_map(|t| (0..t.iterations()).map(move |i| (*t, i)))
        .collect();
    let mut sum = ParamVec::zeros(delta.spec());
    if jobs.is_empty() || delta.is_zero() {
        return Ok(sum);
    }
    let products: Vec<ParamVec> = jobs
        .par_iter()
        .map(|&(t, i)| {
            hvp(
                &t.snapshots[i],
                &train.batch(&t.batches[i])?,
                delta,
                HvpMethod::default(),
            )
        })
        .collect::<Result<_>>()?;
    for p in &products {
        sum.axpy(1.0, p);
    }
    sum.scale_in_place(1.0 / products.len() as f64);
    Ok(sum)
}

pub fn phi_diagnostic(
    adversarial_round: usize,
    delta: &ParamVec,
    trajectories: &[&Trajectory],
    train: &Dataset,
) -> Result<PhiReport> {
    let phi = phi_vector(delta, trajectories, train)?;
    Ok(PhiReport {
        adversarial_round,
        mean_abs_phi: phi.mean_abs(),
        phi_vector_norm: phi.norm(),
    })
}

/// Φ for every adversarial round of a captured run that has a following round:
/// `δ` is that round's one-round effect, the Hessians come from the benign
/// devices of the next round.
pub fn phi_series(sim: &Simulator, attacked: &RunOutput) -> Result<Vec<PhiReport>> {
    let mut out = Vec::new();
    for r in &attacked.rounds {
        if !r.is_adversarial {
            continue;
        }
        let Some(next) = attacked.rounds.get(r.round + 1) else {
            continue;
        };
        let delta = one_round_aep(sim, attacked.global_before(r.round), r.round)?;
        let trajs: Vec<&Trajectory> = next
            .updates
            .iter()
            .filter(|u| !u.malicious)
            .filter_map(|u| u.trajectory.as_ref())
            .collect();
        if trajs.len() != next.updates.iter().filter(|u| !u.malicious).count() {
            return Err(crate::error::Error::Precondition(
                "Φ needs captured trajectories; enable capture_trajectories".into(),
            ));
        }
        out.push(phi_diagnostic(r.round, &delta, &trajs, &sim.data().train)?);
    }
    Ok(out)
}
