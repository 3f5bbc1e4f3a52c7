use crate::engine::{LocalUpdateResult, Simulator};
use crate::error::{Error, Result};

use super::{robustness_bound, AepRuns, TheoryParams};

/// Per-round `Λ_t = min_{k,i} ‖δ^k_{t,i}‖²`, where `δ^k_{t,i}` is the gap between
/// a device's shadow and attacked iterates. Needs captured trajectories.
pub fn lambda_backfill(runs: &AepRuns) -> Result<Vec<f64>> {
    let missing = || Error::Precondition("Λ back-fill needs captured trajectories".into());
    runs.attacked
        .rounds
        .iter()
        .zip(&runs.shadow.rounds)
        .map(|(a, s)| {
            let mut min = f64::INFINITY;
            for (ua, us) in a.updates.iter().zip(&s.updates) {
                let (ta, ts) = (trajectory(ua).ok_or_else(missing)?, trajectory(us).ok_or_else(missing)?);
                for i in 0..ta.iterations() {
                    min = min.min((&ts.snapshots[i] - &ta.snapshots[i]).norm_sq());
                }
            }
            Ok(if min.is_finite() { min } else { 0.0 })
        })
        .collect()
}

fn trajectory(u: &LocalUpdateResult) -> Option<&crate::engine::Trajectory> {
    u.trajectory.as_ref()
}

/// Measured attack-effect drift against the robustness bound on one attack-free window.
#[derive(Debug, Clone, PartialEq)]
pub struct RobustnessCheck {
    pub t_adv: usize,
    pub t_end: usize,
    /// `‖δ_{t_end} − δ_{t_adv}‖²`
    pub measured: f64,
    pub bound: f64,
    pub lambdas: Vec<f64>,
}

impl RobustnessCheck {
    /// `measured ≥ (1 − slack)·bound`
    pub fn holds(&self, slack: f64) -> bool {
        self.measured >= (1.0 - slack) * self.bound
    }
}

/// Pick the adversarial round followed by the longest attack-free stretch and
/// compare the measured drift of `δ` over that stretch with the bound, `Λ_t`
/// back-filled from the run.
pub fn robustness_check(sim: &Simulator, runs: &AepRuns) -> Result<RobustnessCheck> {
    let rounds = runs.attacked.rounds.len();
    let adv: Vec<usize> = (0..rounds).filter(|&t| sim.is_adversarial(t)).collect();
    let (t_adv, t_end) = adv
        .iter()
        .enumerate()
        .map(|(j, &t)| (t, adv.get(j + 1).map_or(rounds - 1, |&n| n - 1)))
        .filter(|(t, e)| e > t)
        .max_by_key(|(t, e)| (e - t, std::cmp::Reverse(*t)))
        .ok_or_else(|| Error::Precondition("no adversarial round is followed by a benign round".into()))?;
    let deltas = runs.deltas();
    let measured = (&deltas[t_end] - &deltas[t_adv]).norm_sq();
    let lambdas = lambda_backfill(runs)?;
    let s = sim.cfg().defense.flwbc_s().unwrap_or(0.0);
    let tp = TheoryParams {
        p: sim.spec().param_count(),
        iterations: sim.nominal_iterations(),
        k: sim.cfg().devices_per_round,
        s,
        learning_rate: sim.cfg().learning_rate,
        lambda: lambdas.clone(),
        l: 1.0,
        mu: 1.0,
        g: 0.0,
        sigma: vec![],
        heterogeneity: 0.0,
        weights: vec![],
        init_dist_sq: 0.0,
    };
    let bound = robustness_bound(&tp, t_adv, t_end)?;
    Ok(RobustnessCheck {
        t_adv,
        t_end,
        measured,
        bound,
        lambdas,
    })
}
