use serde::{Deserialize, Serialize};

use crate::engine::{decay_gamma, LearningRate};
use crate::error::{Error, Result};

/// Inputs of the robustness and convergence bounds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TheoryParams {
    /// Parameter count `P`.
    pub p: usize,
    /// Local iterations `I`.
    pub iterations: usize,
    /// Devices per round `K`.
    pub k: usize,
    /// FL-WBC noise std `s`.
    pub s: f64,
    pub learning_rate: LearningRate,
    /// `Λ_t` indexed by round; a single entry applies to every round.
    pub lambda: Vec<f64>,
    /// Smoothness `L`.
    pub l: f64,
    /// Strong convexity `μ`.
    pub mu: f64,
    /// Gradient norm bound `G`.
    pub g: f64,
    /// Per-device gradient variance bounds `σ_k`.
    pub sigma: Vec<f64>,
    /// Heterogeneity `Γ = F* − Σ p_k F_k*`.
    pub heterogeneity: f64,
    /// Device weights `p_k`.
    pub weights: Vec<f64>,
    /// `E‖W_0 − W*‖²`.
    pub init_dist_sq: f64,
}

impl TheoryParams {
    fn lambda_at(&self, t: usize) -> Result<f64> {
        match self.lambda.as_slice() {
            [] => Err(Error::config("lambda", "no Λ values given")),
            [only] => Ok(*only),
            many => many
                .get(t)
                .copied()
                .ok_or_else(|| Error::config("lambda", format!("no Λ value for round {t}"))),
        }
    }
}

/// `(P·I·s/K) · Σ_{t=t_adv+1}^{T} η²_{t,I−1} Λ_t`
pub fn robustness_bound(tp: &TheoryParams, t_adv: usize, t_end: usize) -> Result<f64> {
    if t_end <= t_adv {
        return Err(Error::config("T", "must exceed the adversarial round"));
    }
    if tp.iterations == 0 || tp.k == 0 {
        return Err(Error::config("iterations", "I and K must be >= 1"));
    }
    if tp.s.is_nan() || tp.s < 0.0 {
        return Err(Error::config("s", "must be >= 0"));
    }
    let coef = (tp.p * tp.iterations) as f64 * tp.s / tp.k as f64;
    let mut sum = 0.0;
    for t in t_adv + 1..=t_end {
        let eta = tp.learning_rate.eta(t, tp.iterations - 1, tp.iterations);
        sum += eta * eta * tp.lambda_at(t)?;
    }
    Ok(coef * sum)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConvergenceBound {
    pub kappa: f64,
    pub gamma: f64,
    pub eta0: f64,
    pub q: f64,
    pub c: f64,
    pub bound: f64,
}

/// `2κ/(γ+TI) · ((Q+C)/μ + μγ/2 · ‖W_0 − W*‖²)` with
/// `Q = Σ p_k²(s²+σ_k²) + 6LΓ + 8(I−1)²(s²+G²)` and `C = (4/K) I² (s²+G²)`.
pub fn convergence_bound(tp: &TheoryParams, t_total: usize) -> Result<ConvergenceBound> {
    if tp.mu.is_nan() || tp.mu <= 0.0 || tp.l < tp.mu {
        return Err(Error::config("mu", "need L >= mu > 0"));
    }
    if tp.iterations == 0 || tp.k == 0 {
        return Err(Error::config("iterations", "I and K must be >= 1"));
    }
    if tp.sigma.len() != tp.weights.len() {
        return Err(Error::config("sigma", "need one σ_k per device weight"));
    }
    let i = tp.iterations as f64;
    let s2 = tp.s * tp.s;
    let kappa = tp.l / tp.mu;
    let gamma = decay_gamma(tp.mu, tp.l, tp.iterations);
    let eta0 = 2.0 / (tp.mu * gamma);
    let q = tp
        .weights
        .iter()
        .zip(&tp.sigma)
        .map(|(p, s)| p * p * (s2 + s * s))
        .sum::<f64>()
        + 6.0 * tp.l * tp.heterogeneity
        + 8.0 * (i - 1.0).powi(2) * (s2 + tp.g * tp.g);
    let c = 4.0 / tp.k as f64 * i * i * (s2 + tp.g * tp.g);
    let bound = 2.0 * kappa / (gamma + t_total as f64 * i) * ((q + c) / tp.mu + tp.mu * gamma / 2.0 * tp.init_dist_sq);
    Ok(ConvergenceBound {
        kappa,
        gamma,
        eta0,
        q,
        c,
        bound,
    })
}
