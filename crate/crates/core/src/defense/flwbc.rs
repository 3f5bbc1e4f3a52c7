use crate::error::Result;
use crate::nn::{laplace_noise, ParamVec};
use crate::rng::RngStream;

/// Parameter history kept across the mini-batches of one local training session.
#[derive(Debug, Clone, Default)]
pub struct FlwbcState {
    w_minus_1: Option<ParamVec>,
    w_minus_2: Option<ParamVec>,
}

impl FlwbcState {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn first_batch_done(&self) -> bool {
        self.w_minus_2.is_some()
    }
}

#[derive(Debug, Clone)]
pub struct FlwbcStep {
    pub params: ParamVec,
    /// Number of coordinates that received noise.
    pub perturbed: usize,
}

/// Post-process one SGD step.
///
/// A fresh Laplace draw `Υ` (std `s`) is made for every batch. From the second
/// batch on, coordinate `j` receives `η·Υ_j` when `|W*_j| ≤ η|Υ_j|`, where
/// `W* = (W − W₋₁) − (W₋₁ − W₋₂)` compares this step's parameter change with the
/// previous one. The history holds the parameters actually produced, noise included.
pub fn flwbc_step(
    state: &mut FlwbcState,
    w_before: &ParamVec,
    w_after_sgd: ParamVec,
    eta: f64,
    s: f64,
    rng: &mut RngStream,
) -> Result<FlwbcStep> {
    w_before.check_shape(&w_after_sgd)?;
    let upsilon = laplace_noise(w_before.spec(), s, rng)?;
    state.w_minus_1 = Some(w_before.clone());
    let mut params = w_after_sgd;
    let mut perturbed = 0;
    if let (Some(w1), Some(w2)) = (&state.w_minus_1, &state.w_minus_2) {
        let (w1, w2, ups) = (w1.values(), w2.values(), upsilon.values());
        for (j, w) in params.values_mut().iter_mut().enumerate() {
            let w_star = (*w - w1[j]) - (w1[j] - w2[j]);
            // zero draws would only flip the sign of an exact zero
            if ups[j] != 0.0 && w_star.abs() - eta * ups[j].abs() <= 0.0 {
                *w += eta * ups[j];
                perturbed += 1;
            }
        }
    }
    state.w_minus_2 = state.w_minus_1.clone();
    Ok(FlwbcStep { params, perturbed })
}
