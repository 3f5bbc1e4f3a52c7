use crate::error::{Error, Result};
use crate::nn::{clip_to_norm, laplace_noise, ParamVec};
use crate::rng::RngStream;

/// Weighted mean of the clipped client updates `clip(W_k − prev)`, before noise.
pub fn cdp_clipped_mean(models: &[&ParamVec], weights: &[f64], prev_global: &ParamVec, clip: f64) -> Result<ParamVec> {
    if models.is_empty() || models.len() != weights.len() {
        return Err(Error::Precondition("central DP needs one weight per model".into()));
    }
    let total: f64 = weights.iter().sum();
    let mut avg = ParamVec::zeros(prev_global.spec());
    for (m, w) in models.iter().zip(weights) {
        prev_global.check_shape(m)?;
        let clipped = clip_to_norm(&(*m - prev_global), clip);
        avg.axpy(w / total, &clipped);
    }
    // A convex combination stays in the ball; this only absorbs rounding.
    Ok(clip_to_norm(&avg, clip))
}

/// Server-side DP: clip each `W_k − prev` to `clip`, take the weighted mean,
/// add Laplace noise with std `sigma_dp / K`, and apply it to `prev`.
pub fn cdp_apply(
    models: &[&ParamVec],
    weights: &[f64],
    prev_global: &ParamVec,
    clip: f64,
    sigma_dp: f64,
    rng: &mut RngStream,
) -> Result<ParamVec> {
    let avg = cdp_clipped_mean(models, weights, prev_global, clip)?;
    let mut out = prev_global + &avg;
    if sigma_dp > 0.0 {
        let noise = laplace_noise(prev_global.spec(), sigma_dp / models.len() as f64, rng)?;
        out.axpy(1.0, &noise);
    }
    Ok(out)
}

/// Client-side DP: clip the update to `clip`, then add elementwise Laplace noise with std `sigma_dp`.
pub fn ldp_apply(update: &ParamVec, clip: f64, sigma_dp: f64, rng: &mut RngStream) -> Result<ParamVec> {
    let mut out = clip_to_norm(update, clip);
    if sigma_dp > 0.0 {
        out.axpy(1.0, &laplace_noise(update.spec(), sigma_dp, rng)?);
    }
    Ok(out)
}
