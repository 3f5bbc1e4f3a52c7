use std::sync::Arc;

use rand::distr::{Distribution, Open01};

use crate::error::{Error, Result};
use crate::nn::{ModelSpec, ParamVec};
use crate::rng::RngStream;

/// Laplace scale `b` giving standard deviation `std` (variance is `2b²`).
pub fn laplace_scale(std: f64) -> f64 {
    std / std::f64::consts::SQRT_2
}

/// One Laplace(0, b) draw by inverse CDF.
pub fn sample_laplace(scale: f64, rng: &mut RngStream) -> f64 {
    let u: f64 = Open01.sample(rng);
    if u < 0.5 {
        scale * (2.0 * u).ln()
    } else {
        -scale * (2.0 * (1.0 - u)).ln()
    }
}

/// I.i.d. zero-mean Laplace entries with the given standard deviation.
/// `std == 0` returns zeros without touching `rng`.
pub fn laplace_noise(spec: &Arc<ModelSpec>, std: f64, rng: &mut RngStream) -> Result<ParamVec> {
    if !std.is_finite() || std < 0.0 {
        return Err(Error::config("std", format!("noise std must be >= 0, got {std}")));
    }
    let mut out = ParamVec::zeros(spec);
    if std == 0.0 {
        return Ok(out);
    }
    let b = laplace_scale(std);
    for v in out.values_mut() {
        *v = sample_laplace(b, rng);
    }
    Ok(out)
}

/// Project onto the L2 ball of radius `c`. The result's [`ParamVec::norm`]
/// never exceeds `c`, rounding included.
pub fn clip_to_norm(v: &ParamVec, c: f64) -> ParamVec {
    let norm = v.norm();
    if norm <= c {
        return v.clone();
    }
    let mut factor = c / norm;
    loop {
        let clipped = v.scaled(factor);
        if clipped.norm() <= c {
            return clipped;
        }
        factor *= 1.0 - f64::EPSILON;
    }
}
