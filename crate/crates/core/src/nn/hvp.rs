//! Matrix-free Hessian-vector products.

use crate::error::{Error, Result};
use crate::nn::{loss_and_grad, Batch, ParamVec};

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum HvpMethod {
    /// Central difference of gradients along `v/‖v‖`. `None` uses
    /// `1e-4·(1 + ‖params‖∞)` as the step.
    FiniteDiff { eps: Option<f64> },
    /// `X̃ᵀX̃v/B` per output; only valid for the single-layer squared-error model.
    AnalyticQuadratic,
    /// Analytic for the single-layer squared-error model, finite differences otherwise.
    #[default]
    Auto,
}

pub fn default_fd_eps(params: &ParamVec) -> f64 {
    1e-4 * (1.0 + params.max_abs())
}

/// `∇²L(params; batch) · v`.
pub fn hvp(params: &ParamVec, batch: &Batch, v: &ParamVec, method: HvpMethod) -> Result<ParamVec> {
    params.check_shape(v)?;
    match method {
        HvpMethod::FiniteDiff { eps } => finite_diff(params, batch, v, eps),
        HvpMethod::AnalyticQuadratic => analytic_quadratic(params, batch, v),
        HvpMethod::Auto if params.spec().is_quadratic() => analytic_quadratic(params, batch, v),
        HvpMethod::Auto => finite_diff(params, batch, v, None),
    }
}

fn finite_diff(params: &ParamVec, batch: &Batch, v: &ParamVec, eps: Option<f64>) -> Result<ParamVec> {
    let norm = v.norm();
    if norm == 0.0 {
        return Ok(ParamVec::zeros(params.spec()));
    }
    let eps = eps.unwrap_or_else(|| default_fd_eps(params));
    let step = eps / norm;
    let mut plus = params.clone();
    plus.axpy(step, v);
    let mut minus = params.clone();
    minus.axpy(-step, v);
    let (_, g_plus) = loss_and_grad(&plus, batch)?;
    let (_, g_minus) = loss_and_grad(&minus, batch)?;
    let mut out = &g_plus - &g_minus;
    out.scale_in_place(norm / (2.0 * eps));
    Ok(out)
}

fn analytic_quadratic(params: &ParamVec, batch: &Batch, v: &ParamVec) -> Result<ParamVec> {
    let spec = params.spec();
    if !spec.is_quadratic() {
        return Err(Error::Unsupported(
            "analytic Hessian products need the single-layer squared-error model".into(),
        ));
    }
    batch.check_compatible(spec)?;
    let d = spec.input_dim();
    let out_dim = spec.output_dim();
    let (_, b_off) = spec.layer_offsets(0);
    let vv = v.values();
    let mut out = ParamVec::zeros(spec);
    let inv_b = 1.0 / batch.rows() as f64;
    {
        let o_vals = out.values_mut();
        for r in 0..batch.rows() {
            let x = batch.row(r);
            for o in 0..out_dim {
                let vw = &vv[o * d..(o + 1) * d];
                let proj = vv[b_off + o] + vw.iter().zip(x).map(|(a, b)| a * b).sum::<f64>();
                let c = proj * inv_b;
                for (j, &xj) in x.iter().enumerate() {
                    o_vals[o * d + j] += c * xj;
                }
                o_vals[b_off + o] += c;
            }
        }
    }
    Ok(out)
}
