//! Dense forward/backward passes over a flat [`ParamVec`].

use std::sync::Arc;

use rand::distr::{Distribution, Uniform};

use crate::error::{Error, Result};
use crate::nn::{Activation, Batch, Loss, ModelSpec, ParamVec, Targets};
use crate::rng::RngStream;

/// Glorot-uniform weights (`a = sqrt(6/(fan_in+fan_out))`), zero biases.
pub fn init_params(spec: &Arc<ModelSpec>, rng: &mut RngStream) -> ParamVec {
    let mut params = ParamVec::zeros(spec);
    let dims = spec.layer_dims();
    for l in 0..spec.num_layers() {
        let (fan_in, fan_out) = (dims[l], dims[l + 1]);
        let limit = (6.0 / (fan_in + fan_out) as f64).sqrt();
        let dist = Uniform::new_inclusive(-limit, limit).expect("finite positive limit");
        let (w_off, b_off) = spec.layer_offsets(l);
        for w in &mut params.values_mut()[w_off..b_off] {
            *w = dist.sample(rng);
        }
    }
    params
}

/// Pre-activations and activations of every layer for one batch.
struct Trace {
    /// `acts[0]` is the input, `acts[l+1]` the output of layer `l` (post-activation,
    /// or raw outputs for the last layer).
    acts: Vec<Vec<f64>>,
    /// Pre-activation of each hidden layer (needed for ReLU masks).
    pre: Vec<Vec<f64>>,
}

fn forward(params: &ParamVec, inputs: &[f64], rows: usize) -> Trace {
    let spec = params.spec();
    let dims = spec.layer_dims();
    let p = params.values();
    let last = spec.num_layers() - 1;
    let mut acts = Vec::with_capacity(dims.len());
    let mut pre = Vec::with_capacity(last);
    acts.push(inputs.to_vec());
    for l in 0..=last {
        let (fan_in, fan_out) = (dims[l], dims[l + 1]);
        let (w_off, b_off) = spec.layer_offsets(l);
        let weights = &p[w_off..b_off];
        let bias = &p[b_off..b_off + fan_out];
        let input = &acts[l];
        let mut z = vec![0.0; rows * fan_out];
        for r in 0..rows {
            let x = &input[r * fan_in..(r + 1) * fan_in];
            let zr = &mut z[r * fan_out..(r + 1) * fan_out];
            for (o, zo) in zr.iter_mut().enumerate() {
                let w = &weights[o * fan_in..(o + 1) * fan_in];
                *zo = bias[o] + w.iter().zip(x).map(|(a, b)| a * b).sum::<f64>();
            }
        }
        if l < last {
            let a = match spec.activation() {
                Activation::Relu => z.iter().map(|&v| v.max(0.0)).collect(),
                Activation::Identity => z.clone(),
            };
            pre.push(z);
            acts.push(a);
        } else {
            acts.push(z);
        }
    }
    Trace { acts, pre }
}

/// Row-wise softmax of a `rows × cols` logit matrix.
pub fn softmax_rows(logits: &[f64], cols: usize) -> Vec<f64> {
    let mut out = vec![0.0; logits.len()];
    for (row, dst) in logits.chunks_exact(cols).zip(out.chunks_exact_mut(cols)) {
        let max = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let mut sum = 0.0;
        for (d, &z) in dst.iter_mut().zip(row) {
            *d = (z - max).exp();
            sum += *d;
        }
        for d in dst.iter_mut() {
            *d /= sum;
        }
    }
    out
}

fn target_row(targets: &Targets, r: usize, out: usize, buf: &mut [f64]) {
    match targets {
        Targets::Classes(labels) => {
            buf.fill(0.0);
            buf[labels[r]] = 1.0;
        }
        Targets::Values(v) => buf.copy_from_slice(&v[r * out..(r + 1) * out]),
    }
}

/// Mean batch loss and its exact gradient.
pub fn loss_and_grad(params: &ParamVec, batch: &Batch) -> Result<(f64, ParamVec)> {
    let spec = Arc::clone(params.spec());
    batch.check_compatible(&spec)?;
    let rows = batch.rows();
    let dims = spec.layer_dims();
    let out = spec.output_dim();
    let trace = forward(params, batch.inputs(), rows);
    let outputs = trace.acts.last().expect("forward produced output");
    let inv_b = 1.0 / rows as f64;

    // dL/d(output pre-activation), already divided by the batch size.
    let mut delta = vec![0.0; rows * out];
    let mut loss = 0.0;
    let mut target = vec![0.0; out];
    match spec.loss() {
        Loss::SoftmaxCrossEntropy => {
            let labels = match batch.targets() {
                Targets::Classes(l) => l,
                Targets::Values(_) => unreachable!("rejected by check_compatible"),
            };
            for r in 0..rows {
                let z = &outputs[r * out..(r + 1) * out];
                let max = z.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                let sum: f64 = z.iter().map(|&v| (v - max).exp()).sum();
                let log_norm = max + sum.ln();
                loss += log_norm - z[labels[r]];
                let d = &mut delta[r * out..(r + 1) * out];
                for (c, dc) in d.iter_mut().enumerate() {
                    let p = (z[c] - log_norm).exp();
                    let y = if c == labels[r] { 1.0 } else { 0.0 };
                    *dc = (p - y) * inv_b;
                }
            }
        }
        Loss::MeanSquaredError => {
            for r in 0..rows {
                target_row(batch.targets(), r, out, &mut target);
                let y_hat = &outputs[r * out..(r + 1) * out];
                let d = &mut delta[r * out..(r + 1) * out];
                for c in 0..out {
                    let e = y_hat[c] - target[c];
                    loss += 0.5 * e * e;
                    d[c] = e * inv_b;
                }
            }
        }
    }
    loss *= inv_b;

    let mut grad = ParamVec::zeros(&spec);
    let g = grad.values_mut();
    let p = params.values();
    for l in (0..spec.num_layers()).rev() {
        let (fan_in, fan_out) = (dims[l], dims[l + 1]);
        let (w_off, b_off) = spec.layer_offsets(l);
        let input = &trace.acts[l];
        for r in 0..rows {
            let d = &delta[r * fan_out..(r + 1) * fan_out];
            let x = &input[r * fan_in..(r + 1) * fan_in];
            for (o, &dv) in d.iter().enumerate() {
                if dv == 0.0 {
                    continue;
                }
                g[b_off + o] += dv;
                let gw = &mut g[w_off + o * fan_in..w_off + (o + 1) * fan_in];
                for (gwi, &xi) in gw.iter_mut().zip(x) {
                    *gwi += dv * xi;
                }
            }
        }
        if l == 0 {
            break;
        }
        // Back through the weights and the hidden activation of layer l-1.
        let weights = &p[w_off..b_off];
        let pre = &trace.pre[l - 1];
        let mut next = vec![0.0; rows * fan_in];
        for r in 0..rows {
            let d = &delta[r * fan_out..(r + 1) * fan_out];
            let nd = &mut next[r * fan_in..(r + 1) * fan_in];
            for (o, &dv) in d.iter().enumerate() {
                if dv == 0.0 {
                    continue;
                }
                let w = &weights[o * fan_in..(o + 1) * fan_in];
                for (n, &wv) in nd.iter_mut().zip(w) {
                    *n += dv * wv;
                }
            }
            if spec.activation() == Activation::Relu {
                let z = &pre[r * fan_in..(r + 1) * fan_in];
                for (n, &zv) in nd.iter_mut().zip(z) {
                    if zv <= 0.0 {
                        *n = 0.0;
                    }
                }
            }
        }
        delta = next;
    }
    Ok((loss, grad))
}

/// Mean loss only.
pub fn loss(params: &ParamVec, batch: &Batch) -> Result<f64> {
    loss_and_grad(params, batch).map(|(l, _)| l)
}

/// Raw last-layer outputs (logits, or predictions for squared-error models), row-major.
pub fn outputs(params: &ParamVec, batch: &Batch) -> Result<Vec<f64>> {
    let spec = params.spec();
    if batch.cols() != spec.input_dim() {
        return Err(Error::Dimension(format!(
            "batch width {} but model input dim {}",
            batch.cols(),
            spec.input_dim()
        )));
    }
    let mut trace = forward(params, batch.inputs(), batch.rows());
    Ok(trace.acts.pop().expect("forward produced output"))
}

/// Index of the largest entry in each row; ties go to the lowest index.
pub fn argmax_rows(values: &[f64], cols: usize) -> Vec<usize> {
    values
        .chunks_exact(cols)
        .map(|row| {
            let mut best = 0;
            for (c, &v) in row.iter().enumerate() {
                if v > row[best] {
                    best = c;
                }
            }
            best
        })
        .collect()
}

/// Class probabilities (row-major `rows × classes`) and argmax labels.
/// Ties go to the lowest class index.
pub fn predict(params: &ParamVec, batch: &Batch) -> Result<(Vec<f64>, Vec<usize>)> {
    let spec = params.spec();
    if !spec.is_classifier() {
        return Err(Error::Unsupported("predict needs a softmax classifier".into()));
    }
    let classes = spec.output_dim();
    let logits = outputs(params, batch)?;
    let probs = softmax_rows(&logits, classes);
    Ok((probs, argmax_rows(&logits, classes)))
}

/// `params − eta·grad`
pub fn sgd_step(params: &ParamVec, grad: &ParamVec, eta: f64) -> ParamVec {
    let mut next = params.clone();
    next.axpy(-eta, grad);
    next
}
