use crate::error::{Error, Result};
use crate::nn::ParamVec;

fn check_models(models: &[&ParamVec]) -> Result<()> {
    let first = models
        .first()
        .ok_or_else(|| Error::Precondition("aggregation needs at least one model".into()))?;
    for m in &models[1..] {
        first.check_shape(m)?;
    }
    Ok(())
}

/// `Σ_k (p_k / Σ_j p_j) · W_k` over the sampled models.
pub fn fedavg_aggregate(models: &[&ParamVec], weights: &[f64]) -> Result<ParamVec> {
    check_models(models)?;
    if weights.len() != models.len() {
        return Err(Error::Dimension(format!(
            "{} models but {} weights",
            models.len(),
            weights.len()
        )));
    }
    let total: f64 = weights.iter().sum();
    if total.is_nan() || total <= 0.0 {
        return Err(Error::Precondition("aggregation weights sum to zero".into()));
    }
    let mut out = ParamVec::zeros(models[0].spec());
    for (m, w) in models.iter().zip(weights) {
        out.axpy(w / total, m);
    }
    Ok(out)
}

/// Coordinate-wise median; the mean of the middle pair for an even count.
pub fn cma_aggregate(models: &[&ParamVec]) -> Result<ParamVec> {
    check_models(models)?;
    let k = models.len();
    let mut out = ParamVec::zeros(models[0].spec());
    let mut column = vec![0.0; k];
    for (j, o) in out.values_mut().iter_mut().enumerate() {
        for (c, m) in column.iter_mut().zip(models) {
            *c = m.values()[j];
        }
        column.sort_by(f64::total_cmp);
        *o = if k % 2 == 1 {
            column[k / 2]
        } else {
            0.5 * (column[k / 2 - 1] + column[k / 2])
        };
    }
    Ok(out)
}

/// Values dropped from each end by the trimmed mean: `⌊β·K⌋`.
pub fn trimmed_count(beta: f64, k: usize) -> usize {
    (beta * k as f64).floor() as usize
}

/// Coordinate-wise trimmed mean dropping `⌊β·K⌋` values from each end.
pub fn ctma_aggregate(models: &[&ParamVec], beta: f64) -> Result<ParamVec> {
    check_models(models)?;
    let k = models.len();
    let trim = trimmed_count(beta, k);
    if 2 * trim >= k {
        return Err(Error::config(
            "beta",
            format!("trimming {trim} of {k} values from each end leaves nothing"),
        ));
    }
    let kept = (k - 2 * trim) as f64;
    let mut out = ParamVec::zeros(models[0].spec());
    let mut column = vec![0.0; k];
    for (j, o) in out.values_mut().iter_mut().enumerate() {
        for (c, m) in column.iter_mut().zip(models) {
            *c = m.values()[j];
        }
        column.sort_by(f64::total_cmp);
        *o = column[trim..k - trim].iter().sum::<f64>() / kept;
    }
    Ok(out)
}
