use rand_distr::{Distribution, Normal, StandardNormal};

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::rng::RngStream;

/// Gaussian blobs: class `c` is centred on a random unit-norm mean and has
/// isotropic standard deviation `spread`. Rows come out class by class.
pub fn gen_synthetic(
    classes: usize,
    dim: usize,
    per_class: usize,
    spread: f64,
    rng: &mut RngStream,
) -> Result<Dataset> {
    if classes < 2 {
        return Err(Error::config("classes", "need at least two classes"));
    }
    if dim == 0 {
        return Err(Error::config("dim", "must be >= 1"));
    }
    if per_class < 1 {
        return Err(Error::config("per_class", "must be >= 1"));
    }
    if !spread.is_finite() || spread < 0.0 {
        return Err(Error::config("spread", "must be a finite value >= 0"));
    }
    let means: Vec<Vec<f64>> = (0..classes).map(|_| unit_vector(dim, rng)).collect();
    let noise = Normal::new(0.0, spread).map_err(|e| Error::config("spread", e.to_string()))?;
    let mut inputs = Vec::with_capacity(classes * per_class * dim);
    let mut labels = Vec::with_capacity(classes * per_class);
    for (c, mean) in means.iter().enumerate() {
        for _ in 0..per_class {
            inputs.extend(mean.iter().map(|m| m + noise.sample(rng)));
            labels.push(c);
        }
    }
    Dataset::new(inputs, dim, labels, classes)
}

fn unit_vector(dim: usize, rng: &mut RngStream) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..dim).map(|_| StandardNormal.sample(rng)).collect();
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-12 {
            return v.into_iter().map(|x| x / norm).collect();
        }
    }
}
