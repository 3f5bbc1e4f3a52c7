use std::ops::{Add, Mul, Sub};
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::nn::ModelSpec;

/// Flat parameter vector laid out as (weights, biases) per layer, weights row-major.
///
/// Carries the model weights as well as anything shaped like them: updates,
/// attack effects, noise draws.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamVec {
    spec: Arc<ModelSpec>,
    values: Vec<f64>,
}

impl ParamVec {
    pub fn zeros(spec: &Arc<ModelSpec>) -> Self {
        Self {
            spec: Arc::clone(spec),
            values: vec![0.0; spec.param_count()],
        }
    }

    pub fn filled(spec: &Arc<ModelSpec>, value: f64) -> Self {
        Self {
            spec: Arc::clone(spec),
            values: vec![value; spec.param_count()],
        }
    }

    pub fn from_values(spec: &Arc<ModelSpec>, values: Vec<f64>) -> Result<Self> {
        if values.len() != spec.param_count() {
            return Err(Error::Dimension(format!(
                "parameter vector has {} entries, model needs {}",
                values.len(),
                spec.param_count()
            )));
        }
        Ok(Self {
            spec: Arc::clone(spec),
            values,
        })
    }

    pub fn spec(&self) -> &Arc<ModelSpec> {
        &self.spec
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn same_shape(&self, other: &ParamVec) -> bool {
        self.values.len() == other.values.len() && (Arc::ptr_eq(&self.spec, &other.spec) || self.spec == other.spec)
    }

    pub(crate) fn check_shape(&self, other: &ParamVec) -> Result<()> {
        if self.same_shape(other) {
            Ok(())
        } else {
            Err(Error::Dimension(format!(
                "parameter layouts differ ({} vs {} entries)",
                self.len(),
                other.len()
            )))
        }
    }

    pub fn dot(&self, other: &ParamVec) -> f64 {
        debug_assert!(self.same_shape(other));
        self.values.iter().zip(&other.values).map(|(a, b)| a * b).sum()
    }

    pub fn norm_sq(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn mean_abs(&self) -> f64 {
        if self.values.is_empty() {
            return 0.0;
        }
        self.values.iter().map(|v| v.abs()).sum::<f64>() / self.values.len() as f64
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|&v| v == 0.0)
    }

    /// `self += a · x`
    pub fn axpy(&mut self, a: f64, x: &ParamVec) {
        debug_assert!(self.same_shape(x));
        for (s, v) in self.values.iter_mut().zip(&x.values) {
            *s += a * v;
        }
    }

    pub fn scale_in_place(&mut self, a: f64) {
        for v in &mut self.values {
            *v *= a;
        }
    }

    pub fn scaled(&self, a: f64) -> ParamVec {
        let mut out = self.clone();
        out.scale_in_place(a);
        out
    }

    /// Fraction of entries whose magnitude is at most `tol`.
    pub fn zero_fraction(&self, tol: f64) -> f64 {
        if self.values.is_empty() {
            return 0.0;
        }
        self.values.iter().filter(|v| v.abs() <= tol).count() as f64 / self.values.len() as f64
    }
}

impl Add for &ParamVec {
    type Output = ParamVec;

    fn add(self, rhs: &ParamVec) -> ParamVec {
        debug_assert!(self.same_shape(rhs));
        let values = self.values.iter().zip(&rhs.values).map(|(a, b)| a + b).collect();
        ParamVec {
            spec: Arc::clone(&self.spec),
            values,
        }
    }
}

impl Sub for &ParamVec {
    type Output = ParamVec;

    fn sub(self, rhs: &ParamVec) -> ParamVec {
        debug_assert!(self.same_shape(rhs));
        let values = self.values.iter().zip(&rhs.values).map(|(a, b)| a - b).collect();
        ParamVec {
            spec: Arc::clone(&self.spec),
            values,
        }
    }
}

impl Mul<f64> for &ParamVec {
    type Output = ParamVec;

    fn mul(self, rhs: f64) -> ParamVec {
        self.scaled(rhs)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::{Activation, Loss};
    use proptest::prelude::*;

    fn spec() -> Arc<ModelSpec> {
        Arc::new(ModelSpec::new(vec![2, 2, 1], Activation::Relu, Loss::SoftmaxCrossEntropy).unwrap())
    }

    #[test]
    fn rejects_wrong_length() {
        assert!(ParamVec::from_values(&spec(), vec![0.0; 3]).is_err());
    }

    proptest! {
        #[test]
        fn arithmetic_is_coordinatewise(
            a in prop::collection::vec(-10.0f64..10.0, 9),
            b in prop::collection::vec(-10.0f64..10.0, 9),
            s in -3.0f64..3.0,
        ) {
            let spec = spec();
            let pa = ParamVec::from_values(&spec, a.clone()).unwrap();
            let pb = ParamVec::from_values(&spec, b.clone()).unwrap();
            let sum = &pa + &pb;
            let diff = &pa - &pb;
            let mut ax = pa.clone();
            ax.axpy(s, &pb);
            for i in 0..9 {
                prop_assert_eq!(sum.values()[i], a[i] + b[i]);
                prop_assert_eq!(diff.values()[i], a[i] - b[i]);
                prop_assert_eq!(ax.values()[i], a[i] + s * b[i]);
                prop_assert_eq!((&pa * s).values()[i], a[i] * s);
            }
            prop_assert_eq!(sum.len(), spec.param_count());
        }
    }
}
