use crate::error::{Error, Result};
use crate::nn::{Loss, ModelSpec};

/// Supervision for a batch.
#[derive(Debug, Clone, PartialEq)]
pub enum Targets {
    /// Class indices. Under the squared-error loss they are read as one-hot rows.
    Classes(Vec<usize>),
    /// Real targets, row-major `rows × output_dim`.
    Values(Vec<f64>),
}

/// A mini-batch: row-major inputs plus targets.
#[derive(Debug, Clone, PartialEq)]
pub struct Batch {
    inputs: Vec<f64>,
    rows: usize,
    cols: usize,
    targets: Targets,
}

impl Batch {
    pub fn new(inputs: Vec<f64>, cols: usize, targets: Targets) -> Result<Self> {
        if cols == 0 || inputs.is_empty() || !inputs.len().is_multiple_of(cols) {
            return Err(Error::Dimension(format!(
                "{} input values cannot form rows of width {cols}",
                inputs.len()
            )));
        }
        let rows = inputs.len() / cols;
        match &targets {
            Targets::Classes(c) if c.len() != rows => {
                return Err(Error::Dimension(format!("{rows} input rows but {} labels", c.len())))
            }
            Targets::Values(v) if v.len() % rows != 0 => {
                return Err(Error::Dimension(format!(
                    "{} target values do not split over {rows} rows",
                    v.len()
                )))
            }
            _ => {}
        }
        Ok(Self {
            inputs,
            rows,
            cols,
            targets,
        })
    }

    pub fn classification(inputs: Vec<f64>, cols: usize, labels: Vec<usize>) -> Result<Self> {
        Self::new(inputs, cols, Targets::Classes(labels))
    }

    pub fn regression(inputs: Vec<f64>, cols: usize, targets: Vec<f64>) -> Result<Self> {
        Self::new(inputs, cols, Targets::Values(targets))
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn inputs(&self) -> &[f64] {
        &self.inputs
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.inputs[i * self.cols..(i + 1) * self.cols]
    }

    pub fn targets(&self) -> &Targets {
        &self.targets
    }

    /// Check that this batch can be fed to `spec`.
    pub fn check_compatible(&self, spec: &ModelSpec) -> Result<()> {
        if self.cols != spec.input_dim() {
            return Err(Error::Dimension(format!(
                "batch width {} but model input dim {}",
                self.cols,
                spec.input_dim()
            )));
        }
        let out = spec.output_dim();
        match (&self.targets, spec.loss()) {
            (Targets::Classes(labels), _) => {
                if let Some(bad) = labels.iter().find(|&&l| l >= out) {
                    return Err(Error::Dimension(format!("label {bad} out of range for {out} outputs")));
                }
            }
            (Targets::Values(_), Loss::SoftmaxCrossEntropy) => {
                return Err(Error::Unsupported(
                    "real-valued targets need the squared-error loss".into(),
                ))
            }
            (Targets::Values(v), Loss::MeanSquaredError) => {
                if v.len() != self.rows * out {
                    return Err(Error::Dimension(format!(
                        "{} targets for {} rows × {out} outputs",
                        v.len(),
                        self.rows
                    )));
                }
            }
        }
        Ok(())
    }
}
