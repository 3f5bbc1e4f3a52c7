use crate::error::{Error, Result};
use crate::nn::{Batch, Targets};

/// Labelled inputs, row-major `n × dim`.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    inputs: Vec<f64>,
    dim: usize,
    labels: Vec<usize>,
    num_classes: usize,
}

impl Dataset {
    pub fn new(inputs: Vec<f64>, dim: usize, labels: Vec<usize>, num_classes: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::config("dim", "input dimension must be >= 1"));
        }
        if labels.is_empty() {
            return Err(Error::config("dataset", "dataset must hold at least one row"));
        }
        if inputs.len() != labels.len() * dim {
            return Err(Error::Dimension(format!(
                "{} input values for {} rows of width {dim}",
                inputs.len(),
                labels.len()
            )));
        }
        if num_classes == 0 {
            return Err(Error::config("num_classes", "must be >= 1"));
        }
        if let Some(&bad) = labels.iter().find(|&&l| l >= num_classes) {
            return Err(Error::config(
                "labels",
                format!("label {bad} outside [0, {num_classes})"),
            ));
        }
        if inputs.iter().any(|x| !x.is_finite()) {
            return Err(Error::config("inputs", "non-finite input value"));
        }
        Ok(Self {
            inputs,
            dim,
            labels,
            num_classes,
        })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn num_classes(&self) -> usize {
        self.num_classes
    }

    pub fn inputs(&self) -> &[f64] {
        &self.inputs
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.inputs[i * self.dim..(i + 1) * self.dim]
    }

    pub fn label(&self, i: usize) -> usize {
        self.labels[i]
    }

    /// Copy the given rows out as a new dataset.
    pub fn subset(&self, indices: &[usize]) -> Result<Dataset> {
        let mut inputs = Vec::with_capacity(indices.len() * self.dim);
        for &i in indices {
            inputs.extend_from_slice(self.row(i));
        }
        let labels = indices.iter().map(|&i| self.labels[i]).collect();
        Dataset::new(inputs, self.dim, labels, self.num_classes)
    }

    /// Gather rows into a classification batch.
    pub fn batch(&self, indices: &[usize]) -> Result<Batch> {
        let mut inputs = Vec::with_capacity(indices.len() * self.dim);
        for &i in indices {
            inputs.extend_from_slice(self.row(i));
        }
        let labels = indices.iter().map(|&i| self.labels[i]).collect();
        Batch::new(inputs, self.dim, Targets::Classes(labels))
    }

    pub fn full_batch(&self) -> Result<Batch> {
        Batch::new(self.inputs.clone(), self.dim, Targets::Classes(self.labels.clone()))
    }
}

/// One device's data: indices into the shared training set plus its weight `p^k`.
#[derive(Debug, Clone, PartialEq)]
pub struct ClientShard {
    pub client_id: usize,
    pub indices: Vec<usize>,
    pub weight: f64,
}

impl ClientShard {
    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }
}

/// Samples shared by all attackers, carrying the labels they want the global model to output.
#[derive(Debug, Clone, PartialEq)]
pub struct MaliciousDataset {
    inputs: Vec<f64>,
    dim: usize,
    adversarial_labels: Vec<usize>,
    true_labels: Vec<usize>,
}

impl MaliciousDataset {
    pub fn new(inputs: Vec<f64>, dim: usize, adversarial_labels: Vec<usize>, true_labels: Vec<usize>) -> Result<Self> {
        if adversarial_labels.is_empty() {
            return Err(Error::config(
                "malicious_samples",
                "malicious dataset must be non-empty",
            ));
        }
        if adversarial_labels.len() != true_labels.len() || inputs.len() != dim * true_labels.len() {
            return Err(Error::Dimension("malicious dataset fields disagree in length".into()));
        }
        if adversarial_labels.iter().zip(&true_labels).any(|(a, t)| a == t) {
            return Err(Error::config(
                "malicious_samples",
                "an adversarial label equals the true label",
            ));
        }
        Ok(Self {
            inputs,
            dim,
            adversarial_labels,
            true_labels,
        })
    }

    pub fn len(&self) -> usize {
        self.adversarial_labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.adversarial_labels.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn inputs(&self) -> &[f64] {
        &self.inputs
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.inputs[i * self.dim..(i + 1) * self.dim]
    }

    pub fn adversarial_labels(&self) -> &[usize] {
        &self.adversarial_labels
    }

    pub fn true_labels(&self) -> &[usize] {
        &self.true_labels
    }

    /// Batch of the given rows, targeting the adversarial labels.
    pub fn batch(&self, indices: &[usize]) -> Result<Batch> {
        let mut inputs = Vec::with_capacity(indices.len() * self.dim);
        for &i in indices {
            inputs.extend_from_slice(self.row(i));
        }
        let labels = indices.iter().map(|&i| self.adversarial_labels[i]).collect();
        Batch::new(inputs, self.dim, Targets::Classes(labels))
    }

    pub fn full_batch(&self) -> Result<Batch> {
        Batch::new(
            self.inputs.clone(),
            self.dim,
            Targets::Classes(self.adversarial_labels.clone()),
        )
    }
}
