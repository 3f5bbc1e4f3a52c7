//! Whole-experiment configuration: federation knobs plus model, data source and partitioning.

use std::path::PathBuf;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::analysis::{mitigation_rounds, Mitigation, MitigationRule, RoundRecord};
use crate::data::{
    build_malicious_dataset, gen_synthetic, load_idx, partition_iid, partition_noniid_shards, split_holdouts, Dataset,
    LabelRule,
};
use crate::engine::{FederatedData, FederationConfig, Simulator};
use crate::error::{Error, Result};
use crate::nn::{Activation, Loss, ModelSpec};
use crate::rng::{derive_rng, Purpose, SERVER};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    #[serde(default)]
    pub hidden: Vec<usize>,
    pub activation: Activation,
    pub loss: Loss,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum DataSource {
    Synthetic {
        classes: usize,
        dim: usize,
        per_class: usize,
        spread: f64,
    },
    Idx {
        images: PathBuf,
        labels: PathBuf,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum Partition {
    Iid,
    Noniid { shards_per_client: usize },
}

fn default_malicious_samples() -> usize {
    1
}
fn default_malicious_fraction() -> f64 {
    0.05
}
fn default_test_fraction() -> f64 {
    0.1
}
fn default_horizon() -> usize {
    10
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub federation: FederationConfig,
    pub model: ModelConfig,
    pub data: DataSource,
    pub partition: Partition,
    /// Size of `D_M`.
    #[serde(default = "default_malicious_samples")]
    pub malicious_samples: usize,
    #[serde(default)]
    pub label_rule: LabelRule,
    #[serde(default = "default_malicious_fraction")]
    pub malicious_fraction: f64,
    #[serde(default = "default_test_fraction")]
    pub test_fraction: f64,
    /// Rounds after an attack within which mitigation is looked for.
    #[serde(default = "default_horizon")]
    pub horizon: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        self.federation.validate()?;
        if self.malicious_samples == 0 {
            return Err(Error::config("malicious_samples", "must be >= 1"));
        }
        if self.horizon == 0 {
            return Err(Error::config("horizon", "must be >= 1"));
        }
        if self.model.hidden.contains(&0) {
            return Err(Error::config("hidden", "layer widths must be >= 1"));
        }
        if let Partition::Noniid { shards_per_client: 0 } = self.partition {
            return Err(Error::config("shards_per_client", "must be >= 1"));
        }
        if let DataSource::Synthetic {
            classes,
            per_class,
            spread,
            ..
        } = self.data
        {
            if classes < 2 {
                return Err(Error::config("classes", "need at least two classes"));
            }
            if per_class == 0 {
                return Err(Error::config("per_class", "must be >= 1"));
            }
            if spread.is_nan() || spread < 0.0 {
                return Err(Error::config("spread", "must be >= 0"));
            }
        }
        Ok(())
    }

    /// The full dataset before holdouts are carved off.
    pub fn load_dataset(&self) -> Result<Dataset> {
        match &self.data {
            DataSource::Synthetic {
                classes,
                dim,
                per_class,
                spread,
            } => {
                let mut rng = derive_rng(self.federation.seed, 0, SERVER, Purpose::Data);
                gen_synthetic(*classes, *dim, *per_class, *spread, &mut rng)
            }
            DataSource::Idx { images, labels } => load_idx(images, labels),
        }
    }

    pub fn model_spec(&self, ds: &Dataset) -> Result<ModelSpec> {
        let mut dims = vec![ds.dim()];
        dims.extend(&self.model.hidden);
        dims.push(ds.num_classes());
        ModelSpec::new(dims, self.model.activation, self.model.loss)
    }

    /// Holdouts, partition and `D_M`, all drawn from the federation seed.
    pub fn federated_data(&self, ds: &Dataset) -> Result<FederatedData> {
        let seed = self.federation.seed;
        let mut split_rng = derive_rng(seed, 1, SERVER, Purpose::Data);
        let h = split_holdouts(ds, self.malicious_fraction, self.test_fraction, &mut split_rng)?;
        let mut part_rng = derive_rng(seed, 0, SERVER, Purpose::Partition);
        let n = self.federation.num_devices;
        let shards = match self.partition {
            Partition::Iid => partition_iid(&h.train, n, &mut part_rng)?,
            Partition::Noniid { shards_per_client } => {
                partition_noniid_shards(&h.train, n, shards_per_client, &mut part_rng)?
            }
        };
        let mut mal_rng = derive_rng(seed, 0, SERVER, Purpose::Malicious);
        let malicious =
            build_malicious_dataset(&h.malicious_pool, self.malicious_samples, self.label_rule, &mut mal_rng)?;
        Ok(FederatedData {
            train: h.train,
            shards,
            malicious,
            test: h.test,
        })
    }

    pub fn build(&self) -> Result<Simulator> {
        self.validate()?;
        let ds = self.load_dataset()?;
        let spec = Arc::new(self.model_spec(&ds)?);
        let data = self.federated_data(&ds)?;
        Simulator::new(self.federation.clone(), spec, data)
    }
}

/// Mitigation outcome of one adversarial round.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct AdversarialOutcome {
    pub round: usize,
    pub mitigation: Mitigation,
}

/// Per-adversarial-round mitigation for a finished run. The rule follows the
/// size of `D_M`: confidence for a single image, accuracy otherwise.
pub fn mitigation_report(records: &[RoundRecord], malicious_samples: usize, horizon: usize) -> Vec<AdversarialOutcome> {
    records
        .iter()
        .filter(|r| r.is_adversarial)
        .map(|adv| AdversarialOutcome {
            round: adv.round,
            mitigation: mitigation_rounds(
                records,
                adv.round,
                MitigationRule::for_round(malicious_samples, adv),
                horizon,
            ),
        })
        .collect()
}

fn uncensored(outcomes: &[AdversarialOutcome]) -> Vec<usize> {
    outcomes.iter().filter_map(|o| o.mitigation.as_rounds()).collect()
}

/// Mean of [`Mitigation::as_rounds`] over uncensored outcomes; `None` if there are none.
pub fn average_mitigation(outcomes: &[AdversarialOutcome]) -> Option<f64> {
    let v = uncensored(outcomes);
    if v.is_empty() {
        return None;
    }
    Some(v.iter().sum::<usize>() as f64 / v.len() as f64)
}

/// Median of [`Mitigation::as_rounds`] over uncensored outcomes (mean of the middle two for even counts).
pub fn median_mitigation(outcomes: &[AdversarialOutcome]) -> Option<f64> {
    let mut v = uncensored(outcomes);
    if v.is_empty() {
        return None;
    }
    v.sort_unstable();
    let n = v.len();
    Some(if n % 2 == 1 {
        v[n / 2] as f64
    } else {
        (v[n / 2 - 1] + v[n / 2]) as f64 / 2.0
    })
}
