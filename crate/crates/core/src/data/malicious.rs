use rand::seq::index;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::data::{Dataset, MaliciousDataset};
use crate::error::{Error, Result};
use crate::rng::RngStream;

/// How attackers choose the label they want each malicious sample to receive.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LabelRule {
    /// Uniform over the classes other than the true one.
    #[default]
    UniformWrong,
    /// Always this class; samples already of that class are never picked.
    Fixed(usize),
}

/// Draw `m` rows of `pool` without replacement and relabel them adversarially.
pub fn build_malicious_dataset(
    pool: &Dataset,
    m: usize,
    rule: LabelRule,
    rng: &mut RngStream,
) -> Result<MaliciousDataset> {
    if m == 0 {
        return Err(Error::config("malicious_samples", "must be >= 1"));
    }
    let classes = pool.num_classes();
    if classes < 2 {
        return Err(Error::config("num_classes", "need two classes for a wrong label"));
    }
    let candidates: Vec<usize> = match rule {
        LabelRule::UniformWrong => (0..pool.len()).collect(),
        LabelRule::Fixed(t) => {
            if t >= classes {
                return Err(Error::config("target_label", format!("{t} is not a class")));
            }
            (0..pool.len()).filter(|&i| pool.label(i) != t).collect()
        }
    };
    if m > candidates.len() {
        return Err(Error::config(
            "malicious_samples",
            format!(
                "{m} requested but the holdout pool has {} eligible rows",
                candidates.len()
            ),
        ));
    }
    let picked: Vec<usize> = index::sample(rng, candidates.len(), m)
        .into_iter()
        .map(|j| candidates[j])
        .collect();
    let mut inputs = Vec::with_capacity(m * pool.dim());
    let mut adv = Vec::with_capacity(m);
    let mut truth = Vec::with_capacity(m);
    for &i in &picked {
        let t = pool.label(i);
        inputs.extend_from_slice(pool.row(i));
        truth.push(t);
        adv.push(match rule {
            LabelRule::Fixed(target) => target,
            LabelRule::UniformWrong => {
                let r = rng.random_range(0..classes - 1);
                if r >= t {
                    r + 1
                } else {
                    r
                }
            }
        });
    }
    MaliciousDataset::new(inputs, pool.dim(), adv, truth)
}
