use serde::{Serialize, Serializer};

use crate::data::{Dataset, MaliciousDataset};
use crate::error::Result;
use crate::nn::{argmax_rows, outputs, predict, softmax_rows, Batch, ParamVec};

/// Class probabilities and argmax labels. Squared-error models are read
/// through the softmax of their raw outputs.
fn class_scores(params: &ParamVec, batch: &Batch) -> Result<(Vec<f64>, Vec<usize>)> {
    if params.spec().is_classifier() {
        return predict(params, batch);
    }
    let classes = params.spec().output_dim();
    let raw = outputs(params, batch)?;
    Ok((softmax_rows(&raw, classes), argmax_rows(&raw, classes)))
}

/// Fraction of `ds` classified correctly.
pub fn accuracy(params: &ParamVec, ds: &Dataset) -> Result<f64> {
    let (_, labels) = class_scores(params, &ds.full_batch()?)?;
    let hits = labels.iter().zip(ds.labels()).filter(|(a, b)| a == b).count();
    Ok(hits as f64 / ds.len() as f64)
}

/// Mean probability of the adversarial label over `D_M`, and the fraction of
/// `D_M` predicted as its adversarial label.
pub fn attack_metrics(params: &ParamVec, dm: &MaliciousDataset) -> Result<(f64, f64)> {
    let (probs, labels) = class_scores(params, &dm.full_batch()?)?;
    let classes = params.spec().output_dim();
    let m = dm.len() as f64;
    let mut conf = 0.0;
    let mut hits = 0;
    for (r, &target) in dm.adversarial_labels().iter().enumerate() {
        conf += probs[r * classes + target];
        hits += usize::from(labels[r] == target);
    }
    Ok(((conf / m).clamp(0.0, 1.0), hits as f64 / m))
}

/// One row of the per-round log.
#[derive(Debug, Clone, PartialEq)]
pub struct RoundRecord {
    pub round: usize,
    pub is_adversarial: bool,
    pub benign_accuracy: f64,
    pub misclassification_confidence: f64,
    pub misclassification_accuracy: f64,
    pub defense_tag: String,
    pub delta_norm: Option<f64>,
}

/// When an attack counts as worn off.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MitigationRule {
    /// Single-image `D_M`: confidence below 0.5.
    Confidence,
    /// Multi-image `D_M`: misclassification accuracy below the benign error rate.
    Accuracy { benign_error_rate: f64 },
}

impl MitigationRule {
    /// Rule for a `D_M` of `m` rows, with the error rate taken from the adversarial round's record.
    pub fn for_round(m: usize, adv_record: &RoundRecord) -> Self {
        if m <= 1 {
            MitigationRule::Confidence
        } else {
            MitigationRule::Accuracy {
                benign_error_rate: 1.0 - adv_record.benign_accuracy,
            }
        }
    }

    fn satisfied(&self, r: &RoundRecord) -> bool {
        match *self {
            MitigationRule::Confidence => r.misclassification_confidence < 0.5,
            MitigationRule::Accuracy { benign_error_rate } => r.misclassification_accuracy < benign_error_rate,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mitigation {
    /// Rounds after the attack until the rule first held.
    Mitigated(usize),
    /// Not within the full window of this many rounds.
    NotMitigated(usize),
    /// Not within the rounds that were logged, which end before the window does.
    Censored(usize),
}

impl Mitigation {
    /// Numeric value for averaging: a miss within horizon `h` counts as `h + 1`.
    /// Censored outcomes carry no value.
    pub fn as_rounds(&self) -> Option<usize> {
        match *self {
            Mitigation::Mitigated(r) => Some(r),
            Mitigation::NotMitigated(h) => Some(h + 1),
            Mitigation::Censored(_) => None,
        }
    }

    pub fn is_mitigated(&self) -> bool {
        matches!(self, Mitigation::Mitigated(_))
    }
}

impl Serialize for Mitigation {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match *self {
            Mitigation::Mitigated(r) => s.serialize_u64(r as u64),
            Mitigation::NotMitigated(h) => s.serialize_str(&format!("not_mitigated({h})")),
            Mitigation::Censored(n) => s.serialize_str(&format!("censored({n})")),
        }
    }
}

/// Smallest `r ≥ 1` with the rule holding at round `adv_round + r`, looking at
/// most `horizon` rounds ahead. If the log ends first the outcome is censored.
pub fn mitigation_rounds(
    records: &[RoundRecord],
    adv_round: usize,
    rule: MitigationRule,
    horizon: usize,
) -> Mitigation {
    let mut seen = 0;
    for r in 1..=horizon {
        match records.iter().find(|rec| rec.round == adv_round + r) {
            Some(rec) => {
                seen = r;
                if rule.satisfied(rec) {
                    return Mitigation::Mitigated(r);
                }
            }
            None => break,
        }
    }
    if seen == horizon {
        Mitigation::NotMitigated(horizon)
    } else {
        Mitigation::Censored(seen)
    }
}
