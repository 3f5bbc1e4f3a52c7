use std::path::Path;

use serde::Serialize;

use crate::analysis::{PhiReport, RoundRecord};
use crate::error::{Error, Result};
use crate::scenario::{AdversarialOutcome, ExperimentConfig};

pub const ROUNDS_HEADER: [&str; 7] = [
    "round",
    "is_adversarial",
    "benign_acc",
    "mis_conf",
    "mis_acc",
    "delta_norm",
    "defense",
];
pub const AEP_HEADER: [&str; 3] = ["round", "delta_norm", "estimate_rel_error"];
pub const PHI_HEADER: [&str; 2] = ["adv_round", "mean_abs_phi"];
pub const TRADEOFF_HEADER: [&str; 3] = ["param_value", "benign_acc", "avg_mitigation_rounds"];

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn write_rows<I>(path: &Path, header: &[&str], rows: I) -> Result<()>
where
    I: IntoIterator<Item = Vec<String>>,
{
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(header)?;
    for row in rows {
        w.write_record(&row)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn write_rounds_csv(path: &Path, records: &[RoundRecord]) -> Result<()> {
    write_rows(
        path,
        &ROUNDS_HEADER,
        records.iter().map(|r| {
            vec![
                r.round.to_string(),
                r.is_adversarial.to_string(),
                r.benign_accuracy.to_string(),
                r.misclassification_confidence.to_string(),
                r.misclassification_accuracy.to_string(),
                opt(r.delta_norm),
                r.defense_tag.clone(),
            ]
        }),
    )
}

/// `(round, ‖δ_t‖, relative estimate error)`
pub fn write_aep_csv(path: &Path, rows: &[(usize, f64, Option<f64>)]) -> Result<()> {
    write_rows(
        path,
        &AEP_HEADER,
        rows.iter().map(|&(t, n, e)| vec![t.to_string(), n.to_string(), opt(e)]),
    )
}

pub fn write_phi_csv(path: &Path, rows: &[PhiReport]) -> Result<()> {
    write_rows(
        path,
        &PHI_HEADER,
        rows.iter()
            .map(|p| vec![p.adversarial_round.to_string(), p.mean_abs_phi.to_string()]),
    )
}

/// `(value, final benign accuracy, average mitigation rounds)`
pub fn write_tradeoff_csv(path: &Path, rows: &[(f64, f64, Option<f64>)]) -> Result<()> {
    write_rows(
        path,
        &TRADEOFF_HEADER,
        rows.iter().map(|&(v, a, m)| vec![v.to_string(), a.to_string(), opt(m)]),
    )
}

#[derive(Debug, Serialize)]
pub struct RunSummary<'a> {
    pub final_benign_acc: f64,
    pub mitigation_rounds: &'a [AdversarialOutcome],
    pub config: &'a ExperimentConfig,
    pub seed: u64,
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}
