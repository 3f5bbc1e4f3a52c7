//! Datasets, IDX files, device partitions and the attackers' malicious set.

mod dataset;
pub mod idx;
mod malicious;
mod partition;
mod synthetic;

use rand::seq::SliceRandom;

pub use dataset::{ClientShard, Dataset, MaliciousDataset};
pub use idx::{load_idx, write_idx, IdxFormat};
pub use malicious::{build_malicious_dataset, LabelRule};
pub use partition::{partition_iid, partition_noniid_shards, sorted_shards};
pub use synthetic::gen_synthetic;

use crate::error::{Error, Result};
use crate::rng::RngStream;

/// A dataset split into the training part and the two holdouts carved off before partitioning.
#[derive(Debug, Clone)]
pub struct Holdouts {
    pub train: Dataset,
    pub malicious_pool: Dataset,
    pub test: Dataset,
}

/// Randomly reserve `malicious_fraction` and `test_fraction` of the rows.
/// Each holdout gets at least one row when its fraction is positive.
pub fn split_holdouts(
    ds: &Dataset,
    malicious_fraction: f64,
    test_fraction: f64,
    rng: &mut RngStream,
) -> Result<Holdouts> {
    for (name, f) in [
        ("malicious_fraction", malicious_fraction),
        ("test_fraction", test_fraction),
    ] {
        if !(0.0..1.0).contains(&f) || f <= 0.0 {
            return Err(Error::config(name, format!("must lie in (0, 1), got {f}")));
        }
    }
    let n = ds.len();
    let n_mal = ((n as f64 * malicious_fraction).round() as usize).max(1);
    let n_test = ((n as f64 * test_fraction).round() as usize).max(1);
    if n_mal + n_test >= n {
        return Err(Error::config("test_fraction", "holdouts leave no training rows"));
    }
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(rng);
    let mut mal = perm[..n_mal].to_vec();
    let mut test = perm[n_mal..n_mal + n_test].to_vec();
    let mut train = perm[n_mal + n_test..].to_vec();
    mal.sort_unstable();
    test.sort_unstable();
    train.sort_unstable();
    Ok(Holdouts {
        train: ds.subset(&train)?,
        malicious_pool: ds.subset(&mal)?,
        test: ds.subset(&test)?,
    })
}
