use rand::seq::SliceRandom;

use crate::data::{ClientShard, Dataset};
use crate::error::{Error, Result};
use crate::rng::RngStream;

fn shards_with_weights(groups: Vec<Vec<usize>>, total: usize) -> Vec<ClientShard> {
    groups
        .into_iter()
        .enumerate()
        .map(|(client_id, indices)| ClientShard {
            client_id,
            weight: indices.len() as f64 / total as f64,
            indices,
        })
        .collect()
}

/// Random permutation cut into `num_clients` shards whose sizes differ by at most one.
pub fn partition_iid(ds: &Dataset, num_clients: usize, rng: &mut RngStream) -> Result<Vec<ClientShard>> {
    let n = ds.len();
    if num_clients == 0 || num_clients > n {
        return Err(Error::config(
            "num_devices",
            format!("cannot split {n} rows over {num_clients} devices"),
        ));
    }
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(rng);
    let (base, extra) = (n / num_clients, n % num_clients);
    let mut groups = Vec::with_capacity(num_clients);
    let mut start = 0;
    for k in 0..num_clients {
        let size = base + usize::from(k < extra);
        groups.push(perm[start..start + size].to_vec());
        start += size;
    }
    Ok(shards_with_weights(groups, n))
}

/// Label-sorted shards: sort by label, cut into `num_clients · shards_per_client`
/// contiguous pieces (the last takes the remainder) and hand each device
/// `shards_per_client` of them at random.
pub fn partition_noniid_shards(
    ds: &Dataset,
    num_clients: usize,
    shards_per_client: usize,
    rng: &mut RngStream,
) -> Result<Vec<ClientShard>> {
    let n = ds.len();
    if num_clients == 0 || shards_per_client == 0 {
        return Err(Error::config(
            "shards_per_client",
            "devices and shards per device must be >= 1",
        ));
    }
    let total = num_clients * shards_per_client;
    if total > n {
        return Err(Error::config(
            "shards_per_client",
            format!("{total} shards requested but only {n} rows"),
        ));
    }
    let shards = sorted_shards(ds, total);
    let mut order: Vec<usize> = (0..total).collect();
    order.shuffle(rng);
    let groups = order
        .chunks(shards_per_client)
        .map(|ids| ids.iter().flat_map(|&s| shards[s].iter().copied()).collect())
        .collect();
    Ok(shards_with_weights(groups, n))
}

/// Row indices sorted by (label, index) and cut into `count` contiguous shards.
pub fn sorted_shards(ds: &Dataset, count: usize) -> Vec<Vec<usize>> {
    let mut idx: Vec<usize> = (0..ds.len()).collect();
    idx.sort_by_key(|&i| (ds.label(i), i));
    let size = ds.len() / count;
    (0..count)
        .map(|s| {
            let end = if s + 1 == count { ds.len() } else { (s + 1) * size };
            idx[s * size..end].to_vec()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::gen_synthetic;
    use crate::rng::{derive_rng, Purpose};
    use proptest::prelude::*;
    use std::collections::BTreeSet;

    fn blobs(classes: usize, per_class: usize) -> Dataset {
        let mut rng = derive_rng(5, 0, 0, Purpose::Data);
        gen_synthetic(classes, 3, per_class, 0.1, &mut rng).unwrap()
    }

    fn assert_exact_cover(shards: &[ClientShard], n: usize) {
        let mut all: Vec<usize> = shards.iter().flat_map(|s| s.indices.iter().copied()).collect();
        all.sort_unstable();
        assert_eq!(all, (0..n).collect::<Vec<_>>());
        let w: f64 = shards.iter().map(|s| s.weight).sum();
        assert!((w - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn iid_even_split() {
        let ds = blobs(10, 10);
        let mut rng = derive_rng(1, 0, 0, Purpose::Partition);
        let shards = partition_iid(&ds, 10, &mut rng).unwrap();
        assert!(shards.iter().all(|s| s.len() == 10 && s.weight == 0.1));
        assert_exact_cover(&shards, 100);
        let mut again = derive_rng(1, 0, 0, Purpose::Partition);
        assert_eq!(partition_iid(&ds, 10, &mut again).unwrap(), shards);
        assert!(partition_iid(&ds, 101, &mut again).is_err());
    }

    #[test]
    fn noniid_label_concentration() {
        let ds = blobs(10, 20);
        let mut rng = derive_rng(1, 0, 0, Purpose::Partition);
        let shards = partition_noniid_shards(&ds, 100, 2, &mut rng).unwrap();
        assert_eq!(shards.len(), 100);
        assert_exact_cover(&shards, 200);
        for s in &shards {
            let labels: BTreeSet<usize> = s.indices.iter().map(|&i| ds.label(i)).collect();
            assert!(labels.len() <= 2, "client {} holds {labels:?}", s.client_id);
        }
        assert!(partition_noniid_shards(&ds, 101, 2, &mut rng).is_err());
    }

    #[test]
    fn shards_are_sorted_and_counted() {
        let ds = blobs(4, 13);
        let pieces = sorted_shards(&ds, 6);
        assert_eq!(pieces.len(), 6);
        let labels: Vec<usize> = pieces.iter().flatten().map(|&i| ds.label(i)).collect();
        assert!(labels.windows(2).all(|w| w[0] <= w[1]));
        assert_eq!(pieces.last().unwrap().len(), 52 - 5 * 8);
    }

    proptest! {
        #[test]
        fn partitions_cover_exactly(per_class in 1usize..20, clients in 1usize..12, spc in 1usize..4, seed in any::<u64>()) {
            let ds = blobs(3, per_class);
            let mut rng = derive_rng(seed, 0, 0, Purpose::Partition);
            if clients <= ds.len() {
                let shards = partition_iid(&ds, clients, &mut rng).unwrap();
                let sizes: Vec<usize> = shards.iter().map(|s| s.len()).collect();
                prop_assert!(sizes.iter().max().unwrap() - sizes.iter().min().unwrap() <= 1);
                assert_exact_cover(&shards, ds.len());
            }
            if clients * spc <= ds.len() {
                let shards = partition_noniid_shards(&ds, clients, spc, &mut rng).unwrap();
                assert_exact_cover(&shards, ds.len());
            }
        }
    }
}
