//! Who trains when, and on which batches.

use rand::seq::{index, SliceRandom};
use rand::Rng;

use crate::data::ClientShard;
use crate::engine::FederationConfig;
use crate::error::{Error, Result};
use crate::rng::{derive_rng, Purpose, RngStream, SERVER};

/// Whether round `t` is adversarial: an independent Bernoulli(`adversarial_prob`) draw per round.
pub fn is_adversarial_round(cfg: &FederationConfig, t: usize) -> bool {
    if t == 0 || t < cfg.first_adversarial_round || cfg.attacker_ids.is_empty() || cfg.adversarial_prob <= 0.0 {
        return false;
    }
    let mut rng = derive_rng(cfg.seed, t, SERVER, Purpose::Schedule);
    rng.random_bool(cfg.adversarial_prob)
}

/// Devices taking part in round `t`, in ascending id order. Benign rounds draw
/// only benign devices; adversarial rounds include `adversaries_per_round`
/// attackers and fill the rest with benign devices.
pub fn sample_devices(cfg: &FederationConfig, t: usize, adversarial: bool, rng: &mut RngStream) -> Result<Vec<usize>> {
    let k = cfg.devices_per_round;
    let benign: Vec<usize> = (0..cfg.num_devices).filter(|&i| !cfg.is_attacker(i)).collect();
    let mut picked = Vec::with_capacity(k);
    let mut n_attackers = 0;
    if adversarial {
        n_attackers = cfg.adversaries_per_round.min(cfg.attacker_ids.len());
        let mut attackers = cfg.attacker_ids.clone();
        attackers.sort_unstable();
        if n_attackers < attackers.len() {
            picked.extend(
                index::sample(rng, attackers.len(), n_attackers)
                    .into_iter()
                    .map(|j| attackers[j]),
            );
        } else {
            picked.extend(attackers);
        }
    }
    let need = k - n_attackers;
    if need > benign.len() {
        return Err(Error::config(
            "devices_per_round",
            format!("round {t} needs {need} benign devices but only {} exist", benign.len()),
        ));
    }
    picked.extend(index::sample(rng, benign.len(), need).into_iter().map(|j| benign[j]));
    picked.sort_unstable();
    Ok(picked)
}

/// `⌈E·n_k / B⌉`
pub fn local_iterations(shard_len: usize, epochs: usize, batch_size: usize) -> usize {
    (epochs * shard_len).div_ceil(batch_size)
}

/// Mini-batches for one local session: `epochs` independent shuffles of the
/// shard laid end to end and cut every `batch_size` rows.
pub fn batch_plan(shard: &ClientShard, epochs: usize, batch_size: usize, rng: &mut RngStream) -> Vec<Vec<usize>> {
    let mut order = Vec::with_capacity(epochs * shard.len());
    for _ in 0..epochs {
        let mut perm = shard.indices.clone();
        perm.shuffle(rng);
        order.extend(perm);
    }
    order.chunks(batch_size).map(<[usize]>::to_vec).collect()
}
