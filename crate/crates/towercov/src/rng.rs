//! Seed derivation for order-independent Monte-Carlo runs.
//!
//! Every `(distance, trial)` work item gets its own ChaCha stream derived
//! from the master seed and the item's *structural identity* — never from
//! scheduling order. Workers can pick up items in any order, in any number
//! of threads, and each item still consumes exactly the same random
//! sequence, so results are bit-identical for any `--jobs` value.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Trials per distance are capped by the stream layout: the low 24 bits of
/// the ChaCha stream id hold the trial index, the high bits the distance key.
pub const MAX_TRIALS: u64 = 1 << 24;

/// RNG for one Monte-Carlo trial at one evaluation distance.
///
/// `distance_key` is the distance quantized to 0.1 m (see
/// [`distance_key`]); combined with the trial index it forms a unique
/// stream id, so no two work items of a run share a random sequence as long
/// as distances stay below ~1677 km and trials below 2^24.
pub fn trial_rng(master_seed: u64, distance_key: u64, trial: u64) -> ChaCha8Rng {
    debug_assert!(trial < MAX_TRIALS);
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream((distance_key << 24) | (trial & (MAX_TRIALS - 1)));
    rng
}

/// Canonical stream key for a distance in km: the distance rounded to the
/// nearest 0.1 m. Evaluating the same physical distance always lands on the
/// same streams no matter how the caller arrived at the value.
pub fn distance_key(distance_km: f64) -> u64 {
    (distance_km * 1e4).round() as u64
}

/// Stateless 64-bit mix (splitmix64 finalizer) for deriving per-row seeds
/// from a master seed and a stable row identity.
pub fn mix64(seed: u64, salt: u64) -> u64 {
    let mut z = seed ^ salt.wrapping_mul(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::RngCore;

    #[test]
    fn same_identity_same_sequence() {
        let mut a = trial_rng(42, distance_key(2.5), 7);
        let mut b = trial_rng(42, distance_key(2.5), 7);
        for _ in 0..16 {
            assert_eq!(a.next_u64(), b.next_u64());
        }
    }

    #[test]
    fn distinct_identities_distinct_sequences() {
        let mut base = trial_rng(42, distance_key(2.5), 7);
        let mut other_trial = trial_rng(42, distance_key(2.5), 8);
        let mut other_dist = trial_rng(42, distance_key(2.6), 7);
        let mut other_seed = trial_rng(43, distance_key(2.5), 7);
        let x = base.next_u64();
        assert_ne!(x, other_trial.next_u64());
        assert_ne!(x, other_dist.next_u64());
        assert_ne!(x, other_seed.next_u64());
    }

    #[test]
    fn distance_keys_separate_grid_points() {
        // 0.1 km grid steps are 1000 key units apart; adjacent keys collide
        // only below the 0.1 mm quantum, far under any grid in use.
        assert_eq!(distance_key(0.1), 1_000);
        assert_eq!(distance_key(2.5), 25_000);
        assert_ne!(distance_key(2.5), distance_key(2.5001));
    }

    #[test]
    fn mix64_spreads_small_salts() {
        let a = mix64(1, 0);
        let b = mix64(1, 1);
        let c = mix64(2, 0);
        assert_ne!(a, b);
        assert_ne!(a, c);
        // splitmix64 reference value: mixing must be stable across releases
        // because artifact reproducibility depends on it.
        assert_eq!(mix64(0, 0), 0);
    }
}
