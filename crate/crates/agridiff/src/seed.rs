//! Deterministic seed derivation for Monte Carlo streams.
//!
//! Every simulation run owns an independent RNG stream whose seed is a pure
//! function of the ensemble base seed and the run index, so results are
//! reproducible and invariant to execution order. Baseline and policy
//! ensembles sharing a base seed therefore share run streams, which is what
//! makes common-random-number pairing across scenarios work.

/// SplitMix64 finalizer; a well-mixed 64-bit permutation.
pub fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// 64-bit FNV-1a over a byte string; used to fold labels into seeds.
pub fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xCBF2_9CE4_8422_2325;
    for &b in bytes {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0000_0100_0000_01B3);
    }
    h
}

/// Stream seed for Monte Carlo run `run_index` under `base_seed`.
///
/// Deliberately independent of the scenario, so runs with the same index are
/// paired across scenarios (common random numbers).
pub fn derive_run_seed(base_seed: u64, run_index: u64) -> u64 {
    splitmix64(base_seed ^ splitmix64(run_index))
}

/// Stream seed for an auxiliary labelled family (calibration candidates,
/// quartile sub-networks, anchor generation, ...).
pub fn derive_stream_seed(base_seed: u64, label: &str, index: u64) -> u64 {
    splitmix64(base_seed ^ fnv1a64(label.as_bytes()) ^ splitmix64(index))
}
